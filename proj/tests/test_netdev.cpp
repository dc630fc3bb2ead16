#include "doctest.h"
#include "isokern/errors.hpp"
#include "isokern/netdev.hpp"

using namespace isokern;

namespace {

struct Fixture {
    Partition part{4, {CoreId{2}, CoreId{3}}};
    CostModel costs;
    Ledger ledger{4};
    NicManager mgr{part, costs, ledger};
};

}  // namespace

TEST_CASE("baseline teardown flushes every core, pending or not") {
    Fixture f;
    Nic nic = f.mgr.install_nic();
    f.mgr.enqueue_packet(nic, CoreId{1}, 5);
    f.mgr.enqueue_packet(nic, CoreId{3}, 2);

    UninstallResult res = f.mgr.uninstall(nic, CoreId{0}, FlushPolicy::Baseline, SimTime{100});
    CHECK(res.flushed == std::vector<CoreId>{CoreId{0}, CoreId{1}, CoreId{2}, CoreId{3}});
    CHECK(res.packets_flushed == 7);
    CHECK(res.warnings == 0);
    CHECK_FALSE(nic.installed);
    for (std::uint64_t b : nic.backlog) CHECK(b == 0);

    // Three remote victims, one IPI + one kernel task each; the caller's own
    // core flushes locally for free.
    CHECK(f.ledger.count(InterferenceKind::IpiHandle) == 3);
    CHECK(f.ledger.count(InterferenceKind::KernelTaskExec) == 3);
    CHECK(f.ledger.cross_partition_count(f.part, InterferenceKind::IpiHandle) == 2);
    CHECK(f.ledger.count(InterferenceKind::CrossFlushWarning) == 0);
}

TEST_CASE("on-demand teardown skips idle cores") {
    Fixture f;
    Nic nic = f.mgr.install_nic();
    f.mgr.enqueue_packet(nic, CoreId{1}, 4);

    UninstallResult res = f.mgr.uninstall(nic, CoreId{0}, FlushPolicy::OnDemand, SimTime{100});
    CHECK(res.flushed == std::vector<CoreId>{CoreId{1}});
    CHECK(res.packets_flushed == 4);
    CHECK(f.ledger.count(InterferenceKind::IpiHandle) == 1);
    CHECK(f.ledger.cross_partition_count(f.part) == 0);
}

TEST_CASE("on-demand local backlog needs no interrupt") {
    Fixture f;
    Nic nic = f.mgr.install_nic();
    f.mgr.enqueue_packet(nic, CoreId{0}, 9);
    UninstallResult res = f.mgr.uninstall(nic, CoreId{0}, FlushPolicy::OnDemand, SimTime{100});
    CHECK(res.flushed == std::vector<CoreId>{CoreId{0}});
    CHECK(res.packets_flushed == 9);
    CHECK(f.ledger.total_count() == 0);
}

TEST_CASE("stranded isolated backlog becomes a warning, not a flush") {
    Fixture f;
    Nic nic = f.mgr.install_nic();
    f.mgr.enqueue_packet(nic, CoreId{2}, 3);
    f.mgr.enqueue_packet(nic, CoreId{1}, 1);

    UninstallResult res = f.mgr.uninstall(nic, CoreId{0}, FlushPolicy::OnDemand, SimTime{100});
    CHECK(res.flushed == std::vector<CoreId>{CoreId{1}});
    CHECK(res.packets_flushed == 1);
    CHECK(res.warnings == 1);
    CHECK(nic.backlog[2] == 3);  // left in place
    REQUIRE(f.ledger.count(InterferenceKind::CrossFlushWarning) == 1);
    for (const InterferenceEvent& ev : f.ledger.log()) {
        if (ev.kind != InterferenceKind::CrossFlushWarning) continue;
        CHECK(ev.victim == CoreId{2});
        CHECK(ev.origin == CoreId{0});
        CHECK(ev.duration == SimTime{0});  // advisory only, no time stolen
    }
    CHECK(f.ledger.stolen_time(CoreId{2}) == SimTime{0});
}

TEST_CASE("isolated caller may flush its own partition on demand") {
    Fixture f;
    Nic nic = f.mgr.install_nic();
    f.mgr.enqueue_packet(nic, CoreId{2}, 3);
    UninstallResult res = f.mgr.uninstall(nic, CoreId{3}, FlushPolicy::OnDemand, SimTime{100});
    // Isolated-to-isolated is a real flush; the warning is only for
    // housekeeping-driven teardown.
    CHECK(res.flushed == std::vector<CoreId>{CoreId{2}});
    CHECK(res.warnings == 0);
    CHECK(f.ledger.count(InterferenceKind::IpiHandle) == 1);
}

TEST_CASE("netdev misuse is rejected") {
    Fixture f;
    Nic nic = f.mgr.install_nic();
    CHECK_THROWS_AS(f.mgr.enqueue_packet(nic, CoreId{9}, 1), ConfigError);
    CHECK_THROWS_AS(f.mgr.enqueue_packet(nic, CoreId{0}, 0), ConfigError);
    f.mgr.uninstall(nic, CoreId{0}, FlushPolicy::Baseline, SimTime{0});
    CHECK_THROWS_AS(f.mgr.enqueue_packet(nic, CoreId{0}, 1), ConfigError);
    CHECK_THROWS_AS(f.mgr.uninstall(nic, CoreId{0}, FlushPolicy::Baseline, SimTime{0}),
                    ConfigError);
    Nic fresh = f.mgr.install_nic();
    CHECK(fresh.id != nic.id);
}
