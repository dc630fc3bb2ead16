#include "isokern/ledger.hpp"

#include <ostream>

namespace isokern {

namespace {
constexpr std::string_view kKindNames[kInterferenceKindCount] = {
    "IpiHandle",     "KernelTaskExec", "ContextSwitch", "TlbFlush",
    "TlbMissBurst",  "LockBlock",      "SeqlockRetry",  "CrossFlushWarning",
};
}

std::string_view to_string(InterferenceKind k) {
    return kKindNames[static_cast<std::size_t>(k)];
}

std::optional<InterferenceKind> interference_kind_from_string(std::string_view s) {
    for (std::size_t i = 0; i < kInterferenceKindCount; ++i)
        if (kKindNames[i] == s) return static_cast<InterferenceKind>(i);
    return std::nullopt;
}

Ledger::Ledger(std::uint32_t num_cores)
    : stolen_(num_cores), busy_until_(num_cores) {}

void Ledger::record(const InterferenceEvent& ev) {
    log_.push_back(ev);
    kind_counts_[static_cast<std::size_t>(ev.kind)] += 1;
    stolen_[ev.victim.value] += ev.duration;
    if (ev.duration.ns > 0) {
        SimTime start = max(busy_until_[ev.victim.value], ev.at);
        busy_until_[ev.victim.value] = start + ev.duration;
    }
}

std::uint64_t Ledger::cross_partition_count(const Partition& p,
                                            std::optional<InterferenceKind> kind) const {
    std::uint64_t n = 0;
    for (const auto& ev : log_) {
        if (kind && ev.kind != *kind) continue;
        if (p.crosses(ev.victim, ev.origin)) ++n;
    }
    return n;
}

void Ledger::write_csv(std::ostream& out) const {
    out << "at_ns,kind,victim,origin,duration_ns\n";
    for (const auto& ev : log_) {
        out << ev.at.ns << ',' << to_string(ev.kind) << ',' << ev.victim.value << ','
            << ev.origin.value << ',' << ev.duration.ns << '\n';
    }
}

std::uint64_t LatencyHistogram::total() const {
    std::uint64_t n = 0;
    for (const auto& [bucket, count] : counts) n += count;
    return n;
}

LatencyHistogram make_histogram(std::span<const SimTime> samples, SimTime bucket_width) {
    LatencyHistogram h{bucket_width, {}, std::nullopt};
    for (SimTime s : samples) {
        h.counts[s.ns / bucket_width.ns] += 1;
        if (!h.max_observed || s > *h.max_observed) h.max_observed = s;
    }
    return h;
}

}  // namespace isokern
