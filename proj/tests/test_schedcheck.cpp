#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "isokern/schedcheck.hpp"

using namespace isokern;
using namespace isokern::sched;

namespace {

Task task(std::int64_t c, std::int64_t t, std::int64_t d = -1, int prio = 0,
          std::int64_t jitter = 0) {
    Task tk;
    tk.wcet_us = c;
    tk.period_us = t;
    tk.deadline_us = d < 0 ? t : d;
    tk.jitter_us = jitter;
    tk.priority = prio;
    return tk;
}

// Quantum-by-quantum uniprocessor schedule, synchronous release, checked over
// one hyperperiod. Exact for both policies on these inputs, so it serves as
// the oracle for the analytic tests.
enum class Policy { Fp, Edf };

bool simulate_core(const std::vector<Task>& tasks, Policy policy) {
    std::int64_t hyper = 1;
    for (const Task& t : tasks) hyper = std::lcm(hyper, t.period_us);
    struct Job {
        std::int64_t deadline;
        std::int64_t remaining;
        std::size_t task;
    };
    std::vector<Job> jobs;
    for (std::int64_t now = 0; now <= hyper; ++now) {
        for (std::size_t i = 0; i < tasks.size(); ++i)
            if (now < hyper && now % tasks[i].period_us == 0)
                jobs.push_back({now + tasks[i].deadline_us, tasks[i].wcet_us, i});
        for (const Job& j : jobs)
            if (j.deadline <= now && j.remaining > 0) return false;
        if (now == hyper) break;
        std::size_t pick = jobs.size();
        for (std::size_t k = 0; k < jobs.size(); ++k) {
            if (jobs[k].remaining == 0) continue;
            if (pick == jobs.size()) {
                pick = k;
                continue;
            }
            bool better = policy == Policy::Edf
                              ? jobs[k].deadline < jobs[pick].deadline
                              : tasks[jobs[k].task].priority < tasks[jobs[pick].task].priority;
            if (better) pick = k;
        }
        if (pick < jobs.size()) jobs[pick].remaining -= 1;
        std::erase_if(jobs, [](const Job& j) { return j.remaining == 0; });
    }
    return true;
}

}  // namespace

TEST_CASE("fixed-sum utilization vectors hit the target sum inside the unit box") {
    for (auto [n, total] : std::vector<std::pair<std::uint32_t, double>>{
             {1, 0.7}, {2, 1.5}, {5, 4.9}, {10, 0.3}, {40, 18.0}, {40, 39.5}}) {
        RngStream rng = derive_stream(9, "fixedsum");
        for (int rep = 0; rep < 20; ++rep) {
            std::vector<double> u = rand_fixed_sum(n, total, rng);
            REQUIRE(u.size() == n);
            double sum = 0.0;
            for (double x : u) {
                CHECK(x >= -1e-12);
                CHECK(x <= 1.0 + 1e-9);
                sum += x;
            }
            CHECK(sum == doctest::Approx(total).epsilon(1e-9));
        }
    }
}

TEST_CASE("fixed-sum draws replay per stream") {
    RngStream a = derive_stream(5, "fs");
    RngStream b = derive_stream(5, "fs");
    CHECK(rand_fixed_sum(8, 3.5, a) == rand_fixed_sum(8, 3.5, b));
    RngStream c = derive_stream(5, "fs-other");
    CHECK(rand_fixed_sum(8, 3.5, a) != rand_fixed_sum(8, 3.5, c));
}

TEST_CASE("generated task sets respect period grid, deadlines, and target load") {
    RngStream rng = derive_stream(17, "gen");
    for (int rep = 0; rep < 10; ++rep) {
        TaskSet ts = generate_taskset(40, 16.0, 10000, 100000, rng);
        REQUIRE(ts.tasks.size() == 40);
        double total = 0.0;
        for (const Task& t : ts.tasks) {
            CHECK(t.period_us >= 10000);
            CHECK(t.period_us <= 100000);
            CHECK(t.period_us % 10 == 0);
            CHECK(t.deadline_us == t.period_us);
            CHECK(t.wcet_us >= 1);
            total += t.utilization();
        }
        CHECK(total == doctest::Approx(16.0).epsilon(1e-3));
        CHECK(ts.total_utilization() == doctest::Approx(total));
    }
}

TEST_CASE("worst-fit-decreasing balances load and reports misfits") {
    TaskSet ts;
    ts.num_cores = 2;
    ts.tasks = {task(500, 1000), task(400, 1000), task(300, 1000), task(200, 1000)};
    REQUIRE(partition_tasks(ts));
    CHECK(ts.assignment == std::vector<int>{0, 1, 1, 0});
    double load[2] = {0, 0};
    for (std::size_t i = 0; i < 4; ++i) load[ts.assignment[i]] += ts.tasks[i].utilization();
    CHECK(load[0] == doctest::Approx(0.7));
    CHECK(load[1] == doctest::Approx(0.7));

    TaskSet over;
    over.num_cores = 2;
    over.tasks = {task(8, 10), task(8, 10), task(8, 10)};
    CHECK_FALSE(partition_tasks(over));
    CHECK(std::count(over.assignment.begin(), over.assignment.end(), -1) == 1);
}

TEST_CASE("rate-monotonic priorities order by period with stable ties") {
    TaskSet ts;
    ts.num_cores = 1;
    ts.tasks = {task(1, 100), task(1, 50), task(1, 100)};
    ts.assignment = {0, 0, 0};
    assign_rm_priorities(ts);
    CHECK(ts.tasks[1].priority == 0);
    CHECK(ts.tasks[0].priority == 1);
    CHECK(ts.tasks[2].priority == 2);
}

TEST_CASE("response-time analysis reproduces the textbook fixed point") {
    std::vector<Task> tasks{task(1, 4, -1, 0), task(2, 6, -1, 1)};
    RtaResult r = rta_fixed_priority(tasks);
    REQUIRE(r.schedulable);
    CHECK(r.response_us == std::vector<std::int64_t>{1, 3});

    std::vector<std::int64_t> blocking{0, 1};
    r = rta_fixed_priority(tasks, blocking);
    REQUIRE(r.schedulable);
    CHECK(r.response_us == std::vector<std::int64_t>{1, 4});

    std::vector<Task> jittery{task(1, 4, -1, 0, 1), task(2, 6, -1, 1, 1)};
    r = rta_fixed_priority(jittery);
    REQUIRE(r.schedulable);
    CHECK(r.response_us == std::vector<std::int64_t>{2, 4});
}

TEST_CASE("response-time analysis flags divergence with -1") {
    std::vector<Task> tasks{task(3, 4, -1, 0), task(3, 5, -1, 1)};
    RtaResult r = rta_fixed_priority(tasks);
    CHECK_FALSE(r.schedulable);
    CHECK(r.response_us[0] == 3);
    CHECK(r.response_us[1] == -1);
}

TEST_CASE("deadline-demand criterion handles constrained deadlines and jitter") {
    CHECK(edf_test(std::vector<Task>{task(2, 4), task(2, 5)}));
    CHECK_FALSE(edf_test(std::vector<Task>{task(3, 4), task(3, 5)}));  // over unit load
    CHECK(edf_test(std::vector<Task>{task(2, 10, 2), task(3, 10, 9)}));
    CHECK_FALSE(edf_test(std::vector<Task>{task(2, 10, 2), task(7, 10, 8)}));
    CHECK_FALSE(edf_test(std::vector<Task>{task(2, 10, 10, 0, 9)}));   // slack below wcet
    CHECK_FALSE(edf_test(std::vector<Task>{task(1, 10, 10, 0, 11)}));  // jitter past deadline
    CHECK(edf_test(std::vector<Task>{task(2, 10, 10, 0, 8)}));
    CHECK(edf_test({}));
}

TEST_CASE("both analyses agree with a quantum-accurate schedule replay") {
    RngStream rng = derive_stream(23, "brute");
    int fp_disagree = 0, edf_disagree = 0, fp_false = 0, edf_false = 0;
    for (int rep = 0; rep < 120; ++rep) {
        TaskSet ts;
        ts.num_cores = 1;
        std::size_t n = 1 + rng.next_below(3);
        for (std::size_t i = 0; i < n; ++i) {
            std::int64_t t = 2 + static_cast<std::int64_t>(rng.next_below(11));
            std::int64_t c = 1 + static_cast<std::int64_t>(rng.next_below(4));
            c = std::min(c, t);
            std::int64_t d = c + static_cast<std::int64_t>(rng.next_below(t - c + 1));
            ts.tasks.push_back(task(c, t, d));
        }
        ts.assignment.assign(n, 0);
        assign_rm_priorities(ts);

        bool rta = rta_fixed_priority(ts.tasks).schedulable;
        bool fp_sim = simulate_core(ts.tasks, Policy::Fp);
        if (rta != fp_sim) ++fp_disagree;
        if (!rta) ++fp_false;

        bool edf = edf_test(ts.tasks);
        bool edf_sim = simulate_core(ts.tasks, Policy::Edf);
        if (edf != edf_sim) ++edf_disagree;
        if (!edf) ++edf_false;
    }
    CHECK(fp_disagree == 0);
    CHECK(edf_disagree == 0);
    CHECK(fp_false > 10);  // the mix must actually exercise both verdicts
    CHECK(edf_false > 10);
}

TEST_CASE("spin blocking vanishes on a single contending core and grows with more") {
    auto make = [](std::uint32_t cores, const std::vector<int>& assignment) {
        TaskSet ts;
        ts.num_cores = cores;
        for (std::size_t i = 0; i < assignment.size(); ++i) {
            Task t = task(10, 100, -1, static_cast<int>(i));
            t.resource = ResourceUse{ResourceRole::Mutex, 1, 100};
            ts.tasks.push_back(t);
        }
        ts.assignment = assignment;
        return ts;
    };

    TaskSet single = make(1, {0, 0, 0});
    auto b1 = mcs_blocking(single);
    for (const auto& b : b1) {
        CHECK(b.spin_inflation_us == 0);
        CHECK(b.arrival_blocking_us == 0);  // nobody can spin, so nobody blocks arrivals
    }

    TaskSet colocated = make(2, {0, 0, 1});
    auto b2 = mcs_blocking(colocated);
    CHECK(b2[0].arrival_blocking_us == 100);  // local lower-priority contender may spin
    CHECK(b2[1].arrival_blocking_us == 0);
    CHECK(b2[2].arrival_blocking_us == 0);
    for (const auto& b : b2) CHECK(b.spin_inflation_us == 100);

    TaskSet spread = make(3, {0, 1, 2});
    auto b3 = mcs_blocking(spread);
    for (const auto& b : b3) {
        CHECK(b.spin_inflation_us == 200);  // one section behind each other core
        CHECK(b.arrival_blocking_us == 0);
    }
    TaskSet wider = make(5, {0, 1, 2});
    wider.tasks.push_back(task(10, 100, -1, 0));
    wider.tasks.back().resource = ResourceUse{ResourceRole::Mutex, 2, 100};
    wider.assignment.push_back(3);
    auto b4 = mcs_blocking(wider);
    CHECK(b4[0].spin_inflation_us == 300);
    CHECK(b4[3].spin_inflation_us == 600);  // two requests per period
}

TEST_CASE("phase-fair reader bound undercuts the writer bound once cores pile up") {
    TaskSet ts;
    ts.num_cores = 4;
    for (int i = 0; i < 4; ++i) {
        Task t = task(10, 100, -1, 0);
        t.resource = ResourceUse{i == 0 ? ResourceRole::Reader : ResourceRole::Writer, 1, 100};
        ts.tasks.push_back(t);
    }
    ts.assignment = {0, 1, 2, 3};
    auto b = rw_blocking(ts);
    CHECK(b[0].spin_inflation_us == 200);  // one writer phase + one reader phase
    for (int i = 1; i < 4; ++i) CHECK(b[i].spin_inflation_us == 300);
    for (const auto& t : b) CHECK(t.arrival_blocking_us == 0);
    CHECK(b[0].spin_inflation_us < b[1].spin_inflation_us);

    TaskSet readers = ts;
    for (Task& t : readers.tasks) t.resource->role = ResourceRole::Reader;
    auto br = rw_blocking(readers);
    for (const auto& t : br) CHECK(t.spin_inflation_us == 100);  // no writer anywhere
}

TEST_CASE("utilization grids and curve areas") {
    std::vector<double> g = util_grid(0.80, 0.99, 0.01);
    REQUIRE(g.size() == 20);
    CHECK(g.front() == doctest::Approx(0.80));
    CHECK(g.back() == doctest::Approx(0.99));
    CHECK(util_grid(0.60, 0.90, 0.05).size() == 7);

    std::vector<CurvePoint> pts{{0.6, 1.0}, {0.7, 1.0}, {0.8, 0.5}, {0.9, 0.0}};
    CHECK(curve_area(pts) == doctest::Approx(0.2));
    CHECK(curve_area({}) == doctest::Approx(0.0));
}

TEST_CASE("experiment kinds round-trip through their names") {
    for (int k = 0; k < 4; ++k) {
        auto kind = static_cast<ExperimentKind>(k);
        auto back = experiment_kind_from_string(to_string(kind));
        REQUIRE(back.has_value());
        CHECK(*back == kind);
    }
    CHECK_FALSE(experiment_kind_from_string("rm").has_value());
}

TEST_CASE("a small sweep shows jitter dominance and analyzer ordering") {
    ExperimentParams p;
    p.kind = ExperimentKind::FixedPriority;
    p.jitters_us = {104, 12};
    p.cores = 4;
    p.tasks = 8;
    p.utils = {0.70, 0.90};
    p.sets_per_point = 40;
    p.seed = 7;
    ExperimentResult fp = schedulability_experiment(p);

    REQUIRE(fp.curves.size() == 2);
    for (auto& [j, curve] : fp.curves) {
        REQUIRE(curve.points.size() == 2);
        CHECK(curve.points[0].util == doctest::Approx(0.70));
        CHECK(curve.points[1].util == doctest::Approx(0.90));
        for (const CurvePoint& pt : curve.points) {
            CHECK(pt.fraction >= 0.0);
            CHECK(pt.fraction <= 1.0);
        }
        CHECK(curve.points[0].fraction >= curve.points[1].fraction);
    }
    for (std::size_t u = 0; u < 2; ++u) {
        const auto& low = fp.verdicts.at(12)[u];
        const auto& high = fp.verdicts.at(104)[u];
        REQUIRE(low.size() == 40);
        REQUIRE(high.size() == 40);
        for (std::size_t s = 0; s < 40; ++s)
            CHECK(low[s] >= high[s]);  // easing jitter never breaks a passing set
    }
    CHECK(fp.curves.at(12).sua >= fp.curves.at(104).sua);

    ExperimentResult again = schedulability_experiment(p);
    CHECK(again.verdicts == fp.verdicts);

    p.kind = ExperimentKind::Edf;
    p.utils = {0.90};
    ExperimentResult edf = schedulability_experiment(p);
    CHECK(edf.curves.at(12).points[0].fraction >= fp.curves.at(12).points[1].fraction);
}

TEST_CASE("default grids match the documented sweeps") {
    CHECK(default_utils(ExperimentKind::FixedPriority).size() == 20);
    CHECK(default_utils(ExperimentKind::Edf).size() == 20);
    CHECK(default_utils(ExperimentKind::McsLock).size() == 7);
    CHECK(default_utils(ExperimentKind::RwLock).size() == 7);
    CHECK(default_utils(ExperimentKind::McsLock).front() == doctest::Approx(0.60));
    CHECK(default_utils(ExperimentKind::McsLock).back() == doctest::Approx(0.90));
}
