#include "isokern/schedcheck.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <string>

#include "isokern/errors.hpp"

namespace isokern::sched {

double TaskSet::total_utilization() const {
    double u = 0.0;
    for (const Task& t : tasks) u += t.utilization();
    return u;
}

std::vector<double> rand_fixed_sum(std::uint32_t n, double total, RngStream& rng) {
    if (n == 0) throw ConfigError("taskgen: need at least one task");
    if (total < 0.0 || total > static_cast<double>(n))
        throw ConfigError("taskgen: total utilization outside [0, n]");
    if (n == 1) return {total};

    const double s = total;
    const std::uint32_t k = std::min<std::uint32_t>(static_cast<std::uint32_t>(s), n - 1);
    const double tiny = std::numeric_limits<double>::min();
    const double huge = std::numeric_limits<double>::max();

    // s1[i] = s - (k - i), s2[i] = (k + n - i) - s, i = 0..n-1
    std::vector<double> s1(n), s2(n);
    for (std::uint32_t i = 0; i < n; ++i) {
        s1[i] = s - static_cast<double>(k) + static_cast<double>(i);
        s2[i] = static_cast<double>(k + n - i) - s;
    }

    // Dynamic-programming table over the simplex decomposition; w carries
    // (scaled) volumes, t the transition probabilities the sampler walks.
    std::vector<std::vector<double>> w(n, std::vector<double>(n + 1, 0.0));
    std::vector<std::vector<double>> t(n - 1, std::vector<double>(n, 0.0));
    w[0][1] = huge;
    for (std::uint32_t i = 2; i <= n; ++i) {
        for (std::uint32_t m = 1; m <= i; ++m) {
            double tmp1 = w[i - 2][m] * s1[m - 1] / static_cast<double>(i);
            double tmp2 = w[i - 2][m - 1] * s2[n - i + m - 1] / static_cast<double>(i);
            w[i - 1][m] = tmp1 + tmp2;
            double tmp3 = w[i - 1][m] + tiny;
            bool tmp4 = s2[n - i + m - 1] > s1[m - 1];
            t[i - 2][m - 1] = tmp4 ? tmp2 / tmp3 : 1.0 - tmp1 / tmp3;
        }
    }

    std::vector<double> x(n, 0.0);
    double sum_rest = s;
    std::uint32_t j = k + 1;
    double sm = 0.0, pr = 1.0;
    for (std::uint32_t i = n - 1; i >= 1; --i) {
        bool e = rng.next_unit() <= t[i - 1][j - 1];
        double sx = std::pow(rng.next_unit(), 1.0 / static_cast<double>(i));
        sm += (1.0 - sx) * pr * sum_rest / static_cast<double>(i + 1);
        pr *= sx;
        x[n - 1 - i] = sm + pr * (e ? 1.0 : 0.0);
        if (e) {
            sum_rest -= 1.0;
            j -= 1;
        }
    }
    x[n - 1] = sm + pr * sum_rest;

    for (std::uint32_t i = n - 1; i > 0; --i)
        std::swap(x[i], x[rng.next_below(i + 1)]);
    return x;
}

TaskSet generate_taskset(std::uint32_t n, double total_util, std::int64_t period_lo_us,
                         std::int64_t period_hi_us, RngStream& rng) {
    if (total_util > static_cast<double>(n))
        throw ConfigError("taskgen: total utilization " + std::to_string(total_util) +
                          " infeasible for " + std::to_string(n) + " tasks");
    if (total_util <= 0.0) throw ConfigError("taskgen: total utilization must be positive");
    if (period_lo_us <= 0 || period_hi_us < period_lo_us)
        throw ConfigError("taskgen: bad period range");

    std::vector<double> utils = rand_fixed_sum(n, total_util, rng);
    const double log_lo = std::log(static_cast<double>(period_lo_us));
    const double log_hi = std::log(static_cast<double>(period_hi_us));

    TaskSet ts;
    ts.tasks.reserve(n);
    for (std::uint32_t i = 0; i < n; ++i) {
        double period = std::exp(rng.next_range(log_lo, log_hi));
        std::int64_t t_us = std::llround(period / 10.0) * 10;  // 10 us grid
        t_us = std::clamp(t_us, period_lo_us, period_hi_us);
        std::int64_t c_us = std::max<std::int64_t>(1, std::llround(utils[i] * t_us));
        Task task;
        task.wcet_us = c_us;
        task.period_us = t_us;
        task.deadline_us = t_us;
        ts.tasks.push_back(task);
    }
    ts.assignment.assign(n, -1);
    return ts;
}

bool partition_tasks(TaskSet& ts) {
    const std::size_t n = ts.tasks.size();
    ts.assignment.assign(n, -1);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return ts.tasks[a].utilization() > ts.tasks[b].utilization();
    });
    std::vector<double> load(ts.num_cores, 0.0);
    bool ok = true;
    for (std::size_t idx : order) {
        std::uint32_t best = 0;
        for (std::uint32_t c = 1; c < ts.num_cores; ++c)
            if (load[c] < load[best]) best = c;
        double u = ts.tasks[idx].utilization();
        if (load[best] + u > 1.0 + 1e-9) {
            ok = false;
            continue;
        }
        load[best] += u;
        ts.assignment[idx] = static_cast<int>(best);
    }
    return ok;
}

void assign_rm_priorities(TaskSet& ts) {
    for (std::uint32_t c = 0; c < ts.num_cores; ++c) {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < ts.tasks.size(); ++i)
            if (ts.assignment[i] == static_cast<int>(c)) idx.push_back(i);
        std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
            return ts.tasks[a].period_us < ts.tasks[b].period_us;
        });
        for (std::size_t rank = 0; rank < idx.size(); ++rank)
            ts.tasks[idx[rank]].priority = static_cast<int>(rank);
    }
}

namespace {
std::int64_t ceil_div(std::int64_t a, std::int64_t b) { return (a + b - 1) / b; }
}

RtaResult rta_fixed_priority(std::span<const Task> tasks, std::span<const std::int64_t> blocking_us) {
    RtaResult res;
    res.schedulable = true;
    res.response_us.assign(tasks.size(), -1);
    for (std::size_t i = 0; i < tasks.size(); ++i) {
        const Task& ti = tasks[i];
        std::int64_t slack_limit = ti.deadline_us - ti.jitter_us;
        std::int64_t b = i < blocking_us.size() ? blocking_us[i] : 0;
        std::int64_t w = ti.wcet_us + b;
        bool converged = false;
        while (w <= slack_limit) {
            std::int64_t next = ti.wcet_us + b;
            for (std::size_t j = 0; j < tasks.size(); ++j) {
                if (j == i || tasks[j].priority >= ti.priority) continue;
                next += ceil_div(w + tasks[j].jitter_us, tasks[j].period_us) * tasks[j].wcet_us;
            }
            if (next == w) {
                converged = true;
                break;
            }
            w = next;
        }
        if (!converged) {
            res.schedulable = false;
            continue;
        }
        res.response_us[i] = ti.jitter_us + w;
    }
    return res;
}

bool edf_test(std::span<const Task> tasks) {
    if (tasks.empty()) return true;
    long double util = 0.0L;
    std::int64_t max_eff_deadline = 0;
    for (const Task& t : tasks) {
        if (t.deadline_us < t.jitter_us) return false;  // effective deadline would be negative
        util += static_cast<long double>(t.wcet_us) / t.period_us;
        max_eff_deadline = std::max(max_eff_deadline, t.deadline_us - t.jitter_us);
    }
    if (util > 1.0L + 1e-12L) return false;

    // Demand needs checking only up to a finite bound: the busy-period bound
    // when utilization leaves slack, or one hyperperiod plus the largest
    // effective deadline. Fall back to a practical cap if neither is usable.
    std::int64_t bound = std::numeric_limits<std::int64_t>::max();
    if (util < 1.0L - 1e-12L) {
        long double num = 0.0L;
        for (const Task& t : tasks) {
            long double ui = static_cast<long double>(t.wcet_us) / t.period_us;
            num += ui * static_cast<long double>(t.period_us - t.deadline_us + t.jitter_us);
        }
        long double la = num / (1.0L - util);
        if (la < 4e18L)
            bound = std::max<std::int64_t>(max_eff_deadline,
                                           static_cast<std::int64_t>(std::ceil((double)la)));
    }
    std::int64_t hyper = 1;
    bool hyper_ok = true;
    for (const Task& t : tasks) {
        hyper = std::lcm(hyper, t.period_us);
        if (hyper > 2'000'000'000) {
            hyper_ok = false;
            break;
        }
    }
    if (hyper_ok) bound = std::min(bound, hyper + max_eff_deadline);
    if (bound == std::numeric_limits<std::int64_t>::max()) bound = 50'000'000;

    std::vector<std::int64_t> checkpoints;
    for (const Task& t : tasks) {
        for (std::int64_t d = t.deadline_us - t.jitter_us; d <= bound; d += t.period_us)
            checkpoints.push_back(d);
    }
    std::sort(checkpoints.begin(), checkpoints.end());
    checkpoints.erase(std::unique(checkpoints.begin(), checkpoints.end()), checkpoints.end());

    for (std::int64_t tp : checkpoints) {
        std::int64_t demand = 0;
        for (const Task& t : tasks) {
            std::int64_t eff = t.deadline_us - t.jitter_us;
            if (tp < eff) continue;
            demand += ((tp - eff) / t.period_us + 1) * t.wcet_us;
        }
        if (demand > tp) return false;
    }
    return true;
}

namespace {

std::uint32_t contending_core_count(const TaskSet& ts) {
    std::set<int> cores;
    for (std::size_t i = 0; i < ts.tasks.size(); ++i)
        if (ts.tasks[i].resource && ts.assignment[i] >= 0) cores.insert(ts.assignment[i]);
    return static_cast<std::uint32_t>(cores.size());
}

// One critical section of arrival blocking for any task with a local
// lower-priority contender: a spinning task is effectively non-preemptible.
std::int64_t arrival_blocking(const TaskSet& ts, std::size_t i) {
    std::int64_t worst = 0;
    for (std::size_t j = 0; j < ts.tasks.size(); ++j) {
        if (j == i || ts.assignment[j] != ts.assignment[i]) continue;
        if (ts.tasks[j].priority <= ts.tasks[i].priority) continue;
        if (ts.tasks[j].resource)
            worst = std::max(worst, ts.tasks[j].resource->cs_length_us);
    }
    return worst;
}

}  // namespace

std::vector<BlockingTerm> mcs_blocking(const TaskSet& ts) {
    std::vector<BlockingTerm> out(ts.tasks.size());
    std::uint32_t cc = contending_core_count(ts);
    std::uint32_t spinners = std::min(ts.num_cores, cc);
    for (std::size_t i = 0; i < ts.tasks.size(); ++i) {
        const Task& t = ts.tasks[i];
        if (t.resource) {
            std::int64_t per_request =
                spinners > 0 ? static_cast<std::int64_t>(spinners - 1) * t.resource->cs_length_us
                             : 0;
            out[i].spin_inflation_us = per_request * t.resource->requests_per_period;
        }
        // With no remote contender nobody ever spins, so the non-preemptible
        // window that causes arrival blocking cannot occur.
        out[i].arrival_blocking_us = spinners > 1 ? arrival_blocking(ts, i) : 0;
    }
    return out;
}

std::vector<BlockingTerm> rw_blocking(const TaskSet& ts) {
    std::vector<BlockingTerm> out(ts.tasks.size());
    std::uint32_t cc = contending_core_count(ts);
    bool writers = false;
    for (const Task& t : ts.tasks)
        if (t.resource && t.resource->role == ResourceRole::Writer) writers = true;
    for (std::size_t i = 0; i < ts.tasks.size(); ++i) {
        const Task& t = ts.tasks[i];
        if (!t.resource) continue;
        std::int64_t l = t.resource->cs_length_us;
        std::int64_t per_request = 0;
        if (t.resource->role == ResourceRole::Writer) {
            per_request = cc > 0 ? static_cast<std::int64_t>(cc - 1) * l : 0;
        } else {
            // One reader phase, plus one writer phase when some writer exists.
            per_request = writers ? 2 * l : l;
        }
        out[i].spin_inflation_us = per_request * t.resource->requests_per_period;
    }
    return out;
}

namespace {
constexpr std::string_view kKindNames[] = {"fp", "edf", "mcs", "rw"};
}

std::string_view to_string(ExperimentKind k) {
    return kKindNames[static_cast<std::size_t>(k)];
}

std::optional<ExperimentKind> experiment_kind_from_string(std::string_view s) {
    for (std::size_t i = 0; i < std::size(kKindNames); ++i)
        if (kKindNames[i] == s) return static_cast<ExperimentKind>(i);
    return std::nullopt;
}

double curve_area(std::span<const CurvePoint> points) {
    double area = 0.0;
    for (std::size_t i = 1; i < points.size(); ++i)
        area += (points[i].util - points[i - 1].util) *
                (points[i].fraction + points[i - 1].fraction) / 2.0;
    return area;
}

std::vector<double> util_grid(double lo, double hi, double step) {
    std::vector<double> out;
    for (std::size_t k = 0;; ++k) {
        double v = lo + step * static_cast<double>(k);
        if (v > hi + 1e-9) break;
        out.push_back(v);
    }
    return out;
}

std::vector<double> default_utils(ExperimentKind kind) {
    if (kind == ExperimentKind::FixedPriority || kind == ExperimentKind::Edf)
        return util_grid(0.80, 0.99, 0.01);
    return util_grid(0.60, 0.90, 0.05);
}

namespace {

bool analyze_partitioned(const TaskSet& ts, ExperimentKind kind) {
    std::vector<BlockingTerm> blocking(ts.tasks.size());
    if (kind == ExperimentKind::McsLock) blocking = mcs_blocking(ts);
    if (kind == ExperimentKind::RwLock) blocking = rw_blocking(ts);

    for (std::uint32_t c = 0; c < ts.num_cores; ++c) {
        std::vector<Task> local;
        std::vector<std::int64_t> local_blocking;
        for (std::size_t i = 0; i < ts.tasks.size(); ++i) {
            if (ts.assignment[i] != static_cast<int>(c)) continue;
            Task t = ts.tasks[i];
            t.wcet_us += blocking[i].spin_inflation_us;
            local.push_back(t);
            local_blocking.push_back(blocking[i].arrival_blocking_us);
        }
        if (local.empty()) continue;
        if (kind == ExperimentKind::Edf) {
            if (!edf_test(local)) return false;
        } else {
            if (!rta_fixed_priority(local, local_blocking).schedulable) return false;
        }
    }
    return true;
}

}  // namespace

ExperimentResult schedulability_experiment(const ExperimentParams& params) {
    std::vector<double> utils = params.utils.empty() ? default_utils(params.kind) : params.utils;
    ExperimentResult result;
    for (std::int64_t j : params.jitters_us) {
        result.curves[j].points.assign(utils.size(), CurvePoint{});
        result.verdicts[j].assign(utils.size(), {});
    }

    for (std::size_t u_idx = 0; u_idx < utils.size(); ++u_idx) {
        double total = utils[u_idx] * params.cores;
        std::map<std::int64_t, std::uint32_t> passed;
        for (std::uint32_t s = 0; s < params.sets_per_point; ++s) {
            std::string label = "set/" + std::string(to_string(params.kind)) + "/" +
                                std::to_string(u_idx) + "/" + std::to_string(s);
            RngStream rng = derive_stream(params.seed, label);
            TaskSet ts = generate_taskset(params.tasks, total, params.period_lo_us,
                                          params.period_hi_us, rng);
            ts.num_cores = params.cores;
            if (params.kind == ExperimentKind::McsLock) {
                for (Task& t : ts.tasks) t.resource = ResourceUse{ResourceRole::Mutex, 1, 100};
            } else if (params.kind == ExperimentKind::RwLock) {
                for (Task& t : ts.tasks)
                    t.resource = ResourceUse{rng.next_below(2) == 0 ? ResourceRole::Reader
                                                                    : ResourceRole::Writer,
                                             1, 100};
            }
            bool fits = partition_tasks(ts);
            if (fits) assign_rm_priorities(ts);
            for (std::int64_t j : params.jitters_us) {
                bool verdict = false;
                if (fits) {
                    TaskSet with_jitter = ts;
                    for (Task& t : with_jitter.tasks) t.jitter_us = j;
                    verdict = analyze_partitioned(with_jitter, params.kind);
                }
                result.verdicts[j][u_idx].push_back(verdict);
                if (verdict) passed[j] += 1;
            }
        }
        for (std::int64_t j : params.jitters_us)
            result.curves[j].points[u_idx] =
                CurvePoint{utils[u_idx], static_cast<double>(passed[j]) / params.sets_per_point};
    }
    for (auto& [j, curve] : result.curves) curve.sua = curve_area(curve.points);
    return result;
}

}  // namespace isokern::sched
