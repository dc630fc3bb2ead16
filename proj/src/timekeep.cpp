#include "isokern/timekeep.hpp"

#include "isokern/errors.hpp"

namespace isokern {

void TimekeepConfig::validate() const {
    if (tick_period.ns == 0) throw ConfigError("timekeep: tick period must be positive");
    if (baseline_section.ns == 0 || compressed_section.ns == 0)
        throw ConfigError("timekeep: section lengths must be positive");
}

JiffiesClock::JiffiesClock(TimekeepConfig cfg, const Partition& part, Ledger& ledger)
    : cfg_(cfg), part_(part), ledger_(ledger) {
    cfg_.validate();
}

TickResult JiffiesClock::tick_update(CoreId core, SimTime now) {
    // Ticks owed are computed from the caller's event time; waiting for the
    // writer lock does not shift tick accounting.
    std::uint64_t ticks = 0;
    if (now > last_update_) ticks = (now.ns - last_update_.ns) / cfg_.tick_period.ns;

    if (cfg_.variant == SeqlockVariant::Compressed && ticks == 0)
        return TickResult{0, SimTime{0}, false};

    SimTime section = cfg_.variant == SeqlockVariant::Baseline ? cfg_.baseline_section
                                                               : cfg_.compressed_section;
    SimTime start = max(now, writer_busy_until_);
    SimTime end = start + section;
    writer_busy_until_ = end;
    sequence_ += 2;  // odd inside [start, end), even again after
    jiffies_ += ticks;
    last_update_ += cfg_.tick_period * ticks;
    sections_.push_back(WriterSection{start, end, core, jiffies_});
    return TickResult{ticks, section, true};
}

// Calls must be monotone in `at` (the event engine dispatches in time order);
// under that contract the live chain of sections covers [at, busy_until)
// without gaps whenever at < busy_until.
ReadResult JiffiesClock::read_jiffies(CoreId core, SimTime at) {
    if (at >= writer_busy_until_) return ReadResult{jiffies_, 0, SimTime{0}};

    // Inside the active chain of writer sections: one restart per section
    // still in the way, done when the chain drains. The value seen is the one
    // committed by the last section of the chain.
    ReadResult res{jiffies_, 0, writer_busy_until_ - at};
    std::size_t first = sections_.size();
    while (first > 0 && sections_[first - 1].end > at) --first;
    for (std::size_t i = first; i < sections_.size(); ++i) {
        const WriterSection& s = sections_[i];
        res.retries += 1;
        if (part_.is_isolated(core) && !part_.is_isolated(s.writer)) {
            SimTime seg_start = max(at, s.start);
            ledger_.record(
                {seg_start, InterferenceKind::SeqlockRetry, core, s.writer, s.end - seg_start});
        }
    }
    if (res.retries > cfg_.retry_flag_threshold) flagged_reads_ += 1;
    return res;
}

}  // namespace isokern
