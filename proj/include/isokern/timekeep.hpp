#pragma once

#include <cstdint>
#include <vector>

#include "isokern/ledger.hpp"
#include "isokern/time.hpp"
#include "isokern/topology.hpp"

namespace isokern {

enum class SeqlockVariant : std::uint8_t { Baseline, Compressed };

struct TimekeepConfig {
    SeqlockVariant variant = SeqlockVariant::Baseline;
    SimTime tick_period = milliseconds(1);
    // Writer critical-section lengths. Baseline holds the long section on
    // every update, even when the tick count comes out to zero; Compressed
    // skips the zero-tick case entirely and keeps only the committing store
    // inside the section.
    SimTime baseline_section = nanoseconds(800);
    SimTime compressed_section = nanoseconds(200);
    std::uint32_t retry_flag_threshold = 100;

    void validate() const;
};

struct ReadResult {
    std::uint64_t value = 0;
    std::uint32_t retries = 0;
    SimTime wait;
};

struct TickResult {
    std::uint64_t ticks_advanced = 0;
    SimTime lock_held;
    bool seq_bumped = false;
};

struct WriterSection {
    SimTime start;
    SimTime end;
    CoreId writer;
    std::uint64_t jiffies_after;
};

// Seqlock-protected tick counter. Writers serialize FIFO on a lock and hold
// the sequence odd for the section length; a reader that lands inside a
// section spins until the chain of queued sections drains, one retry per
// section, and always returns the value committed by the last one. Reads
// never tear by construction; the section log lets tests verify that
// independently.
class JiffiesClock {
  public:
    JiffiesClock(TimekeepConfig cfg, const Partition& part, Ledger& ledger);

    ReadResult read_jiffies(CoreId core, SimTime at);
    TickResult tick_update(CoreId core, SimTime now);

    std::uint64_t jiffies() const { return jiffies_; }
    std::uint64_t sequence() const { return sequence_; }
    const std::vector<WriterSection>& sections() const { return sections_; }

    // Reads whose retry count crossed the configured threshold. Reported, not
    // an error: starvation here is a symptom the scenario wants to surface.
    std::uint64_t flagged_reads() const { return flagged_reads_; }

  private:
    TimekeepConfig cfg_;
    const Partition& part_;
    Ledger& ledger_;
    std::uint64_t jiffies_ = 0;
    std::uint64_t sequence_ = 0;
    SimTime last_update_;
    SimTime writer_busy_until_;
    std::vector<WriterSection> sections_;
    std::uint64_t flagged_reads_ = 0;
};

}  // namespace isokern
