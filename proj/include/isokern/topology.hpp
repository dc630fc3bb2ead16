#pragma once

#include <compare>
#include <cstdint>
#include <vector>

namespace isokern {

struct CoreId {
    std::uint32_t value = 0;

    constexpr auto operator<=>(const CoreId&) const = default;
};

// Static split of the machine into an isolated set and a non-isolated
// (housekeeping) set. The two sets are disjoint and cover every core; both
// must be non-empty for a meaningful run.
class Partition {
  public:
    Partition(std::uint32_t num_cores, std::vector<CoreId> isolated);

    std::uint32_t num_cores() const { return static_cast<std::uint32_t>(isolated_mask_.size()); }
    bool is_isolated(CoreId c) const { return isolated_mask_[c.value]; }

    // True when an event on `victim` was caused from the other side of the
    // partition boundary, i.e. isolated victim, non-isolated origin.
    bool crosses(CoreId victim, CoreId origin) const {
        return is_isolated(victim) && !is_isolated(origin);
    }

    std::vector<CoreId> isolated() const;
    std::vector<CoreId> non_isolated() const;
    std::vector<CoreId> all() const;

  private:
    std::vector<bool> isolated_mask_;
};

}  // namespace isokern
