#include "isokern/topology.hpp"

#include <string>

#include "isokern/errors.hpp"

namespace isokern {

Partition::Partition(std::uint32_t num_cores, std::vector<CoreId> isolated)
    : isolated_mask_(num_cores, false) {
    if (num_cores == 0) throw ConfigError("partition: need at least one core");
    for (CoreId c : isolated) {
        if (c.value >= num_cores)
            throw ConfigError("partition: isolated core " + std::to_string(c.value) +
                              " out of range (cores: " + std::to_string(num_cores) + ")");
        isolated_mask_[c.value] = true;
    }
}

std::vector<CoreId> Partition::isolated() const {
    std::vector<CoreId> out;
    for (std::uint32_t i = 0; i < num_cores(); ++i)
        if (isolated_mask_[i]) out.push_back(CoreId{i});
    return out;
}

std::vector<CoreId> Partition::non_isolated() const {
    std::vector<CoreId> out;
    for (std::uint32_t i = 0; i < num_cores(); ++i)
        if (!isolated_mask_[i]) out.push_back(CoreId{i});
    return out;
}

std::vector<CoreId> Partition::all() const {
    std::vector<CoreId> out;
    for (std::uint32_t i = 0; i < num_cores(); ++i) out.push_back(CoreId{i});
    return out;
}

}  // namespace isokern
