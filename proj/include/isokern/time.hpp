#pragma once

#include <compare>
#include <cstdint>

namespace isokern {

// Virtual time. Integer nanoseconds; no floating point anywhere on the
// simulation clock so runs replay bit-exactly.
struct SimTime {
    std::uint64_t ns = 0;

    constexpr auto operator<=>(const SimTime&) const = default;

    constexpr SimTime& operator+=(SimTime d) {
        ns += d.ns;
        return *this;
    }
};

constexpr SimTime nanoseconds(std::uint64_t v) { return SimTime{v}; }
constexpr SimTime microseconds(std::uint64_t v) { return SimTime{v * 1000ull}; }
constexpr SimTime milliseconds(std::uint64_t v) { return SimTime{v * 1000000ull}; }
constexpr SimTime seconds(std::uint64_t v) { return SimTime{v * 1000000000ull}; }

constexpr SimTime operator+(SimTime a, SimTime b) { return SimTime{a.ns + b.ns}; }

// Saturating difference: durations never go negative.
constexpr SimTime operator-(SimTime a, SimTime b) {
    return SimTime{a.ns >= b.ns ? a.ns - b.ns : 0};
}

constexpr SimTime operator*(SimTime a, std::uint64_t k) { return SimTime{a.ns * k}; }

constexpr SimTime max(SimTime a, SimTime b) { return a.ns >= b.ns ? a : b; }

}  // namespace isokern
