#include "isokern/rng.hpp"

#include <cmath>

namespace isokern {

namespace {

// splitmix64 finisher; spreads label hashes away from the master seed.
std::uint64_t mix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t master, std::string_view label) {
    return mix(mix(master) ^ fnv1a(label));
}

std::uint64_t RngStream::next_exponential_ns(double rate_per_sec) {
    double u = next_unit();
    double gap_sec = -std::log1p(-u) / rate_per_sec;
    double ns = gap_sec * 1e9;
    if (ns < 1.0) return 1;
    return static_cast<std::uint64_t>(std::llround(ns));
}

}  // namespace isokern
