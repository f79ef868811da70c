#pragma once

#include <cstdint>

namespace amorph {

// Counter-based generator: every draw is a pure function of
// (seed, stream, counter), so results do not depend on scheduling or
// worker count.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t task_rand(std::uint64_t seed, std::uint64_t stream,
                               std::uint64_t counter) {
    return mix64(mix64(seed ^ (stream * 0xd1342543de82ef95ULL)) + counter);
}

inline double task_uniform(std::uint64_t seed, std::uint64_t stream,
                           std::uint64_t counter) {
    return (task_rand(seed, stream, counter) >> 11) * 0x1p-53;
}

}  // namespace amorph
