#pragma once

#include <cstdint>
#include <random>

namespace macts {

// splitmix64 finalizer; good enough to decorrelate seeds derived from
// (master seed, node id, purpose).
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Independent random streams, one per (node, purpose). Keeping the streams
// separate means editing the topology or toggling a feature does not shift
// the draws consumed by unrelated parts of a run.
enum class StreamPurpose : std::uint64_t {
    drift = 1,
    boot_offset = 2,
    phase = 3,
    delay = 4,
    loss = 5,
    placement = 6,
};

inline std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t node_id,
                                   StreamPurpose purpose) {
    const std::uint64_t s =
        mix64(seed ^ mix64(node_id ^ mix64(static_cast<std::uint64_t>(purpose))));
    return std::mt19937_64{s};
}

} // namespace macts
