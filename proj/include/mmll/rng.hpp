#pragma once

// Counter-based deterministic randomness. Every draw is
// mix(master_seed, stream_id, draw_index), so results do not depend on how
// work is split across threads; a consumer that knows its stream id and
// counter origin reproduces the exact same labels.

#include <cstdint>

namespace mmll {

inline uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline uint64_t mix3(uint64_t a, uint64_t b, uint64_t c) {
    return splitmix64(splitmix64(splitmix64(a) ^ b) ^ c);
}

struct Rng {
    uint64_t master = 0;
    uint64_t stream = 0;
    uint64_t counter = 0;

    Rng() = default;
    Rng(uint64_t master_seed, uint64_t stream_id = 0)
        : master(master_seed), stream(stream_id) {}

    uint64_t next_u64() { return mix3(master, stream, counter++); }

    // [0,1), 53-bit mantissa
    double next_unit() { return double(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform in [0,n). Multiply-shift; bias is O(n / 2^64), irrelevant for
    // the alphabet sizes and trial counts used here.
    uint32_t next_below(uint32_t n) {
        return uint32_t((unsigned __int128)next_u64() * n >> 64);
    }

    // Derived independent stream (e.g. one per trial index).
    Rng substream(uint64_t s) const {
        return Rng(master, splitmix64(stream ^ (s + 0x6a09e667f3bcc909ULL)));
    }
};

}  // namespace mmll
