#pragma once

// Deterministic range partitioning: chunk boundaries are fixed (independent of
// the worker count), chunks are computed independently and merged in chunk
// order, so every reduction is bit-identical for any number of workers.

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <functional>
#include <thread>
#include <vector>

namespace mmll {

inline constexpr uint64_t kParallelChunk = 1ull << 14;

template <class T, class ChunkFn, class MergeFn>
T parallel_reduce(uint64_t n, int workers, T init, ChunkFn chunk, MergeFn merge) {
    if (n == 0) return init;
    uint64_t nchunks = (n + kParallelChunk - 1) / kParallelChunk;
    std::vector<T> parts(nchunks);
    if (workers <= 1 || nchunks == 1) {
        for (uint64_t c = 0; c < nchunks; ++c)
            parts[c] = chunk(c * kParallelChunk, std::min(n, (c + 1) * kParallelChunk));
    } else {
        std::vector<std::thread> pool;
        std::atomic<uint64_t> next{0};
        int tcount = std::min<uint64_t>(workers, nchunks);
        for (int t = 0; t < tcount; ++t) {
            pool.emplace_back([&] {
                uint64_t c;
                while ((c = next.fetch_add(1)) < nchunks)
                    parts[c] = chunk(c * kParallelChunk, std::min(n, (c + 1) * kParallelChunk));
            });
        }
        for (auto& th : pool) th.join();
    }
    T acc = init;
    for (uint64_t c = 0; c < nchunks; ++c) acc = merge(std::move(acc), std::move(parts[c]));
    return acc;
}

template <class ChunkFn>
void parallel_for(uint64_t n, int workers, ChunkFn chunk) {
    parallel_reduce<int>(
        n, workers, 0,
        [&](uint64_t b, uint64_t e) {
            chunk(b, e);
            return 0;
        },
        [](int a, int) { return a; });
}

}  // namespace mmll
