// Deterministic seeding and a minimal thread pool for index-parallel maps.
#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <string_view>

namespace ablab {

using Rng = std::mt19937_64;

/// splitmix64 finalizer; the standard 64-bit bit mixer.
inline uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline uint64_t fnv1a(std::string_view s) {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// Derives an independent stream seed from (master, purpose tag, task index).
/// Tasks store results by index and reduce in order, so results do not depend
/// on the thread count.
inline uint64_t derive_seed(uint64_t master, std::string_view purpose, uint64_t index) {
    return splitmix64(splitmix64(master ^ fnv1a(purpose)) + index);
}

/// Uniform double in [0,1) from the top 53 bits; avoids the
/// implementation-defined std::uniform_real_distribution.
inline double rand_u01(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1p-53;
}

/// Fair +-1.
inline int rand_sign(Rng& rng) {
    return (rng() >> 63) ? 1 : -1;
}

/// Uniform integer in [0, n).
inline uint64_t rand_below(Rng& rng, uint64_t n) {
    return rng() % n;
}

/// Runs fn(0..n_tasks-1) on up to `threads` workers. Callers must write
/// results into per-index slots; the reduction order is then deterministic.
void parallel_for(int n_tasks, int threads, const std::function<void(int)>& fn);

}  // namespace ablab
