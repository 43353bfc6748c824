#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace narrbench {

// Deterministic generator for every seeded draw in the harness.
//
// std::mt19937_64's output sequence is fixed by the standard, but the
// standard distributions and std::shuffle are not, so bounded draws are done
// here by rejection sampling on raw 64-bit outputs. Results are therefore
// identical across standard library implementations.
class SeededRng {
public:
    explicit SeededRng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    /// Uniform integer in [0, bound). bound must be > 0.
    std::uint64_t uniform_index(std::uint64_t bound) {
        const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % bound);
        std::uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return x % bound;
    }

private:
    std::mt19937_64 engine_;
};

/// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Derive a per-item seed from a run seed and a stable item key
/// (e.g. "p17/3"). Pure function of its inputs.
std::uint64_t derive_seed(std::uint64_t base, std::string_view key);

}  // namespace narrbench
