#pragma once

// Brute-force reference implementations. Deliberately naive: they enumerate
// every subset instead of using closed forms, so they share no code path
// with the library.

#include <bit>
#include <cstdint>
#include <vector>

namespace oracle {

struct Ratio {
    std::uint64_t hits = 0;
    std::uint64_t total = 0;

    double value() const { return static_cast<double>(hits) / static_cast<double>(total); }
};

/// Samples 0..c-1 are correct. Counts the size-k subsets of n samples that
/// contain at least one correct sample.
inline Ratio pass_at_k_subsets(int n, int c, int k) {
    Ratio r;
    const std::uint32_t correct = (c == 0) ? 0u : ((1u << c) - 1u);
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
        if (std::popcount(mask) != k) continue;
        ++r.total;
        if (mask & correct) ++r.hits;
    }
    return r;
}

/// U of `a` counted in half-units: 2 per pair with a > b, 1 per tie.
inline std::int64_t doubled_u(const std::vector<double>& a, const std::vector<double>& b) {
    std::int64_t u = 0;
    for (double x : a)
        for (double y : b) u += x > y ? 2 : (x == y ? 1 : 0);
    return u;
}

/// One-sided exact p-value P(U >= U_obs) by enumerating every way to split
/// the pooled values into groups of |a| and |b|.
inline Ratio mann_whitney_exact_enumerated(const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<double> pooled(a);
    pooled.insert(pooled.end(), b.begin(), b.end());
    const int n = static_cast<int>(pooled.size());
    const int na = static_cast<int>(a.size());
    const auto observed = doubled_u(a, b);
    Ratio r;
    std::vector<double> ga, gb;
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
        if (std::popcount(mask) != na) continue;
        ga.clear();
        gb.clear();
        for (int i = 0; i < n; ++i) ((mask >> i) & 1u ? ga : gb).push_back(pooled[i]);
        ++r.total;
        if (doubled_u(ga, gb) >= observed) ++r.hits;
    }
    return r;
}

/// True iff the three source indices are pairwise distinct.
inline bool pairwise_distinct(int x, int y, int z) { return x != y && y != z && x != z; }

}  // namespace oracle
