#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "narrbench/category.hpp"

namespace narrbench {

/// Unbiased pass@k: 1 - C(n-c, k) / C(n, k), evaluated as
/// 1 - prod_{i<k} (n-c-i)/(n-i). Throws DomainError unless 0 <= c <= n and
/// 1 <= k <= n.
double pass_at_k(std::int64_t n, std::int64_t c, std::int64_t k);

struct SampleRecord {
    std::string key;       // unique within its problem
    std::string strategy;
    bool correct = false;
    std::optional<Category> back_translated;
};

struct SampleSet {
    std::string problem_id;
    std::int64_t n = 0;
    std::int64_t c = 0;
    std::vector<SampleRecord> per_sample;

    /// n and c derived from the samples.
    static SampleSet from_samples(std::string problem_id, std::vector<SampleRecord> samples);
    /// Throws DomainError if 0 <= c <= n fails or c disagrees with the flags.
    void validate() const;
};

/// Fraction of problems with at least one correct sample. Throws EmptyInput.
double coverage(const std::vector<SampleSet>& sets);

using IntendedMap = std::map<std::pair<std::string, std::string>, Category>;  // (problem_id, key)

/// Correct samples whose back-translation equals the intended category, over
/// all correct samples. Throws NoCorrectSamples, MissingBackTranslation, and
/// DomainError when a correct sample has no intended category.
double agreement_ratio(const std::vector<SampleSet>& sets, const IntendedMap& intended);

struct GoldenAlgorithm {
    Category category;
    bool tie = false;
};

/// Modal category; ties go to the earliest category in canonical order.
std::optional<GoldenAlgorithm> golden_algorithm(const std::vector<Category>& back_translations);

enum class Outcome { CorrectSolution, ImplementationError, WrongAlgorithm };
std::string_view to_string(Outcome o);

struct DecompositionOutcome {
    std::map<Outcome, std::int64_t> counts{
        {Outcome::CorrectSolution, 0}, {Outcome::ImplementationError, 0}, {Outcome::WrongAlgorithm, 0}};
    std::optional<Category> golden_algorithm;
    bool excluded_trivial = false;

    std::int64_t classified() const;
};

struct ProblemDecomposition {
    std::string problem_id;
    DecompositionOutcome original;
    DecompositionOutcome narrative;
    bool excluded_trivial = false;
};

/// True when both conditions are all-correct or both are all-incorrect. A
/// condition with no samples cannot be compared and also counts as trivial.
bool is_trivial_pair(const SampleSet& original, const SampleSet& narrative);

/// Classifies every sample of both conditions against the golden algorithm.
/// Trivial problems are flagged and left unclassified. Throws DomainError if a
/// non-trivial problem has no golden algorithm and MissingBackTranslation for
/// an incorrect sample without one.
ProblemDecomposition decompose(const SampleSet& original, const SampleSet& narrative,
                               std::optional<Category> golden);

struct DecompositionSummary {
    std::size_t included_problems = 0;
    std::size_t excluded_problems = 0;
    DecompositionOutcome original;   // summed counts over included problems
    DecompositionOutcome narrative;

    static double ratio(const DecompositionOutcome& o, Outcome which);
};

DecompositionSummary aggregate(const std::vector<ProblemDecomposition>& problems);

struct MannWhitneyResult {
    double u = 0;       // U of `a`: pairs with a > b, ties counted 1/2
    double p = 1;
    bool exact = false;
};

enum class Alternative { AGreater };

/// Exact below min(|a|, |b|) = 8, normal approximation otherwise. Throws
/// EmptyInput.
MannWhitneyResult mann_whitney_u_one_sided(const std::vector<double>& a, const std::vector<double>& b,
                                           Alternative alternative = Alternative::AGreater);

/// P(U >= U_obs) over all equally likely splits of the pooled values.
MannWhitneyResult mann_whitney_exact(const std::vector<double>& a, const std::vector<double>& b);

/// Tie-corrected normal approximation with a 0.5 continuity correction.
MannWhitneyResult mann_whitney_normal(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace narrbench
