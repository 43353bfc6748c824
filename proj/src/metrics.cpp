#include "narrbench/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "narrbench/errors.hpp"

namespace narrbench {

double pass_at_k(std::int64_t n, std::int64_t c, std::int64_t k) {
    if (n < 0 || c < 0 || c > n) throw DomainError("pass_at_k needs 0 <= c <= n");
    if (k < 1 || k > n) throw DomainError("pass_at_k needs 1 <= k <= n");
    if (n - c < k) return 1.0;
    double miss = 1.0;
    for (std::int64_t i = 0; i < k; ++i) {
        miss *= static_cast<double>(n - c - i) / static_cast<double>(n - i);
    }
    return 1.0 - miss;
}

SampleSet SampleSet::from_samples(std::string problem_id, std::vector<SampleRecord> samples) {
    SampleSet s;
    s.problem_id = std::move(problem_id);
    s.n = static_cast<std::int64_t>(samples.size());
    s.c = std::count_if(samples.begin(), samples.end(), [](const SampleRecord& r) { return r.correct; });
    s.per_sample = std::move(samples);
    return s;
}

void SampleSet::validate() const {
    if (c < 0 || c > n) throw DomainError("sample set " + problem_id + ": need 0 <= c <= n");
    if (!per_sample.empty()) {
        const auto flagged = std::count_if(per_sample.begin(), per_sample.end(),
                                           [](const SampleRecord& r) { return r.correct; });
        if (flagged != c) throw DomainError("sample set " + problem_id + ": c disagrees with correct flags");
    }
}

double coverage(const std::vector<SampleSet>& sets) {
    if (sets.empty()) throw EmptyInput("coverage of an empty problem list");
    std::size_t solved = 0;
    for (const auto& s : sets) {
        s.validate();
        if (s.c >= 1) ++solved;
    }
    return static_cast<double>(solved) / static_cast<double>(sets.size());
}

double agreement_ratio(const std::vector<SampleSet>& sets, const IntendedMap& intended) {
    std::int64_t correct = 0;
    std::int64_t matching = 0;
    for (const auto& s : sets) {
        for (const auto& r : s.per_sample) {
            if (!r.correct) continue;
            if (!r.back_translated) throw MissingBackTranslation(s.problem_id + "/" + r.key);
            const auto it = intended.find({s.problem_id, r.key});
            if (it == intended.end()) throw DomainError("no intended category for " + s.problem_id + "/" + r.key);
            ++correct;
            if (*r.back_translated == it->second) ++matching;
        }
    }
    if (correct == 0) throw NoCorrectSamples();
    return static_cast<double>(matching) / static_cast<double>(correct);
}

std::optional<GoldenAlgorithm> golden_algorithm(const std::vector<Category>& back_translations) {
    if (back_translations.empty()) return std::nullopt;
    std::map<Category, std::size_t> votes;
    for (auto c : back_translations) ++votes[c];
    std::optional<GoldenAlgorithm> best;
    std::size_t best_votes = 0;
    for (auto c : kAllCategories) {
        const auto it = votes.find(c);
        if (it == votes.end()) continue;
        if (!best || it->second > best_votes) {
            best = GoldenAlgorithm{c, false};
            best_votes = it->second;
        } else if (it->second == best_votes) {
            best->tie = true;
        }
    }
    return best;
}

std::string_view to_string(Outcome o) {
    switch (o) {
        case Outcome::CorrectSolution: return "CorrectSolution";
        case Outcome::ImplementationError: return "ImplementationError";
        case Outcome::WrongAlgorithm: return "WrongAlgorithm";
    }
    return "CorrectSolution";
}

std::int64_t DecompositionOutcome::classified() const {
    std::int64_t total = 0;
    for (const auto& [_, n] : counts) total += n;
    return total;
}

bool is_trivial_pair(const SampleSet& original, const SampleSet& narrative) {
    if (original.n == 0 || narrative.n == 0) return true;
    const bool all_correct = original.c == original.n && narrative.c == narrative.n;
    const bool all_wrong = original.c == 0 && narrative.c == 0;
    return all_correct || all_wrong;
}

namespace {

DecompositionOutcome classify(const SampleSet& set, Category golden) {
    DecompositionOutcome out;
    out.golden_algorithm = golden;
    for (const auto& r : set.per_sample) {
        if (r.correct) {
            ++out.counts[Outcome::CorrectSolution];
            continue;
        }
        if (!r.back_translated) throw MissingBackTranslation(set.problem_id + "/" + r.key);
        ++out.counts[*r.back_translated == golden ? Outcome::ImplementationError : Outcome::WrongAlgorithm];
    }
    return out;
}

}  // namespace

ProblemDecomposition decompose(const SampleSet& original, const SampleSet& narrative,
                               std::optional<Category> golden) {
    original.validate();
    narrative.validate();
    ProblemDecomposition d;
    d.problem_id = original.problem_id;
    if (is_trivial_pair(original, narrative)) {
        d.excluded_trivial = d.original.excluded_trivial = d.narrative.excluded_trivial = true;
        d.original.golden_algorithm = d.narrative.golden_algorithm = golden;
        return d;
    }
    if (!golden) throw DomainError("decomposition of " + original.problem_id + " needs a golden algorithm");
    d.original = classify(original, *golden);
    d.narrative = classify(narrative, *golden);
    return d;
}

double DecompositionSummary::ratio(const DecompositionOutcome& o, Outcome which) {
    const auto total = o.classified();
    if (total == 0) return 0.0;
    return static_cast<double>(o.counts.at(which)) / static_cast<double>(total);
}

DecompositionSummary aggregate(const std::vector<ProblemDecomposition>& problems) {
    DecompositionSummary s;
    for (const auto& p : problems) {
        if (p.excluded_trivial) {
            ++s.excluded_problems;
            continue;
        }
        ++s.included_problems;
        for (const auto& [k, n] : p.original.counts) s.original.counts[k] += n;
        for (const auto& [k, n] : p.narrative.counts) s.narrative.counts[k] += n;
    }
    return s;
}

// ---------------------------------------------------------------------------
// Mann-Whitney U
// ---------------------------------------------------------------------------

namespace {

struct Pooled {
    std::vector<std::int64_t> doubled_ranks;  // 2 * midrank, in pooled order
    std::vector<bool> from_a;
    double tie_term = 0;                      // sum of t^3 - t over tie groups
};

Pooled pool(const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<std::pair<double, bool>> all;
    all.reserve(a.size() + b.size());
    for (double x : a) all.emplace_back(x, true);
    for (double x : b) all.emplace_back(x, false);
    std::stable_sort(all.begin(), all.end(), [](const auto& l, const auto& r) { return l.first < r.first; });

    Pooled p;
    p.doubled_ranks.resize(all.size());
    p.from_a.resize(all.size());
    std::size_t i = 0;
    while (i < all.size()) {
        std::size_t j = i;
        while (j < all.size() && all[j].first == all[i].first) ++j;
        // positions i..j-1 hold ranks i+1..j; doubled midrank = i + 1 + j
        const auto doubled = static_cast<std::int64_t>(i + 1 + j);
        const double t = static_cast<double>(j - i);
        p.tie_term += t * t * t - t;
        for (std::size_t m = i; m < j; ++m) {
            p.doubled_ranks[m] = doubled;
            p.from_a[m] = all[m].second;
        }
        i = j;
    }
    return p;
}

void require_nonempty(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.empty() || b.empty()) throw EmptyInput("Mann-Whitney U needs two non-empty samples");
    for (const auto* v : {&a, &b}) {
        for (double x : *v) {
            if (std::isnan(x)) throw DomainError("Mann-Whitney U input contains NaN");
        }
    }
}

double u_from_doubled_rank_sum(std::int64_t doubled_sum, std::size_t na) {
    const auto n = static_cast<double>(na);
    return static_cast<double>(doubled_sum) / 2.0 - n * (n + 1) / 2.0;
}

}  // namespace

MannWhitneyResult mann_whitney_exact(const std::vector<double>& a, const std::vector<double>& b) {
    require_nonempty(a, b);
    const auto p = pool(a, b);
    const std::size_t na = a.size();
    std::int64_t observed = 0;
    for (std::size_t i = 0; i < p.doubled_ranks.size(); ++i) {
        if (p.from_a[i]) observed += p.doubled_ranks[i];
    }
    const std::int64_t max_sum = std::accumulate(p.doubled_ranks.begin(), p.doubled_ranks.end(), std::int64_t{0});

    // ways[j][s]: subsets of size j with doubled rank sum s.
    std::vector<std::vector<long double>> ways(na + 1, std::vector<long double>(max_sum + 1, 0.0L));
    ways[0][0] = 1.0L;
    for (std::size_t item = 0; item < p.doubled_ranks.size(); ++item) {
        const auto r = p.doubled_ranks[item];
        for (std::size_t j = std::min(na, item + 1); j >= 1; --j) {
            auto& dst = ways[j];
            const auto& src = ways[j - 1];
            for (std::int64_t s = max_sum; s >= r; --s) dst[s] += src[s - r];
        }
    }
    long double hits = 0;
    long double total = 0;
    for (std::int64_t s = 0; s <= max_sum; ++s) {
        total += ways[na][s];
        if (s >= observed) hits += ways[na][s];
    }
    MannWhitneyResult out;
    out.u = u_from_doubled_rank_sum(observed, na);
    out.p = static_cast<double>(hits) / static_cast<double>(total);
    out.exact = true;
    return out;
}

MannWhitneyResult mann_whitney_normal(const std::vector<double>& a, const std::vector<double>& b) {
    require_nonempty(a, b);
    const auto p = pool(a, b);
    std::int64_t observed = 0;
    for (std::size_t i = 0; i < p.doubled_ranks.size(); ++i) {
        if (p.from_a[i]) observed += p.doubled_ranks[i];
    }
    const auto na = static_cast<double>(a.size());
    const auto nb = static_cast<double>(b.size());
    const double n = na + nb;
    MannWhitneyResult out;
    out.u = u_from_doubled_rank_sum(observed, a.size());
    const double mean = na * nb / 2.0;
    const double var = na * nb / 12.0 * ((n + 1.0) - p.tie_term / (n * (n - 1.0)));
    if (!(var > 0)) {
        out.p = 1.0;
        return out;
    }
    const double z = (out.u - mean - 0.5) / std::sqrt(var);
    out.p = std::clamp(0.5 * std::erfc(z / std::sqrt(2.0)), std::numeric_limits<double>::min(), 1.0);
    return out;
}

MannWhitneyResult mann_whitney_u_one_sided(const std::vector<double>& a, const std::vector<double>& b,
                                           Alternative alternative) {
    (void)alternative;  // only AGreater exists
    require_nonempty(a, b);
    if (std::min(a.size(), b.size()) < 8) return mann_whitney_exact(a, b);
    return mann_whitney_normal(a, b);
}

}  // namespace narrbench
