// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "narrbench/analysis.hpp"
#include "narrbench/dataset.hpp"
#include "narrbench/metrics.hpp"
#include "narrbench/process.hpp"
#include "narrbench/prompts.hpp"
#include "narrbench/record.hpp"
#include "narrbench/rng.hpp"
#include "narrbench/sandbox.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace narrbench;

namespace {

// ---- pinned tolerances and budgets ----
constexpr double kPassAtKTolerance = 1e-12;
constexpr double kPassAtKBudgetSeconds = 1.0;
constexpr int kPassAtKMaxN = 12;
constexpr int kPermutationSeeds = 1000;
constexpr double kPermutationBudgetSeconds = 1.0;
constexpr int kMwuMaxTotal = 12;
constexpr int kMwuDatasetsPerShape = 6;
constexpr double kMwuNormalTolerance = 0.02;
constexpr int kMwuNormalDatasets = 20;
constexpr double kMwuBudgetSeconds = 10.0;
constexpr std::size_t kSandboxCandidates = 20;
constexpr std::int64_t kSandboxTimeMs = 1500;
constexpr std::int64_t kSandboxMemoryMb = 512;
// TSV cells carry six decimals.
constexpr double kTableTolerance = 5e-7;

const fs::path kData = NARRBENCH_TEST_DATA;
const fs::path kCli = NARRBENCH_CLI_PATH;

struct Result {
    enum Kind { Pass, Fail, Skip } kind = Pass;
    std::string detail;
};

Result pass(std::string detail = {}) { return {Result::Pass, std::move(detail)}; }
Result fail(std::string detail) { return {Result::Fail, std::move(detail)}; }
Result skip(std::string detail) { return {Result::Skip, std::move(detail)}; }

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json load_json(const fs::path& p) { return json::parse(slurp(p)); }

// ---------------------------------------------------------------------------

Result pass_at_k_oracle() {
    const auto t0 = std::chrono::steady_clock::now();
    int checked = 0;
    double worst = 0;
    for (int n = 1; n <= kPassAtKMaxN; ++n) {
        for (int c = 0; c <= n; ++c) {
            for (int k = 1; k <= n; ++k) {
                const double expected = oracle::pass_at_k_subsets(n, c, k).value();
                const double got = pass_at_k(n, c, k);
                const double err = std::fabs(got - expected);
                worst = std::max(worst, err);
                if (err > kPassAtKTolerance)
                    return fail(fmt::format("n={} c={} k={}: got {:.17g}, oracle {:.17g}", n, c, k, got, expected));
                ++checked;
            }
        }
    }
    const double point = pass_at_k(10, 1, 5);
    if (std::fabs(point - 0.5) > kPassAtKTolerance) return fail(fmt::format("pass@5(n=10,c=1) = {:.17g}", point));
    const double elapsed = seconds_since(t0);
    if (elapsed >= kPassAtKBudgetSeconds) return fail(fmt::format("took {:.3f}s", elapsed));
    return pass(fmt::format("{} triples, max error {:.1e}, (10,1,5)=0.5, {:.3f}s", checked, worst, elapsed));
}

Result validity_fixture_suite() {
    const auto dir = kData / "narratives";
    const auto manifest = load_json(dir / "manifest.json");
    std::map<std::string, int> per_class;
    int correct = 0;
    for (const auto& item : manifest) {
        const auto raw = slurp(dir / item.at("file").get<std::string>());
        const auto v = parse_narrative(raw, item.at("max_tokens").get<std::size_t>(), true);
        const auto expected = item.at("expected").get<std::string>();
        ++per_class[expected];
        if (to_string(v.validity) != expected)
            return fail(fmt::format("{}: expected {}, got {}", item.at("file").get<std::string>(), expected,
                                    to_string(v.validity)));
        ++correct;
    }
    if (correct != 12) return fail(fmt::format("expected 12 fixtures, found {}", correct));
    for (auto v : {Validity::Valid, Validity::TooShort, Validity::DegenerateRepetition, Validity::MissingComponents}) {
        if (per_class[std::string(to_string(v))] != 3)
            return fail(fmt::format("class {} has {} fixtures, expected 3", to_string(v), per_class[std::string(to_string(v))]));
    }
    return pass("12/12 classified (3 per class)");
}

Result permutation_soundness() {
    std::vector<NarrativeVariant> variants;
    for (int j = 1; j <= 5; ++j) {
        NarrativeVariant v;
        v.problem_id = "fixture";
        v.variant_index = j;
        v.algorithm_category = Category::GraphAlgorithms;
        v.genre = fmt::format("genre-{}", j);
        v.task_overview = fmt::format("overview-{}", j);
        v.constraints = fmt::format("constraints-{}", j);
        v.example_io = fmt::format("examples-{}", j);
        v.validity = Validity::Valid;
        variants.push_back(v);
    }
    const auto t0 = std::chrono::steady_clock::now();
    std::size_t narratives = 0;
    std::size_t violations = 0;
    for (int seed = 0; seed < kPermutationSeeds; ++seed) {
        const auto out = permute_variants(variants, static_cast<std::uint64_t>(seed));
        if (out.size() != variants.size()) return fail(fmt::format("seed {}: {} outputs", seed, out.size()));
        for (const auto& p : out) {
            ++narratives;
            const auto& [j1, j2, j3] = *p.permutation;
            const bool sections_match = p.task_overview == fmt::format("overview-{}", j1) &&
                                        p.constraints == fmt::format("constraints-{}", j2) &&
                                        p.example_io == fmt::format("examples-{}", j3);
            if (!oracle::pairwise_distinct(j1, j2, j3) || !sections_match) ++violations;
        }
    }
    const double elapsed = seconds_since(t0);
    if (violations) return fail(fmt::format("{} violations in {} narratives", violations, narratives));
    if (elapsed >= kPermutationBudgetSeconds) return fail(fmt::format("took {:.3f}s", elapsed));
    return pass(fmt::format("{} seeds, {} narratives, 0 violations, {:.3f}s", kPermutationSeeds, narratives, elapsed));
}

std::vector<double> draw(SeededRng& rng, int size, bool ties) {
    std::vector<double> out;
    for (int i = 0; i < size; ++i) {
        out.push_back(ties ? static_cast<double>(rng.uniform_index(4))
                           : static_cast<double>(rng.uniform_index(1000000)) / 1000.0);
    }
    return out;
}

Result mann_whitney_oracle() {
    const auto t0 = std::chrono::steady_clock::now();
    SeededRng rng(20240601);
    int exact_checked = 0;
    for (int na = 1; na < kMwuMaxTotal; ++na) {
        for (int nb = 1; na + nb <= kMwuMaxTotal; ++nb) {
            for (int d = 0; d < kMwuDatasetsPerShape; ++d) {
                const auto a = draw(rng, na, d % 2 == 0);
                const auto b = draw(rng, nb, d % 2 == 0);
                const auto expected = oracle::mann_whitney_exact_enumerated(a, b);
                const auto got = mann_whitney_u_one_sided(a, b);
                const double u = static_cast<double>(oracle::doubled_u(a, b)) / 2.0;
                if (!got.exact) return fail(fmt::format("{}v{}: not computed exactly", na, nb));
                if (got.p != expected.value() || got.u != u)
                    return fail(fmt::format("{}v{}: p {:.17g} vs {:.17g}, u {} vs {}", na, nb, got.p,
                                            expected.value(), got.u, u));
                ++exact_checked;
            }
        }
    }
    double worst = 0;
    for (int d = 0; d < kMwuNormalDatasets; ++d) {
        const bool ties = d % 4 == 3;
        const auto a = draw(rng, 9, ties);
        auto b = draw(rng, 9, ties);
        if (d % 2 == 1) {
            for (auto& x : b) x -= ties ? 1.0 : 300.0;  // shift toward small p-values
        }
        const double exact = oracle::mann_whitney_exact_enumerated(a, b).value();
        const auto approx = mann_whitney_u_one_sided(a, b);
        if (approx.exact) return fail("9v9 did not use the normal approximation");
        worst = std::max(worst, std::fabs(approx.p - exact));
        if (std::fabs(approx.p - exact) > kMwuNormalTolerance)
            return fail(fmt::format("9v9 dataset {}: normal {:.6f}, exact {:.6f}", d, approx.p, exact));
    }
    const double elapsed = seconds_since(t0);
    if (elapsed >= kMwuBudgetSeconds) return fail(fmt::format("took {:.3f}s", elapsed));
    return pass(fmt::format("{} exact datasets identical; 9v9 max |normal-exact| {:.4f}; {:.2f}s", exact_checked,
                            worst, elapsed));
}

Result sandbox_determinism() {
    const auto corpus = load_json(kData / "sandbox" / "corpus.json");
    std::map<std::string, Problem> problems;
    std::size_t line = 0;
    for (const auto& p : corpus.at("problems")) {
        auto problem = problem_from_json(p, Source::Custom, ++line);
        problems[problem.id] = problem;
    }
    std::vector<CandidateSolution> candidates;
    for (const auto& c : corpus.at("candidates")) {
        const auto extracted = extract_code(c.at("output").get<std::string>());
        CandidateSolution cand;
        cand.problem_id = c.at("problem_id").get<std::string>();
        cand.source_code = extracted.source_code;
        cand.extraction_ok = extracted.extraction_ok;
        candidates.push_back(cand);
    }
    if (candidates.size() != kSandboxCandidates) return fail(fmt::format("corpus has {} candidates", candidates.size()));

    const Sandbox sandbox;
    const SandboxLimits limits{kSandboxTimeMs, kSandboxMemoryMb};
    const auto serial = sandbox.run_all(candidates, problems, limits, 1);
    const auto parallel = sandbox.run_all(candidates, problems, limits, 8);
    std::set<TestVerdict> kinds;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        const auto name = corpus.at("candidates")[i].at("name").get<std::string>();
        if (serial[i].per_test != parallel[i].per_test || serial[i].overall_correct != parallel[i].overall_correct)
            return fail(name + ": verdicts differ between parallelism 1 and 8");
        for (const auto* v : {&serial[i], &parallel[i]}) {
            const bool all_pass = !v->per_test.empty() &&
                                  std::all_of(v->per_test.begin(), v->per_test.end(),
                                              [](TestVerdict t) { return t == TestVerdict::Pass; });
            if (v->overall_correct != all_pass) return fail(name + ": overall_correct disagrees with per-test verdicts");
        }
        kinds.insert(serial[i].per_test.begin(), serial[i].per_test.end());
    }
    for (auto k : {TestVerdict::Pass, TestVerdict::WrongOutput, TestVerdict::Timeout, TestVerdict::RuntimeError,
                   TestVerdict::ExtractionFailed}) {
        if (!kinds.count(k)) return fail(fmt::format("corpus produced no {} verdict", to_string(k)));
    }
    return pass(fmt::format("{} candidates identical at parallelism 1 and 8", candidates.size()));
}

// ---- end-to-end ----

using TsvRows = std::vector<std::map<std::string, std::string>>;

TsvRows read_tsv(const fs::path& p) {
    std::istringstream in(slurp(p));
    std::string line;
    std::vector<std::string> header;
    TsvRows rows;
    auto split = [](const std::string& s) {
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream ss(s);
        while (std::getline(ss, cell, '\t')) cells.push_back(cell);
        if (!s.empty() && s.back() == '\t') cells.emplace_back();
        return cells;
    };
    if (std::getline(in, line)) header = split(line);
    while (std::getline(in, line)) {
        const auto cells = split(line);
        std::map<std::string, std::string> row;
        for (std::size_t i = 0; i < header.size(); ++i) row[header[i]] = i < cells.size() ? cells[i] : "";
        rows.push_back(std::move(row));
    }
    return rows;
}

const std::map<std::string, std::string>& row_where(const TsvRows& rows, const std::string& key,
                                                     const std::string& value) {
    for (const auto& r : rows) {
        if (r.at(key) == value) return r;
    }
    throw std::runtime_error("no row with " + key + "=" + value);
}

ProcessResult run_cli(const std::vector<std::string>& args) {
    ProcessSpec spec;
    spec.argv = {kCli.string()};
    spec.argv.insert(spec.argv.end(), args.begin(), args.end());
    const char* path = std::getenv("PATH");
    spec.env = {std::string("PATH=") + (path ? path : "/usr/bin:/bin"), "NARRBENCH_ASTPROBE=/nonexistent/astprobe"};
    ProcessLimits limits;
    limits.time_ms = 300000;
    limits.memory_mb = 0;
    return run_process(spec, limits);
}

Result end_to_end_mock_run() {
    TempDir tmp("narrbench-accept");
    const auto out = tmp.path() / "out";
    const auto run = run_cli({"run", "--config", (kData / "e2e" / "config.json").string(), "--output-dir", out.string()});
    if (!run.success()) return fail("narrbench run failed: " + run.stderr_data);

    // Record-level view.
    const auto record = RunRecord::load(out / "record.jsonl");
    const RunView view(record);
    if (view.problem_ids().size() != 4) return fail("record lists the wrong problems");
    if (record.executions.size() != 76) return fail(fmt::format("{} executions recorded, expected 76", record.executions.size()));

    const auto reports = out / "reports";
    const auto summary = read_tsv(reports / "summary.tsv");
    const auto agreement = read_tsv(reports / "agreement.tsv");
    const auto decomposition = read_tsv(reports / "decomposition.tsv");
    const auto per_problem = read_tsv(reports / "decomposition_problems.tsv");

    std::vector<std::string> mismatches;
    auto expect_real = [&](const std::string& what, const std::string& cell, double expected) {
        if (cell == "NA" || std::fabs(std::stod(cell) - expected) > kTableTolerance)
            mismatches.push_back(fmt::format("{}: {} != {:.6f}", what, cell, expected));
    };
    auto expect_text = [&](const std::string& what, const std::string& cell, const std::string& expected) {
        if (cell != expected) mismatches.push_back(fmt::format("{}: {} != {}", what, cell, expected));
    };

    // Hand-traced values (see tests/data/e2e/README.md).
    expect_real("RS pass@10", row_where(summary, "arm", "RepeatedSampling").at("pass@10"), 0.5);
    expect_real("Narrative pass@10", row_where(summary, "arm", "Narrative").at("pass@10"), 0.75);
    expect_real("NarrativeOnly pass@10", row_where(summary, "arm", "NarrativeOnly").at("pass@10"), 0.75);
    expect_real("NarrativeConcat pass@10", row_where(summary, "arm", "NarrativeConcat").at("pass@10"), 0.5);
    expect_real("RS pass@5", row_where(summary, "arm", "RepeatedSampling").at("pass@5"), (1.0 - 21.0 / 252.0 + 1.0) / 4.0);
    expect_real("RS coverage", row_where(summary, "arm", "RepeatedSampling").at("coverage"), 0.5);
    expect_real("Narrative coverage", row_where(summary, "arm", "Narrative").at("coverage"), 0.75);
    expect_real("Narrative used ratio", row_where(summary, "arm", "Narrative").at("used_samples_ratio"), 36.0 / 40.0);
    expect_real("RS agreement", row_where(agreement, "arm", "RepeatedSampling").at("agreement_ratio"), 10.0 / 13.0);
    expect_real("Narrative agreement", row_where(agreement, "arm", "Narrative").at("agreement_ratio"), 20.0 / 22.0);
    expect_real("NarrativeOnly agreement", row_where(agreement, "arm", "NarrativeOnly").at("agreement_ratio"), 1.0);
    expect_real("NarrativeConcat agreement", row_where(agreement, "arm", "NarrativeConcat").at("agreement_ratio"), 0.8);
    const auto& orig = row_where(decomposition, "condition", "original");
    const auto& narr = row_where(decomposition, "condition", "narrative");
    expect_text("included problems", orig.at("included_problems"), "2");
    expect_text("excluded problems", orig.at("excluded_problems"), "2");
    expect_text("original correct", orig.at("correct"), "3");
    expect_text("original implementation errors", orig.at("implementation_error"), "9");
    expect_text("original wrong algorithm", orig.at("wrong_algorithm"), "8");
    expect_text("narrative correct", narr.at("correct"), "12");
    expect_text("narrative implementation errors", narr.at("implementation_error"), "0");
    expect_text("narrative wrong algorithm", narr.at("wrong_algorithm"), "4");
    expect_text("p1 golden", row_where(per_problem, "problem_id", "p1").at("golden_algorithm"), "MathematicsAndNumberTheory");
    expect_text("p4 golden", row_where(per_problem, "problem_id", "p4").at("golden_algorithm"), "GraphAlgorithms");
    expect_text("p2 excluded", row_where(per_problem, "problem_id", "p2").at("excluded_trivial"), "yes");
    expect_text("p3 excluded", row_where(per_problem, "problem_id", "p3").at("excluded_trivial"), "yes");
    if (!mismatches.empty()) {
        std::string all;
        for (const auto& m : mismatches) all += (all.empty() ? "" : "; ") + m;
        return fail(all);
    }

    // Without a probe the structural analysis is reported as unavailable.
    if (slurp(reports / "notices.txt").find("probe unavailable") == std::string::npos)
        return fail("missing 'probe unavailable' notice");
    if (fs::exists(reports / "ast_metrics.tsv")) return fail("ast_metrics.tsv written without a probe");

    // Replay regenerates the same tables byte for byte.
    const auto replayed = tmp.path() / "replay";
    const auto replay = run_cli({"replay", "--record", (out / "record.jsonl").string(), "--out", replayed.string()});
    if (!replay.success()) return fail("narrbench replay failed: " + replay.stderr_data);
    std::size_t tables = 0;
    for (const auto& entry : fs::directory_iterator(reports)) {
        const auto name = entry.path().filename();
        if (!fs::exists(replayed / name)) return fail("replay did not produce " + name.string());
        if (slurp(entry.path()) != slurp(replayed / name)) return fail("replayed " + name.string() + " differs");
        ++tables;
    }
    for (const auto& entry : fs::directory_iterator(replayed)) {
        if (!fs::exists(reports / entry.path().filename()))
            return fail("replay produced extra file " + entry.path().filename().string());
    }

    // Shipped golden tables.
    std::size_t goldens = 0;
    for (const auto& entry : fs::directory_iterator(kData / "e2e" / "golden")) {
        const auto produced = reports / entry.path().filename();
        if (!fs::exists(produced) || slurp(produced) != slurp(entry.path()))
            return fail("table differs from golden " + entry.path().filename().string());
        ++goldens;
    }
    return pass(fmt::format("hand-traced values match; replay byte-identical on {} files; {} goldens match", tables,
                            goldens));
}

Result decomposition_exclusion() {
    auto set = [](const std::string& pid, const std::string& arm, std::vector<std::pair<bool, Category>> samples) {
        std::vector<SampleRecord> records;
        int i = 0;
        for (const auto& [correct, cat] : samples) records.push_back({arm + std::to_string(i++), arm, correct, cat});
        return SampleSet::from_samples(pid, std::move(records));
    };
    const auto G = Category::GraphAlgorithms;
    const auto D = Category::DynamicProgramming;
    // both all-correct
    const auto a_orig = set("A", "rs", {{true, G}, {true, G}});
    const auto a_narr = set("A", "narr", {{true, G}, {true, D}});
    // both all-incorrect
    const auto b_orig = set("B", "rs", {{false, G}, {false, D}, {false, D}});
    const auto b_narr = set("B", "narr", {{false, D}});
    // mixed
    const auto c_orig = set("C", "rs", {{true, G}, {false, G}, {false, D}, {false, D}});
    const auto c_narr = set("C", "narr", {{true, G}, {true, G}, {false, G}});

    std::vector<ProblemDecomposition> all{decompose(a_orig, a_narr, std::nullopt),
                                          decompose(b_orig, b_narr, std::nullopt), decompose(c_orig, c_narr, G)};
    if (!all[0].excluded_trivial || !all[1].excluded_trivial) return fail("trivial fixtures not marked excluded_trivial");
    if (all[2].excluded_trivial) return fail("mixed fixture marked excluded_trivial");
    for (int i = 0; i < 2; ++i) {
        if (all[i].original.classified() != 0 || all[i].narrative.classified() != 0)
            return fail("excluded fixture was classified");
    }
    const auto summary = aggregate(all);
    const auto only_c = aggregate({all[2]});
    if (summary.included_problems != 1 || summary.excluded_problems != 2)
        return fail(fmt::format("included {} excluded {}", summary.included_problems, summary.excluded_problems));
    for (auto o : {narrbench::Outcome::CorrectSolution, narrbench::Outcome::ImplementationError, narrbench::Outcome::WrongAlgorithm}) {
        for (const auto& [got, want] : {std::pair{&summary.original, &only_c.original},
                                        std::pair{&summary.narrative, &only_c.narrative}}) {
            if (DecompositionSummary::ratio(*got, o) != DecompositionSummary::ratio(*want, o))
                return fail("aggregate ratios include excluded problems");
        }
    }
    // C original: 1 correct, 1 implementation error, 2 wrong algorithm.
    if (summary.original.counts.at(narrbench::Outcome::CorrectSolution) != 1 ||
        summary.original.counts.at(narrbench::Outcome::ImplementationError) != 1 ||
        summary.original.counts.at(narrbench::Outcome::WrongAlgorithm) != 2)
        return fail("mixed fixture counts wrong");
    return pass("2 trivial problems excluded; ratios equal those of the included problem alone");
}

Result dataset_filter_counts() {
    const char* dir_env = std::getenv("NARRBENCH_DATA_DIR");
    if (!dir_env || !*dir_env)
        return skip("NARRBENCH_DATA_DIR not set; real benchmark dumps absent, counts not checked");
    const fs::path dir(dir_env);
    std::vector<std::string> checked, skipped, failures;
    auto expect = [&](const std::string& what, std::size_t got, std::size_t want) {
        if (got != want) failures.push_back(fmt::format("{}: {} (expected {})", what, got, want));
        else checked.push_back(fmt::format("{}={}", what, got));
    };

    if (fs::exists(dir / "humaneval.jsonl")) {
        DatasetFilterSpec spec;
        spec.require_examples = true;
        if (fs::exists(dir / "humaneval_ids.txt")) {
            std::vector<std::string> ids;
            std::istringstream in(slurp(dir / "humaneval_ids.txt"));
            for (std::string id; std::getline(in, id);) {
                if (!id.empty()) ids.push_back(id);
            }
            spec.id_allowlist = ids;
        }
        expect("HumanEval", apply_filter(load_problems(dir / "humaneval.jsonl", Source::HumanEval), spec).size(), 105);
    } else {
        skipped.push_back("humaneval.jsonl");
    }
    if (fs::exists(dir / "livecodebench_v6.jsonl")) {
        expect("LiveCodeBench", load_problems(dir / "livecodebench_v6.jsonl", Source::LiveCodeBench).size(), 175);
    } else {
        skipped.push_back("livecodebench_v6.jsonl");
    }
    if (fs::exists(dir / "codeforces.jsonl")) {
        const auto all = load_problems(dir / "codeforces.jsonl", Source::CodeForces);
        DatasetFilterSpec spec;
        spec.max_length = 1000;
        spec.min_rating = 2000;
        spec.require_examples = true;
        expect("CodeForces", apply_filter(all, spec).size(), 265);
        try {
            expect("CodeForces-L", sample_long_subset(all, 1000, 128, 0).size(), 128);
        } catch (const InsufficientPool& e) {
            failures.push_back(std::string("CodeForces-L: ") + e.what());
        }
    } else {
        skipped.push_back("codeforces.jsonl");
    }

    auto join = [](const std::vector<std::string>& xs) {
        std::string s;
        for (const auto& x : xs) s += (s.empty() ? "" : ", ") + x;
        return s;
    };
    if (!failures.empty()) return fail(join(failures));
    if (checked.empty()) return skip("no dumps found in " + dir.string());
    return pass(join(checked) + (skipped.empty() ? "" : "; absent: " + join(skipped)));
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Result()>>> criteria = {
        {"pass_at_k_oracle_equivalence", pass_at_k_oracle},
        {"validity_filter_fixture_suite", validity_fixture_suite},
        {"permutation_soundness", permutation_soundness},
        {"mann_whitney_oracle", mann_whitney_oracle},
        {"sandbox_determinism", sandbox_determinism},
        {"end_to_end_mock_run", end_to_end_mock_run},
        {"decomposition_exclusion_rule", decomposition_exclusion},
        {"dataset_filter_counts", dataset_filter_counts},
    };
    int failed = 0;
    for (const auto& [name, run] : criteria) {
        Result o;
        try {
            o = run();
        } catch (const std::exception& e) {
            o = fail(std::string("exception: ") + e.what());
        }
        const char* label = o.kind == Result::Pass ? "PASS" : o.kind == Result::Fail ? "FAIL" : "SKIP";
        if (o.kind == Result::Fail) ++failed;
        std::cout << label << "  " << name << (o.detail.empty() ? "" : "  -- " + o.detail) << std::endl;
    }
    std::cout << (failed ? fmt::format("{} criterion(s) failed", failed) : std::string("all criteria passed"))
              << std::endl;
    return failed ? 1 : 0;
}
