#include "narrbench/analysis.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>

#include <fmt/format.h>

#include "narrbench/errors.hpp"
#include "narrbench/rng.hpp"
#include "narrbench/text.hpp"

namespace narrbench {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Tags
// ---------------------------------------------------------------------------

std::string narrative_tag(const std::string& problem_id, NarrativeFamily family, int j) {
    return fmt::format("{}/narr/{}/{}", problem_id, to_string(family), j);
}

std::string solve_tag(const std::string& problem_id, const std::string& arm, std::optional<int> variant, int sample) {
    if (variant) return fmt::format("{}/solve/{}/v{}/s{}", problem_id, arm, *variant, sample);
    return fmt::format("{}/solve/{}/s{}", problem_id, arm, sample);
}

std::string back_translation_tag(const std::string& solve_tag, bool retry) {
    // Problem ids may contain '/', so the last "/solve/" is the stage marker.
    std::string tag = solve_tag;
    const auto pos = tag.rfind("/solve/");
    if (pos == std::string::npos) throw DomainError("not a solve tag: " + solve_tag);
    tag.replace(pos, 7, "/alg/");
    if (retry) tag += "/retry";
    return tag;
}

const std::string& misaligned_genre(const RunConfig& config, const std::string& problem_id, int j) {
    return MisalignedGenreSet::shipped().draw(
        derive_seed(config.seeds.misalignment, narrative_tag(problem_id, NarrativeFamily::Misaligned, j)));
}

// ---------------------------------------------------------------------------
// RunView
// ---------------------------------------------------------------------------

namespace {

bool is_direct_kind(StrategyKind k) {
    return k == StrategyKind::RepeatedSampling || k == StrategyKind::CoT || k == StrategyKind::SCoT ||
           k == StrategyKind::ExternalTemplate;
}

std::string noio(const std::string& arm) { return arm + ":noio"; }

std::pair<std::string, std::string> combined_parts(const std::string& arm) {
    if (arm == kCombinedNarrativeArm) return {"NarrativeOnly", "NarrativeConcat"};
    if (arm == noio(std::string(kCombinedNarrativeArm))) return {"NarrativeOnly:noio", "NarrativeConcat:noio"};
    return {};
}

}  // namespace

RunView::RunView(const RunRecord& record) : record_(&record) {
    if (!record.last_run) throw MissingField("record", "run entry");
    try {
        config_ = run_config_from_json(record.last_run->at("config"), "/");
        problem_ids_ = record.last_run->at("problems").get<std::vector<std::string>>();
    } catch (const json::exception& e) {
        throw MissingField("record", std::string("run entry: ") + e.what());
    }
    for (const auto& [tag, e] : record.executions) by_arm_[{e.problem_id, e.arm}].push_back(&e);
}

std::vector<NarrativeVariant> RunView::variants(const std::string& problem_id, NarrativeFamily family) const {
    std::vector<NarrativeVariant> out;
    for (int j = 1; j <= config_.n_variants; ++j) {
        const auto tag = narrative_tag(problem_id, family, j);
        const auto it = record_->generations.find(tag);
        if (it == record_->generations.end() || !it->second.response) continue;
        const auto max_tokens = it->second.request.value("max_tokens", kDefaultMaxTokens);
        auto v = parse_narrative(it->second.response->text, static_cast<std::size_t>(max_tokens),
                                 family != NarrativeFamily::NoTag);
        v.problem_id = problem_id;
        v.variant_index = j;
        out.push_back(std::move(v));
    }
    return out;
}

std::map<int, std::string> RunView::paraphrases(const std::string& problem_id) const {
    std::map<int, std::string> out;
    for (int j = 1; j <= config_.n_variants; ++j) {
        const auto* r = record_->response(narrative_tag(problem_id, NarrativeFamily::Paraphrase, j));
        if (r && !text::trim(r->text).empty()) out[j] = std::string(text::trim(r->text));
    }
    return out;
}

std::vector<const ExecutionEntry*> RunView::executions(const std::string& problem_id, const std::string& arm) const {
    const auto parts = combined_parts(arm);
    if (!parts.first.empty()) {
        auto out = executions(problem_id, parts.first);
        const auto more = executions(problem_id, parts.second);
        out.insert(out.end(), more.begin(), more.end());
        return out;
    }
    const auto it = by_arm_.find({problem_id, arm});
    return it == by_arm_.end() ? std::vector<const ExecutionEntry*>{} : it->second;
}

SampleSet RunView::samples(const std::string& problem_id, const std::string& arm) const {
    std::vector<SampleRecord> samples;
    for (const auto* e : executions(problem_id, arm)) {
        samples.push_back({e->tag, e->arm, e->verdict.overall_correct, back_translation(e->tag)});
    }
    return SampleSet::from_samples(problem_id, std::move(samples));
}

std::optional<Category> RunView::back_translation(const std::string& tag) const {
    for (bool retry : {false, true}) {
        if (const auto* r = record_->response(back_translation_tag(tag, retry))) {
            if (auto c = parse_back_translation(r->text)) return c;
        }
    }
    return std::nullopt;
}

std::optional<Category> RunView::intended_category(const ExecutionEntry& e) const {
    ArmSpec arm;
    try {
        arm = ArmSpec::parse(e.arm);
    } catch (const ConfigError&) {
        return std::nullopt;
    }
    const auto kind = arm.strategy.kind;
    auto category_of = [&](NarrativeFamily family) -> std::optional<Category> {
        if (!e.variant) return std::nullopt;
        for (const auto& v : variants(e.problem_id, family)) {
            if (v.variant_index == *e.variant) return v.algorithm_category;
        }
        return std::nullopt;
    };
    if (kind == StrategyKind::NarrativeOnly || kind == StrategyKind::NarrativeConcat)
        return category_of(NarrativeFamily::Tagged);
    if (kind == StrategyKind::Misaligned) return category_of(NarrativeFamily::Misaligned);
    if (is_direct_kind(kind)) {
        // Direct arms have no narrative of their own; compare against the
        // category the generator chose most often for this problem.
        std::vector<Category> chosen;
        for (const auto& v : variants(e.problem_id, NarrativeFamily::Tagged)) {
            if (v.validity == Validity::Valid && v.algorithm_category) chosen.push_back(*v.algorithm_category);
        }
        if (const auto g = golden_algorithm(chosen)) return g->category;
    }
    return std::nullopt;
}

bool RunView::has_arm(const std::string& arm) const {
    const auto parts = combined_parts(arm);
    if (!parts.first.empty()) return has_arm(parts.first) && has_arm(parts.second);
    return std::any_of(config_.arms.begin(), config_.arms.end(), [&](const ArmSpec& a) { return a.name() == arm; });
}

std::vector<std::string> RunView::report_arms() const {
    std::vector<std::string> out;
    for (const auto& a : config_.arms) out.push_back(a.name());
    for (const auto& combined : {std::string(kCombinedNarrativeArm), noio(std::string(kCombinedNarrativeArm))}) {
        if (has_arm(combined)) out.push_back(combined);
    }
    return out;
}

int RunView::target_samples(const std::string& arm) const {
    const auto parts = combined_parts(arm);
    if (!parts.first.empty()) return target_samples(parts.first) + target_samples(parts.second);
    return config_.target_samples(ArmSpec::parse(arm));
}

// ---------------------------------------------------------------------------
// Tables
// ---------------------------------------------------------------------------

std::string format_real(double v) { return fmt::format("{:.6f}", v); }

std::string Table::to_tsv() const {
    std::string out;
    auto line = [&](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out += '\t';
            out += cells[i];
        }
        out += '\n';
    };
    line(header);
    for (const auto& r : rows) line(r);
    return out;
}

void ReportSet::merge(ReportSet other) {
    for (auto& [name, body] : other.files) files[name] = std::move(body);
    errors.insert(errors.end(), other.errors.begin(), other.errors.end());
    notices.insert(notices.end(), other.notices.begin(), other.notices.end());
}

namespace {

const std::string kNA = "NA";

struct ArmStats {
    std::size_t problems = 0;
    std::size_t scored = 0;
    std::int64_t target = 0;
    std::int64_t used = 0;
    std::int64_t solved = 0;

    double used_ratio() const { return target ? static_cast<double>(used) / static_cast<double>(target) : 0.0; }
};

ArmStats arm_stats(const RunView& view, const std::string& arm) {
    ArmStats s;
    s.problems = view.problem_ids().size();
    s.target = static_cast<std::int64_t>(s.problems) * view.target_samples(arm);
    for (const auto& pid : view.problem_ids()) {
        const auto set = view.samples(pid, arm);
        s.used += set.n;
        if (set.n > 0) {
            ++s.scored;
            if (set.c > 0) ++s.solved;
        }
    }
    return s;
}

// Mean pass@k over problems with at least one sample; k is capped at n.
std::optional<double> arm_pass_at_k(const RunView& view, const std::string& arm, int k) {
    double total = 0;
    std::size_t scored = 0;
    for (const auto& pid : view.problem_ids()) {
        const auto set = view.samples(pid, arm);
        if (set.n == 0) continue;
        total += pass_at_k(set.n, set.c, std::min<std::int64_t>(k, set.n));
        ++scored;
    }
    if (scored == 0) return std::nullopt;
    return total / static_cast<double>(scored);
}

std::string cell(const std::optional<double>& v) { return v ? format_real(*v) : kNA; }

int max_k(const RunView& view) { return *std::max_element(view.config().ks.begin(), view.config().ks.end()); }

std::vector<std::string> pass_header(const RunView& view) {
    std::vector<std::string> h;
    for (int k : view.config().ks) h.push_back(fmt::format("pass@{}", k));
    return h;
}

// Table of pass@k per labelled arm plus k = 1..max curves as plot data.
ReportSet pass_curves(const RunView& view, const std::string& name,
                      const std::vector<std::pair<std::string, std::string>>& labelled_arms) {
    Table table;
    table.header = {"label", "arm", "scored_problems", "used_samples_ratio"};
    for (auto& h : pass_header(view)) table.header.push_back(h);
    Table plot;
    plot.header = {"label", "arm", "k", "pass_at_k"};
    for (const auto& [label, arm] : labelled_arms) {
        const auto stats = arm_stats(view, arm);
        std::vector<std::string> row{label, arm, std::to_string(stats.scored), format_real(stats.used_ratio())};
        for (int k : view.config().ks) row.push_back(cell(arm_pass_at_k(view, arm, k)));
        table.rows.push_back(std::move(row));
        for (int k = 1; k <= max_k(view); ++k) {
            plot.rows.push_back({label, arm, std::to_string(k), cell(arm_pass_at_k(view, arm, k))});
        }
    }
    ReportSet out;
    out.files[name + ".tsv"] = table.to_tsv();
    out.files[name + ".plot.tsv"] = plot.to_tsv();
    return out;
}

std::string narrative_condition_arm(const RunView& view, const std::string& analysis) {
    if (view.has_arm(std::string(kCombinedNarrativeArm))) return std::string(kCombinedNarrativeArm);
    if (view.has_arm("NarrativeOnly")) return "NarrativeOnly";
    throw MissingField(analysis, "NarrativeOnly samples");
}

void require_arm(const RunView& view, const std::string& analysis, const std::string& arm) {
    if (!view.has_arm(arm)) throw MissingField(analysis, arm + " samples");
}

// ---- Agreement -------------------------------------------------------------

ReportSet agreement(const RunView& view) {
    Table table;
    table.header = {"arm", "correct_samples", "labelled", "matching", "agreement_ratio", "note"};
    Table plot;
    plot.header = {"arm", "agreement_ratio"};

    std::vector<std::string> arms;
    for (const auto& arm : view.report_arms()) {
        const auto parts = combined_parts(arm);
        const auto kind = ArmSpec::parse(parts.first.empty() ? arm : parts.first).strategy.kind;
        if (kind == StrategyKind::NarrativeOnly || kind == StrategyKind::NarrativeConcat ||
            kind == StrategyKind::Misaligned || is_direct_kind(kind))
            arms.push_back(arm);
    }
    if (arms.empty()) throw MissingField("Agreement", "an arm with an intended algorithm");

    for (const auto& arm : arms) {
        std::vector<SampleSet> sets;
        IntendedMap intended;
        std::int64_t correct = 0;
        std::int64_t labelled = 0;
        std::int64_t matching = 0;
        for (const auto& pid : view.problem_ids()) {
            std::vector<SampleRecord> kept;
            for (const auto* e : view.executions(pid, arm)) {
                if (!e->verdict.overall_correct) continue;
                ++correct;
                const auto cat = view.intended_category(*e);
                if (!cat) continue;
                ++labelled;
                const auto bt = view.back_translation(e->tag);
                if (bt && *bt == *cat) ++matching;
                intended[{pid, e->tag}] = *cat;
                kept.push_back({e->tag, e->arm, true, bt});
            }
            sets.push_back(SampleSet::from_samples(pid, std::move(kept)));
        }
        std::string ratio = kNA;
        std::string note;
        try {
            ratio = format_real(agreement_ratio(sets, intended));
        } catch (const NoCorrectSamples&) {
            note = "NoCorrectSamples";
        } catch (const MissingBackTranslation& e) {
            note = e.what();
        }
        if (note.empty() && labelled < correct) note = fmt::format("{} correct samples without an intended category", correct - labelled);
        table.rows.push_back({arm, std::to_string(correct), std::to_string(labelled), std::to_string(matching), ratio, note});
        plot.rows.push_back({arm, ratio});
    }
    ReportSet out;
    out.files["agreement.tsv"] = table.to_tsv();
    out.files["agreement.plot.tsv"] = plot.to_tsv();
    return out;
}

// ---- Decomposition ---------------------------------------------------------

ReportSet decomposition(const RunView& view) {
    const std::string original_arm = "RepeatedSampling";
    require_arm(view, "Decomposition", original_arm);
    const auto narrative_arm = narrative_condition_arm(view, "Decomposition");

    Table per_problem;
    per_problem.header = {"problem_id", "golden_algorithm", "golden_tie", "excluded_trivial",
                          "original_correct", "original_implementation_error", "original_wrong_algorithm",
                          "narrative_correct", "narrative_implementation_error", "narrative_wrong_algorithm",
                          "note"};
    std::vector<ProblemDecomposition> decomposed;
    std::size_t skipped = 0;
    for (const auto& pid : view.problem_ids()) {
        const auto original = view.samples(pid, original_arm);
        const auto narrative = view.samples(pid, narrative_arm);
        std::vector<std::string> row{pid};
        try {
            std::optional<GoldenAlgorithm> golden;
            if (!is_trivial_pair(original, narrative)) {
                std::vector<Category> votes;
                for (const auto* set : {&original, &narrative}) {
                    for (const auto& s : set->per_sample) {
                        if (!s.correct) continue;
                        if (!s.back_translated) throw MissingBackTranslation(pid + "/" + s.key);
                        votes.push_back(*s.back_translated);
                    }
                }
                golden = golden_algorithm(votes);
            }
            const auto d = decompose(original, narrative,
                                     golden ? std::optional<Category>(golden->category) : std::nullopt);
            decomposed.push_back(d);
            row.push_back(golden ? std::string(id_name(golden->category)) : kNA);
            row.push_back(golden && golden->tie ? "yes" : "no");
            row.push_back(d.excluded_trivial ? "yes" : "no");
            for (const auto* o : {&d.original, &d.narrative}) {
                for (auto k : {Outcome::CorrectSolution, Outcome::ImplementationError, Outcome::WrongAlgorithm}) {
                    row.push_back(std::to_string(o->counts.at(k)));
                }
            }
            row.push_back("");
        } catch (const Error& e) {
            ++skipped;
            row.resize(1);
            for (int i = 0; i < 9; ++i) row.push_back(kNA);
            row.push_back(e.what());
        }
        per_problem.rows.push_back(std::move(row));
    }

    const auto summary = aggregate(decomposed);
    Table table;
    table.header = {"condition", "arm", "included_problems", "excluded_problems", "skipped_problems",
                    "correct", "implementation_error", "wrong_algorithm",
                    "correct_ratio", "implementation_error_ratio", "wrong_algorithm_ratio"};
    Table plot;
    plot.header = {"condition", "outcome", "ratio"};
    for (const auto& [condition, arm, o] : {std::tuple{std::string("original"), original_arm, &summary.original},
                                            std::tuple{std::string("narrative"), narrative_arm, &summary.narrative}}) {
        std::vector<std::string> row{condition, arm, std::to_string(summary.included_problems),
                                     std::to_string(summary.excluded_problems), std::to_string(skipped)};
        for (auto k : {Outcome::CorrectSolution, Outcome::ImplementationError, Outcome::WrongAlgorithm})
            row.push_back(std::to_string(o->counts.at(k)));
        for (auto k : {Outcome::CorrectSolution, Outcome::ImplementationError, Outcome::WrongAlgorithm}) {
            const auto r = summary.included_problems ? cell(DecompositionSummary::ratio(*o, k)) : kNA;
            row.push_back(r);
            plot.rows.push_back({condition, std::string(to_string(k)), r});
        }
        table.rows.push_back(std::move(row));
    }
    ReportSet out;
    out.files["decomposition.tsv"] = table.to_tsv();
    out.files["decomposition_problems.tsv"] = per_problem.to_tsv();
    out.files["decomposition.plot.tsv"] = plot.to_tsv();
    return out;
}

// ---- Ablations -------------------------------------------------------------

ReportSet permuted(const RunView& view) {
    require_arm(view, "Permuted", "Permuted");
    std::vector<std::pair<std::string, std::string>> arms;
    if (view.has_arm("RepeatedSampling")) arms.emplace_back("Original", "RepeatedSampling");
    if (view.has_arm("NarrativeOnly")) arms.emplace_back("Complete", "NarrativeOnly");
    arms.emplace_back("Permuted", "Permuted");
    return pass_curves(view, "permuted", arms);
}

ReportSet misaligned(const RunView& view) {
    require_arm(view, "Misaligned", "Misaligned");
    std::vector<std::pair<std::string, std::string>> arms;
    if (view.has_arm("NarrativeOnly")) arms.emplace_back("Aligned", "NarrativeOnly");
    arms.emplace_back("Misaligned", "Misaligned");
    auto out = pass_curves(view, "misaligned", arms);

    std::set<std::string> free_genres;
    for (const auto& pid : view.problem_ids()) {
        for (const auto& v : view.variants(pid, NarrativeFamily::Tagged)) {
            if (v.genre) free_genres.insert(text::to_lower(text::trim(*v.genre)));
        }
    }
    std::map<std::string, std::int64_t> injected;
    for (const auto& pid : view.problem_ids()) {
        for (int j = 1; j <= view.config().n_variants; ++j) ++injected[misaligned_genre(view.config(), pid, j)];
    }
    Table genres;
    genres.header = {"genre", "injected", "also_chosen_freely"};
    for (const auto& [g, n] : injected) {
        genres.rows.push_back({g, std::to_string(n), free_genres.count(text::to_lower(g)) ? "yes" : "no"});
    }
    out.files["misaligned_genres.tsv"] = genres.to_tsv();
    return out;
}

ReportSet no_tag(const RunView& view) {
    require_arm(view, "NoTag", "NoTagNarrative");
    std::vector<std::pair<std::string, std::string>> arms;
    if (view.has_arm("NarrativeOnly")) arms.emplace_back("Tagged", "NarrativeOnly");
    arms.emplace_back("NoTag", "NoTagNarrative");
    return pass_curves(view, "notag", arms);
}

ReportSet example_io(const RunView& view) {
    std::vector<std::string> bases;
    for (const auto& arm : view.report_arms()) {
        if (arm.size() > 5 && arm.compare(arm.size() - 5, 5, ":noio") == 0) continue;
        if (view.has_arm(noio(arm))) bases.push_back(arm);
    }
    if (bases.empty()) throw MissingField("ExampleIOAblation", "an arm with a matching :noio arm");

    Table table;
    table.header = {"arm", "k", "with_io", "without_io", "drop"};
    Table plot;
    plot.header = {"arm", "io", "k", "pass_at_k"};
    for (const auto& arm : bases) {
        for (int k : view.config().ks) {
            const auto with = arm_pass_at_k(view, arm, k);
            const auto without = arm_pass_at_k(view, noio(arm), k);
            table.rows.push_back({arm, std::to_string(k), cell(with), cell(without),
                                  with && without ? format_real(*with - *without) : kNA});
        }
        for (int k = 1; k <= max_k(view); ++k) {
            plot.rows.push_back({arm, "with", std::to_string(k), cell(arm_pass_at_k(view, arm, k))});
            plot.rows.push_back({arm, "without", std::to_string(k), cell(arm_pass_at_k(view, noio(arm), k))});
        }
    }
    ReportSet out;
    out.files["example_io.tsv"] = table.to_tsv();
    out.files["example_io.plot.tsv"] = plot.to_tsv();
    return out;
}

// ---- AST metrics -----------------------------------------------------------

ReportSet ast_metrics(const RunView& view, const AstProbe* probe) {
    ReportSet out;
    if (!probe) {
        out.notices.push_back("AstMetrics: probe unavailable; analysis excluded");
        return out;
    }
    const std::string rs_arm = "RepeatedSampling";
    require_arm(view, "AstMetrics", rs_arm);
    const auto narrative_arm = narrative_condition_arm(view, "AstMetrics");

    struct Values {
        std::vector<double> functions, helper, depth;
        std::int64_t solutions = 0;
    };
    Table missing;
    missing.header = {"arm", "tag", "reason"};
    std::map<std::string, Values> values;
    for (const auto& arm : {rs_arm, narrative_arm}) {
        auto& v = values[arm];
        for (const auto& pid : view.problem_ids()) {
            for (const auto* e : view.executions(pid, arm)) {
                if (!e->verdict.overall_correct || !e->extraction_ok) continue;
                ++v.solutions;
                const auto outcome = probe->probe(e->source_code);
                if (!outcome.metrics) {
                    missing.rows.push_back({arm, e->tag, outcome.error});
                    continue;
                }
                if (!outcome.metrics->parse_ok) {
                    missing.rows.push_back({arm, e->tag, "parse_ok=false"});
                    continue;
                }
                v.functions.push_back(static_cast<double>(outcome.metrics->function_count));
                v.helper.push_back(outcome.metrics->has_helper ? 1.0 : 0.0);
                v.depth.push_back(static_cast<double>(outcome.metrics->max_depth));
            }
        }
    }

    auto mean = [](const std::vector<double>& xs) -> std::optional<double> {
        if (xs.empty()) return std::nullopt;
        return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
    };
    Table table;
    table.header = {"arm", "correct_solutions", "probed", "missing", "mean_function_count", "helper_rate",
                    "mean_max_depth"};
    Table plot;
    plot.header = {"arm", "metric", "value"};
    for (const auto& arm : {rs_arm, narrative_arm}) {
        const auto& v = values[arm];
        const auto probed = static_cast<std::int64_t>(v.functions.size());
        table.rows.push_back({arm, std::to_string(v.solutions), std::to_string(probed),
                              std::to_string(v.solutions - probed), cell(mean(v.functions)), cell(mean(v.helper)),
                              cell(mean(v.depth))});
        plot.rows.push_back({arm, "mean_function_count", cell(mean(v.functions))});
        plot.rows.push_back({arm, "helper_rate", cell(mean(v.helper))});
        plot.rows.push_back({arm, "mean_max_depth", cell(mean(v.depth))});
    }

    Table tests;
    tests.header = {"metric", "alternative", "u", "p_value", "method"};
    const auto& a = values[narrative_arm];
    const auto& b = values[rs_arm];
    for (const auto& [metric, xa, xb] : {std::tuple{"function_count", &a.functions, &b.functions},
                                         std::tuple{"has_helper", &a.helper, &b.helper},
                                         std::tuple{"max_depth", &a.depth, &b.depth}}) {
        const auto alternative = narrative_arm + " > " + rs_arm;
        if (xa->empty() || xb->empty()) {
            tests.rows.push_back({metric, alternative, kNA, kNA, "insufficient data"});
            continue;
        }
        const auto r = mann_whitney_u_one_sided(*xa, *xb);
        tests.rows.push_back({metric, alternative, format_real(r.u), format_real(r.p), r.exact ? "exact" : "normal"});
    }
    out.files["ast_metrics.tsv"] = table.to_tsv();
    out.files["ast_metrics_tests.tsv"] = tests.to_tsv();
    out.files["ast_metrics.plot.tsv"] = plot.to_tsv();
    out.files["ast_metrics_missing.tsv"] = missing.to_tsv();
    return out;
}

}  // namespace

// ---------------------------------------------------------------------------

ReportSet summary_report(const RunView& view) {
    Table summary;
    summary.header = {"arm", "problems", "scored_problems", "target_samples", "used_samples", "used_samples_ratio",
                      "coverage"};
    for (auto& h : pass_header(view)) summary.header.push_back(h);
    Table per_problem;
    per_problem.header = {"problem_id", "arm", "target", "n", "c"};
    for (auto& h : pass_header(view)) per_problem.header.push_back(h);

    for (const auto& arm : view.report_arms()) {
        const auto s = arm_stats(view, arm);
        std::vector<std::string> row{arm,
                                     std::to_string(s.problems),
                                     std::to_string(s.scored),
                                     std::to_string(s.target),
                                     std::to_string(s.used),
                                     format_real(s.used_ratio()),
                                     s.scored ? format_real(static_cast<double>(s.solved) / static_cast<double>(s.scored))
                                              : kNA};
        for (int k : view.config().ks) row.push_back(cell(arm_pass_at_k(view, arm, k)));
        summary.rows.push_back(std::move(row));

        for (const auto& pid : view.problem_ids()) {
            const auto set = view.samples(pid, arm);
            std::vector<std::string> prow{pid, arm, std::to_string(view.target_samples(arm)), std::to_string(set.n),
                                          std::to_string(set.c)};
            for (int k : view.config().ks) {
                prow.push_back(set.n ? format_real(pass_at_k(set.n, set.c, std::min<std::int64_t>(k, set.n))) : kNA);
            }
            per_problem.rows.push_back(std::move(prow));
        }
    }
    ReportSet out;
    out.files["summary.tsv"] = summary.to_tsv();
    out.files["per_problem.tsv"] = per_problem.to_tsv();
    return out;
}

std::string_view to_string(Analysis a) {
    switch (a) {
        case Analysis::Agreement: return "Agreement";
        case Analysis::Decomposition: return "Decomposition";
        case Analysis::Permuted: return "Permuted";
        case Analysis::Misaligned: return "Misaligned";
        case Analysis::ExampleIOAblation: return "ExampleIOAblation";
        case Analysis::NoTag: return "NoTag";
        case Analysis::AstMetrics: return "AstMetrics";
    }
    return "Agreement";
}

std::set<Analysis> all_analyses() {
    return {Analysis::Agreement, Analysis::Decomposition, Analysis::Permuted, Analysis::Misaligned,
            Analysis::ExampleIOAblation, Analysis::NoTag, Analysis::AstMetrics};
}

std::set<Analysis> applicable_analyses(const RunView& view) {
    std::set<Analysis> out{Analysis::Agreement};
    const bool rs = view.has_arm("RepeatedSampling");
    const bool narrative = view.has_arm("NarrativeOnly");
    if (rs && narrative) {
        out.insert(Analysis::Decomposition);
        out.insert(Analysis::AstMetrics);
    }
    if (view.has_arm("Permuted")) out.insert(Analysis::Permuted);
    if (view.has_arm("Misaligned")) out.insert(Analysis::Misaligned);
    if (view.has_arm("NoTagNarrative")) out.insert(Analysis::NoTag);
    for (const auto& arm : view.report_arms()) {
        if (view.has_arm(noio(arm))) out.insert(Analysis::ExampleIOAblation);
    }
    return out;
}

std::optional<Analysis> parse_analysis(std::string_view s) {
    for (auto a : all_analyses()) {
        if (text::to_lower(s) == text::to_lower(to_string(a))) return a;
    }
    return std::nullopt;
}

ReportSet run_analysis(const RunView& view, const std::set<Analysis>& analyses, const AstProbe* probe) {
    ReportSet out;
    for (auto a : analyses) {
        try {
            switch (a) {
                case Analysis::Agreement: out.merge(agreement(view)); break;
                case Analysis::Decomposition: out.merge(decomposition(view)); break;
                case Analysis::Permuted: out.merge(permuted(view)); break;
                case Analysis::Misaligned: out.merge(misaligned(view)); break;
                case Analysis::ExampleIOAblation: out.merge(example_io(view)); break;
                case Analysis::NoTag: out.merge(no_tag(view)); break;
                case Analysis::AstMetrics: out.merge(ast_metrics(view, probe)); break;
            }
        } catch (const std::exception& e) {
            out.errors.push_back(fmt::format("{}: {}", to_string(a), e.what()));
        }
    }
    return out;
}

void write_reports(const ReportSet& reports, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    auto write = [&](const std::string& name, const std::string& body) {
        std::ofstream out(dir / name, std::ios::binary | std::ios::trunc);
        if (!out) throw ConfigError("cannot write report " + (dir / name).string());
        out << body;
    };
    for (const auto& [name, body] : reports.files) write(name, body);
    auto lines = [](const std::vector<std::string>& xs) {
        std::string s;
        for (const auto& x : xs) s += x + "\n";
        return s;
    };
    if (!reports.errors.empty()) write("errors.txt", lines(reports.errors));
    if (!reports.notices.empty()) write("notices.txt", lines(reports.notices));
}

}  // namespace narrbench
