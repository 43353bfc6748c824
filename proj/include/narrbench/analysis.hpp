#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "narrbench/astprobe.hpp"
#include "narrbench/config.hpp"
#include "narrbench/metrics.hpp"
#include "narrbench/record.hpp"

namespace narrbench {

// ---------------------------------------------------------------------------
// Record tags
// ---------------------------------------------------------------------------

std::string narrative_tag(const std::string& problem_id, NarrativeFamily family, int j);
std::string solve_tag(const std::string& problem_id, const std::string& arm, std::optional<int> variant, int sample);
/// "<pid>/solve/..." -> "<pid>/alg/..."; the retry adds "/retry".
std::string back_translation_tag(const std::string& solve_tag, bool retry);

/// Genre forced onto misaligned variant j of a problem.
const std::string& misaligned_genre(const RunConfig& config, const std::string& problem_id, int j);

/// Union arm of the two narrative prompt forms.
inline constexpr std::string_view kCombinedNarrativeArm = "Narrative";

// ---------------------------------------------------------------------------
// Derived view
// ---------------------------------------------------------------------------

/// Everything downstream of the backend, recomputed from raw record fields.
class RunView {
public:
    /// Throws MissingField when the record has no run entry.
    explicit RunView(const RunRecord& record);

    const RunConfig& config() const noexcept { return config_; }
    const std::vector<std::string>& problem_ids() const noexcept { return problem_ids_; }
    const RunRecord& record() const noexcept { return *record_; }

    /// Parsed variants j = 1..N that have a response, in index order.
    std::vector<NarrativeVariant> variants(const std::string& problem_id, NarrativeFamily family) const;
    /// Paraphrase texts keyed by j, empty responses dropped.
    std::map<int, std::string> paraphrases(const std::string& problem_id) const;

    /// Executed samples of `arm` (or the combined narrative arms) for one problem.
    SampleSet samples(const std::string& problem_id, const std::string& arm) const;
    std::vector<const ExecutionEntry*> executions(const std::string& problem_id, const std::string& arm) const;

    std::optional<Category> back_translation(const std::string& solve_tag) const;
    /// Category the generator attached to the narrative behind a sample.
    std::optional<Category> intended_category(const ExecutionEntry& e) const;

    /// Configured arm names plus the combined narrative arms where both parts exist.
    std::vector<std::string> report_arms() const;
    int target_samples(const std::string& arm) const;
    bool has_arm(const std::string& arm) const;

private:
    const RunRecord* record_;
    RunConfig config_;
    std::vector<std::string> problem_ids_;
    std::map<std::pair<std::string, std::string>, std::vector<const ExecutionEntry*>> by_arm_;
};

// ---------------------------------------------------------------------------
// Tables
// ---------------------------------------------------------------------------

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    /// Tab-separated, one trailing newline per row.
    std::string to_tsv() const;
};

/// Fixed six-decimal rendering used in every table.
std::string format_real(double v);

struct ReportSet {
    std::map<std::string, std::string> files;  // file name -> contents
    std::vector<std::string> errors;           // per-analysis failures
    std::vector<std::string> notices;          // e.g. analyses skipped for a missing probe

    void merge(ReportSet other);
};

/// summary.tsv (per arm: used samples, coverage, pass@k) and per_problem.tsv.
ReportSet summary_report(const RunView& view);

enum class Analysis { Agreement, Decomposition, Permuted, Misaligned, ExampleIOAblation, NoTag, AstMetrics };
std::string_view to_string(Analysis a);
std::optional<Analysis> parse_analysis(std::string_view s);
std::set<Analysis> all_analyses();
/// The analyses whose input arms exist in the run.
std::set<Analysis> applicable_analyses(const RunView& view);

/// Runs each analysis independently; a failing analysis lands in
/// ReportSet::errors and the others still produce their files. AstMetrics
/// with no probe reports "probe unavailable" as a notice.
ReportSet run_analysis(const RunView& view, const std::set<Analysis>& analyses, const AstProbe* probe);

void write_reports(const ReportSet& reports, const std::filesystem::path& dir);

}  // namespace narrbench
