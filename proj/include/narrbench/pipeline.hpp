#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "narrbench/analysis.hpp"
#include "narrbench/backend.hpp"
#include "narrbench/config.hpp"
#include "narrbench/dataset.hpp"

namespace narrbench {

enum class Stage { Transform, Solve, Eval };

/// Backend calls a full run would make. Solver and back-translation counts
/// assume every narrative comes back Valid, so they are upper bounds.
struct CallPlan {
    std::size_t problems = 0;
    std::size_t narrative = 0;
    std::size_t solve = 0;
    std::size_t back_translation = 0;

    std::size_t total() const { return narrative + solve + back_translation; }
    std::string describe() const;
};

struct PipelineResult {
    std::size_t backend_calls = 0;
    std::size_t generation_failures = 0;
    std::size_t execution_failures = 0;
    std::vector<std::string> warnings;
    ReportSet reports;  // summary tables, filled after Eval

    bool partial() const { return generation_failures > 0 || execution_failures > 0; }
};

/// One solver call the run configuration asks for.
struct SolveJob {
    std::string tag;
    std::string problem_id;
    std::string arm;
    std::optional<int> variant;
    std::string prompt;
};

using BackendMap = std::map<std::string, std::shared_ptr<Backend>>;

/// One backend per distinct id among narr/solve/alg backends.
BackendMap make_backends(const RunConfig& config);

/// Runs the stages transform -> solve -> eval against one output directory.
/// Everything is appended to output_dir/record.jsonl as it happens; a
/// resumed run skips every tag that already has a response or verdict.
class Pipeline {
public:
    /// With an empty map, backends are built from the config on first use.
    explicit Pipeline(RunConfig config, BackendMap backends = {}, std::ostream* log = nullptr);

    const RunConfig& config() const noexcept { return config_; }
    std::filesystem::path record_path() const { return config_.output_dir / "record.jsonl"; }
    std::filesystem::path reports_dir() const { return config_.output_dir / "reports"; }

    /// Loads, filters and (optionally) subsamples the benchmark. Malformed
    /// records are reported through `warnings` when given.
    std::vector<Problem> load_benchmark(std::vector<std::string>* warnings = nullptr) const;

    CallPlan plan(const std::vector<Problem>& problems) const;

    /// Throws ConfigError (including an existing record without `resume`, or
    /// a locked output_dir) and AuthMissing; item-level failures are counted
    /// in the result.
    PipelineResult run(Stage until, bool resume);

    /// Solver calls for the narratives present in the record.
    std::vector<SolveJob> solve_jobs(const RunView& view, const std::map<std::string, Problem>& problems,
                                     std::vector<std::string>* warnings) const;

private:
    RunConfig config_;
    BackendMap backends_;
    std::ostream* log_;
};

}  // namespace narrbench
