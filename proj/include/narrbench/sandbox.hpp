#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "narrbench/dataset.hpp"
#include "narrbench/process.hpp"
#include "narrbench/prompts.hpp"

namespace narrbench {

struct CandidateSolution {
    std::string problem_id;
    PromptStrategy strategy;
    int sample_index = 0;
    std::string source_code;
    std::string language_tag = "python";
    bool extraction_ok = false;
};

struct ExtractedCode {
    std::string source_code;
    bool extraction_ok = false;
};

/// Last fenced block whose info string names `language_tag` (python/py/
/// python3 all count for Python); otherwise the last fenced block of any tag.
/// An unterminated final fence runs to the end of the text.
ExtractedCode extract_code(std::string_view model_output, std::string_view language_tag = "python");

// ExtractionFailed marks tests that were never run because no code block was
// found; it is never produced by an executed test.
enum class TestVerdict { Pass, WrongOutput, RuntimeError, Timeout, MemoryExceeded, ExtractionFailed };

std::string_view to_string(TestVerdict v);
std::optional<TestVerdict> parse_test_verdict(std::string_view s);

struct ExecutionVerdict {
    std::vector<TestVerdict> per_test;
    bool overall_correct = false;
    std::vector<std::int64_t> wall_ms_per_test;
    std::vector<int> exit_codes;  // -1 when not run or killed by a signal

    /// overall_correct := every per_test entry is Pass (and there is at least one).
    void finalize();
};

nlohmann::json to_json(const ExecutionVerdict& v);
ExecutionVerdict verdict_from_json(const nlohmann::json& j);

struct SandboxLimits {
    std::int64_t time_ms = 10000;
    std::int64_t memory_mb = 512;
};

struct SandboxConfig {
    std::string interpreter = "python3";
    bool exact_match = false;
    bool isolate_network = true;
};

/// Executes candidates in fresh child processes: one child per test case,
/// empty environment, private temp working directory, rlimits, and a new
/// network namespace where the kernel allows one.
class Sandbox {
public:
    /// Throws InterpreterMissing when the interpreter cannot be resolved.
    explicit Sandbox(SandboxConfig config = {});

    const std::filesystem::path& interpreter() const noexcept { return interpreter_; }
    const SandboxConfig& config() const noexcept { return config_; }

    /// Tests are the problem's examples followed by its hidden tests.
    ExecutionVerdict run_candidate(const CandidateSolution& candidate, const Problem& problem,
                                   const SandboxLimits& limits) const;

    /// Positionally aligned verdicts with at most `parallelism` candidates in
    /// flight. Throws std::out_of_range for an unknown problem id before
    /// running anything, and SandboxSetupFailure if any candidate could not
    /// be run.
    std::vector<ExecutionVerdict> run_all(const std::vector<CandidateSolution>& candidates,
                                          const std::map<std::string, Problem>& problems,
                                          const SandboxLimits& limits, std::size_t parallelism) const;

    struct Slot {
        std::optional<ExecutionVerdict> verdict;
        std::string error;  // setup failure for this candidate only
    };

    /// As run_all, but a setup failure stays in its own slot.
    std::vector<Slot> run_all_slots(const std::vector<CandidateSolution>& candidates,
                                    const std::map<std::string, Problem>& problems,
                                    const SandboxLimits& limits, std::size_t parallelism) const;

private:
    TestVerdict judge(const ProcessResult& run, const SandboxLimits& limits, const Problem& problem,
                      const TestCase& test, const std::string& actual, bool function_mode) const;

    SandboxConfig config_;
    std::filesystem::path interpreter_;
};

/// The Python driver appended to FunctionCompletion candidates.
std::string function_driver(std::string_view entry_point);

}  // namespace narrbench
