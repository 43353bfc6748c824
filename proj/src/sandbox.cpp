#include "narrbench/sandbox.hpp"

#include <algorithm>
#include <atomic>
#include <csignal>
#include <fstream>
#include <thread>

#include "narrbench/errors.hpp"
#include "narrbench/text.hpp"

namespace narrbench {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Code extraction
// ---------------------------------------------------------------------------

namespace {

bool is_python_tag(std::string_view tag) {
    const auto t = text::to_lower(tag);
    return t == "python" || t == "py" || t == "python3";
}

bool tag_matches(std::string_view info, std::string_view language) {
    // Info string may carry extra words ("python title=x").
    const auto first = info.substr(0, info.find_first_of(" \t{"));
    if (is_python_tag(language)) return is_python_tag(first);
    return text::to_lower(first) == text::to_lower(language);
}

}  // namespace

ExtractedCode extract_code(std::string_view model_output, std::string_view language_tag) {
    struct Block {
        std::string info;
        std::string body;
    };
    std::vector<Block> blocks;
    std::optional<Block> open;
    for (auto line : text::split_lines(model_output)) {
        auto stripped = line;
        while (!stripped.empty() && (stripped.front() == ' ' || stripped.front() == '\t')) stripped.remove_prefix(1);
        if (stripped.substr(0, 3) == "```") {
            if (open) {
                if (text::trim(stripped.substr(3)).empty()) {
                    blocks.push_back(std::move(*open));
                    open.reset();
                    continue;
                }
            } else {
                open = Block{std::string(text::trim(stripped.substr(3))), {}};
                continue;
            }
        }
        if (open) {
            if (!open->body.empty() || !line.empty()) {
                open->body.append(line);
                open->body.push_back('\n');
            }
        }
    }
    if (open) blocks.push_back(std::move(*open));
    if (blocks.empty()) return {"", false};

    for (auto it = blocks.rbegin(); it != blocks.rend(); ++it) {
        if (tag_matches(it->info, language_tag)) return {it->body, true};
    }
    return {blocks.back().body, true};
}

// ---------------------------------------------------------------------------
// Verdicts
// ---------------------------------------------------------------------------

std::string_view to_string(TestVerdict v) {
    switch (v) {
        case TestVerdict::Pass: return "Pass";
        case TestVerdict::WrongOutput: return "WrongOutput";
        case TestVerdict::RuntimeError: return "RuntimeError";
        case TestVerdict::Timeout: return "Timeout";
        case TestVerdict::MemoryExceeded: return "MemoryExceeded";
        case TestVerdict::ExtractionFailed: return "ExtractionFailed";
    }
    return "RuntimeError";
}

std::optional<TestVerdict> parse_test_verdict(std::string_view s) {
    for (auto v : {TestVerdict::Pass, TestVerdict::WrongOutput, TestVerdict::RuntimeError, TestVerdict::Timeout,
                   TestVerdict::MemoryExceeded, TestVerdict::ExtractionFailed}) {
        if (s == to_string(v)) return v;
    }
    return std::nullopt;
}

void ExecutionVerdict::finalize() {
    overall_correct = !per_test.empty() &&
                      std::all_of(per_test.begin(), per_test.end(), [](TestVerdict v) { return v == TestVerdict::Pass; });
}

json to_json(const ExecutionVerdict& v) {
    json tests = json::array();
    for (auto t : v.per_test) tests.push_back(to_string(t));
    return {{"per_test", tests},
            {"overall_correct", v.overall_correct},
            {"wall_ms_per_test", v.wall_ms_per_test},
            {"exit_codes", v.exit_codes}};
}

ExecutionVerdict verdict_from_json(const json& j) {
    ExecutionVerdict v;
    for (const auto& t : j.at("per_test")) {
        const auto parsed = parse_test_verdict(t.get<std::string>());
        if (!parsed) throw Error("unknown test verdict: " + t.get<std::string>());
        v.per_test.push_back(*parsed);
    }
    v.wall_ms_per_test = j.value("wall_ms_per_test", std::vector<std::int64_t>{});
    v.exit_codes = j.value("exit_codes", std::vector<int>{});
    v.finalize();
    return v;
}

// ---------------------------------------------------------------------------
// Sandbox
// ---------------------------------------------------------------------------

std::string function_driver(std::string_view entry_point) {
    std::string d = R"PY(

def __narrbench_driver():
    import contextlib, io, json, sys
    with open("case.json", "r", encoding="utf-8") as fh:
        case = json.load(fh)
    src = case["args"].strip()
    args = eval("(" + src + ",)") if src else ()
    captured = io.StringIO()
    with contextlib.redirect_stdout(captured):
        result = globals()[")PY";
    d += entry_point;
    d += R"PY("](*args)
    try:
        expected = repr(eval(case["expected"]))
    except Exception:
        expected = case["expected"].strip()
    sys.stdout.write("\n" + json.dumps({"actual": repr(result), "expected": expected}) + "\n")
    sys.stdout.flush()

__narrbench_driver()
)PY";
    return d;
}

Sandbox::Sandbox(SandboxConfig config) : config_(std::move(config)) {
    const auto resolved = find_executable(config_.interpreter);
    if (!resolved) throw InterpreterMissing(config_.interpreter);
    interpreter_ = *resolved;
}

namespace {

void write_file(const std::filesystem::path& path, std::string_view content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw SandboxSetupFailure("cannot write " + path.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
}

std::string last_nonempty_line(std::string_view s) {
    const auto lines = text::split_lines(s);
    for (auto it = lines.rbegin(); it != lines.rend(); ++it) {
        if (!text::trim(*it).empty()) return std::string(text::trim(*it));
    }
    return {};
}

}  // namespace

TestVerdict Sandbox::judge(const ProcessResult& run, const SandboxLimits& limits, const Problem& problem,
                           const TestCase& test, const std::string& actual, bool function_mode) const {
    if (run.timed_out || (run.signaled && run.term_signal == SIGXCPU)) return TestVerdict::Timeout;
    if (!run.success()) {
        const bool memory_error = run.stderr_data.find("MemoryError") != std::string::npos;
        const bool near_cap = limits.memory_mb > 0 && run.max_rss_kb >= limits.memory_mb * 1024 * 95 / 100;
        const bool oom_killed = run.signaled && run.term_signal == SIGKILL;
        if (memory_error || near_cap || oom_killed) return TestVerdict::MemoryExceeded;
        return TestVerdict::RuntimeError;
    }

    std::string expected = test.output;
    std::string got = actual;
    if (function_mode) {
        json report;
        try {
            report = json::parse(last_nonempty_line(run.stdout_data));
        } catch (const json::parse_error&) {
            return TestVerdict::RuntimeError;  // the driver never reported
        }
        got = report.value("actual", std::string());
        expected = report.value("expected", std::string());
    }

    if (problem.checker) {
        TempDir dir("narrbench-check");
        write_file(dir.path() / "checker.py", *problem.checker);
        ProcessSpec spec;
        spec.argv = {interpreter_.string(), "checker.py"};
        spec.working_dir = dir.path();
        spec.stdin_data = json{{"input", test.input}, {"expected", test.output}, {"actual", got}}.dump();
        spec.isolate_network = config_.isolate_network;
        const auto verdict = run_process(spec, {limits.time_ms, limits.memory_mb});
        return verdict.success() ? TestVerdict::Pass : TestVerdict::WrongOutput;
    }

    if (function_mode) return got == expected ? TestVerdict::Pass : TestVerdict::WrongOutput;
    if (config_.exact_match) return got == expected ? TestVerdict::Pass : TestVerdict::WrongOutput;
    return text::normalize_judge_output(got) == text::normalize_judge_output(expected) ? TestVerdict::Pass
                                                                                      : TestVerdict::WrongOutput;
}

ExecutionVerdict Sandbox::run_candidate(const CandidateSolution& candidate, const Problem& problem,
                                        const SandboxLimits& limits) const {
    if (limits.time_ms <= 0 || limits.memory_mb <= 0) throw DomainError("sandbox limits must be positive");

    std::vector<const TestCase*> tests;
    for (const auto& t : problem.examples) tests.push_back(&t);
    for (const auto& t : problem.hidden_tests) tests.push_back(&t);

    ExecutionVerdict verdict;
    if (!candidate.extraction_ok) {
        verdict.per_test.assign(tests.size(), TestVerdict::ExtractionFailed);
        verdict.wall_ms_per_test.assign(tests.size(), 0);
        verdict.exit_codes.assign(tests.size(), -1);
        verdict.finalize();
        return verdict;
    }

    const bool function_mode = problem.io_mode == IoMode::FunctionCompletion;
    std::string program = candidate.source_code;
    if (function_mode) {
        const auto entry = problem.entry_point();
        if (!entry) throw SandboxSetupFailure("problem " + problem.id + " has no entry point");
        program += function_driver(*entry);
    }

    for (const auto* test : tests) {
        TempDir dir("narrbench-run");
        write_file(dir.path() / "main.py", program);
        ProcessSpec spec;
        spec.argv = {interpreter_.string(), "main.py"};
        spec.working_dir = dir.path();
        spec.isolate_network = config_.isolate_network;
        if (function_mode) {
            write_file(dir.path() / "case.json", json{{"args", test->input}, {"expected", test->output}}.dump());
        } else {
            spec.stdin_data = test->input;
        }
        const auto run = run_process(spec, {limits.time_ms, limits.memory_mb});
        verdict.per_test.push_back(judge(run, limits, problem, *test, run.stdout_data, function_mode));
        verdict.wall_ms_per_test.push_back(run.wall_ms);
        verdict.exit_codes.push_back(run.signaled || run.timed_out ? -1 : run.exit_code);
    }
    verdict.finalize();
    return verdict;
}

std::vector<Sandbox::Slot> Sandbox::run_all_slots(const std::vector<CandidateSolution>& candidates,
                                                  const std::map<std::string, Problem>& problems,
                                                  const SandboxLimits& limits, std::size_t parallelism) const {
    if (parallelism < 1) throw DomainError("parallelism must be >= 1");
    for (const auto& c : candidates) {
        if (!problems.count(c.problem_id)) throw std::out_of_range("unknown problem id: " + c.problem_id);
    }

    std::vector<Slot> slots(candidates.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            const auto i = next.fetch_add(1);
            if (i >= candidates.size()) return;
            try {
                slots[i].verdict = run_candidate(candidates[i], problems.at(candidates[i].problem_id), limits);
            } catch (const std::exception& e) {
                slots[i].error = e.what();
            }
        }
    };
    const auto workers = std::min(parallelism, std::max<std::size_t>(candidates.size(), 1));
    std::vector<std::thread> threads;
    for (std::size_t t = 1; t < workers; ++t) threads.emplace_back(worker);
    worker();
    for (auto& t : threads) t.join();
    return slots;
}

std::vector<ExecutionVerdict> Sandbox::run_all(const std::vector<CandidateSolution>& candidates,
                                               const std::map<std::string, Problem>& problems,
                                               const SandboxLimits& limits, std::size_t parallelism) const {
    auto slots = run_all_slots(candidates, problems, limits, parallelism);
    std::vector<ExecutionVerdict> verdicts;
    verdicts.reserve(slots.size());
    for (std::size_t i = 0; i < slots.size(); ++i) {
        if (!slots[i].verdict) throw SandboxSetupFailure("candidate " + std::to_string(i) + ": " + slots[i].error);
        verdicts.push_back(std::move(*slots[i].verdict));
    }
    return verdicts;
}

}  // namespace narrbench
