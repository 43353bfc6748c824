#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "narrbench/errors.hpp"

namespace narrbench {

enum class IoMode { FunctionCompletion, StdinStdout };
enum class Source { HumanEval, LiveCodeBench, CodeForces, Custom };

std::string_view to_string(IoMode m);
std::string_view to_string(Source s);
std::optional<IoMode> parse_io_mode(std::string_view s);
std::optional<Source> parse_source(std::string_view s);

struct TestCase {
    std::string input;
    std::string output;

    bool operator==(const TestCase&) const = default;
};

struct Problem {
    std::string id;
    std::string statement;
    IoMode io_mode = IoMode::StdinStdout;
    std::optional<std::string> function_signature;
    std::vector<TestCase> examples;
    std::vector<TestCase> hidden_tests;
    std::optional<int> rating;
    std::size_t statement_length = 0;  // characters (UTF-8 code points) of statement
    Source source = Source::Custom;
    // Optional judge program; see docs/problem_format.md.
    std::optional<std::string> checker;
    // Fields this version does not understand, kept for round-trip.
    nlohmann::json extra = nlohmann::json::object();

    /// Name of the function a FunctionCompletion candidate must define.
    std::optional<std::string> entry_point() const;
};

/// Character count of a UTF-8 string (continuation bytes are not counted).
std::size_t utf8_length(std::string_view s);

nlohmann::json to_json(const Problem& p);

/// Parse one record. Throws MalformedRecord(line, reason).
Problem problem_from_json(const nlohmann::json& j, Source default_source, std::size_t line);

struct LoadReport {
    std::vector<Problem> problems;
    std::vector<MalformedRecord> malformed;
};

/// Reads every line of a JSONL problem file, collecting malformed records.
/// Blank lines are skipped. Throws FileNotFound.
LoadReport load_problems_report(const std::filesystem::path& path, Source source);

/// Strict form: throws the first MalformedRecord if any line is bad.
std::vector<Problem> load_problems(const std::filesystem::path& path, Source source);

void write_problems(const std::filesystem::path& path, const std::vector<Problem>& problems);

class DatasetFilterSpec {
public:
    std::optional<std::size_t> max_length;  // inclusive
    std::optional<int> min_rating;          // inclusive
    bool require_examples = false;
    std::optional<std::vector<std::string>> id_allowlist;

    /// Throws ConfigError if a present bound is out of range.
    void validate() const;

    bool accepts(const Problem& p) const;
};

/// Keeps exactly the problems satisfying every present predicate, in order.
std::vector<Problem> apply_filter(const std::vector<Problem>& problems,
                                  const DatasetFilterSpec& spec);

/// Seeded draw of `count` problems with statement_length > min_length_exclusive.
/// Output order is draw order. Throws InsufficientPool.
std::vector<Problem> sample_long_subset(const std::vector<Problem>& problems,
                                        std::size_t min_length_exclusive, std::size_t count,
                                        std::uint64_t seed);

}  // namespace narrbench
