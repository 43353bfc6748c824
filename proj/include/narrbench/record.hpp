#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "narrbench/backend.hpp"
#include "narrbench/sandbox.hpp"

namespace narrbench {

inline constexpr int kRecordSchemaVersion = 1;

/// Line-delimited, append-only run record. Every line is a JSON object with
/// "schema_version" and "kind". Kinds:
///   run         config snapshot and selected problem ids, one per invocation
///   generation  one backend exchange (request, response or error, raw bodies)
///   variant     a parsed narrative variant (derived; kept for inspection)
///   execution   extracted code and the sandbox verdict for one solver output
///   warning     free-form note
///   metrics     the summary table as computed at the end of an eval
class RecordWriter {
public:
    /// Opens for append, creating parent directories.
    explicit RecordWriter(const std::filesystem::path& file);

    /// Thread-safe; each entry is flushed as one complete line.
    void append(nlohmann::json entry);

    const std::filesystem::path& path() const noexcept { return path_; }

private:
    std::filesystem::path path_;
    std::mutex mutex_;
    std::ofstream out_;
};

nlohmann::json generation_entry(const Exchange& exchange);

struct GenerationEntry {
    std::string tag;
    RoleTag role = RoleTag::Solver;
    nlohmann::json request;
    std::optional<GenerationResponse> response;
    std::string error;
};

struct ExecutionEntry {
    std::string tag;  // the solver generation it judged
    std::string problem_id;
    std::string arm;
    std::optional<int> variant;  // narrative variant or permuted slot behind the prompt
    bool extraction_ok = false;
    std::string source_code;
    ExecutionVerdict verdict;
};

nlohmann::json execution_entry(const ExecutionEntry& e);

/// In-memory view of a record file. For a tag seen more than once, the last
/// successful generation wins; a failure only stands if nothing succeeded.
struct RunRecord {
    std::optional<nlohmann::json> last_run;  // most recent "run" entry
    std::map<std::string, GenerationEntry> generations;
    std::map<std::string, ExecutionEntry> executions;
    std::vector<std::string> warnings;
    std::size_t lines = 0;
    bool truncated_tail = false;  // last line was cut off (crash mid-write)

    bool has_response(const std::string& tag) const;
    const GenerationResponse* response(const std::string& tag) const;

    /// Throws FileNotFound; MalformedRecord for a bad line other than a
    /// truncated final one; ConfigError for an unknown schema_version.
    static RunRecord load(const std::filesystem::path& file);
};

}  // namespace narrbench
