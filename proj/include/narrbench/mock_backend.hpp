#pragma once

#include <atomic>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "narrbench/backend.hpp"

namespace narrbench {

/// Scripted backend for fixtures and dry runs.
///
/// A script entry is either a string (the response text) or an object
/// {"text": ..., "delay_ms": ..., "error": {"status": ..., "body": ...}}.
/// Resolution order for a request:
///   1. exact tag       "by_tag":        {"p1/narr/tagged/1": entry}
///   2. tag glob rules  "rules":         [{"match": "p1/solve/*", "response": entry}]
///   3. fingerprint     "by_fingerprint": {"<16 hex digits of FNV-1a(prompt)>": entry}
///   4. role sequence   "sequence":      {"Solver": [entry, entry, ...]}
/// Sequence routing follows call order per role, so it is only reproducible
/// when calls are issued one at a time. An unmatched request fails with a
/// non-transient ProviderError(404).
class MockBackend final : public Backend {
public:
    struct Entry {
        std::string text;
        int delay_ms = 0;
        std::optional<int> error_status;
        std::string error_body;
    };

    struct Call {
        std::string tag;
        RoleTag role;
        std::string fingerprint;
    };

    /// backend_id defaults to the script's "backend_id" field, then "mock".
    explicit MockBackend(nlohmann::json script, std::optional<std::string> backend_id = std::nullopt);
    static std::unique_ptr<MockBackend> from_file(const std::filesystem::path& path,
                                                  std::optional<std::string> backend_id = std::nullopt);

    const std::string& id() const override { return id_; }

    static std::string fingerprint(std::string_view prompt);

    std::vector<Call> calls() const;
    std::size_t call_count() const;
    /// Highest number of concurrently executing calls observed.
    int max_concurrency() const { return max_concurrency_.load(); }

protected:
    GenerationResponse do_generate(const GenerationRequest& request, Exchange& exchange) override;

private:
    const Entry* resolve(const GenerationRequest& request, const std::string& fingerprint);

    std::string id_;
    std::map<std::string, Entry> by_tag_;
    std::vector<std::pair<std::string, Entry>> rules_;
    std::map<std::string, Entry> by_fingerprint_;
    std::map<RoleTag, std::vector<Entry>> sequence_;

    mutable std::mutex mutex_;
    std::map<RoleTag, std::size_t> next_in_sequence_;
    std::vector<Call> calls_;
    std::atomic<int> in_flight_{0};
    std::atomic<int> max_concurrency_{0};
};

}  // namespace narrbench
