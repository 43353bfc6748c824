#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace narrbench {

struct ProcessLimits {
    std::int64_t time_ms = 10000;   // wall clock
    std::int64_t memory_mb = 512;   // address space; 0 = unlimited
    std::size_t output_cap = 16u << 20;  // bytes kept per stream
};

struct ProcessSpec {
    std::vector<std::string> argv;      // argv[0] must be an absolute path
    std::string stdin_data;
    std::filesystem::path working_dir;  // empty = inherit
    std::vector<std::string> env;       // "K=V" entries; empty = empty environment
    bool isolate_network = false;       // best effort: new user+net namespace
};

struct ProcessResult {
    int exit_code = -1;      // valid when !signaled
    bool signaled = false;
    int term_signal = 0;
    bool timed_out = false;
    std::string stdout_data;
    std::string stderr_data;
    std::int64_t wall_ms = 0;
    std::int64_t max_rss_kb = 0;
    bool network_isolated = false;

    bool success() const noexcept { return !timed_out && !signaled && exit_code == 0; }
};

/// Runs one child to completion in its own process group. The whole group is
/// SIGKILLed on timeout and again after the child is reaped, so nothing the
/// child spawned survives the call. Throws SandboxSetupFailure when the child
/// cannot be started.
ProcessResult run_process(const ProcessSpec& spec, const ProcessLimits& limits);

/// Absolute path of an executable, searching PATH for bare names.
std::optional<std::filesystem::path> find_executable(const std::string& name);

/// Scoped temporary directory, removed recursively on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& prefix = "narrbench");
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const noexcept { return path_; }

private:
    std::filesystem::path path_;
};

}  // namespace narrbench
