#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "narrbench/dataset.hpp"
#include "narrbench/http_backend.hpp"
#include "narrbench/prompts.hpp"
#include "narrbench/sandbox.hpp"

namespace narrbench {

/// One experimental arm: a strategy, optionally with example I/O removed.
/// Written "CoT", "NarrativeOnly:noio", "External:<template_id>".
struct ArmSpec {
    PromptStrategy strategy;
    bool strip_io = false;

    std::string name() const;
    /// Throws ConfigError for an unknown strategy or modifier.
    static ArmSpec parse(std::string_view text);
    bool operator==(const ArmSpec&) const = default;
};

/// Which narrative generations an arm consumes.
enum class NarrativeFamily { Tagged, NoTag, Misaligned, Paraphrase };
std::string_view to_string(NarrativeFamily f);
std::optional<NarrativeFamily> family_for(StrategyKind kind);

struct LongSubsetSpec {
    std::size_t min_length_exclusive = 1000;
    std::size_t count = 128;
};

struct BenchmarkConfig {
    Source source = Source::Custom;
    std::filesystem::path path;
    DatasetFilterSpec filter;
    std::optional<LongSubsetSpec> long_subset;
};

struct SeedConfig {
    std::uint64_t sampling = 0;
    std::uint64_t permutation = 0;
    std::uint64_t misalignment = 0;
};

enum class BackTranslatePolicy { All, Correct, None };

struct RunConfig {
    BenchmarkConfig benchmark;
    std::vector<ArmSpec> arms;
    std::vector<ProviderConfig> providers;
    std::string narr_backend;
    std::string solve_backend;
    std::string alg_backend;
    int n_variants = 5;
    int samples_per_strategy = 10;  // arms that solve the problem text directly
    int samples_per_variant = 1;    // arms that solve one prompt per narrative variant
    double narrative_temperature = 1.0;
    double code_temperature = 0.2;
    SeedConfig seeds;
    SandboxLimits limits;
    std::filesystem::path output_dir;
    std::vector<int> ks{1, 5, 10};
    BackTranslatePolicy back_translate = BackTranslatePolicy::All;
    std::size_t max_in_flight = 4;
    std::size_t parallel_exec = 1;
    bool exact_match = false;
    std::optional<std::filesystem::path> templates_dir;
    std::string interpreter = "python3";
    std::vector<std::string> astprobe_command;  // empty = AstProbe::default_command()

    /// Throws ConfigError naming the first bad field.
    void validate() const;
    const ProviderConfig& provider(const std::string& backend_id) const;
    /// Samples an arm is meant to draw per problem.
    int target_samples(const ArmSpec& arm) const;
};

/// Relative paths (benchmark, output_dir, templates_dir, mock scripts) are
/// resolved against `base_dir`.
RunConfig run_config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);
RunConfig load_run_config(const std::filesystem::path& path);
nlohmann::json to_json(const RunConfig& c);

}  // namespace narrbench
