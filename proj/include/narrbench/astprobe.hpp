#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace narrbench {

inline constexpr int kProbeProtocolVersion = 1;

/// Syntax-tree metrics reported by the external probe for one solution.
/// When parse_ok is false the other fields carry no information.
struct StructuralMetrics {
    bool parse_ok = false;
    std::int64_t function_count = 0;
    bool has_helper = false;
    std::int64_t max_depth = 0;

    bool operator==(const StructuralMetrics&) const = default;
};

/// Parses one probe output line. Throws ProbeError on malformed JSON, a
/// protocol_version other than 1, or missing/ill-typed fields.
StructuralMetrics parse_probe_record(std::string_view line);

/// The record the probe would print for `m`.
nlohmann::json to_json(const StructuralMetrics& m);

struct ProbeOutcome {
    std::optional<StructuralMetrics> metrics;
    std::string error;  // set when the probe crashed or spoke out of protocol
};

/// Client for the astprobe executable: one process per solution, source on
/// stdin, one record line on stdout.
class AstProbe {
public:
    /// Resolves command[0] on PATH and checks the probe answers an empty
    /// program. Returns nullopt when no working probe is installed.
    static std::optional<AstProbe> detect(std::vector<std::string> command);

    /// Default command: $NARRBENCH_ASTPROBE if set, otherwise "astprobe".
    static std::vector<std::string> default_command();

    ProbeOutcome probe(std::string_view source) const;

    const std::vector<std::string>& command() const noexcept { return command_; }

private:
    explicit AstProbe(std::vector<std::string> command) : command_(std::move(command)) {}
    std::vector<std::string> command_;
};

}  // namespace narrbench
