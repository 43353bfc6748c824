#include "narrbench/astprobe.hpp"

#include <cstdlib>

#include "narrbench/errors.hpp"
#include "narrbench/process.hpp"
#include "narrbench/text.hpp"

namespace narrbench {

using nlohmann::json;

StructuralMetrics parse_probe_record(std::string_view line) {
    json j;
    try {
        j = json::parse(text::trim(line));
    } catch (const json::parse_error& e) {
        throw ProbeError(std::string("probe record is not JSON: ") + e.what());
    }
    if (!j.is_object()) throw ProbeError("probe record is not an object");
    if (!j.contains("protocol_version") || !j["protocol_version"].is_number_integer())
        throw ProbeError("probe record has no protocol_version");
    if (j["protocol_version"].get<int>() != kProbeProtocolVersion)
        throw ProbeError("unsupported probe protocol_version " + j["protocol_version"].dump());
    if (!j.contains("parse_ok") || !j["parse_ok"].is_boolean()) throw ProbeError("probe record has no parse_ok");

    StructuralMetrics m;
    m.parse_ok = j["parse_ok"].get<bool>();
    if (!m.parse_ok) return m;

    auto integer = [&](const char* key, std::int64_t min) {
        if (!j.contains(key) || !j[key].is_number_integer()) throw ProbeError(std::string("probe record lacks ") + key);
        const auto v = j[key].get<std::int64_t>();
        if (v < min) throw ProbeError(std::string("probe field out of range: ") + key);
        return v;
    };
    m.function_count = integer("function_count", 0);
    m.max_depth = integer("max_depth", 1);
    if (!j.contains("has_helper") || !j["has_helper"].is_boolean()) throw ProbeError("probe record lacks has_helper");
    m.has_helper = j["has_helper"].get<bool>();
    return m;
}

json to_json(const StructuralMetrics& m) {
    json j{{"protocol_version", kProbeProtocolVersion}, {"parse_ok", m.parse_ok}};
    if (m.parse_ok) {
        j["function_count"] = m.function_count;
        j["has_helper"] = m.has_helper;
        j["max_depth"] = m.max_depth;
    }
    return j;
}

std::vector<std::string> AstProbe::default_command() {
    if (const char* env = std::getenv("NARRBENCH_ASTPROBE"); env && *env) return {env};
    return {"astprobe"};
}

std::optional<AstProbe> AstProbe::detect(std::vector<std::string> command) {
    if (command.empty()) return std::nullopt;
    const auto resolved = find_executable(command[0]);
    if (!resolved) return std::nullopt;
    command[0] = resolved->string();
    AstProbe probe(std::move(command));
    const auto outcome = probe.probe("");
    if (!outcome.metrics || !outcome.metrics->parse_ok) return std::nullopt;
    return probe;
}

ProbeOutcome AstProbe::probe(std::string_view source) const {
    ProcessSpec spec;
    spec.argv = command_;
    spec.stdin_data = std::string(source);
    // The probe is trusted tooling; it keeps PATH so script shebangs resolve.
    if (const char* path = std::getenv("PATH")) spec.env.push_back(std::string("PATH=") + path);

    ProbeOutcome out;
    ProcessResult run;
    try {
        run = run_process(spec, {30000, 0});
    } catch (const std::exception& e) {
        out.error = e.what();
        return out;
    }
    if (!run.success()) {
        out.error = run.timed_out ? "probe timed out"
                                  : "probe exited abnormally (status " +
                                        std::to_string(run.signaled ? -run.term_signal : run.exit_code) + ")";
        return out;
    }
    const auto lines = text::split_lines(run.stdout_data);
    std::vector<std::string_view> records;
    for (auto l : lines) {
        if (!text::trim(l).empty()) records.push_back(l);
    }
    if (records.size() != 1) {
        out.error = "probe printed " + std::to_string(records.size()) + " records";
        return out;
    }
    try {
        out.metrics = parse_probe_record(records.front());
    } catch (const ProbeError& e) {
        out.error = e.what();
    }
    return out;
}

}  // namespace narrbench
