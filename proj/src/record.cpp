#include "narrbench/record.hpp"

#include "narrbench/errors.hpp"

namespace narrbench {

using nlohmann::json;

RecordWriter::RecordWriter(const std::filesystem::path& file) : path_(file) {
    if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path());
    out_.open(file, std::ios::app | std::ios::binary);
    if (!out_) throw ConfigError("cannot open record " + file.string());
}

void RecordWriter::append(json entry) {
    entry["schema_version"] = kRecordSchemaVersion;
    // Invalid UTF-8 in model output must not abort persistence.
    const auto line = entry.dump(-1, ' ', false, json::error_handler_t::replace);
    std::lock_guard lock(mutex_);
    out_ << line << '\n';
    out_.flush();
}

json generation_entry(const Exchange& exchange) {
    json j{{"kind", "generation"},
           {"tag", exchange.request.tag},
           {"role", to_string(exchange.request.role)},
           {"request", to_json(exchange.request)},
           {"raw_request", exchange.raw_request},
           {"raw_response", exchange.raw_response},
           {"attempts", exchange.attempts}};
    j["response"] = exchange.response ? to_json(*exchange.response) : json();
    j["error"] = exchange.error.empty() ? json() : json(exchange.error);
    return j;
}

json execution_entry(const ExecutionEntry& e) {
    json j{{"kind", "execution"},       {"tag", e.tag},
           {"problem_id", e.problem_id}, {"arm", e.arm},
           {"extraction_ok", e.extraction_ok}, {"source_code", e.source_code},
           {"verdict", to_json(e.verdict)}};
    j["variant"] = e.variant ? json(*e.variant) : json();
    return j;
}

bool RunRecord::has_response(const std::string& tag) const { return response(tag) != nullptr; }

const GenerationResponse* RunRecord::response(const std::string& tag) const {
    const auto it = generations.find(tag);
    if (it == generations.end() || !it->second.response) return nullptr;
    return &*it->second.response;
}

RunRecord RunRecord::load(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw FileNotFound(file.string());
    std::vector<std::string> raw;
    for (std::string line; std::getline(in, line);) raw.push_back(std::move(line));

    RunRecord r;
    for (std::size_t i = 0; i < raw.size(); ++i) {
        const auto& line = raw[i];
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            if (i + 1 == raw.size()) {
                r.truncated_tail = true;
                break;
            }
            throw MalformedRecord(i + 1, e.what());
        }
        ++r.lines;
        const auto version = j.value("schema_version", 0);
        if (version != kRecordSchemaVersion)
            throw ConfigError("record line " + std::to_string(i + 1) + " has schema_version " +
                              std::to_string(version));
        const auto kind = j.value("kind", std::string());
        try {
            if (kind == "run") {
                r.last_run = j;
            } else if (kind == "generation") {
                GenerationEntry g;
                g.tag = j.at("tag").get<std::string>();
                g.role = parse_role(j.value("role", std::string("Solver"))).value_or(RoleTag::Solver);
                g.request = j.value("request", json::object());
                if (j.contains("response") && !j["response"].is_null()) g.response = response_from_json(j["response"]);
                if (j.contains("error") && !j["error"].is_null()) g.error = j["error"].get<std::string>();
                auto it = r.generations.find(g.tag);
                if (it == r.generations.end() || g.response || !it->second.response) r.generations[g.tag] = std::move(g);
            } else if (kind == "execution") {
                ExecutionEntry e;
                e.tag = j.at("tag").get<std::string>();
                e.problem_id = j.at("problem_id").get<std::string>();
                e.arm = j.at("arm").get<std::string>();
                if (j.contains("variant") && !j["variant"].is_null()) e.variant = j["variant"].get<int>();
                e.extraction_ok = j.at("extraction_ok").get<bool>();
                e.source_code = j.value("source_code", std::string());
                e.verdict = verdict_from_json(j.at("verdict"));
                r.executions[e.tag] = std::move(e);
            } else if (kind == "warning") {
                r.warnings.push_back(j.value("message", std::string()));
            }
        } catch (const json::exception& e) {
            throw MalformedRecord(i + 1, e.what());
        }
    }
    return r;
}

}  // namespace narrbench
