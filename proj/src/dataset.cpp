#include "narrbench/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <regex>
#include <unordered_set>

#include "narrbench/rng.hpp"
#include "narrbench/text.hpp"

namespace narrbench {

using nlohmann::json;

std::string_view to_string(IoMode m) {
    return m == IoMode::FunctionCompletion ? "function_completion" : "stdin_stdout";
}

std::string_view to_string(Source s) {
    switch (s) {
        case Source::HumanEval: return "HumanEval";
        case Source::LiveCodeBench: return "LiveCodeBench";
        case Source::CodeForces: return "CodeForces";
        case Source::Custom: return "Custom";
    }
    return "Custom";
}

std::optional<IoMode> parse_io_mode(std::string_view s) {
    if (s == "function_completion") return IoMode::FunctionCompletion;
    if (s == "stdin_stdout") return IoMode::StdinStdout;
    return std::nullopt;
}

std::optional<Source> parse_source(std::string_view s) {
    for (auto src : {Source::HumanEval, Source::LiveCodeBench, Source::CodeForces, Source::Custom}) {
        if (text::to_lower(s) == text::to_lower(to_string(src))) return src;
    }
    return std::nullopt;
}

std::optional<std::string> Problem::entry_point() const {
    if (!function_signature) return std::nullopt;
    static const std::regex def_re(R"(def\s+([A-Za-z_][A-Za-z0-9_]*)\s*\()");
    std::smatch m;
    if (std::regex_search(*function_signature, m, def_re)) return m[1].str();
    return std::nullopt;
}

std::size_t utf8_length(std::string_view s) {
    return static_cast<std::size_t>(std::count_if(s.begin(), s.end(), [](char c) {
        return (static_cast<unsigned char>(c) & 0xC0) != 0x80;
    }));
}

namespace {

const std::unordered_set<std::string> kKnownFields = {
    "id",     "statement", "io_mode", "function_signature", "examples", "hidden_tests",
    "rating", "source",    "checker", "statement_length",
};

json tests_to_json(const std::vector<TestCase>& tests) {
    json arr = json::array();
    for (const auto& t : tests) arr.push_back({{"input", t.input}, {"output", t.output}});
    return arr;
}

std::vector<TestCase> tests_from_json(const json& j, const char* field, std::size_t line) {
    std::vector<TestCase> out;
    if (!j.contains(field) || j[field].is_null()) return out;
    if (!j[field].is_array())
        throw MalformedRecord(line, std::string("field '") + field + "' must be an array");
    for (const auto& t : j[field]) {
        if (!t.is_object() || !t.contains("input") || !t.contains("output") ||
            !t["input"].is_string() || !t["output"].is_string())
            throw MalformedRecord(line, std::string("entries of '") + field +
                                            "' need string 'input' and 'output'");
        out.push_back({t["input"].get<std::string>(), t["output"].get<std::string>()});
    }
    return out;
}

std::string required_string(const json& j, const char* field, std::size_t line) {
    if (!j.contains(field)) throw MalformedRecord(line, std::string("missing field '") + field + "'");
    if (!j[field].is_string())
        throw MalformedRecord(line, std::string("field '") + field + "' must be a string");
    return j[field].get<std::string>();
}

}  // namespace

json to_json(const Problem& p) {
    json j = p.extra.is_object() ? p.extra : json::object();
    j["id"] = p.id;
    j["statement"] = p.statement;
    j["statement_length"] = p.statement_length;
    j["io_mode"] = to_string(p.io_mode);
    if (p.function_signature) j["function_signature"] = *p.function_signature;
    j["examples"] = tests_to_json(p.examples);
    j["hidden_tests"] = tests_to_json(p.hidden_tests);
    if (p.rating) j["rating"] = *p.rating;
    j["source"] = to_string(p.source);
    if (p.checker) j["checker"] = *p.checker;
    return j;
}

Problem problem_from_json(const json& j, Source default_source, std::size_t line) {
    if (!j.is_object()) throw MalformedRecord(line, "record is not an object");
    Problem p;
    p.id = required_string(j, "id", line);
    if (p.id.empty()) throw MalformedRecord(line, "field 'id' is empty");
    p.statement = required_string(j, "statement", line);
    p.statement_length = utf8_length(p.statement);

    const auto mode = required_string(j, "io_mode", line);
    const auto parsed_mode = parse_io_mode(mode);
    if (!parsed_mode) throw MalformedRecord(line, "unknown io_mode '" + mode + "'");
    p.io_mode = *parsed_mode;

    if (j.contains("function_signature") && !j["function_signature"].is_null())
        p.function_signature = required_string(j, "function_signature", line);
    if (p.io_mode == IoMode::FunctionCompletion) {
        if (!p.function_signature)
            throw MalformedRecord(line, "function_completion record without function_signature");
        if (!p.entry_point())
            throw MalformedRecord(line, "function_signature has no 'def name(' clause");
    }

    p.examples = tests_from_json(j, "examples", line);
    p.hidden_tests = tests_from_json(j, "hidden_tests", line);

    if (j.contains("rating") && !j["rating"].is_null()) {
        if (!j["rating"].is_number_integer()) throw MalformedRecord(line, "field 'rating' must be an integer");
        p.rating = j["rating"].get<int>();
    }

    p.source = default_source;
    if (j.contains("source") && !j["source"].is_null()) {
        const auto s = required_string(j, "source", line);
        const auto parsed = parse_source(s);
        if (!parsed) throw MalformedRecord(line, "unknown source '" + s + "'");
        p.source = *parsed;
    }

    if (j.contains("checker") && !j["checker"].is_null()) p.checker = required_string(j, "checker", line);

    for (const auto& [key, value] : j.items()) {
        if (!kKnownFields.count(key)) p.extra[key] = value;
    }
    return p;
}

LoadReport load_problems_report(const std::filesystem::path& path, Source source) {
    std::ifstream in(path);
    if (!std::filesystem::is_regular_file(path) || !in) throw FileNotFound(path.string());

    LoadReport report;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (text::trim(line).empty()) continue;
        try {
            json j;
            try {
                j = json::parse(line);
            } catch (const json::parse_error& e) {
                throw MalformedRecord(lineno, std::string("invalid JSON: ") + e.what());
            }
            report.problems.push_back(problem_from_json(j, source, lineno));
        } catch (const MalformedRecord& e) {
            report.malformed.push_back(e);
        }
    }
    return report;
}

std::vector<Problem> load_problems(const std::filesystem::path& path, Source source) {
    auto report = load_problems_report(path, source);
    if (!report.malformed.empty()) throw report.malformed.front();
    return std::move(report.problems);
}

void write_problems(const std::filesystem::path& path, const std::vector<Problem>& problems) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    for (const auto& p : problems) out << to_json(p).dump() << '\n';
}

void DatasetFilterSpec::validate() const {
    if (max_length && *max_length < 1) throw ConfigError("max_length must be >= 1");
    if (min_rating && *min_rating < 0) throw ConfigError("min_rating must be >= 0");
}

bool DatasetFilterSpec::accepts(const Problem& p) const {
    if (max_length && p.statement_length > *max_length) return false;
    if (min_rating && (!p.rating || *p.rating < *min_rating)) return false;
    if (require_examples && p.examples.empty()) return false;
    if (id_allowlist &&
        std::find(id_allowlist->begin(), id_allowlist->end(), p.id) == id_allowlist->end())
        return false;
    return true;
}

std::vector<Problem> apply_filter(const std::vector<Problem>& problems,
                                  const DatasetFilterSpec& spec) {
    spec.validate();
    std::vector<Problem> out;
    std::copy_if(problems.begin(), problems.end(), std::back_inserter(out),
                 [&](const Problem& p) { return spec.accepts(p); });
    return out;
}

std::vector<Problem> sample_long_subset(const std::vector<Problem>& problems,
                                        std::size_t min_length_exclusive, std::size_t count,
                                        std::uint64_t seed) {
    std::vector<const Problem*> pool;
    for (const auto& p : problems) {
        if (p.statement_length > min_length_exclusive) pool.push_back(&p);
    }
    if (count > pool.size()) throw InsufficientPool(count, pool.size());

    // Partial Fisher-Yates: slot i receives a uniform pick from pool[i..].
    SeededRng rng(seed);
    std::vector<Problem> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        const auto j = i + static_cast<std::size_t>(rng.uniform_index(pool.size() - i));
        std::swap(pool[i], pool[j]);
        out.push_back(*pool[i]);
    }
    return out;
}

}  // namespace narrbench
