#include "narrbench/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "narrbench/errors.hpp"

namespace narrbench {

using nlohmann::json;
namespace fs = std::filesystem;

std::string ArmSpec::name() const {
    std::string n = strategy.kind == StrategyKind::ExternalTemplate ? "External:" + strategy.template_id
                                                                     : std::string(to_string(strategy.kind));
    if (strip_io) n += ":noio";
    return n;
}

ArmSpec ArmSpec::parse(std::string_view text) {
    ArmSpec arm;
    std::string s(text);
    const std::string suffix = ":noio";
    if (s.size() > suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0) {
        arm.strip_io = true;
        s.resize(s.size() - suffix.size());
    }
    if (s.rfind("External:", 0) == 0) {
        const auto id = s.substr(9);
        if (id.empty()) throw ConfigError("External arm needs a template id");
        arm.strategy = PromptStrategy::external(id);
        return arm;
    }
    const auto kind = parse_strategy_kind(s);
    if (!kind) throw ConfigError("unknown strategy: " + std::string(text));
    if (*kind == StrategyKind::ExternalTemplate) throw ConfigError("write external arms as External:<template_id>");
    arm.strategy = PromptStrategy::of(*kind);
    return arm;
}

std::string_view to_string(NarrativeFamily f) {
    switch (f) {
        case NarrativeFamily::Tagged: return "tagged";
        case NarrativeFamily::NoTag: return "notag";
        case NarrativeFamily::Misaligned: return "misaligned";
        case NarrativeFamily::Paraphrase: return "paraphrase";
    }
    return "tagged";
}

std::optional<NarrativeFamily> family_for(StrategyKind kind) {
    switch (kind) {
        case StrategyKind::NarrativeOnly:
        case StrategyKind::NarrativeConcat:
        case StrategyKind::Permuted: return NarrativeFamily::Tagged;
        case StrategyKind::NoTagNarrative: return NarrativeFamily::NoTag;
        case StrategyKind::Misaligned: return NarrativeFamily::Misaligned;
        case StrategyKind::Paraphrase:
        case StrategyKind::ParaphraseConcat: return NarrativeFamily::Paraphrase;
        default: return std::nullopt;
    }
}

void RunConfig::validate() const {
    if (benchmark.path.empty()) throw ConfigError("benchmark.path is required");
    benchmark.filter.validate();
    if (arms.empty()) throw ConfigError("strategies must not be empty");
    std::set<std::string> names;
    for (const auto& a : arms) {
        if (!names.insert(a.name()).second) throw ConfigError("duplicate strategy: " + a.name());
    }
    if (n_variants < 1) throw ConfigError("n_variants must be >= 1");
    if (samples_per_strategy < 1) throw ConfigError("samples_per_strategy must be >= 1");
    if (samples_per_variant < 1) throw ConfigError("samples_per_variant must be >= 1");
    for (double t : {narrative_temperature, code_temperature}) {
        if (!(t >= 0.0 && t <= 2.0)) throw ConfigError("temperatures must be in [0, 2]");
    }
    if (limits.time_ms <= 0 || limits.memory_mb <= 0) throw ConfigError("limits must be positive");
    if (output_dir.empty()) throw ConfigError("output_dir is required");
    if (ks.empty()) throw ConfigError("k list must not be empty");
    for (int k : ks) {
        if (k < 1) throw ConfigError("every k must be >= 1");
    }
    if (max_in_flight < 1) throw ConfigError("max_in_flight must be >= 1");
    if (parallel_exec < 1) throw ConfigError("parallel_exec must be >= 1");
    for (const auto* id : {&narr_backend, &solve_backend, &alg_backend}) provider(*id);
}

const ProviderConfig& RunConfig::provider(const std::string& backend_id) const {
    for (const auto& p : providers) {
        if (p.backend_id == backend_id) return p;
    }
    throw ConfigError("no provider with backend_id '" + backend_id + "'");
}

int RunConfig::target_samples(const ArmSpec& arm) const {
    switch (arm.strategy.kind) {
        case StrategyKind::NarrativeOnly:
        case StrategyKind::NarrativeConcat:
        case StrategyKind::NoTagNarrative:
        case StrategyKind::Permuted:
        case StrategyKind::Misaligned:
        case StrategyKind::Paraphrase: return n_variants * samples_per_variant;
        default: return samples_per_strategy;
    }
}

namespace {

fs::path resolve(const fs::path& base, const std::string& p) {
    if (p.empty()) return {};
    const fs::path path(p);
    return path.is_absolute() ? path : (base / path).lexically_normal();
}

std::string_view to_string(BackTranslatePolicy p) {
    switch (p) {
        case BackTranslatePolicy::All: return "all";
        case BackTranslatePolicy::Correct: return "correct";
        case BackTranslatePolicy::None: return "none";
    }
    return "all";
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
    if (!j.contains(key) || j[key].is_null()) return fallback;
    try {
        return j[key].get<T>();
    } catch (const json::exception&) {
        throw ConfigError(std::string("bad value for ") + key + ": " + j[key].dump());
    }
}

}  // namespace

RunConfig run_config_from_json(const json& j, const fs::path& base_dir) {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    RunConfig c;
    try {
        const auto& b = j.at("benchmark");
        const auto source = parse_source(b.value("source", std::string("custom")));
        if (!source) throw ConfigError("unknown benchmark source: " + b.value("source", std::string()));
        c.benchmark.source = *source;
        c.benchmark.path = resolve(base_dir, b.at("path").get<std::string>());
        if (b.contains("filter")) {
            const auto& f = b["filter"];
            if (f.contains("max_length")) c.benchmark.filter.max_length = f["max_length"].get<std::size_t>();
            if (f.contains("min_rating")) c.benchmark.filter.min_rating = f["min_rating"].get<int>();
            c.benchmark.filter.require_examples = f.value("require_examples", false);
            if (f.contains("id_allowlist"))
                c.benchmark.filter.id_allowlist = f["id_allowlist"].get<std::vector<std::string>>();
        }
        if (b.contains("long_subset")) {
            LongSubsetSpec l;
            l.min_length_exclusive = b["long_subset"].value("min_length_exclusive", l.min_length_exclusive);
            l.count = b["long_subset"].value("count", l.count);
            c.benchmark.long_subset = l;
        }

        for (const auto& s : j.at("strategies")) c.arms.push_back(ArmSpec::parse(s.get<std::string>()));
        for (const auto& p : j.at("providers")) {
            auto provider = provider_from_json(p);
            if (!provider.mock_script.empty()) provider.mock_script = resolve(base_dir, provider.mock_script).string();
            c.providers.push_back(std::move(provider));
        }
        const auto first = c.providers.empty() ? std::string() : c.providers.front().backend_id;
        c.narr_backend = get_or(j, "narr_backend", first);
        c.solve_backend = get_or(j, "solve_backend", c.narr_backend);
        c.alg_backend = get_or(j, "alg_backend", c.solve_backend);

        c.n_variants = get_or(j, "n_variants", c.n_variants);
        c.samples_per_strategy = get_or(j, "samples_per_strategy", c.samples_per_strategy);
        c.samples_per_variant = get_or(j, "samples_per_variant", c.samples_per_variant);
        if (j.contains("temperatures")) {
            c.narrative_temperature = get_or(j["temperatures"], "narrative", c.narrative_temperature);
            c.code_temperature = get_or(j["temperatures"], "code", c.code_temperature);
        }
        if (j.contains("seeds")) {
            c.seeds.sampling = get_or(j["seeds"], "sampling", c.seeds.sampling);
            c.seeds.permutation = get_or(j["seeds"], "permutation", c.seeds.permutation);
            c.seeds.misalignment = get_or(j["seeds"], "misalignment", c.seeds.misalignment);
        }
        if (j.contains("limits")) {
            c.limits.time_ms = get_or(j["limits"], "time_ms", c.limits.time_ms);
            c.limits.memory_mb = get_or(j["limits"], "memory_mb", c.limits.memory_mb);
        }
        c.output_dir = resolve(base_dir, j.at("output_dir").get<std::string>());
        c.ks = get_or(j, "k", c.ks);
        const auto bt = get_or(j, "back_translate", std::string("all"));
        if (bt == "all") {
            c.back_translate = BackTranslatePolicy::All;
        } else if (bt == "correct") {
            c.back_translate = BackTranslatePolicy::Correct;
        } else if (bt == "none") {
            c.back_translate = BackTranslatePolicy::None;
        } else {
            throw ConfigError("back_translate must be all, correct or none");
        }
        c.max_in_flight = get_or(j, "max_in_flight", c.max_in_flight);
        c.parallel_exec = get_or(j, "parallel_exec", c.parallel_exec);
        c.exact_match = get_or(j, "exact_match", c.exact_match);
        if (j.contains("templates_dir") && !j["templates_dir"].is_null())
            c.templates_dir = resolve(base_dir, j["templates_dir"].get<std::string>());
        c.interpreter = get_or(j, "interpreter", c.interpreter);
        c.astprobe_command = get_or(j, "astprobe", c.astprobe_command);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("invalid run config: ") + e.what());
    }
    c.validate();
    return c;
}

RunConfig load_run_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw FileNotFound(path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
    }
    return run_config_from_json(j, fs::absolute(path).parent_path());
}

json to_json(const RunConfig& c) {
    json filter = json::object();
    if (c.benchmark.filter.max_length) filter["max_length"] = *c.benchmark.filter.max_length;
    if (c.benchmark.filter.min_rating) filter["min_rating"] = *c.benchmark.filter.min_rating;
    filter["require_examples"] = c.benchmark.filter.require_examples;
    if (c.benchmark.filter.id_allowlist) filter["id_allowlist"] = *c.benchmark.filter.id_allowlist;
    json benchmark{{"source", to_string(c.benchmark.source)}, {"path", c.benchmark.path.string()}, {"filter", filter}};
    if (c.benchmark.long_subset)
        benchmark["long_subset"] = {{"min_length_exclusive", c.benchmark.long_subset->min_length_exclusive},
                                    {"count", c.benchmark.long_subset->count}};

    json strategies = json::array();
    for (const auto& a : c.arms) strategies.push_back(a.name());
    json providers = json::array();
    for (const auto& p : c.providers) providers.push_back(to_json(p));

    json j{{"benchmark", benchmark},
           {"strategies", strategies},
           {"providers", providers},
           {"narr_backend", c.narr_backend},
           {"solve_backend", c.solve_backend},
           {"alg_backend", c.alg_backend},
           {"n_variants", c.n_variants},
           {"samples_per_strategy", c.samples_per_strategy},
           {"samples_per_variant", c.samples_per_variant},
           {"temperatures", {{"narrative", c.narrative_temperature}, {"code", c.code_temperature}}},
           {"seeds", {{"sampling", c.seeds.sampling}, {"permutation", c.seeds.permutation},
                      {"misalignment", c.seeds.misalignment}}},
           {"limits", {{"time_ms", c.limits.time_ms}, {"memory_mb", c.limits.memory_mb}}},
           {"output_dir", c.output_dir.string()},
           {"k", c.ks},
           {"back_translate", to_string(c.back_translate)},
           {"max_in_flight", c.max_in_flight},
           {"parallel_exec", c.parallel_exec},
           {"exact_match", c.exact_match},
           {"interpreter", c.interpreter},
           {"astprobe", c.astprobe_command}};
    j["templates_dir"] = c.templates_dir ? json(c.templates_dir->string()) : json();
    return j;
}

}  // namespace narrbench
