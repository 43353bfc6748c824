#include "narrbench/prompts.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "narrbench/errors.hpp"
#include "narrbench/rng.hpp"
#include "narrbench/text.hpp"

namespace narrbench {

namespace detail {
std::map<std::string, std::string, std::less<>> builtin_templates();
}

namespace {
constexpr std::string_view kLanguage = "Python";
}

// ---------------------------------------------------------------------------
// Templates
// ---------------------------------------------------------------------------

std::string render_template(std::string_view tmpl, const TemplateVars& vars) {
    std::string out;
    out.reserve(tmpl.size());
    std::size_t pos = 0;
    while (pos < tmpl.size()) {
        const auto open = tmpl.find("{{", pos);
        if (open == std::string_view::npos) {
            out.append(tmpl.substr(pos));
            break;
        }
        const auto close = tmpl.find("}}", open + 2);
        if (close == std::string_view::npos) {
            out.append(tmpl.substr(pos));
            break;
        }
        const auto name = tmpl.substr(open + 2, close - open - 2);
        const auto it = vars.find(name);
        if (it == vars.end()) throw ConfigError("template placeholder without value: " + std::string(name));
        out.append(tmpl.substr(pos, open - pos));
        out.append(it->second);
        pos = close + 2;
    }
    return out;
}

std::shared_ptr<const TemplateRegistry> TemplateRegistry::builtin() {
    static const auto registry = std::make_shared<const TemplateRegistry>(detail::builtin_templates());
    return registry;
}

std::shared_ptr<const TemplateRegistry> TemplateRegistry::with_overrides(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir)) throw FileNotFound(dir.string());
    auto templates = detail::builtin_templates();
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (!entry.is_regular_file() || entry.path().extension() != ".txt") continue;
        std::ifstream in(entry.path(), std::ios::binary);
        std::ostringstream ss;
        ss << in.rdbuf();
        templates[entry.path().stem().string()] = ss.str();
    }
    return std::make_shared<const TemplateRegistry>(std::move(templates));
}

const std::string& TemplateRegistry::get(std::string_view id) const {
    const auto it = templates_.find(id);
    if (it == templates_.end()) throw ConfigError("unknown template id: " + std::string(id));
    return it->second;
}

std::vector<std::string> TemplateRegistry::ids() const {
    std::vector<std::string> out;
    for (const auto& [id, _] : templates_) out.push_back(id);
    return out;
}

// ---------------------------------------------------------------------------
// Strategies
// ---------------------------------------------------------------------------

std::string_view to_string(StrategyKind k) {
    switch (k) {
        case StrategyKind::RepeatedSampling: return "RepeatedSampling";
        case StrategyKind::CoT: return "CoT";
        case StrategyKind::SCoT: return "SCoT";
        case StrategyKind::NarrativeOnly: return "NarrativeOnly";
        case StrategyKind::NarrativeConcat: return "NarrativeConcat";
        case StrategyKind::NoTagNarrative: return "NoTagNarrative";
        case StrategyKind::Permuted: return "Permuted";
        case StrategyKind::Misaligned: return "Misaligned";
        case StrategyKind::Paraphrase: return "Paraphrase";
        case StrategyKind::ParaphraseConcat: return "ParaphraseConcat";
        case StrategyKind::ExternalTemplate: return "ExternalTemplate";
    }
    return "RepeatedSampling";
}

std::optional<StrategyKind> parse_strategy_kind(std::string_view s) {
    for (auto k : kAllStrategyKinds) {
        if (text::to_lower(s) == text::to_lower(to_string(k))) return k;
    }
    if (s == "RS") return StrategyKind::RepeatedSampling;
    if (s == "PC") return StrategyKind::ParaphraseConcat;
    return std::nullopt;
}

bool needs_narrative(StrategyKind k) {
    switch (k) {
        case StrategyKind::NarrativeOnly:
        case StrategyKind::NarrativeConcat:
        case StrategyKind::NoTagNarrative:
        case StrategyKind::Permuted:
        case StrategyKind::Misaligned: return true;
        default: return false;
    }
}

bool needs_paraphrase(StrategyKind k) {
    return k == StrategyKind::Paraphrase || k == StrategyKind::ParaphraseConcat;
}

std::string_view default_template_id(StrategyKind k) {
    switch (k) {
        case StrategyKind::RepeatedSampling: return "solve_plain";
        case StrategyKind::CoT: return "solve_cot";
        case StrategyKind::SCoT: return "solve_scot";
        case StrategyKind::NarrativeConcat: return "solve_narrative_concat";
        case StrategyKind::NarrativeOnly:
        case StrategyKind::NoTagNarrative:
        case StrategyKind::Permuted:
        case StrategyKind::Misaligned: return "solve_narrative";
        case StrategyKind::Paraphrase: return "solve_paraphrase";
        case StrategyKind::ParaphraseConcat: return "solve_paraphrase_concat";
        case StrategyKind::ExternalTemplate: return "";
    }
    return "solve_plain";
}

PromptStrategy PromptStrategy::of(StrategyKind kind) {
    return {kind, std::string(default_template_id(kind))};
}

PromptStrategy PromptStrategy::external(std::string template_id) {
    return {StrategyKind::ExternalTemplate, std::move(template_id)};
}

// ---------------------------------------------------------------------------
// Narrative parsing
// ---------------------------------------------------------------------------

std::string_view to_string(Validity v) {
    switch (v) {
        case Validity::Valid: return "Valid";
        case Validity::TooShort: return "TooShort";
        case Validity::DegenerateRepetition: return "DegenerateRepetition";
        case Validity::MissingComponents: return "MissingComponents";
    }
    return "Valid";
}

std::optional<Validity> parse_validity(std::string_view s) {
    for (auto v : {Validity::Valid, Validity::TooShort, Validity::DegenerateRepetition,
                   Validity::MissingComponents}) {
        if (s == to_string(v)) return v;
    }
    return std::nullopt;
}

namespace {

enum class Section { None, Category, Genre, Overview, Constraints, Examples, Count };

struct HeaderName {
    Section section;
    std::string_view lower;
};

constexpr std::array<HeaderName, 7> kHeaders = {{
    {Section::Category, "algorithm category"},
    {Section::Genre, "narrative genre"},
    {Section::Overview, "task overview"},
    {Section::Constraints, "constraints"},
    {Section::Examples, "example input/output"},
    {Section::Examples, "example input / output"},
    {Section::Examples, "example i/o"},
}};

bool starts_with_ci(std::string_view s, std::string_view lower_prefix) {
    if (s.size() < lower_prefix.size()) return false;
    for (std::size_t i = 0; i < lower_prefix.size(); ++i) {
        if (std::tolower(static_cast<unsigned char>(s[i])) != lower_prefix[i]) return false;
    }
    return true;
}

std::string_view skip_emphasis(std::string_view s) {
    while (!s.empty() && (s.front() == '*' || s.front() == '_' || s.front() == ' ' || s.front() == '\t'))
        s.remove_prefix(1);
    return s;
}

// Strips list markers, heading hashes, quote markers and emphasis.
std::string_view strip_line_markers(std::string_view s) {
    for (;;) {
        const auto before = s.size();
        s = text::trim(s);
        while (!s.empty() && (s.front() == '-' || s.front() == '*' || s.front() == '#' ||
                              s.front() == '>' || s.front() == '_' || s.front() == '+'))
            s.remove_prefix(1);
        if (s.size() >= 3 && s.substr(0, 3) == "\xE2\x80\xA2") s.remove_prefix(3);  // bullet
        std::size_t digits = 0;
        while (digits < s.size() && std::isdigit(static_cast<unsigned char>(s[digits]))) ++digits;
        if (digits > 0 && digits < s.size() && (s[digits] == '.' || s[digits] == ')'))
            s.remove_prefix(digits + 1);
        if (s.size() == before) return s;
    }
}

struct HeaderMatch {
    Section section = Section::None;
    std::string_view rest;
};

HeaderMatch match_header(std::string_view line) {
    const auto s = strip_line_markers(line);
    for (const auto& h : kHeaders) {
        if (!starts_with_ci(s, h.lower)) continue;
        auto after = skip_emphasis(s.substr(h.lower.size()));
        if (after.empty() || after.front() != ':') continue;
        after.remove_prefix(1);
        after = text::trim(skip_emphasis(after));
        return {h.section, after};
    }
    return {};
}

std::string clean_tag_value(std::string_view s) {
    s = text::trim(s);
    while (!s.empty() && (s.front() == '*' || s.front() == '_')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == '*' || s.back() == '_' || s.back() == '.')) s.remove_suffix(1);
    return std::string(text::trim(s));
}

}  // namespace

NarrativeVariant parse_narrative(std::string_view raw, std::size_t max_generation_tokens,
                                 bool include_tags) {
    if (max_generation_tokens == 0) throw DomainError("max_generation_tokens must be > 0");

    NarrativeVariant v;
    v.raw_output = std::string(raw);

    std::array<std::string, static_cast<std::size_t>(Section::Count)> content;
    std::array<bool, static_cast<std::size_t>(Section::Count)> seen{};
    Section current = Section::None;
    bool discarding = false;  // inside a repeated header: first occurrence wins
    for (auto line : text::split_lines(raw)) {
        const auto m = match_header(line);
        if (m.section != Section::None) {
            const auto idx = static_cast<std::size_t>(m.section);
            discarding = seen[idx];
            seen[idx] = true;
            current = m.section;
            if (!discarding) content[idx] = std::string(m.rest);
            continue;
        }
        if (current == Section::None || discarding) continue;
        auto& buf = content[static_cast<std::size_t>(current)];
        buf.push_back('\n');
        buf.append(line);
    }
    auto section = [&](Section s) { return std::string(text::trim(content[static_cast<std::size_t>(s)])); };
    v.task_overview = section(Section::Overview);
    v.constraints = section(Section::Constraints);
    v.example_io = section(Section::Examples);
    if (include_tags) {
        const auto cat = clean_tag_value(section(Section::Category));
        v.algorithm_category = parse_category(cat);
        auto genre = clean_tag_value(section(Section::Genre));
        if (!genre.empty()) v.genre = std::move(genre);
    }

    const auto tokens = text::count_whitespace_tokens(raw);
    if (tokens < kMinNarrativeTokens) {
        v.validity = Validity::TooShort;
    } else if (static_cast<double>(tokens) > kDegenerateFraction * static_cast<double>(max_generation_tokens)) {
        v.validity = Validity::DegenerateRepetition;
    } else if (v.task_overview.empty() || v.constraints.empty() || v.example_io.empty()) {
        v.validity = Validity::MissingComponents;
    } else {
        v.validity = Validity::Valid;
    }
    return v;
}

std::string serialize_narrative(const NarrativeVariant& v) {
    std::string out;
    if (v.algorithm_category || v.genre) {
        out += "- Algorithm Category: ";
        if (v.algorithm_category) out += display_name(*v.algorithm_category);
        out += "\n\n- Narrative Genre: ";
        if (v.genre) out += *v.genre;
        out += "\n\n";
    }
    out += "- Task Overview: " + v.task_overview + "\n\n";
    out += "- Constraints: " + v.constraints + "\n\n";
    out += "- Example Input/Output: " + v.example_io + "\n";
    return out;
}

std::string narrative_body(const NarrativeVariant& v) {
    std::string out = "Task Overview: " + v.task_overview + "\n\nConstraints: " + v.constraints;
    if (!v.example_io_stripped) out += "\n\nExample Input/Output: " + v.example_io;
    return out;
}

nlohmann::json to_json(const NarrativeVariant& v) {
    nlohmann::json j;
    j["problem_id"] = v.problem_id;
    j["variant_index"] = v.variant_index;
    j["algorithm_category"] =
        v.algorithm_category ? nlohmann::json(std::string(id_name(*v.algorithm_category))) : nlohmann::json();
    j["genre"] = v.genre ? nlohmann::json(*v.genre) : nlohmann::json();
    j["task_overview"] = v.task_overview;
    j["constraints"] = v.constraints;
    j["example_io"] = v.example_io;
    j["raw_output"] = v.raw_output;
    j["validity"] = to_string(v.validity);
    j["example_io_stripped"] = v.example_io_stripped;
    if (v.permutation) j["permutation"] = *v.permutation;
    return j;
}

NarrativeVariant narrative_from_json(const nlohmann::json& j) {
    NarrativeVariant v;
    v.problem_id = j.at("problem_id").get<std::string>();
    v.variant_index = j.at("variant_index").get<int>();
    if (j.contains("algorithm_category") && j["algorithm_category"].is_string())
        v.algorithm_category = parse_category(j["algorithm_category"].get<std::string>());
    if (j.contains("genre") && j["genre"].is_string()) v.genre = j["genre"].get<std::string>();
    v.task_overview = j.at("task_overview").get<std::string>();
    v.constraints = j.at("constraints").get<std::string>();
    v.example_io = j.at("example_io").get<std::string>();
    v.raw_output = j.value("raw_output", std::string());
    const auto validity = parse_validity(j.at("validity").get<std::string>());
    if (!validity) throw Error("unknown validity value");
    v.validity = *validity;
    v.example_io_stripped = j.value("example_io_stripped", false);
    if (j.contains("permutation")) v.permutation = j["permutation"].get<std::array<int, 3>>();
    return v;
}

// ---------------------------------------------------------------------------
// Prompt builders
// ---------------------------------------------------------------------------

std::string problem_text(const Problem& p) {
    std::string out = p.statement;
    if (p.examples.empty()) return out;
    out += "\n\n### Examples\n";
    const auto entry = p.entry_point();
    for (std::size_t i = 0; i < p.examples.size(); ++i) {
        const auto& ex = p.examples[i];
        out += "\nExample " + std::to_string(i + 1) + ":\n";
        if (p.io_mode == IoMode::FunctionCompletion && entry) {
            out += *entry + "(" + ex.input + ") == " + ex.output + "\n";
        } else {
            out += "Input:\n" + ex.input;
            if (!ex.input.empty() && ex.input.back() != '\n') out += "\n";
            out += "Output:\n" + ex.output;
            if (!ex.output.empty() && ex.output.back() != '\n') out += "\n";
        }
    }
    return out;
}

namespace {

std::string io_instruction(const Problem& p) {
    if (p.io_mode == IoMode::FunctionCompletion && p.function_signature) {
        return "Implement the function with the following signature and return the complete "
               "function definition:\n```python\n" +
               *p.function_signature + "\n```";
    }
    return "The program must read the input from standard input and write the answer to standard output.";
}

TemplateVars base_vars(const Problem& p) {
    return {{"language", std::string(kLanguage)},
            {"io_instruction", io_instruction(p)},
            {"statement", problem_text(p)}};
}

}  // namespace

std::string build_transformation_prompt(const Problem& problem, bool include_tags,
                                        const TemplateRegistry& templates) {
    return render_template(templates.get(include_tags ? "transform_tagged" : "transform_notag"),
                           {{"statement", problem_text(problem)}});
}

std::string build_solver_prompt(const PromptStrategy& strategy, const Problem& problem,
                                SolverInputs inputs, const TemplateRegistry& templates) {
    const auto kind = strategy.kind;
    if (needs_narrative(kind)) {
        if (!inputs.narrative)
            throw StrategyNarrativeMismatch(std::string(to_string(kind)) + " requires a narrative");
        if (inputs.narrative->validity != Validity::Valid)
            throw StrategyNarrativeMismatch(std::string(to_string(kind)) + " requires a Valid narrative, got " +
                                            std::string(to_string(inputs.narrative->validity)));
    } else if (inputs.narrative) {
        throw StrategyNarrativeMismatch(std::string(to_string(kind)) + " does not take a narrative");
    }
    if (needs_paraphrase(kind) && !inputs.paraphrase)
        throw StrategyNarrativeMismatch(std::string(to_string(kind)) + " requires paraphrase text");
    if (!needs_paraphrase(kind) && inputs.paraphrase)
        throw StrategyNarrativeMismatch(std::string(to_string(kind)) + " does not take paraphrase text");

    const std::string template_id =
        strategy.template_id.empty() ? std::string(default_template_id(kind)) : strategy.template_id;
    if (template_id.empty()) throw ConfigError("ExternalTemplate strategy without template id");

    auto vars = base_vars(problem);
    if (inputs.narrative) vars["narrative"] = narrative_body(*inputs.narrative);
    if (inputs.paraphrase) vars["paraphrase"] = *inputs.paraphrase;
    return render_template(templates.get(template_id), vars);
}

std::vector<NarrativeVariant> permute_variants(const std::vector<NarrativeVariant>& variants,
                                               std::uint64_t seed) {
    std::vector<const NarrativeVariant*> valid;
    for (const auto& v : variants) {
        if (v.validity == Validity::Valid) valid.push_back(&v);
    }
    if (valid.size() < 3) throw InsufficientVariants(3, valid.size());

    SeededRng rng(seed);
    const auto m = valid.size();
    std::vector<NarrativeVariant> out;
    out.reserve(m);
    for (std::size_t slot = 0; slot < m; ++slot) {
        // Uniform over ordered triples of distinct indices.
        auto a = static_cast<std::size_t>(rng.uniform_index(m));
        auto b = static_cast<std::size_t>(rng.uniform_index(m - 1));
        if (b >= a) ++b;
        auto c = static_cast<std::size_t>(rng.uniform_index(m - 2));
        const auto lo = std::min(a, b), hi = std::max(a, b);
        if (c >= lo) ++c;
        if (c >= hi) ++c;

        const auto& overview = *valid[a];
        NarrativeVariant p;
        p.problem_id = overview.problem_id;
        p.variant_index = static_cast<int>(slot + 1);
        p.algorithm_category = overview.algorithm_category;
        p.genre = overview.genre;
        p.task_overview = overview.task_overview;
        p.constraints = valid[b]->constraints;
        p.example_io = valid[c]->example_io;
        p.validity = Validity::Valid;
        p.permutation = std::array<int, 3>{valid[a]->variant_index, valid[b]->variant_index,
                                           valid[c]->variant_index};
        p.raw_output = serialize_narrative(p);
        out.push_back(std::move(p));
    }
    return out;
}

MisalignedGenreSet::MisalignedGenreSet(std::vector<Group> groups) : groups_(std::move(groups)) {
    for (const auto& g : groups_) genres_.insert(genres_.end(), g.genres.begin(), g.genres.end());
    if (groups_.size() != 4 || genres_.size() != 20)
        throw ConfigError("misaligned genre set needs 4 groups and 20 genres, got " +
                          std::to_string(groups_.size()) + " groups and " + std::to_string(genres_.size()) +
                          " genres");
}

const MisalignedGenreSet& MisalignedGenreSet::shipped() {
    static const MisalignedGenreSet set({
        {"Practical / Administrative Documents",
         {"Hospital Intake Form", "Medical Prescription Form", "Personal Information Consent Form",
          "Insurance Claim Form", "Visa Application Form", "Tax Return Form"}},
        {"Legal / Public Records",
         {"Court Transcript of an Extortion Case", "Heavy Machinery Operator License",
          "Military Service Exemption Certificate", "Divorce Decree", "Bank Loan Agreement"}},
        {"Industrial / Media Contexts",
         {"Billboard Advertisement for a Toothbrush", "Radio Weather Forecast", "Model Agency Contract"}},
        {"Funerary / Ritual Records",
         {"Funeral Service Program", "Memorial Tribute Writing", "Obituary Column", "Eulogy",
          "Gravestone Inscription", "Condolence Letter"}},
    });
    return set;
}

const std::string& MisalignedGenreSet::draw(std::uint64_t seed) const {
    SeededRng rng(seed);
    return genres_[static_cast<std::size_t>(rng.uniform_index(genres_.size()))];
}

std::string build_misaligned_prompt(const Problem& problem, const MisalignedGenreSet& genres,
                                    std::uint64_t seed, const TemplateRegistry& templates) {
    return render_template(templates.get("transform_misaligned"),
                           {{"statement", problem_text(problem)}, {"genre", genres.draw(seed)}});
}

std::string build_paraphrase_prompt(const Problem& problem, const TemplateRegistry& templates) {
    return render_template(templates.get("paraphrase"), {{"statement", problem_text(problem)}});
}

std::string concat_paraphrases(const std::vector<std::string>& paraphrases, std::size_t k) {
    if (paraphrases.size() < k) throw InsufficientVariants(k, paraphrases.size());
    std::string out;
    for (std::size_t i = 0; i < k; ++i) {
        if (i) out += "\n\n";
        out += "### Version " + std::to_string(i + 1) + "\n\n" + paraphrases[i];
    }
    return out;
}

std::string build_back_translation_prompt(std::string_view code, bool retry,
                                          const TemplateRegistry& templates) {
    return render_template(templates.get(retry ? "back_translate_retry" : "back_translate"),
                           {{"language", std::string(kLanguage)}, {"code", std::string(code)}});
}

std::optional<Category> parse_back_translation(std::string_view answer) {
    auto attempt = [](std::string_view s) -> std::optional<Category> {
        const auto cleaned = clean_tag_value(s);
        if (auto c = parse_category(cleaned)) return c;
        // "Category: X" / "Answer: X"
        const auto colon = cleaned.rfind(':');
        if (colon != std::string::npos) return parse_category(clean_tag_value(cleaned.substr(colon + 1)));
        return std::nullopt;
    };
    if (auto c = attempt(answer)) return c;
    const auto lines = text::split_lines(answer);
    for (auto it = lines.rbegin(); it != lines.rend(); ++it) {
        if (text::trim(*it).empty()) continue;
        return attempt(strip_line_markers(*it));
    }
    return std::nullopt;
}

NarrativeVariant strip_example_io(const NarrativeVariant& narrative) {
    NarrativeVariant out = narrative;
    out.example_io.clear();
    out.example_io_stripped = true;
    const bool usable = narrative.validity == Validity::Valid ||
                        (narrative.validity == Validity::MissingComponents && narrative.example_io.empty());
    if (usable && !out.task_overview.empty() && !out.constraints.empty()) out.validity = Validity::Valid;
    return out;
}

Problem strip_examples(const Problem& problem) {
    Problem out = problem;
    out.examples.clear();
    return out;
}

}  // namespace narrbench
