#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "narrbench/category.hpp"
#include "narrbench/dataset.hpp"

namespace narrbench {

// ---------------------------------------------------------------------------
// Templates
// ---------------------------------------------------------------------------

using TemplateVars = std::map<std::string, std::string, std::less<>>;

/// Replaces every {{name}} in `tmpl` with vars[name] in a single left-to-right
/// pass. Substituted text is never rescanned, so values containing "{{...}}"
/// come through literally. Throws ConfigError for a placeholder with no value.
std::string render_template(std::string_view tmpl, const TemplateVars& vars);

/// Immutable id -> template text map. Built once and shared read-only.
class TemplateRegistry {
public:
    /// Templates compiled into the library from templates/*.txt.
    static std::shared_ptr<const TemplateRegistry> builtin();

    /// Built-in set overlaid with every *.txt in `dir` (file stem = id).
    static std::shared_ptr<const TemplateRegistry> with_overrides(const std::filesystem::path& dir);

    explicit TemplateRegistry(std::map<std::string, std::string, std::less<>> templates)
        : templates_(std::move(templates)) {}

    bool contains(std::string_view id) const { return templates_.find(id) != templates_.end(); }
    const std::string& get(std::string_view id) const;
    std::vector<std::string> ids() const;

private:
    std::map<std::string, std::string, std::less<>> templates_;
};

// ---------------------------------------------------------------------------
// Strategies
// ---------------------------------------------------------------------------

enum class StrategyKind {
    RepeatedSampling,
    CoT,
    SCoT,
    NarrativeOnly,
    NarrativeConcat,
    NoTagNarrative,
    Permuted,
    Misaligned,
    Paraphrase,
    ParaphraseConcat,
    ExternalTemplate,
};

inline constexpr std::array<StrategyKind, 11> kAllStrategyKinds = {
    StrategyKind::RepeatedSampling, StrategyKind::CoT,        StrategyKind::SCoT,
    StrategyKind::NarrativeOnly,    StrategyKind::NarrativeConcat,
    StrategyKind::NoTagNarrative,   StrategyKind::Permuted,   StrategyKind::Misaligned,
    StrategyKind::Paraphrase,       StrategyKind::ParaphraseConcat,
    StrategyKind::ExternalTemplate,
};

std::string_view to_string(StrategyKind k);
std::optional<StrategyKind> parse_strategy_kind(std::string_view s);

/// True for kinds whose solver prompt is built from a NarrativeVariant.
bool needs_narrative(StrategyKind k);
/// True for kinds whose solver prompt is built from paraphrase text.
bool needs_paraphrase(StrategyKind k);

struct PromptStrategy {
    StrategyKind kind = StrategyKind::RepeatedSampling;
    std::string template_id;

    /// Strategy with its registered default template.
    static PromptStrategy of(StrategyKind kind);
    /// ExternalTemplate strategy rendering a user-registered template.
    static PromptStrategy external(std::string template_id);

    bool operator==(const PromptStrategy&) const = default;
};

std::string_view default_template_id(StrategyKind k);

// ---------------------------------------------------------------------------
// Narratives
// ---------------------------------------------------------------------------

enum class Validity { Valid, TooShort, DegenerateRepetition, MissingComponents };

std::string_view to_string(Validity v);
std::optional<Validity> parse_validity(std::string_view s);

inline constexpr std::size_t kMinNarrativeTokens = 50;
inline constexpr double kDegenerateFraction = 0.99;

struct NarrativeVariant {
    std::string problem_id;
    int variant_index = 1;  // 1-based
    std::optional<Category> algorithm_category;
    std::optional<std::string> genre;
    std::string task_overview;
    std::string constraints;
    std::string example_io;
    std::string raw_output;
    Validity validity = Validity::MissingComponents;
    // Set by strip_example_io: example_io was removed on purpose.
    bool example_io_stripped = false;
    // Set by permute_variants: source variant indices for (overview, constraints, examples).
    std::optional<std::array<int, 3>> permutation;
};

nlohmann::json to_json(const NarrativeVariant& v);
NarrativeVariant narrative_from_json(const nlohmann::json& j);

/// Section-split a generator output and classify it. Rules are applied in
/// order and the first that fires wins:
///   TooShort             fewer than 50 whitespace tokens
///   DegenerateRepetition more than 0.99 * max_generation_tokens tokens
///   MissingComponents    overview, constraints or examples absent or empty
///   Valid
/// Headers are matched case-insensitively at line start; list markers,
/// markdown emphasis and heading hashes before the header are ignored.
NarrativeVariant parse_narrative(std::string_view raw, std::size_t max_generation_tokens,
                                 bool include_tags);

/// Five-section text in the generator's output format; parse_narrative reads
/// it back to the same fields.
std::string serialize_narrative(const NarrativeVariant& v);

/// The three content sections as shown to the solver. Tags are not included;
/// a stripped example section is omitted.
std::string narrative_body(const NarrativeVariant& v);

// ---------------------------------------------------------------------------
// Prompt builders
// ---------------------------------------------------------------------------

/// Statement followed by a rendered block of the problem's example I/O.
std::string problem_text(const Problem& p);

std::string build_transformation_prompt(const Problem& problem, bool include_tags,
                                        const TemplateRegistry& templates = *TemplateRegistry::builtin());

struct SolverInputs {
    const NarrativeVariant* narrative = nullptr;
    const std::string* paraphrase = nullptr;
};

/// Throws StrategyNarrativeMismatch when a narrative is required but absent or
/// not Valid, or supplied to a strategy that does not take one. The same rule
/// applies to paraphrase text for the paraphrase strategies.
std::string build_solver_prompt(const PromptStrategy& strategy, const Problem& problem,
                                SolverInputs inputs = {},
                                const TemplateRegistry& templates = *TemplateRegistry::builtin());

/// Recombines components across variants: output slot j takes its overview,
/// constraints and examples from three pairwise-distinct Valid variants drawn
/// uniformly from all ordered distinct triples. One output per Valid input.
/// Throws InsufficientVariants when fewer than three inputs are Valid.
std::vector<NarrativeVariant> permute_variants(const std::vector<NarrativeVariant>& variants,
                                               std::uint64_t seed);

/// Twenty incongruent genres in four groups.
class MisalignedGenreSet {
public:
    struct Group {
        std::string name;
        std::vector<std::string> genres;
    };

    /// Throws ConfigError unless there are exactly 4 groups and 20 genres.
    explicit MisalignedGenreSet(std::vector<Group> groups);

    static const MisalignedGenreSet& shipped();

    const std::vector<std::string>& genres() const noexcept { return genres_; }
    const std::vector<Group>& groups() const noexcept { return groups_; }
    /// Seeded uniform pick.
    const std::string& draw(std::uint64_t seed) const;

private:
    std::vector<Group> groups_;
    std::vector<std::string> genres_;
};

/// Transformation prompt with the genre fixed to a seeded draw from the set;
/// the algorithm category stays the generator's choice.
std::string build_misaligned_prompt(const Problem& problem, const MisalignedGenreSet& genres,
                                    std::uint64_t seed,
                                    const TemplateRegistry& templates = *TemplateRegistry::builtin());

std::string build_paraphrase_prompt(const Problem& problem,
                                    const TemplateRegistry& templates = *TemplateRegistry::builtin());

/// Joins the first k paraphrases as "### Version i" blocks separated by blank
/// lines. Throws InsufficientVariants when fewer than k are given.
std::string concat_paraphrases(const std::vector<std::string>& paraphrases, std::size_t k = 5);

std::string build_back_translation_prompt(std::string_view code, bool retry,
                                          const TemplateRegistry& templates = *TemplateRegistry::builtin());

/// Reads a back-translation answer: the whole answer or its last non-empty
/// line must name exactly one category.
std::optional<Category> parse_back_translation(std::string_view answer);

NarrativeVariant strip_example_io(const NarrativeVariant& narrative);
Problem strip_examples(const Problem& problem);

}  // namespace narrbench
