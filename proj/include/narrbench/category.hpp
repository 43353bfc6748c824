#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

namespace narrbench {

// The eight algorithm categories offered to the narrative generator. The
// enumerator order is the canonical order used for tie-breaking.
enum class Category {
    GraphAlgorithms,
    DynamicProgramming,
    GreedyAlgorithms,
    SortingAndSearching,
    StringAlgorithms,
    DataStructures,
    MathematicsAndNumberTheory,
    SimulationAndImplementation,
};

inline constexpr std::array<Category, 8> kAllCategories = {
    Category::GraphAlgorithms,     Category::DynamicProgramming,
    Category::GreedyAlgorithms,    Category::SortingAndSearching,
    Category::StringAlgorithms,    Category::DataStructures,
    Category::MathematicsAndNumberTheory, Category::SimulationAndImplementation,
};

/// Human-readable name as it appears in prompts ("Dynamic Programming").
std::string_view display_name(Category c);

/// Identifier form used in records ("DynamicProgramming").
std::string_view id_name(Category c);

/// Lenient match against either form: case, whitespace, markdown emphasis and
/// trailing punctuation are ignored; "&" reads as "and".
std::optional<Category> parse_category(std::string_view text);

}  // namespace narrbench
