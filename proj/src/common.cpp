#include "narrbench/category.hpp"
#include "narrbench/rng.hpp"
#include "narrbench/text.hpp"

#include <algorithm>
#include <cctype>
#include <fmt/format.h>

namespace narrbench {

namespace {

struct CategoryNames {
    Category category;
    std::string_view display;
    std::string_view id;
};

constexpr std::array<CategoryNames, 8> kNames = {{
    {Category::GraphAlgorithms, "Graph Algorithms", "GraphAlgorithms"},
    {Category::DynamicProgramming, "Dynamic Programming", "DynamicProgramming"},
    {Category::GreedyAlgorithms, "Greedy Algorithms", "GreedyAlgorithms"},
    {Category::SortingAndSearching, "Sorting and Searching", "SortingAndSearching"},
    {Category::StringAlgorithms, "String Algorithms", "StringAlgorithms"},
    {Category::DataStructures, "Data Structures", "DataStructures"},
    {Category::MathematicsAndNumberTheory, "Mathematics and Number Theory",
     "MathematicsAndNumberTheory"},
    {Category::SimulationAndImplementation, "Simulation and Implementation",
     "SimulationAndImplementation"},
}};

// Lowercase alphanumerics only, with '&' spelled out.
std::string squash(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (char ch : s) {
        const auto c = static_cast<unsigned char>(ch);
        if (std::isalnum(c)) {
            out.push_back(static_cast<char>(std::tolower(c)));
        } else if (ch == '&') {
            out += "and";
        }
    }
    return out;
}

}  // namespace

std::string_view display_name(Category c) { return kNames[static_cast<std::size_t>(c)].display; }

std::string_view id_name(Category c) { return kNames[static_cast<std::size_t>(c)].id; }

std::optional<Category> parse_category(std::string_view s) {
    const std::string key = squash(s);
    if (key.empty()) return std::nullopt;
    for (const auto& n : kNames) {
        if (key == squash(n.display)) return n.category;
    }
    return std::nullopt;
}

std::uint64_t derive_seed(std::uint64_t base, std::string_view key) {
    return mix64(base ^ mix64(text::fnv1a64(key)));
}

namespace text {

namespace {
bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }
}  // namespace

std::string_view trim(std::string_view s) {
    while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
    return rtrim(s);
}

std::string_view rtrim(std::string_view s) {
    while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
    return s;
}

std::string to_lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::vector<std::string_view> split_lines(std::string_view s) {
    std::vector<std::string_view> lines;
    std::size_t start = 0;
    while (start <= s.size()) {
        const auto nl = s.find('\n', start);
        if (nl == std::string_view::npos) {
            lines.push_back(s.substr(start));
            break;
        }
        lines.push_back(s.substr(start, nl - start));
        start = nl + 1;
    }
    return lines;
}

std::size_t count_whitespace_tokens(std::string_view s) {
    std::size_t count = 0;
    bool in_token = false;
    for (char c : s) {
        if (is_space(c)) {
            in_token = false;
        } else if (!in_token) {
            in_token = true;
            ++count;
        }
    }
    return count;
}

std::string normalize_judge_output(std::string_view s) {
    std::vector<std::string_view> lines;
    for (auto line : split_lines(s)) lines.push_back(rtrim(line));
    while (!lines.empty() && lines.back().empty()) lines.pop_back();
    std::string out;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (i) out.push_back('\n');
        out.append(lines[i]);
    }
    return out;
}

std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex64(std::uint64_t v) { return fmt::format("{:016x}", v); }

}  // namespace text
}  // namespace narrbench
