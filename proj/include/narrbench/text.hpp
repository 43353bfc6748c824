#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace narrbench::text {

std::string_view trim(std::string_view s);
std::string_view rtrim(std::string_view s);
std::string to_lower(std::string_view s);

std::vector<std::string_view> split_lines(std::string_view s);

// Tokens are maximal runs of non-whitespace bytes. This is the counting rule
// behind the narrative validity thresholds and the mock backend's token_count.
std::size_t count_whitespace_tokens(std::string_view s);

// Trailing whitespace stripped from every line, then trailing blank lines
// dropped. "\r\n" line endings collapse to "\n".
std::string normalize_judge_output(std::string_view s);

// FNV-1a 64-bit, used for prompt fingerprints and seed derivation.
std::uint64_t fnv1a64(std::string_view s);
std::string hex64(std::uint64_t v);

}  // namespace narrbench::text
