#pragma once

// Shared tokenizer for the line-oriented text formats (graphs, instances,
// profiles, scenarios). Not part of the stable API.

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace byzset::text {

struct Line {
  std::size_t number = 0;  // 1-based
  std::vector<std::string> tokens;
};

/// Splits on newlines and ';', strips '#' comments, drops blank lines.
std::vector<Line> tokenize(std::string_view text);

std::size_t parse_index(const Line& line, std::size_t token);
std::uint64_t parse_u64(const Line& line, const std::string& token);
std::int64_t parse_i64(const Line& line, const std::string& token);

/// Tokens usable as value names: [A-Za-z0-9_.-]+ and not a reserved word.
bool valid_token(std::string_view token);

}  // namespace byzset::text
