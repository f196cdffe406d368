#include "byzset/text.hpp"

#include <charconv>

#include "byzset/error.hpp"
#include "byzset/index_set.hpp"

namespace byzset {

std::string format_agent_set(AgentSet s) {
  std::string out = "{";
  bool first = true;
  for (auto i : s) {
    if (!first) out += ",";
    out += std::to_string(i);
    first = false;
  }
  return out + "}";
}

namespace text {

std::vector<Line> tokenize(std::string_view text) {
  std::vector<Line> lines;
  std::size_t number = 1;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find_first_of("\n;", start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view raw = text.substr(start, end - start);
    if (auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);

    Line line{number, {}};
    std::size_t pos = 0;
    while (pos < raw.size()) {
      while (pos < raw.size() && (raw[pos] == ' ' || raw[pos] == '\t' || raw[pos] == '\r')) ++pos;
      std::size_t tok = pos;
      while (pos < raw.size() && raw[pos] != ' ' && raw[pos] != '\t' && raw[pos] != '\r') ++pos;
      if (pos > tok) line.tokens.emplace_back(raw.substr(tok, pos - tok));
    }
    if (!line.tokens.empty()) lines.push_back(std::move(line));
    if (end < text.size() && text[end] == '\n') ++number;
    start = end + 1;
  }
  return lines;
}

std::uint64_t parse_u64(const Line& line, const std::string& token) {
  std::uint64_t value = 0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size()) {
    throw ParseError(line.number, "expected a non-negative integer, got '" + token + "'");
  }
  return value;
}

std::int64_t parse_i64(const Line& line, const std::string& token) {
  std::int64_t value = 0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size()) {
    throw ParseError(line.number, "expected an integer, got '" + token + "'");
  }
  return value;
}

std::size_t parse_index(const Line& line, std::size_t token) {
  if (token >= line.tokens.size()) throw ParseError(line.number, "missing argument to '" + line.tokens[0] + "'");
  return static_cast<std::size_t>(parse_u64(line, line.tokens[token]));
}

bool valid_token(std::string_view token) {
  if (token.empty()) return false;
  for (char c : token) {
    bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' ||
              c == '.' || c == '-';
    if (!ok) return false;
  }
  return true;
}

}  // namespace text
}  // namespace byzset
