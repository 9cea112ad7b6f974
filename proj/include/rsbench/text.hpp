#pragma once

#include <cctype>
#include <string>
#include <string_view>
#include <vector>

namespace rsbench {

/// Ordered list of lowercase tokens; no token is empty or contains
/// whitespace.
using TokenSequence = std::vector<std::string>;

namespace text {

inline bool is_ascii_punct(char c) {
  return std::ispunct(static_cast<unsigned char>(c)) != 0;
}

inline bool is_ascii_space(char c) {
  return std::isspace(static_cast<unsigned char>(c)) != 0;
}

inline std::string to_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && is_ascii_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_ascii_space(s.back())) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string> split_whitespace(std::string_view s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && is_ascii_space(s[i])) ++i;
    std::size_t j = i;
    while (j < s.size() && !is_ascii_space(s[j])) ++j;
    if (j > i) out.emplace_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

inline std::string join(const std::vector<std::string>& tokens, std::string_view sep = " ") {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += sep;
    out += tokens[i];
  }
  return out;
}

}  // namespace text

/// Caption tokenizer: lowercase, ASCII punctuation becomes whitespace, split
/// on whitespace. Bytes outside ASCII pass through untouched, so UTF-8 words
/// survive as single tokens.
inline TokenSequence tokenize(std::string_view raw) {
  std::string s = text::to_lower(raw);
  for (char& c : s)
    if (text::is_ascii_punct(c)) c = ' ';
  return text::split_whitespace(s);
}

}  // namespace rsbench
