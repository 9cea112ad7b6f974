#pragma once

#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "rsbench/error.hpp"
#include "rsbench/text.hpp"

namespace rsbench::metrics {

/// One scored unit: a candidate caption and its reference captions.
struct CaptionItem {
  TokenSequence candidate;
  std::vector<TokenSequence> references;
};

/// n-gram -> count for a single order n. Keys are the n tokens joined by a
/// single space, which is unambiguous because tokens contain no whitespace.
struct NGramMultiset {
  int n = 1;
  std::unordered_map<std::string, int> counts;

  int count(const std::string& gram) const {
    auto it = counts.find(gram);
    return it == counts.end() ? 0 : it->second;
  }
};

inline NGramMultiset ngrams(const TokenSequence& tokens, int n) {
  NGramMultiset out{n, {}};
  if (n < 1 || tokens.size() < static_cast<std::size_t>(n)) return out;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    std::string key = tokens[i];
    for (int k = 1; k < n; ++k) {
      key += ' ';
      key += tokens[i + k];
    }
    ++out.counts[key];
  }
  return out;
}

inline void require_scorable(std::span<const CaptionItem> corpus, const char* metric) {
  if (corpus.empty()) throw InvalidArgument(std::string(metric) + ": empty corpus");
  for (const auto& item : corpus)
    if (item.references.empty())
      throw InvalidArgument(std::string(metric) + ": item without references");
}

}  // namespace rsbench::metrics
