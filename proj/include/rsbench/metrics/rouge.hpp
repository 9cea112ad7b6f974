#pragma once

#include <algorithm>
#include <span>
#include <vector>

#include "rsbench/metrics/common.hpp"

namespace rsbench::metrics {

inline constexpr double kRougeBeta = 1.2;

inline std::size_t lcs_length(const TokenSequence& a, const TokenSequence& b) {
  if (a.empty() || b.empty()) return 0;
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j)
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

/// LCS F-measure against the best-matching reference, as a fraction.
inline double rouge_l_fraction(const TokenSequence& cand, const std::vector<TokenSequence>& refs,
                               double beta = kRougeBeta) {
  if (cand.empty()) return 0.0;
  const double b2 = beta * beta;
  double best = 0.0;
  for (const auto& ref : refs) {
    if (ref.empty()) continue;
    auto l = static_cast<double>(lcs_length(cand, ref));
    if (l == 0.0) continue;
    double p = l / static_cast<double>(cand.size());
    double r = l / static_cast<double>(ref.size());
    best = std::max(best, (1.0 + b2) * p * r / (r + b2 * p));
  }
  return best;
}

/// Sentence ROUGE-L in percent.
inline double rouge_l(const TokenSequence& cand, const std::vector<TokenSequence>& refs) {
  if (refs.empty()) throw InvalidArgument("rouge_l: no references");
  return 100.0 * rouge_l_fraction(cand, refs);
}

/// Corpus ROUGE-L: mean of per-item scores, in percent.
inline double rouge_l(std::span<const CaptionItem> corpus) {
  require_scorable(corpus, "rouge_l");
  double sum = 0.0;
  for (const auto& item : corpus) sum += rouge_l_fraction(item.candidate, item.references);
  return 100.0 * sum / static_cast<double>(corpus.size());
}

}  // namespace rsbench::metrics
