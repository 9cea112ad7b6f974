#pragma once

// Corpus-level BLEU with clipped n-gram precision and the closest-reference
// brevity penalty.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>
#include <span>
#include <vector>

#include "rsbench/metrics/common.hpp"

namespace rsbench::metrics {

inline constexpr int kMaxBleuOrder = 4;

struct BleuOptions {
  int max_n = kMaxBleuOrder;
  // Add-one smoothing of precisions for n >= 2; meant for sentence-level use.
  bool smooth = false;
};

struct BleuResult {
  std::vector<double> scores;      // percent, scores[k] is BLEU-(k+1)
  std::vector<double> precisions;  // p_1..p_max_n as fractions
  double brevity_penalty = 0.0;
  std::size_t candidate_length = 0;
  std::size_t reference_length = 0;
};

/// Reference length closest to `cand_len`; ties go to the shorter one.
inline std::size_t closest_ref_length(std::size_t cand_len, const std::vector<TokenSequence>& refs) {
  std::size_t best = refs.front().size();
  for (const auto& r : refs) {
    auto d = [&](std::size_t len) {
      return len > cand_len ? len - cand_len : cand_len - len;
    };
    if (d(r.size()) < d(best) || (d(r.size()) == d(best) && r.size() < best)) best = r.size();
  }
  return best;
}

inline BleuResult bleu(std::span<const CaptionItem> corpus, const BleuOptions& opt = {}) {
  require_scorable(corpus, "bleu");
  if (opt.max_n < 1 || opt.max_n > kMaxBleuOrder) throw InvalidArgument("bleu: max_n must be in 1..4");

  std::array<double, kMaxBleuOrder> matched{};
  std::array<double, kMaxBleuOrder> total{};
  BleuResult res;
  for (const auto& item : corpus) {
    const auto& cand = item.candidate;
    res.candidate_length += cand.size();
    res.reference_length += closest_ref_length(cand.size(), item.references);
    for (int n = 1; n <= opt.max_n; ++n) {
      auto cand_grams = ngrams(cand, n);
      std::unordered_map<std::string, int> max_ref;
      for (const auto& ref : item.references)
        for (const auto& [g, c] : ngrams(ref, n).counts) {
          int& slot = max_ref[g];
          slot = std::max(slot, c);
        }
      for (const auto& [g, c] : cand_grams.counts) {
        auto it = max_ref.find(g);
        if (it != max_ref.end()) matched[n - 1] += std::min(c, it->second);
      }
      if (cand.size() >= static_cast<std::size_t>(n)) total[n - 1] += static_cast<double>(cand.size() - n + 1);
    }
  }

  const double c = static_cast<double>(res.candidate_length);
  const double r = static_cast<double>(res.reference_length);
  if (c == 0.0)
    res.brevity_penalty = 0.0;
  else
    res.brevity_penalty = c > r ? 1.0 : std::exp(1.0 - r / c);

  double log_sum = 0.0;
  bool zero = false;
  for (int n = 1; n <= opt.max_n; ++n) {
    double m = matched[n - 1];
    double t = total[n - 1];
    if (opt.smooth && n >= 2) {
      m += 1.0;
      t += 1.0;
    }
    double p = t > 0.0 ? m / t : 0.0;
    res.precisions.push_back(p);
    if (p <= 0.0) zero = true;
    if (!zero) log_sum += std::log(p);
    res.scores.push_back(zero ? 0.0 : 100.0 * res.brevity_penalty * std::exp(log_sum / n));
  }
  return res;
}

}  // namespace rsbench::metrics
