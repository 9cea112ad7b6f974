#pragma once

// CIDEr and CIDEr-D consensus scoring. Document frequencies come from the
// reference sets of the scored corpus, so scores depend on the whole corpus.

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "rsbench/metrics/common.hpp"

namespace rsbench::metrics {

enum class CiderVariant { cider, cider_d };

inline std::string_view to_string(CiderVariant v) { return v == CiderVariant::cider ? "cider" : "cider_d"; }

inline std::optional<CiderVariant> parse_cider_variant(std::string_view s) {
  if (s == "cider") return CiderVariant::cider;
  if (s == "cider_d" || s == "cider-d") return CiderVariant::cider_d;
  return std::nullopt;
}

struct CiderOptions {
  CiderVariant variant = CiderVariant::cider_d;
  double sigma = 6.0;  // Gaussian length penalty width (CIDEr-D only)
};

struct CiderResult {
  double score = 0.0;               // corpus mean; tables print 100x this
  std::vector<double> item_scores;  // in corpus order
};

inline constexpr int kCiderOrder = 4;

namespace cider_detail {

using Counts = std::array<std::unordered_map<std::string, int>, kCiderOrder>;

struct Vec {
  std::array<std::unordered_map<std::string, double>, kCiderOrder> weights;
  std::array<double, kCiderOrder> norms{};
  std::size_t length = 0;
};

inline Counts cook(const TokenSequence& tokens) {
  Counts c;
  for (int n = 1; n <= kCiderOrder; ++n) c[n - 1] = ngrams(tokens, n).counts;
  return c;
}

}  // namespace cider_detail

inline CiderResult cider(std::span<const CaptionItem> corpus, const CiderOptions& opt = {}) {
  using namespace cider_detail;
  require_scorable(corpus, "cider");

  std::vector<Counts> cand_counts;
  std::vector<std::vector<Counts>> ref_counts;
  cand_counts.reserve(corpus.size());
  ref_counts.reserve(corpus.size());
  std::unordered_map<std::string, double> doc_freq;  // keyed "n|gram"
  for (const auto& item : corpus) {
    cand_counts.push_back(cook(item.candidate));
    auto& refs = ref_counts.emplace_back();
    std::unordered_set<std::string> in_item;
    for (const auto& ref : item.references) {
      refs.push_back(cook(ref));
      for (int n = 0; n < kCiderOrder; ++n)
        for (const auto& kv : refs.back()[n]) in_item.insert(std::to_string(n) + "|" + kv.first);
    }
    for (const auto& key : in_item) doc_freq[key] += 1.0;
  }

  const double log_n = std::log(static_cast<double>(corpus.size()));
  auto to_vec = [&](const Counts& counts, std::size_t length) {
    Vec v;
    v.length = length;
    for (int n = 0; n < kCiderOrder; ++n) {
      double sq = 0.0;
      for (const auto& [g, tf] : counts[n]) {
        auto it = doc_freq.find(std::to_string(n) + "|" + g);
        double df = it == doc_freq.end() ? 0.0 : it->second;
        double w = static_cast<double>(tf) * (log_n - std::log(std::max(1.0, df)));
        v.weights[n][g] = w;
        sq += w * w;
      }
      v.norms[n] = std::sqrt(sq);
    }
    return v;
  };

  auto similarity = [&](const Vec& hyp, const Vec& ref) {
    std::array<double, kCiderOrder> out{};
    double delta = static_cast<double>(hyp.length) - static_cast<double>(ref.length);
    for (int n = 0; n < kCiderOrder; ++n) {
      double dot = 0.0;
      for (const auto& [g, h] : hyp.weights[n]) {
        auto it = ref.weights[n].find(g);
        if (it == ref.weights[n].end()) continue;
        double hv = opt.variant == CiderVariant::cider_d ? std::min(h, it->second) : h;
        dot += hv * it->second;
      }
      double denom = hyp.norms[n] * ref.norms[n];
      double cos = denom > 0.0 ? dot / denom : 0.0;
      if (opt.variant == CiderVariant::cider_d)
        cos *= std::exp(-(delta * delta) / (2.0 * opt.sigma * opt.sigma));
      out[n] = cos;
    }
    return out;
  };

  CiderResult res;
  res.item_scores.reserve(corpus.size());
  double total = 0.0;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    Vec hyp = to_vec(cand_counts[i], corpus[i].candidate.size());
    std::array<double, kCiderOrder> per_n{};
    for (std::size_t r = 0; r < ref_counts[i].size(); ++r) {
      Vec ref = to_vec(ref_counts[i][r], corpus[i].references[r].size());
      auto s = similarity(hyp, ref);
      for (int n = 0; n < kCiderOrder; ++n) per_n[n] += s[n];
    }
    double mean_n = 0.0;
    for (int n = 0; n < kCiderOrder; ++n) mean_n += per_n[n] / static_cast<double>(ref_counts[i].size());
    mean_n /= kCiderOrder;
    double item = 10.0 * mean_n;
    res.item_scores.push_back(item);
    total += item;
  }
  res.score = total / static_cast<double>(corpus.size());
  return res;
}

}  // namespace rsbench::metrics
