#pragma once

// METEOR with exact and Porter-stem unigram matching. No synonym or
// paraphrase tables are used, so scores are lower than resource-backed
// METEOR whenever captions differ by synonyms.

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "rsbench/metrics/common.hpp"
#include "rsbench/metrics/porter_stemmer.hpp"

namespace rsbench::metrics {

struct MeteorOptions {
  bool stem = true;
  double alpha = 0.9;  // F = PR / (alpha P + (1 - alpha) R)
  double beta = 3.0;   // fragmentation exponent
  double gamma = 0.5;  // maximum penalty
};

struct MeteorAlignment {
  std::vector<int> ref_of_cand;  // -1 when the candidate token is unmatched
  std::size_t matches = 0;
  std::size_t chunks = 0;
};

namespace meteor_detail {

// One matching stage over still-unmatched tokens. Candidate tokens are
// visited left to right; each takes the reference position adjacent to a
// neighbouring token's match when possible, otherwise the leftmost free one.
template <typename Key>
void match_stage(const std::vector<std::string>& cand_keys, const std::vector<std::string>& ref_keys,
                 std::vector<int>& ref_of_cand, std::vector<bool>& ref_used, Key&& same) {
  for (std::size_t i = 0; i < cand_keys.size(); ++i) {
    if (ref_of_cand[i] >= 0) continue;
    int chosen = -1;
    if (i > 0 && ref_of_cand[i - 1] >= 0) {
      auto next = static_cast<std::size_t>(ref_of_cand[i - 1] + 1);
      if (next < ref_keys.size() && !ref_used[next] && same(cand_keys[i], ref_keys[next]))
        chosen = static_cast<int>(next);
    }
    if (chosen < 0 && i + 1 < cand_keys.size() && ref_of_cand[i + 1] > 0) {
      auto prev = static_cast<std::size_t>(ref_of_cand[i + 1] - 1);
      if (!ref_used[prev] && same(cand_keys[i], ref_keys[prev])) chosen = static_cast<int>(prev);
    }
    if (chosen < 0) {
      for (std::size_t j = 0; j < ref_keys.size(); ++j)
        if (!ref_used[j] && same(cand_keys[i], ref_keys[j])) {
          chosen = static_cast<int>(j);
          break;
        }
    }
    if (chosen >= 0) {
      ref_of_cand[i] = chosen;
      ref_used[static_cast<std::size_t>(chosen)] = true;
    }
  }
}

}  // namespace meteor_detail

inline MeteorAlignment meteor_align(const TokenSequence& cand, const TokenSequence& ref,
                                    bool use_stems = true) {
  MeteorAlignment a;
  a.ref_of_cand.assign(cand.size(), -1);
  std::vector<bool> used(ref.size(), false);
  auto eq = [](const std::string& x, const std::string& y) { return x == y; };
  meteor_detail::match_stage(cand, ref, a.ref_of_cand, used, eq);
  if (use_stems) {
    std::vector<std::string> cs, rs;
    cs.reserve(cand.size());
    rs.reserve(ref.size());
    for (const auto& t : cand) cs.push_back(porter_stem(t));
    for (const auto& t : ref) rs.push_back(porter_stem(t));
    meteor_detail::match_stage(cs, rs, a.ref_of_cand, used, eq);
  }
  int prev_c = -2, prev_r = -2;
  for (std::size_t i = 0; i < cand.size(); ++i) {
    int j = a.ref_of_cand[i];
    if (j < 0) continue;
    ++a.matches;
    if (!(static_cast<int>(i) == prev_c + 1 && j == prev_r + 1)) ++a.chunks;
    prev_c = static_cast<int>(i);
    prev_r = j;
  }
  return a;
}

/// Sentence METEOR against one reference, as a fraction.
inline double meteor_single(const TokenSequence& cand, const TokenSequence& ref,
                            const MeteorOptions& opt = {}) {
  if (cand.empty() || ref.empty()) return 0.0;
  auto a = meteor_align(cand, ref, opt.stem);
  if (a.matches == 0) return 0.0;
  double m = static_cast<double>(a.matches);
  double p = m / static_cast<double>(cand.size());
  double r = m / static_cast<double>(ref.size());
  double f = p * r / (opt.alpha * p + (1.0 - opt.alpha) * r);
  double penalty = opt.gamma * std::pow(static_cast<double>(a.chunks) / m, opt.beta);
  return f * (1.0 - penalty);
}

/// Best score over references, as a fraction.
inline double meteor_fraction(const TokenSequence& cand, const std::vector<TokenSequence>& refs,
                              const MeteorOptions& opt = {}) {
  double best = 0.0;
  for (const auto& ref : refs) best = std::max(best, meteor_single(cand, ref, opt));
  return best;
}

/// Sentence METEOR in percent.
inline double meteor(const TokenSequence& cand, const std::vector<TokenSequence>& refs,
                     const MeteorOptions& opt = {}) {
  if (refs.empty()) throw InvalidArgument("meteor: no references");
  return 100.0 * meteor_fraction(cand, refs, opt);
}

/// Corpus METEOR: mean of per-item scores, in percent.
inline double meteor(std::span<const CaptionItem> corpus, const MeteorOptions& opt = {}) {
  require_scorable(corpus, "meteor");
  double sum = 0.0;
  for (const auto& item : corpus) sum += meteor_fraction(item.candidate, item.references, opt);
  return 100.0 * sum / static_cast<double>(corpus.size());
}

}  // namespace rsbench::metrics
