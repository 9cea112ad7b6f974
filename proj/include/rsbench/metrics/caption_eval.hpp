#pragma once

// Per-model caption evaluation over prediction and reference files.

#include <algorithm>
#include <array>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "rsbench/corpus.hpp"
#include "rsbench/metrics/bleu.hpp"
#include "rsbench/metrics/cider.hpp"
#include "rsbench/metrics/meteor.hpp"
#include "rsbench/metrics/rouge.hpp"
#include "rsbench/report.hpp"

namespace rsbench::metrics {

/// All values in percent; CIDEr is 100x the raw consensus score.
struct CaptionScores {
  std::array<double, kMaxBleuOrder> bleu{};
  double meteor = 0.0;
  double rouge_l = 0.0;
  double cider = 0.0;
};

struct CaptionEvalConfig {
  bool use_bleu = true;
  bool use_rouge = true;
  bool use_meteor = true;
  bool use_cider = true;
  BleuOptions bleu;
  MeteorOptions meteor;
  CiderOptions cider;
  std::optional<Split> split;  // restrict references to one split

  /// Canonical text of every setting that changes scores.
  std::string describe() const {
    std::string s = "tokenizer=lower+punct2space+ws";
    std::string enabled;
    for (auto [on, name] : {std::pair{use_bleu, "bleu"}, {use_rouge, "rouge"}, {use_meteor, "meteor"},
                            {use_cider, "cider"}})
      if (on) enabled += (enabled.empty() ? "" : ",") + std::string(name);
    s += ";metrics=" + enabled;
    s += ";bleu.max_n=" + std::to_string(bleu.max_n) + ";bleu.smooth=" + (bleu.smooth ? "add1" : "none");
    s += ";rouge.beta=1.2";
    s += ";meteor.match=" + std::string(meteor.stem ? "exact+porter_stem" : "exact");
    s += ";meteor.alpha=" + report::format_exact(meteor.alpha) + ";meteor.beta=" +
         report::format_exact(meteor.beta) + ";meteor.gamma=" + report::format_exact(meteor.gamma);
    s += ";cider.variant=" + std::string(to_string(cider.variant)) + ";cider.sigma=" +
         report::format_exact(cider.sigma);
    s += ";split=" + (split ? std::string(to_string(*split)) : std::string("all"));
    return s;
  }
};

struct ModelCaptionScores {
  std::string model_id;
  CaptionScores scores;
  std::size_t items = 0;
};

inline CaptionScores score_corpus(std::span<const CaptionItem> corpus, const CaptionEvalConfig& cfg) {
  CaptionScores s;
  if (cfg.use_bleu) {
    BleuOptions b = cfg.bleu;
    b.max_n = kMaxBleuOrder;
    auto res = bleu(corpus, b);
    std::copy(res.scores.begin(), res.scores.end(), s.bleu.begin());
  }
  if (cfg.use_rouge) s.rouge_l = rouge_l(corpus);
  if (cfg.use_meteor) s.meteor = meteor(corpus, cfg.meteor);
  if (cfg.use_cider) s.cider = 100.0 * cider(corpus, cfg.cider).score;
  return s;
}

/// Scores every model's caption predictions. Items are ordered by image_id
/// before scoring so results do not depend on prediction file order. Answer
/// predictions are ignored.
inline std::vector<ModelCaptionScores> evaluate_captions(const std::vector<PredictionRecord>& predictions,
                                                         const std::vector<CaptionRecord>& references,
                                                         const CaptionEvalConfig& cfg = {}) {
  std::unordered_map<std::string, std::vector<TokenSequence>> refs;
  for (const auto& c : references)
    if (!cfg.split || c.split == *cfg.split) refs[c.image_id].push_back(tokenize(c.text));

  std::vector<std::string> model_order;
  std::map<std::string, std::vector<const PredictionRecord*>> by_model;
  for (const auto& p : predictions) {
    if (!p.is_caption()) continue;
    if (!refs.contains(p.image_id))
      throw DataError("prediction by \"" + p.model_id + "\" for image \"" + p.image_id +
                      "\" has no reference caption");
    auto [it, fresh] = by_model.try_emplace(p.model_id);
    if (fresh) model_order.push_back(p.model_id);
    it->second.push_back(&p);
  }

  std::vector<ModelCaptionScores> out;
  for (const auto& model : model_order) {
    auto preds = by_model[model];
    std::sort(preds.begin(), preds.end(),
              [](const PredictionRecord* a, const PredictionRecord* b) { return a->image_id < b->image_id; });
    std::vector<CaptionItem> corpus;
    corpus.reserve(preds.size());
    for (const auto* p : preds) corpus.push_back({tokenize(p->text), refs[p->image_id]});
    out.push_back({model, score_corpus(corpus, cfg), corpus.size()});
  }
  return out;
}

/// Leaderboard in BLEU-1..4, METEOR, ROUGE_L, CIDEr order. Metrics that were
/// not computed are left empty.
inline report::MetricReport caption_report(const std::vector<ModelCaptionScores>& results,
                                           const CaptionEvalConfig& cfg) {
  report::MetricReport r;
  r.task = report::Task::captioning;
  r.columns = report::captioning_columns();
  auto opt = [](bool on, double v) { return on ? std::optional<double>(v) : std::nullopt; };
  for (const auto& m : results) {
    const auto& s = m.scores;
    r.add_row(m.model_id, {opt(cfg.use_bleu, s.bleu[0]), opt(cfg.use_bleu, s.bleu[1]),
                           opt(cfg.use_bleu, s.bleu[2]), opt(cfg.use_bleu, s.bleu[3]),
                           opt(cfg.use_meteor, s.meteor), opt(cfg.use_rouge, s.rouge_l),
                           opt(cfg.use_cider, s.cider)});
  }
  r.set_meta("config_fingerprint", report::fingerprint(cfg.describe()));
  r.set_meta("config", cfg.describe());
  if (cfg.use_meteor)
    r.set_meta("meteor_note", "exact and Porter-stem matching only; no synonym or paraphrase resources");
  return r;
}

}  // namespace rsbench::metrics
