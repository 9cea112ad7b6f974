#pragma once

// Open-ended VQA scoring: answer normalization, automatic judging, merging
// with human adjudications, per-category accuracy and quantity relative
// error.

#include <algorithm>
#include <array>
#include <cstdint>
#include <cstdlib>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "rsbench/corpus.hpp"
#include "rsbench/report.hpp"
#include "rsbench/text.hpp"

namespace rsbench::vqa {

enum class Verdict { correct, incorrect, unjudged };
enum class JudgmentSource { auto_judge, human };

inline std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::correct: return "correct";
    case Verdict::incorrect: return "incorrect";
    case Verdict::unjudged: return "unjudged";
  }
  return "unjudged";
}

inline std::optional<Verdict> parse_verdict(std::string_view s) {
  if (s == "correct") return Verdict::correct;
  if (s == "incorrect") return Verdict::incorrect;
  if (s == "unjudged") return Verdict::unjudged;
  return std::nullopt;
}

inline std::string_view to_string(JudgmentSource s) {
  return s == JudgmentSource::human ? "human" : "auto";
}

inline std::optional<JudgmentSource> parse_source(std::string_view s) {
  if (s == "human") return JudgmentSource::human;
  if (s == "auto") return JudgmentSource::auto_judge;
  return std::nullopt;
}

struct Judgment {
  std::string judgment_id;  // client-generated idempotency key
  std::string question_id;
  std::string model_id;
  std::string rater_id;  // empty for automatic judgments
  Verdict verdict = Verdict::unjudged;
  JudgmentSource source = JudgmentSource::auto_judge;
  std::string created_at;  // ISO-8601 UTC; lexical order is time order

  friend bool operator==(const Judgment&, const Judgment&) = default;
};

inline Json to_json(const Judgment& j) {
  return Json{{"judgment_id", j.judgment_id}, {"question_id", j.question_id},
              {"model_id", j.model_id},       {"rater_id", j.rater_id},
              {"verdict", to_string(j.verdict)},
              {"source", to_string(j.source)}, {"created_at", j.created_at}};
}

inline Judgment judgment_from_json(const Json& obj, const rsbench::detail::LineContext& ctx) {
  using rsbench::detail::fail;
  using rsbench::detail::require_nonempty;
  using rsbench::detail::require_string;
  Judgment j;
  j.judgment_id = require_nonempty(obj, "judgment_id", ctx);
  j.question_id = require_nonempty(obj, "question_id", ctx);
  j.model_id = require_nonempty(obj, "model_id", ctx);
  j.rater_id = obj.contains("rater_id") ? require_string(obj, "rater_id", ctx) : std::string();
  std::string v = require_string(obj, "verdict", ctx);
  auto verdict = parse_verdict(v);
  if (!verdict) fail(ctx, "invalid verdict \"" + v + "\"");
  j.verdict = *verdict;
  std::string s = obj.contains("source") ? require_string(obj, "source", ctx) : std::string("human");
  auto source = parse_source(s);
  if (!source) fail(ctx, "invalid judgment source \"" + s + "\"");
  j.source = *source;
  j.created_at = obj.contains("created_at") ? require_string(obj, "created_at", ctx) : std::string();
  return j;
}

inline std::vector<Judgment> parse_judgments(const std::string& content, const std::string& path = "<memory>") {
  std::vector<Judgment> out;
  rsbench::detail::for_each_jsonl(content, path, [&](const Json& obj, const rsbench::detail::LineContext& ctx) {
    out.push_back(judgment_from_json(obj, ctx));
  });
  return out;
}

inline std::vector<Judgment> load_judgments(const std::string& path) {
  return parse_judgments(rsbench::detail::read_file(path), path);
}

// ---------------------------------------------------------------------------
// Normalization and judging

inline bool is_article(std::string_view w) { return w == "a" || w == "an" || w == "the"; }

/// Lowercase, punctuation removed, whitespace collapsed, leading articles
/// dropped.
inline std::string normalize_answer(std::string_view answer) {
  auto tokens = tokenize(answer);
  std::size_t first = 0;
  while (first < tokens.size() && is_article(tokens[first])) ++first;
  tokens.erase(tokens.begin(), tokens.begin() + static_cast<std::ptrdiff_t>(first));
  return text::join(tokens);
}

namespace detail {

inline std::optional<int> small_number(std::string_view w) {
  static const std::unordered_map<std::string_view, int> words = {
      {"zero", 0},      {"one", 1},        {"two", 2},       {"three", 3},     {"four", 4},
      {"five", 5},      {"six", 6},        {"seven", 7},     {"eight", 8},     {"nine", 9},
      {"ten", 10},      {"eleven", 11},    {"twelve", 12},   {"thirteen", 13}, {"fourteen", 14},
      {"fifteen", 15},  {"sixteen", 16},   {"seventeen", 17}, {"eighteen", 18}, {"nineteen", 19}};
  auto it = words.find(w);
  if (it == words.end()) return std::nullopt;
  return it->second;
}

inline std::optional<int> tens_number(std::string_view w) {
  static const std::unordered_map<std::string_view, int> words = {
      {"twenty", 20}, {"thirty", 30}, {"forty", 40},  {"fifty", 50},
      {"sixty", 60},  {"seventy", 70}, {"eighty", 80}, {"ninety", 90}};
  auto it = words.find(w);
  if (it == words.end()) return std::nullopt;
  return it->second;
}

// Parses a value below 100 starting at tokens[i]; advances i.
inline std::optional<int> below_hundred(const TokenSequence& t, std::size_t& i) {
  if (i >= t.size()) return std::nullopt;
  if (auto tens = tens_number(t[i])) {
    ++i;
    if (i < t.size())
      if (auto unit = small_number(t[i]); unit && *unit >= 1 && *unit <= 9) {
        ++i;
        return *tens + *unit;
      }
    return tens;
  }
  if (auto small = small_number(t[i])) {
    ++i;
    return small;
  }
  return std::nullopt;
}

// Number-word phrase at tokens[i]: "fifteen", "twenty five", "hundred",
// "three hundred and twelve".
inline std::optional<std::int64_t> number_phrase(const TokenSequence& t, std::size_t i) {
  std::int64_t value = 0;
  if (t[i] == "hundred") {
    value = 100;
    ++i;
  } else {
    auto lead = below_hundred(t, i);
    if (!lead) return std::nullopt;
    value = *lead;
    if (i < t.size() && t[i] == "hundred" && value >= 1 && value <= 9) {
      value *= 100;
      ++i;
    } else {
      return value;
    }
  }
  std::size_t j = i;
  if (j < t.size() && t[j] == "and") ++j;
  if (auto rest = below_hundred(t, j); rest && *rest > 0) value += *rest;
  return value;
}

}  // namespace detail

/// First nonnegative integer in the text, written in digits or as number
/// words up to the hundreds.
inline std::optional<std::int64_t> parse_quantity(std::string_view text) {
  auto tokens = tokenize(text);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const auto& tok = tokens[i];
    std::size_t d = 0;
    while (d < tok.size() && tok[d] >= '0' && tok[d] <= '9') ++d;
    if (d > 0) {
      if (d > 18) return std::nullopt;
      return std::strtoll(tok.substr(0, d).c_str(), nullptr, 10);
    }
    if (auto v = detail::number_phrase(tokens, i)) return v;
  }
  return std::nullopt;
}

/// True when `phrase` occurs in `tokens` as a contiguous run of whole words.
inline bool contains_phrase(const TokenSequence& tokens, const TokenSequence& phrase) {
  if (phrase.empty() || phrase.size() > tokens.size()) return false;
  for (std::size_t i = 0; i + phrase.size() <= tokens.size(); ++i)
    if (std::equal(phrase.begin(), phrase.end(), tokens.begin() + static_cast<std::ptrdiff_t>(i))) return true;
  return false;
}

/// Automatic verdict. Everything is decided on the normalized strings:
/// equality is always correct; quantity questions compare the first parsed
/// integer; other categories accept the gold answer as a whole-word phrase
/// inside the prediction.
inline Verdict judge(std::string_view prediction, std::string_view gold, QaCategory category) {
  const std::string pred = normalize_answer(prediction);
  const std::string ref = normalize_answer(gold);
  if (!pred.empty() && pred == ref) return Verdict::correct;
  if (category == QaCategory::quantity) {
    auto p = parse_quantity(pred);
    auto g = parse_quantity(ref);
    return p && g && *p == *g ? Verdict::correct : Verdict::incorrect;
  }
  return contains_phrase(text::split_whitespace(pred), text::split_whitespace(ref)) ? Verdict::correct
                                                                                   : Verdict::incorrect;
}

/// One auto judgment per answer prediction whose question is known.
inline std::vector<Judgment> auto_judge(const std::vector<PredictionRecord>& predictions,
                                        const std::vector<QARecord>& qa) {
  std::unordered_map<std::string, const QARecord*> by_id;
  for (const auto& q : qa) by_id.emplace(q.question_id, &q);
  std::vector<Judgment> out;
  for (const auto& p : predictions) {
    if (p.is_caption()) continue;
    auto it = by_id.find(*p.question_id);
    if (it == by_id.end()) continue;
    out.push_back({"auto:" + p.model_id + ":" + *p.question_id, *p.question_id, p.model_id, "",
                   judge(p.text, it->second->gold_answer, it->second->category), JudgmentSource::auto_judge,
                   ""});
  }
  return out;
}

/// Resolves to one judgment per (model_id, question_id): human beats auto;
/// within a source the latest created_at wins, later log position breaking
/// ties.
inline std::vector<Judgment> merge_judgments(const std::vector<Judgment>& log) {
  std::map<std::pair<std::string, std::string>, std::size_t> slot;
  std::vector<Judgment> out;
  for (const auto& j : log) {
    auto key = std::make_pair(j.model_id, j.question_id);
    auto it = slot.find(key);
    if (it == slot.end()) {
      slot.emplace(key, out.size());
      out.push_back(j);
      continue;
    }
    Judgment& cur = out[it->second];
    bool wins = j.source != cur.source ? j.source == JudgmentSource::human : j.created_at >= cur.created_at;
    if (wins) cur = j;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Aggregation

struct VqaAccuracyRow {
  std::string model_id;
  std::array<std::size_t, kNumQaCategories> correct{};
  std::array<std::size_t, kNumQaCategories> judged{};
  std::size_t unjudged = 0;

  std::optional<double> category_accuracy(QaCategory c) const {
    auto i = static_cast<std::size_t>(c);
    if (judged[i] == 0) return std::nullopt;
    return 100.0 * static_cast<double>(correct[i]) / static_cast<double>(judged[i]);
  }

  /// Question-weighted over every judged question.
  std::optional<double> average() const {
    std::size_t c = 0, n = 0;
    for (std::size_t i = 0; i < kNumQaCategories; ++i) {
      c += correct[i];
      n += judged[i];
    }
    if (n == 0) return std::nullopt;
    return 100.0 * static_cast<double>(c) / static_cast<double>(n);
  }
};

/// Per-model accuracy rows, models in order of first appearance. Judgments
/// are merged first, so duplicates and human overrides are handled here.
inline std::vector<VqaAccuracyRow> accuracy_table(const std::vector<Judgment>& judgments,
                                                  const std::vector<QARecord>& qa) {
  std::unordered_map<std::string, QaCategory> category;
  for (const auto& q : qa) category.emplace(q.question_id, q.category);
  std::vector<VqaAccuracyRow> rows;
  std::unordered_map<std::string, std::size_t> row_of;
  for (const auto& j : merge_judgments(judgments)) {
    auto cat = category.find(j.question_id);
    if (cat == category.end())
      throw DataError("judgment for unknown question \"" + j.question_id + "\"");
    auto [it, fresh] = row_of.try_emplace(j.model_id, rows.size());
    if (fresh) rows.push_back({j.model_id, {}, {}, 0});
    auto& row = rows[it->second];
    if (j.verdict == Verdict::unjudged) {
      ++row.unjudged;
      continue;
    }
    auto i = static_cast<std::size_t>(cat->second);
    ++row.judged[i];
    if (j.verdict == Verdict::correct) ++row.correct[i];
  }
  return rows;
}

struct QuantityPair {
  std::optional<std::int64_t> predicted;
  std::int64_t gold = 0;
};

struct QuantityError {
  std::optional<double> mean;  // empty when no prediction parsed
  std::size_t parsed = 0;
  std::size_t unparsed = 0;
};

/// Mean of |p - g| / max(g, 1) over pairs with a parsed prediction.
inline QuantityError quantity_relative_error(const std::vector<QuantityPair>& pairs) {
  QuantityError out;
  double sum = 0.0;
  for (const auto& p : pairs) {
    if (!p.predicted) {
      ++out.unparsed;
      continue;
    }
    ++out.parsed;
    double diff = static_cast<double>(std::llabs(*p.predicted - p.gold));
    sum += diff / static_cast<double>(std::max<std::int64_t>(p.gold, 1));
  }
  if (out.parsed) out.mean = sum / static_cast<double>(out.parsed);
  return out;
}

/// Quantity-question pairs for one model. Questions whose gold answer holds
/// no number are skipped.
inline std::vector<QuantityPair> quantity_pairs(const std::vector<PredictionRecord>& predictions,
                                                const std::vector<QARecord>& qa, const std::string& model_id) {
  std::unordered_map<std::string, const QARecord*> by_id;
  for (const auto& q : qa)
    if (q.category == QaCategory::quantity) by_id.emplace(q.question_id, &q);
  std::vector<QuantityPair> out;
  for (const auto& p : predictions) {
    if (p.is_caption() || p.model_id != model_id) continue;
    auto it = by_id.find(*p.question_id);
    if (it == by_id.end()) continue;
    auto gold = parse_quantity(it->second->gold_answer);
    if (!gold) continue;
    out.push_back({parse_quantity(p.text), *gold});
  }
  return out;
}

inline report::MetricReport accuracy_report(const std::vector<VqaAccuracyRow>& rows) {
  report::MetricReport r;
  r.task = report::Task::vqa;
  r.columns = report::vqa_columns();
  for (const auto& row : rows) {
    std::vector<std::optional<double>> values;
    for (QaCategory c : kAllQaCategories) values.push_back(row.category_accuracy(c));
    values.push_back(row.average());
    r.add_row(row.model_id, std::move(values));
  }
  return r;
}

inline report::MetricReport quantity_error_report(
    const std::vector<std::pair<std::string, QuantityError>>& per_model) {
  report::MetricReport r;
  r.task = report::Task::vqa;
  r.columns = report::quantity_error_columns();
  for (const auto& [model, err] : per_model) r.add_row(model, {err.mean});
  return r;
}

}  // namespace rsbench::vqa
