#pragma once

// Data model and line-delimited JSON interchange for images, captions,
// question/answer pairs and model predictions.

#include <array>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <tuple>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "json.hpp"
#include "rsbench/error.hpp"
#include "rsbench/text.hpp"

namespace rsbench {

using Json = nlohmann::ordered_json;

enum class Modality { color, panchromatic };
enum class Split { train, val, test };

/// The ten VQA question categories, in leaderboard column order.
enum class QaCategory {
  presence,
  quantity,
  color,
  absolute_position,
  relative_position,
  area_comparison,
  road_direction,
  image,
  scene,
  reasoning,
};

inline constexpr std::size_t kNumQaCategories = 10;

inline constexpr std::array<QaCategory, kNumQaCategories> kAllQaCategories = {
    QaCategory::presence,          QaCategory::quantity,        QaCategory::color,
    QaCategory::absolute_position, QaCategory::relative_position, QaCategory::area_comparison,
    QaCategory::road_direction,    QaCategory::image,           QaCategory::scene,
    QaCategory::reasoning,
};

inline std::string_view to_string(Modality m) {
  return m == Modality::color ? "color" : "panchromatic";
}

inline std::string_view to_string(Split s) {
  switch (s) {
    case Split::train: return "train";
    case Split::val: return "val";
    case Split::test: return "test";
  }
  return "test";
}

inline std::string_view to_string(QaCategory c) {
  constexpr std::array<std::string_view, kNumQaCategories> names = {
      "presence",          "quantity",        "color", "absolute_position",
      "relative_position", "area_comparison", "road_direction", "image",
      "scene",             "reasoning"};
  return names[static_cast<std::size_t>(c)];
}

/// Column heading used in leaderboard tables.
inline std::string_view display_name(QaCategory c) {
  constexpr std::array<std::string_view, kNumQaCategories> names = {
      "Presence",      "Quantity",   "Color",     "Absolute pos.", "Relative pos.",
      "Area comp.",    "Road dir.",  "Image",     "Scene",         "Reasoning"};
  return names[static_cast<std::size_t>(c)];
}

inline std::optional<Modality> parse_modality(std::string_view s) {
  if (s == "color") return Modality::color;
  if (s == "panchromatic") return Modality::panchromatic;
  return std::nullopt;
}

inline std::optional<Split> parse_split(std::string_view s) {
  if (s == "train") return Split::train;
  if (s == "val") return Split::val;
  if (s == "test") return Split::test;
  return std::nullopt;
}

inline std::optional<QaCategory> parse_category(std::string_view s) {
  for (QaCategory c : kAllQaCategories)
    if (to_string(c) == s) return c;
  return std::nullopt;
}

struct ImageRecord {
  std::string image_id;
  std::int64_t width = 0;
  std::int64_t height = 0;
  Modality modality = Modality::color;
  std::string source;
  std::string uri;

  friend bool operator==(const ImageRecord&, const ImageRecord&) = default;
};

struct CaptionRecord {
  std::string image_id;
  std::string caption_id;
  std::string text;
  Split split = Split::test;

  friend bool operator==(const CaptionRecord&, const CaptionRecord&) = default;
};

struct QARecord {
  std::string image_id;
  std::string question_id;
  std::string question;
  std::string gold_answer;
  QaCategory category = QaCategory::presence;

  friend bool operator==(const QARecord&, const QARecord&) = default;
};

/// A model output for one target. A missing question_id means the target is
/// the image caption; otherwise it is the answer to that question. Empty text
/// is legal (a refusal) and scores as zero.
struct PredictionRecord {
  std::string model_id;
  std::string image_id;
  std::optional<std::string> question_id;
  std::string text;

  bool is_caption() const { return !question_id.has_value(); }

  friend bool operator==(const PredictionRecord&, const PredictionRecord&) = default;
};

namespace detail {

struct LineContext {
  std::string path;
  std::size_t line = 0;

  std::string where() const { return path + ":" + std::to_string(line); }
};

[[noreturn]] inline void fail(const LineContext& ctx, const std::string& msg) {
  throw DataError(ctx.where() + ": " + msg);
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(path + ": cannot open file");
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw DataError(path + ": read failure");
  return buf.str();
}

/// Calls fn(json_object, ctx) for every non-blank line. Line numbers are
/// 1-based.
template <typename Fn>
void for_each_jsonl(const std::string& content, const std::string& path, Fn&& fn) {
  LineContext ctx{path, 0};
  std::size_t pos = 0;
  while (pos < content.size()) {
    std::size_t end = content.find('\n', pos);
    if (end == std::string::npos) end = content.size();
    std::string_view line(content.data() + pos, end - pos);
    ++ctx.line;
    pos = end + 1;
    if (text::trim(line).empty()) continue;
    Json obj;
    try {
      obj = Json::parse(line);
    } catch (const Json::parse_error& e) {
      fail(ctx, std::string("malformed record: ") + e.what());
    }
    if (!obj.is_object()) fail(ctx, "record is not an object");
    fn(obj, ctx);
  }
}

inline std::string require_string(const Json& obj, const char* key, const LineContext& ctx) {
  auto it = obj.find(key);
  if (it == obj.end()) fail(ctx, std::string("missing required field \"") + key + "\"");
  if (!it->is_string()) fail(ctx, std::string("field \"") + key + "\" must be a string");
  return it->get<std::string>();
}

inline std::string require_nonempty(const Json& obj, const char* key, const LineContext& ctx) {
  std::string s = require_string(obj, key, ctx);
  if (text::trim(s).empty()) fail(ctx, std::string("field \"") + key + "\" is empty");
  return s;
}

inline std::int64_t require_positive_int(const Json& obj, const char* key,
                                         const LineContext& ctx) {
  auto it = obj.find(key);
  if (it == obj.end()) fail(ctx, std::string("missing required field \"") + key + "\"");
  if (!it->is_number_integer()) fail(ctx, std::string("field \"") + key + "\" must be an integer");
  auto v = it->get<std::int64_t>();
  if (v < 1) fail(ctx, std::string("field \"") + key + "\" must be >= 1");
  return v;
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError(path + ": cannot open for writing");
  out << content;
  if (!out) throw DataError(path + ": write failure");
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Record <-> JSON

inline Json to_json(const ImageRecord& r) {
  return Json{{"image_id", r.image_id}, {"width", r.width},   {"height", r.height},
              {"modality", to_string(r.modality)}, {"source", r.source}, {"uri", r.uri}};
}

inline Json to_json(const CaptionRecord& r) {
  return Json{{"image_id", r.image_id},
              {"caption_id", r.caption_id},
              {"text", r.text},
              {"split", to_string(r.split)}};
}

inline Json to_json(const QARecord& r) {
  return Json{{"image_id", r.image_id},
              {"question_id", r.question_id},
              {"question", r.question},
              {"answer", r.gold_answer},
              {"category", to_string(r.category)}};
}

inline Json to_json(const PredictionRecord& r) {
  if (r.is_caption())
    return Json{{"model_id", r.model_id}, {"image_id", r.image_id}, {"text", r.text}};
  return Json{{"model_id", r.model_id},
              {"image_id", r.image_id},
              {"question_id", *r.question_id},
              {"answer", r.text}};
}

inline ImageRecord image_from_json(const Json& obj, const detail::LineContext& ctx) {
  ImageRecord r;
  r.image_id = detail::require_nonempty(obj, "image_id", ctx);
  r.width = detail::require_positive_int(obj, "width", ctx);
  r.height = detail::require_positive_int(obj, "height", ctx);
  auto m = parse_modality(detail::require_string(obj, "modality", ctx));
  if (!m) detail::fail(ctx, "unknown modality");
  r.modality = *m;
  r.source = detail::require_string(obj, "source", ctx);
  r.uri = detail::require_string(obj, "uri", ctx);
  return r;
}

inline CaptionRecord caption_from_json(const Json& obj, const detail::LineContext& ctx) {
  CaptionRecord r;
  r.image_id = detail::require_nonempty(obj, "image_id", ctx);
  r.caption_id = detail::require_nonempty(obj, "caption_id", ctx);
  r.text = detail::require_nonempty(obj, "text", ctx);
  auto s = parse_split(detail::require_string(obj, "split", ctx));
  if (!s) detail::fail(ctx, "unknown split");
  r.split = *s;
  return r;
}

inline QARecord qa_from_json(const Json& obj, const detail::LineContext& ctx) {
  QARecord r;
  r.image_id = detail::require_nonempty(obj, "image_id", ctx);
  r.question_id = detail::require_nonempty(obj, "question_id", ctx);
  r.question = detail::require_nonempty(obj, "question", ctx);
  r.gold_answer = detail::require_nonempty(obj, "answer", ctx);
  std::string cat = detail::require_string(obj, "category", ctx);
  auto c = parse_category(cat);
  if (!c) detail::fail(ctx, "unknown category \"" + cat + "\"");
  r.category = *c;
  return r;
}

inline PredictionRecord prediction_from_json(const Json& obj, const detail::LineContext& ctx) {
  PredictionRecord r;
  r.model_id = detail::require_nonempty(obj, "model_id", ctx);
  r.image_id = detail::require_nonempty(obj, "image_id", ctx);
  if (obj.contains("question_id")) {
    r.question_id = detail::require_nonempty(obj, "question_id", ctx);
    r.text = detail::require_string(obj, "answer", ctx);
  } else {
    r.text = detail::require_string(obj, "text", ctx);
  }
  return r;
}

// ---------------------------------------------------------------------------
// Loaders

inline std::vector<ImageRecord> parse_images(const std::string& content,
                                             const std::string& path = "<memory>") {
  std::vector<ImageRecord> out;
  std::unordered_set<std::string> seen;
  detail::for_each_jsonl(content, path, [&](const Json& obj, const detail::LineContext& ctx) {
    auto r = image_from_json(obj, ctx);
    if (!seen.insert(r.image_id).second) detail::fail(ctx, "duplicate image_id \"" + r.image_id + "\"");
    out.push_back(std::move(r));
  });
  return out;
}

inline std::vector<CaptionRecord> parse_captions(const std::string& content,
                                                 const std::string& path = "<memory>") {
  std::vector<CaptionRecord> out;
  std::set<std::pair<std::string, std::string>> seen;
  detail::for_each_jsonl(content, path, [&](const Json& obj, const detail::LineContext& ctx) {
    auto r = caption_from_json(obj, ctx);
    if (!seen.emplace(r.image_id, r.caption_id).second)
      detail::fail(ctx, "duplicate (image_id, caption_id) (\"" + r.image_id + "\", \"" +
                            r.caption_id + "\")");
    out.push_back(std::move(r));
  });
  return out;
}

inline std::vector<QARecord> parse_qa(const std::string& content,
                                      const std::string& path = "<memory>") {
  std::vector<QARecord> out;
  std::unordered_set<std::string> seen;
  detail::for_each_jsonl(content, path, [&](const Json& obj, const detail::LineContext& ctx) {
    auto r = qa_from_json(obj, ctx);
    if (!seen.insert(r.question_id).second)
      detail::fail(ctx, "duplicate question_id \"" + r.question_id + "\"");
    out.push_back(std::move(r));
  });
  return out;
}

inline std::vector<ImageRecord> load_images(const std::string& path) {
  return parse_images(detail::read_file(path), path);
}
inline std::vector<CaptionRecord> load_captions(const std::string& path) {
  return parse_captions(detail::read_file(path), path);
}
inline std::vector<QARecord> load_qa(const std::string& path) {
  return parse_qa(detail::read_file(path), path);
}

/// Targets a prediction may legally refer to. Caption predictions resolve by
/// image_id, answer predictions by question_id (whose image must agree).
struct PredictionTargets {
  std::unordered_set<std::string> caption_images;
  std::unordered_map<std::string, std::string> question_image;

  static PredictionTargets from(const std::vector<CaptionRecord>& captions,
                                const std::vector<QARecord>& qa) {
    PredictionTargets t;
    for (const auto& c : captions) t.caption_images.insert(c.image_id);
    for (const auto& q : qa) t.question_image.emplace(q.question_id, q.image_id);
    return t;
  }
};

struct UnresolvedPrediction {
  std::size_t line = 0;
  PredictionRecord record;
  std::string reason;
};

struct PredictionSet {
  std::vector<PredictionRecord> records;  // resolved, file order
  std::vector<UnresolvedPrediction> unresolved;
};

/// Parses predictions. Duplicate (model_id, image_id, target) keys are an
/// error; records whose target is absent from `targets` are collected in
/// `unresolved` instead of being dropped silently.
inline PredictionSet parse_predictions(const std::string& content, const PredictionTargets* targets,
                                       const std::string& path = "<memory>") {
  PredictionSet out;
  std::set<std::tuple<std::string, std::string, std::string>> seen;
  detail::for_each_jsonl(content, path, [&](const Json& obj, const detail::LineContext& ctx) {
    auto r = prediction_from_json(obj, ctx);
    // Caption targets use a key that cannot collide with a question id.
    std::string target = r.question_id ? "q:" + *r.question_id : std::string("caption");
    if (!seen.emplace(r.model_id, r.image_id, target).second)
      detail::fail(ctx, "duplicate prediction for (model_id \"" + r.model_id + "\", image_id \"" +
                            r.image_id + "\", " + (r.question_id ? "question_id \"" + *r.question_id + "\"" : std::string("caption")) + ")");
    if (targets) {
      std::string reason;
      if (r.is_caption()) {
        if (!targets->caption_images.contains(r.image_id))
          reason = "no reference captions for image \"" + r.image_id + "\"";
      } else {
        auto it = targets->question_image.find(*r.question_id);
        if (it == targets->question_image.end())
          reason = "unknown question_id \"" + *r.question_id + "\"";
        else if (it->second != r.image_id)
          reason = "question \"" + *r.question_id + "\" belongs to image \"" + it->second + "\"";
      }
      if (!reason.empty()) {
        out.unresolved.push_back({ctx.line, std::move(r), std::move(reason)});
        return;
      }
    }
    out.records.push_back(std::move(r));
  });
  return out;
}

inline PredictionSet load_predictions(const std::string& path,
                                      const PredictionTargets* targets = nullptr) {
  return parse_predictions(detail::read_file(path), targets, path);
}

// ---------------------------------------------------------------------------
// Writers

template <typename Record>
std::string to_jsonl(const std::vector<Record>& records) {
  std::string out;
  for (const auto& r : records) {
    out += to_json(r).dump();
    out += '\n';
  }
  return out;
}

template <typename Record>
void save_jsonl(const std::string& path, const std::vector<Record>& records) {
  detail::write_file(path, to_jsonl(records));
}

}  // namespace rsbench
