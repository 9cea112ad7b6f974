#pragma once

// Annotation backend: caption-rating and VQA-adjudication task queues,
// per-rater progress, and durable idempotent submissions. Everything here is
// transport-independent; service_http.hpp binds it to HTTP endpoints.
//
// Data directory layout:
//   tasks.jsonl      one AnnotationTask per line (items never change)
//   ratings.jsonl    append-only RatingRecord log, each line tagged task_id
//   judgments.jsonl  append-only Judgment log, each line tagged task_id
//   images.jsonl     optional images manifest used to serve rasters
//   rubric.json      optional grading rubric; a built-in one is used if absent

#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "rsbench/append_log.hpp"
#include "rsbench/corpus.hpp"
#include "rsbench/rating.hpp"
#include "rsbench/vqa.hpp"

namespace rsbench::service {

/// Unknown task or image; maps to HTTP 404.
class NotFound : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class TaskKind { caption_rating, vqa_adjudication };

inline std::string_view to_string(TaskKind k) {
  return k == TaskKind::caption_rating ? "caption_rating" : "vqa_adjudication";
}

inline std::optional<TaskKind> parse_task_kind(std::string_view s) {
  if (s == "caption_rating") return TaskKind::caption_rating;
  if (s == "vqa_adjudication") return TaskKind::vqa_adjudication;
  return std::nullopt;
}

struct TaskItem {
  std::string image_id;
  std::string model_id;
  std::string payload;  // caption or answer under review
  std::optional<std::string> gold;
  std::optional<std::string> question_id;
  std::optional<std::string> question;

  friend bool operator==(const TaskItem&, const TaskItem&) = default;
};

struct AnnotationTask {
  std::string task_id;
  TaskKind kind = TaskKind::caption_rating;
  std::vector<TaskItem> items;

  friend bool operator==(const AnnotationTask&, const AnnotationTask&) = default;
};

inline Json to_json(const TaskItem& it) {
  Json j{{"image_id", it.image_id}, {"model_id", it.model_id}, {"payload", it.payload}};
  if (it.gold) j["gold"] = *it.gold;
  if (it.question_id) j["question_id"] = *it.question_id;
  if (it.question) j["question"] = *it.question;
  return j;
}

inline Json to_json(const AnnotationTask& t) {
  Json items = Json::array();
  for (const auto& it : t.items) items.push_back(to_json(it));
  return Json{{"task_id", t.task_id}, {"kind", to_string(t.kind)}, {"items", items}};
}

inline AnnotationTask task_from_json(const Json& obj, const rsbench::detail::LineContext& ctx) {
  using rsbench::detail::fail;
  using rsbench::detail::require_nonempty;
  using rsbench::detail::require_string;
  AnnotationTask t;
  t.task_id = require_nonempty(obj, "task_id", ctx);
  auto kind = parse_task_kind(require_string(obj, "kind", ctx));
  if (!kind) fail(ctx, "unknown task kind");
  t.kind = *kind;
  auto it = obj.find("items");
  if (it == obj.end() || !it->is_array()) fail(ctx, "task needs an \"items\" array");
  for (const auto& item : *it) {
    if (!item.is_object()) fail(ctx, "task item is not an object");
    TaskItem ti;
    ti.image_id = require_nonempty(item, "image_id", ctx);
    ti.model_id = require_nonempty(item, "model_id", ctx);
    ti.payload = require_string(item, "payload", ctx);
    if (item.contains("gold")) ti.gold = require_string(item, "gold", ctx);
    if (item.contains("question_id")) ti.question_id = require_nonempty(item, "question_id", ctx);
    if (item.contains("question")) ti.question = require_string(item, "question", ctx);
    if (t.kind == TaskKind::vqa_adjudication && !ti.question_id)
      fail(ctx, "vqa_adjudication items need a question_id");
    t.items.push_back(std::move(ti));
  }
  return t;
}

/// Caption-rating task over every caption prediction, in file order.
inline AnnotationTask make_caption_rating_task(std::string task_id, const std::vector<PredictionRecord>& preds) {
  AnnotationTask t{std::move(task_id), TaskKind::caption_rating, {}};
  for (const auto& p : preds)
    if (p.is_caption()) t.items.push_back({p.image_id, p.model_id, p.text, std::nullopt, std::nullopt, std::nullopt});
  return t;
}

/// Adjudication task over every answer prediction whose question is known.
inline AnnotationTask make_vqa_task(std::string task_id, const std::vector<PredictionRecord>& preds,
                                    const std::vector<QARecord>& qa) {
  std::unordered_map<std::string, const QARecord*> by_id;
  for (const auto& q : qa) by_id.emplace(q.question_id, &q);
  AnnotationTask t{std::move(task_id), TaskKind::vqa_adjudication, {}};
  for (const auto& p : preds) {
    if (p.is_caption()) continue;
    auto it = by_id.find(*p.question_id);
    if (it == by_id.end()) continue;
    t.items.push_back({p.image_id, p.model_id, p.text, it->second->gold_answer, *p.question_id,
                       it->second->question});
  }
  return t;
}

/// Grading criteria shown next to each dimension; editable content.
inline Json default_rubric() {
  return Json{
      {"detail",
       {{"A", "Describes the main scene and most objects with their attributes (quantity, color, shape, size)."},
        {"B", "Describes the main scene and some objects, with few attributes."},
        {"C", "Describes the main scene only, with little or no object detail."},
        {"D", "Main scene missing or wrong."}}},
      {"position",
       {{"A", "Absolute and relative positions of objects are described correctly."},
        {"B", "Some positions are described, with minor errors or omissions."},
        {"C", "Positions are barely described or mostly inaccurate."},
        {"D", "No position information, or positions are wrong."}}},
      {"hallucination",
       {{"A", "No content that is absent from the image."},
        {"B", "Minor hallucinated detail that does not change the main content."},
        {"C", "Several hallucinated objects or attributes."},
        {"D", "Hallucinated content dominates the caption."}}}};
}

struct NextItem {
  std::optional<std::size_t> index;  // empty when the rater has finished
  std::optional<TaskItem> item;

  bool exhausted() const { return !index.has_value(); }
};

struct Progress {
  std::size_t total = 0;
  std::map<std::string, std::size_t> done_by_rater;
};

class AnnotationService {
 public:
  explicit AnnotationService(const std::filesystem::path& data_dir)
      : dir_(data_dir),
        tasks_log_(ensure_dir(data_dir) / "tasks.jsonl"),
        ratings_log_(data_dir / "ratings.jsonl"),
        judgments_log_(data_dir / "judgments.jsonl") {
    std::size_t line = 0;
    for (const auto& obj : tasks_log_.replayed()) {
      auto t = task_from_json(obj, {tasks_log_.path().string(), ++line});
      add_task_unlocked(std::move(t));
    }
    line = 0;
    for (const auto& obj : ratings_log_.replayed()) {
      rsbench::detail::LineContext ctx{ratings_log_.path().string(), ++line};
      apply_rating(rsbench::detail::require_nonempty(obj, "task_id", ctx), rating::rating_from_json(obj, ctx));
    }
    line = 0;
    for (const auto& obj : judgments_log_.replayed()) {
      rsbench::detail::LineContext ctx{judgments_log_.path().string(), ++line};
      apply_judgment(rsbench::detail::require_nonempty(obj, "task_id", ctx), vqa::judgment_from_json(obj, ctx));
    }
    if (auto manifest = dir_ / "images.jsonl"; std::filesystem::exists(manifest))
      for (auto& img : load_images(manifest.string())) images_.emplace(img.image_id, std::move(img));
    rubric_ = default_rubric();
    if (auto path = dir_ / "rubric.json"; std::filesystem::exists(path)) {
      try {
        rubric_ = Json::parse(rsbench::detail::read_file(path.string()));
      } catch (const Json::parse_error& e) {
        throw DataError(path.string() + ": " + e.what());
      }
    }
  }

  /// Persists a new task. Task ids are unique.
  void create_task(AnnotationTask task) {
    std::unique_lock lock(mu_);
    if (tasks_.contains(task.task_id)) throw DataError("task \"" + task.task_id + "\" already exists");
    tasks_log_.append(to_json(task));
    add_task_unlocked(std::move(task));
  }

  std::vector<AnnotationTask> tasks() const {
    std::shared_lock lock(mu_);
    std::vector<AnnotationTask> out;
    for (const auto& id : task_order_) out.push_back(tasks_.at(id).task);
    return out;
  }

  /// Lowest-index item the rater has not completed.
  NextItem next_item(const std::string& task_id, const std::string& rater_id) const {
    std::shared_lock lock(mu_);
    const auto& st = state(task_id);
    auto done = st.done.find(rater_id);
    for (std::size_t i = 0; i < st.task.items.size(); ++i)
      if (done == st.done.end() || !done->second.contains(i)) return {i, st.task.items[i]};
    return {};
  }

  /// Records one dimension grade for a caption-rating item. An item counts
  /// as done for a rater once all three dimensions are graded.
  rating::RecordStatus submit_rating(const std::string& task_id, const rating::RatingRecord& r) {
    std::unique_lock lock(mu_);
    if (ratings_.contains(r.rating_id)) {
      state(task_id);
      return rating::RecordStatus::duplicate;
    }
    auto& st = state(task_id);
    if (st.task.kind != TaskKind::caption_rating)
      throw DataError("task \"" + task_id + "\" does not accept ratings");
    find_rating_item(st, r);
    ratings_.validate(r);
    Json line = rating::to_json(r);
    line["task_id"] = task_id;
    ratings_log_.append(line);
    return apply_rating(task_id, r);
  }

  /// Records a human verdict for a VQA-adjudication item.
  rating::RecordStatus submit_judgment(const std::string& task_id, vqa::Judgment j) {
    std::unique_lock lock(mu_);
    if (judgment_ids_.contains(j.judgment_id)) {
      state(task_id);
      return rating::RecordStatus::duplicate;
    }
    auto& st = state(task_id);
    if (st.task.kind != TaskKind::vqa_adjudication)
      throw DataError("task \"" + task_id + "\" does not accept judgments");
    if (j.rater_id.empty()) throw DataError("judgment \"" + j.judgment_id + "\": missing rater_id");
    if (j.verdict == vqa::Verdict::unjudged)
      throw DataError("judgment \"" + j.judgment_id + "\": verdict must be correct or incorrect");
    j.source = vqa::JudgmentSource::human;
    find_judgment_item(st, j);
    Json line = vqa::to_json(j);
    line["task_id"] = task_id;
    judgments_log_.append(line);
    return apply_judgment(task_id, j);
  }

  Progress progress(const std::string& task_id) const {
    std::shared_lock lock(mu_);
    const auto& st = state(task_id);
    Progress p{st.task.items.size(), {}};
    for (const auto& [rater, done] : st.done) p.done_by_rater[rater] = done.size();
    return p;
  }

  /// Submissions for a task in log order, as plain RatingRecord or Judgment
  /// lines.
  std::string export_task(const std::string& task_id) const {
    std::shared_lock lock(mu_);
    const auto& st = state(task_id);
    std::string out;
    if (st.task.kind == TaskKind::caption_rating) {
      for (const auto& r : ratings_.log())
        if (rating_task_.at(r.rating_id) == task_id) out += rating::to_json(r).dump() + "\n";
    } else {
      for (const auto& [tid, j] : judgments_)
        if (tid == task_id) out += vqa::to_json(j).dump() + "\n";
    }
    return out;
  }

  /// Every accepted rating across tasks, in log order.
  std::vector<rating::RatingRecord> ratings() const {
    std::shared_lock lock(mu_);
    return ratings_.log();
  }

  std::vector<vqa::Judgment> judgments() const {
    std::shared_lock lock(mu_);
    std::vector<vqa::Judgment> out;
    for (const auto& [tid, j] : judgments_) out.push_back(j);
    return out;
  }

  /// File backing an image, resolved against the data directory.
  std::filesystem::path image_path(const std::string& image_id) const {
    std::shared_lock lock(mu_);
    auto it = images_.find(image_id);
    if (it == images_.end()) throw NotFound("unknown image \"" + image_id + "\"");
    std::filesystem::path p = it->second.uri;
    return p.is_absolute() ? p : dir_ / p;
  }

  const Json& rubric() const { return rubric_; }

 private:
  static const std::filesystem::path& ensure_dir(const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    return dir;
  }

  struct TaskState {
    AnnotationTask task;
    // rater -> completed item indices
    std::map<std::string, std::set<std::size_t>> done;
    // (rater, item) -> graded dimensions, for caption rating
    std::map<std::pair<std::string, std::size_t>, std::set<rating::Dimension>> graded;
  };

  void add_task_unlocked(AnnotationTask t) {
    if (tasks_.contains(t.task_id)) throw DataError("duplicate task \"" + t.task_id + "\"");
    task_order_.push_back(t.task_id);
    auto id = t.task_id;
    tasks_.emplace(std::move(id), TaskState{std::move(t), {}, {}});
  }

  TaskState& state(const std::string& task_id) {
    auto it = tasks_.find(task_id);
    if (it == tasks_.end()) throw NotFound("unknown task \"" + task_id + "\"");
    return it->second;
  }
  const TaskState& state(const std::string& task_id) const {
    auto it = tasks_.find(task_id);
    if (it == tasks_.end()) throw NotFound("unknown task \"" + task_id + "\"");
    return it->second;
  }

  // First item matching the record that this rater has not finished, else
  // the first matching item.
  static std::size_t find_rating_item(const TaskState& st, const rating::RatingRecord& r) {
    std::optional<std::size_t> first;
    auto done = st.done.find(r.rater_id);
    for (std::size_t i = 0; i < st.task.items.size(); ++i) {
      const auto& it = st.task.items[i];
      if (it.image_id != r.image_id || it.model_id != r.model_id) continue;
      if (done == st.done.end() || !done->second.contains(i)) return i;
      if (!first) first = i;
    }
    if (!first)
      throw DataError("rating \"" + r.rating_id + "\" matches no item of task \"" + st.task.task_id + "\"");
    return *first;
  }

  static std::size_t find_judgment_item(const TaskState& st, const vqa::Judgment& j) {
    for (std::size_t i = 0; i < st.task.items.size(); ++i) {
      const auto& it = st.task.items[i];
      if (it.question_id && *it.question_id == j.question_id && it.model_id == j.model_id) return i;
    }
    throw DataError("judgment \"" + j.judgment_id + "\" matches no item of task \"" + st.task.task_id + "\"");
  }

  rating::RecordStatus apply_rating(const std::string& task_id, const rating::RatingRecord& r) {
    auto& st = state(task_id);
    std::size_t idx = find_rating_item(st, r);
    auto status = ratings_.record_rating(r);
    if (status == rating::RecordStatus::duplicate) return status;
    rating_task_[r.rating_id] = task_id;
    auto& dims = st.graded[{r.rater_id, idx}];
    dims.insert(r.dimension);
    if (dims.size() == rating::kAllDimensions.size()) st.done[r.rater_id].insert(idx);
    return status;
  }

  rating::RecordStatus apply_judgment(const std::string& task_id, const vqa::Judgment& j) {
    auto& st = state(task_id);
    std::size_t idx = find_judgment_item(st, j);
    if (!judgment_ids_.insert(j.judgment_id).second) return rating::RecordStatus::duplicate;
    judgments_.emplace_back(task_id, j);
    st.done[j.rater_id].insert(idx);
    return rating::RecordStatus::stored;
  }

  std::filesystem::path dir_;
  mutable std::shared_mutex mu_;
  AppendLog tasks_log_;
  AppendLog ratings_log_;
  AppendLog judgments_log_;
  std::vector<std::string> task_order_;
  std::unordered_map<std::string, TaskState> tasks_;
  rating::RatingStore ratings_;
  std::unordered_map<std::string, std::string> rating_task_;
  std::unordered_set<std::string> judgment_ids_;
  std::vector<std::pair<std::string, vqa::Judgment>> judgments_;
  std::unordered_map<std::string, ImageRecord> images_;
  Json rubric_;
};

}  // namespace rsbench::service
