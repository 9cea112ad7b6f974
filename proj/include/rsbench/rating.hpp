#pragma once

// Human caption rating: A-D grades on three dimensions, an append-only
// rating log, and per-model grade distributions derived from it.

#include <array>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "rsbench/append_log.hpp"
#include "rsbench/corpus.hpp"
#include "rsbench/report.hpp"

namespace rsbench::rating {

enum class Dimension { detail, position, hallucination };

/// A is the best grade, D the worst.
enum class Grade { A, B, C, D };

inline constexpr std::array<Dimension, 3> kAllDimensions = {Dimension::detail, Dimension::position,
                                                            Dimension::hallucination};
inline constexpr std::array<Grade, 4> kAllGrades = {Grade::A, Grade::B, Grade::C, Grade::D};

inline std::string_view to_string(Dimension d) {
  switch (d) {
    case Dimension::detail: return "detail";
    case Dimension::position: return "position";
    case Dimension::hallucination: return "hallucination";
  }
  return "detail";
}

inline std::optional<Dimension> parse_dimension(std::string_view s) {
  for (Dimension d : kAllDimensions)
    if (to_string(d) == s) return d;
  return std::nullopt;
}

inline std::string_view to_string(Grade g) {
  constexpr std::array<std::string_view, 4> names = {"A", "B", "C", "D"};
  return names[static_cast<std::size_t>(g)];
}

inline std::optional<Grade> parse_grade(std::string_view s) {
  for (Grade g : kAllGrades)
    if (to_string(g) == s) return g;
  return std::nullopt;
}

struct RatingRecord {
  std::string rating_id;  // client-generated idempotency key
  std::string rater_id;
  std::string model_id;
  std::string image_id;
  Dimension dimension = Dimension::detail;
  Grade grade = Grade::A;
  std::string created_at;  // ISO-8601 UTC

  friend bool operator==(const RatingRecord&, const RatingRecord&) = default;
};

inline Json to_json(const RatingRecord& r) {
  return Json{{"rating_id", r.rating_id},   {"rater_id", r.rater_id},
              {"model_id", r.model_id},     {"image_id", r.image_id},
              {"dimension", to_string(r.dimension)}, {"grade", to_string(r.grade)},
              {"created_at", r.created_at}};
}

inline RatingRecord rating_from_json(const Json& obj, const rsbench::detail::LineContext& ctx) {
  using rsbench::detail::fail;
  using rsbench::detail::require_nonempty;
  using rsbench::detail::require_string;
  RatingRecord r;
  r.rating_id = require_nonempty(obj, "rating_id", ctx);
  r.rater_id = require_nonempty(obj, "rater_id", ctx);
  r.model_id = require_nonempty(obj, "model_id", ctx);
  r.image_id = require_nonempty(obj, "image_id", ctx);
  std::string dim = require_string(obj, "dimension", ctx);
  auto d = parse_dimension(dim);
  if (!d) fail(ctx, "invalid dimension \"" + dim + "\"");
  r.dimension = *d;
  std::string grade = require_string(obj, "grade", ctx);
  auto g = parse_grade(grade);
  if (!g) fail(ctx, "invalid grade \"" + grade + "\"");
  r.grade = *g;
  r.created_at = obj.contains("created_at") ? require_string(obj, "created_at", ctx) : std::string();
  return r;
}

inline std::vector<RatingRecord> parse_ratings(const std::string& content, const std::string& path = "<memory>") {
  std::vector<RatingRecord> out;
  rsbench::detail::for_each_jsonl(content, path, [&](const Json& obj, const rsbench::detail::LineContext& ctx) {
    out.push_back(rating_from_json(obj, ctx));
  });
  return out;
}

inline std::vector<RatingRecord> load_ratings(const std::string& path) {
  return parse_ratings(rsbench::detail::read_file(path), path);
}

struct GradeDistribution {
  std::array<std::size_t, 4> counts{};

  std::size_t operator[](Grade g) const { return counts[static_cast<std::size_t>(g)]; }
  std::size_t total() const { return counts[0] + counts[1] + counts[2] + counts[3]; }

  /// Percentage share of each grade; all zero for an empty distribution.
  std::array<double, 4> shares() const {
    std::array<double, 4> out{};
    if (auto n = total())
      for (std::size_t i = 0; i < 4; ++i) out[i] = 100.0 * static_cast<double>(counts[i]) / static_cast<double>(n);
    return out;
  }

  /// "A/B/C/D" counts, e.g. "53/44/3/0".
  std::string compact() const {
    return std::to_string(counts[0]) + "/" + std::to_string(counts[1]) + "/" + std::to_string(counts[2]) +
           "/" + std::to_string(counts[3]);
  }

  friend bool operator==(const GradeDistribution&, const GradeDistribution&) = default;
};

/// Images and models a run may rate. Empty sets accept anything.
struct Catalog {
  std::set<std::string> images;
  std::set<std::string> models;
};

enum class RecordStatus { stored, duplicate };

inline std::string_view to_string(RecordStatus s) { return s == RecordStatus::stored ? "stored" : "duplicate"; }

/// The rating log and everything derived from it. Aggregates are a pure
/// function of the accepted records in log order.
class RatingStore {
 public:
  RatingStore() = default;
  explicit RatingStore(Catalog catalog) : catalog_(std::move(catalog)) {}

  /// Validates and appends. A rating_id seen before is a no-op.
  RecordStatus record_rating(const RatingRecord& r) {
    if (ids_.contains(r.rating_id)) return RecordStatus::duplicate;
    validate(r);
    ids_.insert(r.rating_id);
    log_.push_back(r);
    return RecordStatus::stored;
  }

  /// Throws DataError when `r` references something outside the catalog.
  void validate(const RatingRecord& r) const {
    if (!catalog_.images.empty() && !catalog_.images.contains(r.image_id))
      throw DataError("rating \"" + r.rating_id + "\": unknown image \"" + r.image_id + "\"");
    if (!catalog_.models.empty() && !catalog_.models.contains(r.model_id))
      throw DataError("rating \"" + r.rating_id + "\": unknown model \"" + r.model_id + "\"");
    if (r.rater_id.empty()) throw DataError("rating \"" + r.rating_id + "\": empty rater_id");
  }

  bool contains(const std::string& rating_id) const { return ids_.contains(rating_id); }

  const std::vector<RatingRecord>& log() const { return log_; }

  /// Grades for one (model, dimension): per rater the latest grade for each
  /// image counts; several raters on one image resolve by majority, a tie
  /// going to the worse grade.
  GradeDistribution distribution(const std::string& model_id, Dimension dim) const {
    // (image, rater) -> index of the latest record
    std::map<std::pair<std::string, std::string>, std::size_t> latest;
    for (std::size_t i = 0; i < log_.size(); ++i) {
      const auto& r = log_[i];
      if (r.model_id != model_id || r.dimension != dim) continue;
      auto key = std::make_pair(r.image_id, r.rater_id);
      auto it = latest.find(key);
      if (it == latest.end())
        latest.emplace(key, i);
      else if (r.created_at >= log_[it->second].created_at)
        it->second = i;
    }
    std::map<std::string, std::array<std::size_t, 4>> votes;
    for (const auto& [key, idx] : latest) ++votes[key.first][static_cast<std::size_t>(log_[idx].grade)];
    GradeDistribution d;
    for (const auto& [image, v] : votes) {
      std::size_t winner = 0;
      for (std::size_t g = 1; g < 4; ++g)
        if (v[g] >= v[winner]) winner = g;
      ++d.counts[winner];
    }
    return d;
  }

  /// Models present in the log, in order of first appearance.
  std::vector<std::string> models() const {
    std::vector<std::string> out;
    std::unordered_set<std::string> seen;
    for (const auto& r : log_)
      if (seen.insert(r.model_id).second) out.push_back(r.model_id);
    return out;
  }

 private:
  Catalog catalog_;
  std::unordered_set<std::string> ids_;
  std::vector<RatingRecord> log_;
};

/// Replays a sequence of records (duplicates included) into a fresh store.
inline RatingStore replay(const std::vector<RatingRecord>& records, Catalog catalog = {}) {
  RatingStore store(std::move(catalog));
  for (const auto& r : records) store.record_rating(r);
  return store;
}

/// RatingStore persisted to an append-only log file. Records are durable
/// before record_rating returns.
class PersistentRatingStore {
 public:
  PersistentRatingStore(const std::filesystem::path& path, Catalog catalog = {})
      : log_(path), store_(std::move(catalog)) {
    std::size_t line = 0;
    for (const auto& obj : log_.replayed()) {
      ++line;
      store_.record_rating(rating_from_json(obj, {path.string(), line}));
    }
  }

  RecordStatus record_rating(const RatingRecord& r) {
    std::lock_guard lock(mu_);
    if (store_.contains(r.rating_id)) return RecordStatus::duplicate;
    store_.validate(r);
    log_.append(to_json(r));
    return store_.record_rating(r);
  }

  const RatingStore& store() const { return store_; }

 private:
  AppendLog log_;
  RatingStore store_;
  std::mutex mu_;
};

struct DistributionRow {
  std::string model_id;
  Dimension dimension;
  GradeDistribution distribution;
};

inline std::vector<DistributionRow> rating_report(const RatingStore& store, const std::vector<std::string>& models,
                                                  const std::vector<Dimension>& dimensions) {
  std::vector<DistributionRow> rows;
  for (const auto& m : models)
    for (Dimension d : dimensions) rows.push_back({m, d, store.distribution(m, d)});
  return rows;
}

/// Machine-readable form: counts then percentage shares, one row per
/// (model, dimension) labelled "model/dimension".
inline report::MetricReport to_metric_report(const std::vector<DistributionRow>& rows) {
  report::MetricReport r;
  r.task = report::Task::rating;
  for (Grade g : kAllGrades) r.columns.push_back({std::string(to_string(g)), report::Better::none, 0});
  for (Grade g : kAllGrades) r.columns.push_back({std::string(to_string(g)) + " %", report::Better::none, 2});
  for (const auto& row : rows) {
    std::vector<std::optional<double>> values;
    for (auto c : row.distribution.counts) values.push_back(static_cast<double>(c));
    for (auto s : row.distribution.shares()) values.push_back(s);
    r.add_row(row.model_id + "/" + std::string(to_string(row.dimension)), std::move(values));
  }
  return r;
}

/// Markdown grade table with compact "A/B/C/D" counts.
inline std::string render_distribution_markdown(const std::vector<DistributionRow>& rows) {
  std::string out = "| Model | Dimension | A/B/C/D | A % | B % | C % | D % |\n";
  out += "| --- | --- | --- | --- | --- | --- | --- |\n";
  for (const auto& row : rows) {
    out += "| " + row.model_id + " | " + std::string(to_string(row.dimension)) + " | " +
           row.distribution.compact() + " |";
    for (double s : row.distribution.shares()) out += " " + report::format_fixed(s, 2) + " |";
    out += "\n";
  }
  return out;
}

}  // namespace rsbench::rating
