#pragma once

// Leaderboard reports: a fixed column set, one row per model, and provenance
// metadata. Markdown output mirrors published comparison tables (fixed
// decimals, best value per column in bold); csv and json-lines keep full
// precision and parse back to an identical report.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "rsbench/corpus.hpp"
#include "rsbench/error.hpp"

namespace rsbench::report {

enum class Task { captioning, vqa, rating };
enum class Format { markdown, csv, json_lines };

/// Which direction counts as better when marking the best value.
enum class Better { higher, lower, none };

struct Column {
  std::string name;
  Better better = Better::higher;
  int decimals = 2;

  friend bool operator==(const Column&, const Column&) = default;
};

struct Row {
  std::string label;  // model id
  std::vector<std::optional<double>> values;

  friend bool operator==(const Row&, const Row&) = default;
};

struct MetricReport {
  Task task = Task::captioning;
  std::vector<Column> columns;
  std::vector<Row> rows;
  std::vector<std::pair<std::string, std::string>> metadata;

  void add_row(std::string label, std::vector<std::optional<double>> values) {
    if (values.size() != columns.size())
      throw InvalidArgument("report row \"" + label + "\" has " + std::to_string(values.size()) +
                            " values for " + std::to_string(columns.size()) + " columns");
    rows.push_back({std::move(label), std::move(values)});
  }

  void set_meta(const std::string& key, std::string value) {
    for (auto& kv : metadata)
      if (kv.first == key) {
        kv.second = std::move(value);
        return;
      }
    metadata.emplace_back(key, std::move(value));
  }

  std::optional<std::string> meta(std::string_view key) const {
    for (const auto& kv : metadata)
      if (kv.first == key) return kv.second;
    return std::nullopt;
  }

  friend bool operator==(const MetricReport&, const MetricReport&) = default;
};

inline std::string_view to_string(Task t) {
  switch (t) {
    case Task::captioning: return "captioning";
    case Task::vqa: return "vqa";
    case Task::rating: return "rating";
  }
  return "captioning";
}

inline std::optional<Task> parse_task(std::string_view s) {
  if (s == "captioning") return Task::captioning;
  if (s == "vqa") return Task::vqa;
  if (s == "rating") return Task::rating;
  return std::nullopt;
}

inline std::string_view to_string(Better b) {
  switch (b) {
    case Better::higher: return "higher";
    case Better::lower: return "lower";
    case Better::none: return "none";
  }
  return "none";
}

inline std::optional<Better> parse_better(std::string_view s) {
  if (s == "higher") return Better::higher;
  if (s == "lower") return Better::lower;
  if (s == "none") return Better::none;
  return std::nullopt;
}

inline std::optional<Format> parse_format(std::string_view s) {
  if (s == "markdown" || s == "md") return Format::markdown;
  if (s == "csv") return Format::csv;
  if (s == "json-lines" || s == "jsonl") return Format::json_lines;
  return std::nullopt;
}

/// Format implied by an output file name (.md, .csv, .jsonl/.json-lines).
inline std::optional<Format> format_for_path(std::string_view path) {
  auto dot = path.rfind('.');
  if (dot == std::string_view::npos) return std::nullopt;
  return parse_format(path.substr(dot + 1));
}

// Column sets in the order used by published leaderboards.

inline std::vector<Column> captioning_columns() {
  return {{"BLEU-1"}, {"BLEU-2"}, {"BLEU-3"}, {"BLEU-4"}, {"METEOR"}, {"ROUGE_L"}, {"CIDEr"}};
}

inline std::vector<Column> vqa_columns() {
  std::vector<Column> cols;
  for (QaCategory c : kAllQaCategories) cols.push_back({std::string(display_name(c))});
  cols.push_back({"Avg accuracy"});
  return cols;
}

inline std::vector<Column> quantity_error_columns() {
  return {{"Quantity Relative Error", Better::lower, 4}};
}

/// 64-bit FNV-1a as 16 lowercase hex digits.
inline std::string fingerprint(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

/// Fixed-point rendering; negative zero prints as zero.
inline std::string format_fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  std::string s = buf;
  if (s.front() == '-' && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
  return s;
}

/// Shortest representation that parses back to the same double.
inline std::string format_exact(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

namespace detail {

inline std::vector<std::vector<bool>> best_marks(const MetricReport& r) {
  std::vector<std::vector<bool>> marks(r.rows.size(), std::vector<bool>(r.columns.size(), false));
  for (std::size_t c = 0; c < r.columns.size(); ++c) {
    const auto& col = r.columns[c];
    if (col.better == Better::none) continue;
    std::optional<double> best;
    std::size_t populated = 0;
    auto rounded = [&](double v) { return std::stod(format_fixed(v, col.decimals)); };
    for (const auto& row : r.rows) {
      if (!row.values[c]) continue;
      ++populated;
      double v = rounded(*row.values[c]);
      if (!best || (col.better == Better::higher ? v > *best : v < *best)) best = v;
    }
    if (populated < 2) continue;
    for (std::size_t i = 0; i < r.rows.size(); ++i)
      if (r.rows[i].values[c] && rounded(*r.rows[i].values[c]) == *best) marks[i][c] = true;
  }
  return marks;
}

inline std::string markdown_cell(const std::optional<double>& v, const Column& col, bool bold) {
  if (!v) return "-";
  std::string s = format_fixed(*v, col.decimals);
  return bold ? "**" + s + "**" : s;
}

inline std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

inline std::string csv_line(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out += ',';
    out += csv_field(fields[i]);
  }
  out += '\n';
  return out;
}

/// RFC 4180 records; quoted fields may contain separators and newlines.
inline std::vector<std::vector<std::string>> parse_csv_records(std::string_view text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> rec;
  std::string field;
  bool quoted = false, any = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"') {
      quoted = true;
      any = true;
    } else if (c == ',') {
      rec.push_back(std::move(field));
      field.clear();
      any = true;
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      if (any || !field.empty()) {
        rec.push_back(std::move(field));
        records.push_back(std::move(rec));
      }
      rec.clear();
      field.clear();
      any = false;
    } else {
      field += c;
      any = true;
    }
  }
  if (quoted) throw DataError("csv: unterminated quoted field");
  if (any || !field.empty()) {
    rec.push_back(std::move(field));
    records.push_back(std::move(rec));
  }
  return records;
}

inline double parse_number(std::string_view s) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw DataError("report: bad numeric value \"" + std::string(s) + "\"");
  return v;
}

}  // namespace detail

struct MarkdownOptions {
  bool mark_best = true;
  // Models as columns and metrics as rows, as in single-metric comparisons.
  bool transposed = false;
};

inline std::string render_markdown(const MetricReport& r, const MarkdownOptions& opt = {}) {
  auto marks = opt.mark_best ? detail::best_marks(r)
                             : std::vector<std::vector<bool>>(r.rows.size(), std::vector<bool>(r.columns.size(), false));
  std::string out;
  auto line = [&](const std::vector<std::string>& cells) {
    out += '|';
    for (const auto& c : cells) out += " " + c + " |";
    out += '\n';
  };
  if (!opt.transposed) {
    std::vector<std::string> head{"Method"};
    for (const auto& c : r.columns) head.push_back(c.name);
    line(head);
    line(std::vector<std::string>(head.size(), "---"));
    for (std::size_t i = 0; i < r.rows.size(); ++i) {
      std::vector<std::string> cells{r.rows[i].label};
      for (std::size_t c = 0; c < r.columns.size(); ++c)
        cells.push_back(detail::markdown_cell(r.rows[i].values[c], r.columns[c], marks[i][c]));
      line(cells);
    }
  } else {
    std::vector<std::string> head{"Method"};
    for (const auto& row : r.rows) head.push_back(row.label);
    line(head);
    line(std::vector<std::string>(head.size(), "---"));
    for (std::size_t c = 0; c < r.columns.size(); ++c) {
      std::vector<std::string> cells{r.columns[c].name};
      for (std::size_t i = 0; i < r.rows.size(); ++i)
        cells.push_back(detail::markdown_cell(r.rows[i].values[c], r.columns[c], marks[i][c]));
      line(cells);
    }
  }
  if (!r.metadata.empty()) {
    out += "\n<!--\n";
    for (const auto& [k, v] : r.metadata) out += k + ": " + v + "\n";
    out += "-->\n";
  }
  return out;
}

inline std::string render_csv(const MetricReport& r) {
  std::string out = detail::csv_line({"#task", std::string(to_string(r.task))});
  for (const auto& c : r.columns)
    out += detail::csv_line({"#column", c.name, std::string(to_string(c.better)), std::to_string(c.decimals)});
  for (const auto& [k, v] : r.metadata) out += detail::csv_line({"#meta", k, v});
  std::vector<std::string> head{"Method"};
  for (const auto& c : r.columns) head.push_back(c.name);
  out += detail::csv_line(head);
  for (const auto& row : r.rows) {
    std::vector<std::string> cells{row.label};
    for (const auto& v : row.values) cells.push_back(v ? format_exact(*v) : std::string());
    out += detail::csv_line(cells);
  }
  return out;
}

inline std::string render_json_lines(const MetricReport& r) {
  Json head;
  head["kind"] = "report";
  head["task"] = to_string(r.task);
  Json cols = Json::array();
  for (const auto& c : r.columns)
    cols.push_back(Json{{"name", c.name}, {"better", to_string(c.better)}, {"decimals", c.decimals}});
  head["columns"] = cols;
  Json meta = Json::object();
  for (const auto& [k, v] : r.metadata) meta[k] = v;
  head["metadata"] = meta;
  std::string out = head.dump() + "\n";
  for (const auto& row : r.rows) {
    Json values = Json::object();
    for (std::size_t c = 0; c < r.columns.size(); ++c)
      values[r.columns[c].name] = row.values[c] ? Json(*row.values[c]) : Json(nullptr);
    out += Json{{"kind", "row"}, {"model_id", row.label}, {"values", values}}.dump() + "\n";
  }
  return out;
}

inline std::string render(const MetricReport& r, Format f, const MarkdownOptions& md = {}) {
  if (r.rows.empty()) throw InvalidArgument("render: empty report");
  switch (f) {
    case Format::markdown: return render_markdown(r, md);
    case Format::csv: return render_csv(r);
    case Format::json_lines: return render_json_lines(r);
  }
  return {};
}

inline MetricReport parse_csv(std::string_view text) {
  MetricReport r;
  bool have_task = false, have_header = false;
  for (const auto& rec : detail::parse_csv_records(text)) {
    if (rec.empty()) continue;
    const std::string& tag = rec[0];
    if (tag == "#task") {
      if (rec.size() != 2) throw DataError("csv report: bad #task line");
      auto t = parse_task(rec[1]);
      if (!t) throw DataError("csv report: unknown task \"" + rec[1] + "\"");
      r.task = *t;
      have_task = true;
    } else if (tag == "#column") {
      if (rec.size() != 4) throw DataError("csv report: bad #column line");
      auto b = parse_better(rec[2]);
      if (!b) throw DataError("csv report: bad column direction \"" + rec[2] + "\"");
      r.columns.push_back({rec[1], *b, static_cast<int>(detail::parse_number(rec[3]))});
    } else if (tag == "#meta") {
      if (rec.size() != 3) throw DataError("csv report: bad #meta line");
      r.metadata.emplace_back(rec[1], rec[2]);
    } else if (!have_header) {
      if (rec.size() != r.columns.size() + 1) throw DataError("csv report: header does not match columns");
      for (std::size_t c = 0; c < r.columns.size(); ++c)
        if (rec[c + 1] != r.columns[c].name) throw DataError("csv report: header does not match columns");
      have_header = true;
    } else {
      if (rec.size() != r.columns.size() + 1) throw DataError("csv report: row width mismatch");
      Row row{rec[0], {}};
      for (std::size_t c = 1; c < rec.size(); ++c)
        row.values.push_back(rec[c].empty() ? std::nullopt : std::optional<double>(detail::parse_number(rec[c])));
      r.rows.push_back(std::move(row));
    }
  }
  if (!have_task || !have_header) throw DataError("csv report: missing #task or header line");
  return r;
}

inline MetricReport parse_json_lines(const std::string& text) {
  MetricReport r;
  bool have_head = false;
  rsbench::detail::for_each_jsonl(text, "<report>", [&](const Json& obj, const rsbench::detail::LineContext& ctx) {
    try {
      std::string kind = obj.at("kind").get<std::string>();
      if (kind == "report") {
        auto t = parse_task(obj.at("task").get<std::string>());
        if (!t) rsbench::detail::fail(ctx, "unknown task");
        r.task = *t;
        for (const auto& c : obj.at("columns")) {
          auto b = parse_better(c.at("better").get<std::string>());
          if (!b) rsbench::detail::fail(ctx, "bad column direction");
          r.columns.push_back({c.at("name").get<std::string>(), *b, c.at("decimals").get<int>()});
        }
        for (const auto& [k, v] : obj.at("metadata").items()) r.metadata.emplace_back(k, v.get<std::string>());
        have_head = true;
      } else if (kind == "row") {
        if (!have_head) rsbench::detail::fail(ctx, "row before report header");
        Row row{obj.at("model_id").get<std::string>(), {}};
        const auto& values = obj.at("values");
        for (const auto& c : r.columns) {
          const auto& v = values.at(c.name);
          row.values.push_back(v.is_null() ? std::nullopt : std::optional<double>(v.get<double>()));
        }
        r.rows.push_back(std::move(row));
      } else {
        rsbench::detail::fail(ctx, "unknown record kind \"" + kind + "\"");
      }
    } catch (const Json::exception& e) {
      rsbench::detail::fail(ctx, e.what());
    }
  });
  if (!have_head) throw DataError("json-lines report: missing header record");
  return r;
}

inline MetricReport parse(const std::string& text, Format f) {
  switch (f) {
    case Format::csv: return parse_csv(text);
    case Format::json_lines: return parse_json_lines(text);
    case Format::markdown: break;
  }
  throw InvalidArgument("parse: markdown reports are not machine-readable");
}

}  // namespace rsbench::report
