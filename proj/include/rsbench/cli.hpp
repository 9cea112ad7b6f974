#pragma once

// Command-line entry point. Exit codes: 0 ok, 1 usage, 2 data error,
// 3 internal error.

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "rsbench/corpus.hpp"
#include "rsbench/error.hpp"
#include "rsbench/image_io.hpp"
#include "rsbench/metrics/caption_eval.hpp"
#include "rsbench/rating.hpp"
#include "rsbench/report.hpp"
#include "rsbench/service.hpp"
#include "rsbench/service_http.hpp"
#include "rsbench/stats.hpp"
#include "rsbench/tiler.hpp"
#include "rsbench/vqa.hpp"

namespace rsbench::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kDataError = 2, kInternal = 3 };

/// Environment variable naming the default --data directory.
inline constexpr const char* kDataDirEnv = "RSBENCH_DATA_DIR";

namespace detail {

namespace fs = std::filesystem;

inline std::string utc_now() {
  auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (auto t = text::trim(item); !t.empty()) out.emplace_back(t);
  return out;
}

inline std::string default_data_dir() {
  const char* env = std::getenv(kDataDirEnv);
  return env ? env : "";
}

struct OutputSpec {
  std::string path;
  std::string format;
  bool reproducible = false;
};

inline report::Format resolve_format(const OutputSpec& o) {
  if (!o.format.empty()) {
    auto f = report::parse_format(o.format);
    if (!f) throw UsageError("unknown --format \"" + o.format + "\" (markdown, csv, json-lines)");
    return *f;
  }
  if (!o.path.empty())
    if (auto f = report::format_for_path(o.path)) return *f;
  return report::Format::markdown;
}

inline void emit(const std::string& text, const std::string& path, std::ostream& out) {
  if (path.empty() || path == "-")
    out << text;
  else
    rsbench::detail::write_file(path, text);
}

inline void stamp(report::MetricReport& r, const std::string& corpus_bytes, bool reproducible) {
  r.set_meta("corpus_fingerprint", report::fingerprint(corpus_bytes));
  if (!reproducible) r.set_meta("timestamp", utc_now());
}

inline void add_output_flags(CLI::App* cmd, OutputSpec& o) {
  cmd->add_option("--out", o.path, "Output file (.md, .csv, .jsonl); stdout if omitted");
  cmd->add_option("--format", o.format, "markdown | csv | json-lines (default: from --out extension)");
  cmd->add_flag("--reproducible", o.reproducible, "Omit timestamps so identical inputs give identical bytes");
}

// ---------------------------------------------------------------------------

struct TileArgs {
  std::string input, out;
  std::int64_t size = tiler::kDefaultTileSize;
  std::optional<std::size_t> sample;
  std::uint64_t seed = 0;
  bool pad = false;
};

inline int run_tile(const TileArgs& a, std::ostream& out) {
  if (!fs::is_directory(a.input)) throw DataError(a.input + ": not a directory");
  if (a.size < 1) throw UsageError("--size must be >= 1");
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(a.input))
    if (e.is_regular_file() && image_io::format_for(e.path())) files.push_back(e.path());
  std::sort(files.begin(), files.end());

  struct Slot {
    std::size_t file;
    tiler::TileWindow window;
  };
  std::vector<Slot> pool;
  for (std::size_t f = 0; f < files.size(); ++f) {
    auto info = image_io::raster_info(files[f]);
    for (const auto& w : tiler::plan_tiles(info.width, info.height, a.size)) pool.push_back({f, w});
  }
  auto chosen = tiler::sample_indices(pool.size(), a.sample.value_or(pool.size()), a.seed);

  fs::create_directories(a.out);
  std::vector<ImageRecord> manifest;
  std::size_t loaded = files.size();
  image_io::Image img;
  for (std::size_t idx : chosen) {
    const auto& slot = pool[idx];
    if (slot.file != loaded) {
      img = image_io::read_raster(files[slot.file]);
      loaded = slot.file;
    }
    auto win = a.pad ? tiler::pad_to_tile(slot.window, a.size) : slot.window;
    auto patch = tiler::crop(img, win);
    std::string stem = files[slot.file].stem().string();
    std::string name = tiler::patch_name(stem, slot.window) + files[slot.file].extension().string();
    image_io::write_raster(fs::path(a.out) / name, patch);
    manifest.push_back({tiler::patch_name(stem, slot.window), patch.width, patch.height,
                        image_io::modality_of(patch), files[slot.file].filename().string(), name});
  }
  save_jsonl((fs::path(a.out) / "images.jsonl").string(), manifest);
  out << "wrote " << manifest.size() << " patches from " << files.size() << " images ("
      << pool.size() << " windows planned) to " << a.out << "\n";
  return kOk;
}

struct StatsArgs {
  std::string captions, images, out, histogram_csv;
  std::int64_t token_bin = 10, sentence_bin = 1;
};

inline int run_stats(const StatsArgs& a, std::ostream& out) {
  auto captions = load_captions(a.captions);
  std::vector<ImageRecord> images;
  if (!a.images.empty()) images = load_images(a.images);
  auto s = stats::corpus_stats(captions, images, {a.token_bin, a.sentence_bin});
  emit(stats::to_json(s).dump() + "\n", a.out, out);
  if (!a.histogram_csv.empty()) rsbench::detail::write_file(a.histogram_csv, stats::histogram_csv(s));
  return kOk;
}

struct EvalCaptionArgs {
  std::string refs, preds, metrics = "bleu,rouge,meteor,cider", cider_variant = "cider_d", split;
  bool bleu_smooth = false, no_stem = false;
  OutputSpec output;
};

inline int run_eval_captions(const EvalCaptionArgs& a, std::ostream& out, std::ostream& err) {
  metrics::CaptionEvalConfig cfg;
  cfg.use_bleu = cfg.use_rouge = cfg.use_meteor = cfg.use_cider = false;
  for (const auto& m : split_list(a.metrics)) {
    if (m == "bleu") cfg.use_bleu = true;
    else if (m == "rouge" || m == "rouge_l") cfg.use_rouge = true;
    else if (m == "meteor") cfg.use_meteor = true;
    else if (m == "cider") cfg.use_cider = true;
    else throw UsageError("unknown metric \"" + m + "\" (bleu, rouge, meteor, cider)");
  }
  auto variant = metrics::parse_cider_variant(a.cider_variant);
  if (!variant) throw UsageError("unknown --cider-variant \"" + a.cider_variant + "\"");
  cfg.cider.variant = *variant;
  cfg.bleu.smooth = a.bleu_smooth;
  cfg.meteor.stem = !a.no_stem;
  if (!a.split.empty()) {
    cfg.split = parse_split(a.split);
    if (!cfg.split) throw UsageError("unknown --split \"" + a.split + "\"");
  }
  auto format = resolve_format(a.output);

  std::string refs_bytes = rsbench::detail::read_file(a.refs);
  std::string preds_bytes = rsbench::detail::read_file(a.preds);
  auto refs = parse_captions(refs_bytes, a.refs);
  std::vector<CaptionRecord> usable;
  for (const auto& r : refs)
    if (!cfg.split || r.split == *cfg.split) usable.push_back(r);
  auto targets = PredictionTargets::from(usable, {});
  auto preds = parse_predictions(preds_bytes, &targets, a.preds);
  std::size_t answers = 0;
  for (const auto& u : preds.unresolved) {
    if (!u.record.is_caption()) {
      ++answers;
      continue;
    }
    err << a.preds << ":" << u.line << ": " << u.reason << "\n";
  }
  if (preds.unresolved.size() > answers)
    throw DataError(std::to_string(preds.unresolved.size() - answers) + " caption prediction(s) have no reference");
  if (preds.records.empty()) throw DataError(a.preds + ": no caption predictions");

  auto results = metrics::evaluate_captions(preds.records, usable, cfg);
  auto rep = metrics::caption_report(results, cfg);
  stamp(rep, refs_bytes + '\0' + preds_bytes, a.output.reproducible);
  emit(report::render(rep, format), a.output.path, out);
  return kOk;
}

struct EvalVqaArgs {
  std::string qa, preds, mode = "auto", qre_out;
  std::vector<std::string> judgments;
  OutputSpec output;
};

inline int run_eval_vqa(const EvalVqaArgs& a, std::ostream& out, std::ostream& err) {
  if (a.mode != "auto" && a.mode != "adjudicated") throw UsageError("--mode must be auto or adjudicated");
  if (a.mode == "adjudicated" && a.judgments.empty())
    throw UsageError("--mode adjudicated needs at least one --judgments file");
  auto format = resolve_format(a.output);

  std::string qa_bytes = rsbench::detail::read_file(a.qa);
  std::string preds_bytes = rsbench::detail::read_file(a.preds);
  auto qa = parse_qa(qa_bytes, a.qa);
  auto targets = PredictionTargets::from({}, qa);
  auto preds = parse_predictions(preds_bytes, &targets, a.preds);
  std::size_t unresolved = 0;
  for (const auto& u : preds.unresolved) {
    if (u.record.is_caption()) continue;
    ++unresolved;
    err << a.preds << ":" << u.line << ": unresolved: " << u.reason << "\n";
  }

  auto judgments = vqa::auto_judge(preds.records, qa);
  std::string corpus = qa_bytes + '\0' + preds_bytes;
  if (a.mode == "adjudicated") {
    for (const auto& path : a.judgments) {
      std::string bytes = rsbench::detail::read_file(path);
      corpus += '\0' + bytes;
      for (auto& j : vqa::parse_judgments(bytes, path)) {
        j.source = vqa::JudgmentSource::human;
        judgments.push_back(std::move(j));
      }
    }
  }
  auto rows = vqa::accuracy_table(judgments, qa);
  if (rows.empty()) throw DataError(a.preds + ": no answer predictions resolve against " + a.qa);
  auto rep = vqa::accuracy_report(rows);

  std::vector<std::pair<std::string, vqa::QuantityError>> qre;
  for (const auto& row : rows) {
    auto e = vqa::quantity_relative_error(vqa::quantity_pairs(preds.records, qa, row.model_id));
    rep.set_meta("quantity_relative_error." + row.model_id, e.mean ? report::format_exact(*e.mean) : "undefined");
    rep.set_meta("quantity_unparsed." + row.model_id, std::to_string(e.unparsed));
    rep.set_meta("unjudged." + row.model_id, std::to_string(row.unjudged));
    qre.emplace_back(row.model_id, e);
  }
  std::string config = "judge=" + a.mode + ";normalize=lower+punct+ws+articles;average=question_weighted;"
                       "qre=abs_diff/max(gold,1),unparsed_excluded";
  rep.set_meta("config_fingerprint", report::fingerprint(config));
  rep.set_meta("config", config);
  rep.set_meta("unresolved_predictions", std::to_string(unresolved));
  stamp(rep, corpus, a.output.reproducible);
  emit(report::render(rep, format), a.output.path, out);

  if (!a.qre_out.empty()) {
    auto qre_rep = vqa::quantity_error_report(qre);
    qre_rep.metadata = {{"config_fingerprint", report::fingerprint(config)}};
    stamp(qre_rep, corpus, a.output.reproducible);
    auto f = report::format_for_path(a.qre_out).value_or(report::Format::markdown);
    rsbench::detail::write_file(a.qre_out, report::render(qre_rep, f, {false, true}));
  }
  return kOk;
}

struct ServeArgs {
  std::string data, host = "127.0.0.1";
  int port = 8080;
};

inline int run_serve(const ServeArgs& a, std::ostream& out) {
  if (a.data.empty()) throw UsageError(std::string("--data is required (or set ") + kDataDirEnv + ")");
  service::AnnotationService svc(a.data);
  httplib::Server server;
  service::bind_routes(server, svc);
  out << "serving " << a.data << " on http://" << a.host << ":" << a.port << "\n" << std::flush;
  if (!server.listen(a.host, a.port)) throw DataError("cannot listen on " + a.host + ":" + std::to_string(a.port));
  return kOk;
}

struct CreateTaskArgs {
  std::string data, task_id, kind, preds, qa;
};

inline int run_create_task(const CreateTaskArgs& a, std::ostream& out) {
  if (a.data.empty()) throw UsageError(std::string("--data is required (or set ") + kDataDirEnv + ")");
  auto kind = service::parse_task_kind(a.kind);
  if (!kind) throw UsageError("--kind must be caption_rating or vqa_adjudication");
  auto preds = load_predictions(a.preds);
  service::AnnotationTask task;
  if (*kind == service::TaskKind::caption_rating) {
    task = service::make_caption_rating_task(a.task_id, preds.records);
  } else {
    if (a.qa.empty()) throw UsageError("--qa is required for vqa_adjudication tasks");
    task = service::make_vqa_task(a.task_id, preds.records, load_qa(a.qa));
  }
  if (task.items.empty()) throw DataError(a.preds + ": no predictions usable for this task kind");
  service::AnnotationService svc(a.data);
  svc.create_task(task);
  out << "created task " << a.task_id << " (" << service::to_string(task.kind) << ", " << task.items.size()
      << " items)\n";
  return kOk;
}

struct ExportArgs {
  std::string data, task_id, out;
};

inline int run_export(const ExportArgs& a, std::ostream& out) {
  if (a.data.empty()) throw UsageError(std::string("--data is required (or set ") + kDataDirEnv + ")");
  service::AnnotationService svc(a.data);
  try {
    emit(svc.export_task(a.task_id), a.out, out);
  } catch (const service::NotFound& e) {
    throw DataError(e.what());
  }
  return kOk;
}

struct ReportArgs {
  std::string in, ratings, models, dimensions = "detail,position,hallucination";
  bool transposed = false, no_bold = false;
  OutputSpec output;
};

inline int run_report(const ReportArgs& a, std::ostream& out) {
  if (a.in.empty() == a.ratings.empty()) throw UsageError("report needs exactly one of --in or --ratings");
  auto format = resolve_format(a.output);
  if (!a.in.empty()) {
    auto in_format = report::format_for_path(a.in);
    if (!in_format || *in_format == report::Format::markdown)
      throw UsageError("--in must be a .csv or .jsonl report");
    auto rep = report::parse(rsbench::detail::read_file(a.in), *in_format);
    emit(report::render(rep, format, {!a.no_bold, a.transposed}), a.output.path, out);
    return kOk;
  }
  auto records = rating::load_ratings(a.ratings);
  auto store = rating::replay(records);
  auto models = a.models.empty() ? store.models() : split_list(a.models);
  std::vector<rating::Dimension> dims;
  for (const auto& d : split_list(a.dimensions)) {
    auto dim = rating::parse_dimension(d);
    if (!dim) throw UsageError("unknown dimension \"" + d + "\"");
    dims.push_back(*dim);
  }
  auto rows = rating::rating_report(store, models, dims);
  if (rows.empty()) throw DataError(a.ratings + ": no ratings to report");
  if (format == report::Format::markdown) {
    emit(rating::render_distribution_markdown(rows), a.output.path, out);
  } else {
    auto rep = rating::to_metric_report(rows);
    stamp(rep, rsbench::detail::read_file(a.ratings), a.output.reproducible);
    emit(report::render(rep, format), a.output.path, out);
  }
  return kOk;
}

}  // namespace detail

/// Parses `args` (args[0] is the program name) and runs the subcommand.
inline int dispatch(const std::vector<std::string>& args, std::ostream& out = std::cout,
                    std::ostream& err = std::cerr) {
  using namespace detail;
  CLI::App app{"rsbench: remote-sensing vision-language benchmark harness", "rsbench"};
  app.require_subcommand(1);
  app.fallthrough(false);

  TileArgs tile;
  auto* tile_cmd = app.add_subcommand("tile", "Cut scenes into fixed-size patches and write an images manifest");
  tile_cmd->add_option("--input", tile.input, "Directory of .png/.pgm/.ppm scenes")->required();
  tile_cmd->add_option("--out", tile.out, "Output directory")->required();
  tile_cmd->add_option("--size", tile.size, "Tile edge in pixels")->capture_default_str();
  tile_cmd->add_option("--sample", tile.sample, "Keep N windows chosen at random (seeded)");
  tile_cmd->add_option("--seed", tile.seed, "Sampling seed")->capture_default_str();
  tile_cmd->add_flag("--pad", tile.pad, "Zero-pad patches from scenes smaller than the tile");

  StatsArgs st;
  auto* stats_cmd = app.add_subcommand("stats", "Corpus statistics of a captions file");
  stats_cmd->add_option("--captions", st.captions, "Captions file")->required();
  stats_cmd->add_option("--images", st.images, "Images manifest (for the modality ratio)");
  stats_cmd->add_option("--out", st.out, "Output json-lines file; stdout if omitted");
  stats_cmd->add_option("--histogram-csv", st.histogram_csv, "Write histogram bins as CSV");
  stats_cmd->add_option("--token-bin-width", st.token_bin, "Caption length bin width")->capture_default_str();
  stats_cmd->add_option("--sentence-bin-width", st.sentence_bin, "Sentence count bin width")->capture_default_str();

  EvalCaptionArgs ec;
  auto* ec_cmd = app.add_subcommand("eval-captions", "Score caption predictions (BLEU, METEOR, ROUGE_L, CIDEr)");
  ec_cmd->add_option("--refs", ec.refs, "Reference captions file")->required();
  ec_cmd->add_option("--preds", ec.preds, "Caption predictions file")->required();
  ec_cmd->add_option("--metrics", ec.metrics, "Comma-separated subset of bleu,rouge,meteor,cider")
      ->capture_default_str();
  ec_cmd->add_option("--cider-variant", ec.cider_variant, "cider | cider_d")->capture_default_str();
  ec_cmd->add_option("--split", ec.split, "Only use references from this split");
  ec_cmd->add_flag("--bleu-smooth", ec.bleu_smooth, "Add-one smoothing for BLEU n >= 2");
  ec_cmd->add_flag("--no-stem", ec.no_stem, "METEOR exact matching only");
  add_output_flags(ec_cmd, ec.output);

  EvalVqaArgs ev;
  auto* ev_cmd = app.add_subcommand("eval-vqa", "Score VQA answers per question category");
  ev_cmd->add_option("--qa", ev.qa, "Question/answer file")->required();
  ev_cmd->add_option("--preds", ev.preds, "Answer predictions file")->required();
  ev_cmd->add_option("--mode", ev.mode, "auto | adjudicated")->capture_default_str();
  ev_cmd->add_option("--judgments", ev.judgments, "Human judgment export(s), used in adjudicated mode");
  ev_cmd->add_option("--qre-out", ev.qre_out, "Write the quantity relative error table here");
  add_output_flags(ev_cmd, ev.output);

  ServeArgs sv;
  sv.data = default_data_dir();
  auto* serve_cmd = app.add_subcommand("serve", "Run the local annotation service");
  serve_cmd->add_option("--port", sv.port, "TCP port")->capture_default_str();
  serve_cmd->add_option("--host", sv.host, "Bind address")->capture_default_str();
  serve_cmd->add_option("--data", sv.data, "Data directory (default $RSBENCH_DATA_DIR)");

  CreateTaskArgs ct;
  ct.data = default_data_dir();
  auto* ct_cmd = app.add_subcommand("create-task", "Create an annotation task from a predictions file");
  ct_cmd->add_option("--data", ct.data, "Data directory (default $RSBENCH_DATA_DIR)");
  ct_cmd->add_option("--task-id", ct.task_id, "New task id")->required();
  ct_cmd->add_option("--kind", ct.kind, "caption_rating | vqa_adjudication")->required();
  ct_cmd->add_option("--preds", ct.preds, "Predictions file")->required();
  ct_cmd->add_option("--qa", ct.qa, "Question/answer file (vqa_adjudication)");

  ExportArgs ex;
  ex.data = default_data_dir();
  auto* ex_cmd = app.add_subcommand("export", "Export a task's submissions as line-delimited records");
  ex_cmd->add_option("--data", ex.data, "Data directory (default $RSBENCH_DATA_DIR)");
  ex_cmd->add_option("--task", ex.task_id, "Task id")->required();
  ex_cmd->add_option("--out", ex.out, "Output file; stdout if omitted");

  ReportArgs rp;
  auto* rp_cmd = app.add_subcommand("report", "Render a saved report, or grade distributions from a rating log");
  rp_cmd->add_option("--in", rp.in, "Saved report (.csv or .jsonl)");
  rp_cmd->add_option("--ratings", rp.ratings, "Rating log / export");
  rp_cmd->add_option("--models", rp.models, "Comma-separated models (default: all, in log order)");
  rp_cmd->add_option("--dimensions", rp.dimensions, "Comma-separated dimensions")->capture_default_str();
  rp_cmd->add_flag("--transposed", rp.transposed, "Markdown with models as columns");
  rp_cmd->add_flag("--no-bold", rp.no_bold, "Do not mark best values");
  add_output_flags(rp_cmd, rp.output);

  std::vector<std::string> argv_rest(args.begin() + (args.empty() ? 0 : 1), args.end());
  std::reverse(argv_rest.begin(), argv_rest.end());  // CLI11 consumes a reversed vector
  try {
    app.parse(argv_rest);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      app.exit(e, out, err);
      return kOk;
    }
    err << "error: " << e.what() << "\n";
    const CLI::App* ctx = &app;
    for (auto* sub : app.get_subcommands()) ctx = sub;
    err << ctx->help();
    return kUsage;
  }

  try {
    if (tile_cmd->parsed()) return run_tile(tile, out);
    if (stats_cmd->parsed()) return run_stats(st, out);
    if (ec_cmd->parsed()) return run_eval_captions(ec, out, err);
    if (ev_cmd->parsed()) return run_eval_vqa(ev, out, err);
    if (serve_cmd->parsed()) return run_serve(sv, out);
    if (ct_cmd->parsed()) return run_create_task(ct, out);
    if (ex_cmd->parsed()) return run_export(ex, out);
    if (rp_cmd->parsed()) return run_report(rp, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const DataError& e) {
    err << "error: " << e.what() << "\n";
    return kDataError;
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << "\n";
    return kDataError;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kInternal;
  }
  err << app.help();
  return kUsage;
}

}  // namespace rsbench::cli
