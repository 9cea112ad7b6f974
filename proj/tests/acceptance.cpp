// Acceptance suite: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>

#include "published_tables.hpp"
#include "rsbench/metrics/bleu.hpp"
#include "rsbench/metrics/cider.hpp"
#include "rsbench/metrics/meteor.hpp"
#include "rsbench/metrics/rouge.hpp"
#include "rsbench/rating.hpp"
#include "rsbench/report.hpp"
#include "rsbench/stats.hpp"
#include "rsbench/tiler.hpp"
#include "rsbench/vqa.hpp"
#include "test_support.hpp"

#ifndef RSBENCH_CLI_PATH
#define RSBENCH_CLI_PATH "rsbench"
#endif

using namespace rsbench;
using rsbench::test::Gen;
using rsbench::test::TempDir;
namespace oracle = rsbench::test::oracle;

namespace {

// Collects failed checks for one criterion.
struct Checks {
  std::vector<std::string> failures;
  void expect(bool ok, const std::string& what) {
    if (!ok) failures.push_back(what);
  }
  void near(double got, double want, double tol, const std::string& what) {
    if (!(std::abs(got - want) <= tol)) {
      std::ostringstream s;
      s.precision(17);
      s << what << ": got " << got << ", want " << want << " +/- " << tol;
      failures.push_back(s.str());
    }
  }
};

int failed = 0;

void criterion(const std::string& name, double budget_seconds, const std::function<void(Checks&)>& body) {
  Checks c;
  auto start = std::chrono::steady_clock::now();
  try {
    body(c);
  } catch (const std::exception& e) {
    c.failures.push_back(std::string("exception: ") + e.what());
  }
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (budget_seconds > 0 && secs >= budget_seconds)
    c.failures.push_back("runtime " + std::to_string(secs) + " s exceeds " + std::to_string(budget_seconds) + " s");
  bool ok = c.failures.empty();
  failed += !ok;
  std::printf("%s  %-22s %8.3f s", ok ? "PASS" : "FAIL", name.c_str(), secs);
  if (!ok) std::printf("  %s", c.failures.front().c_str());
  std::printf("\n");
  for (std::size_t i = 1; i < c.failures.size() && i < 5; ++i) std::printf("      %s\n", c.failures[i].c_str());
}

TokenSequence toks(std::initializer_list<const char*> xs) { return TokenSequence(xs.begin(), xs.end()); }

std::string slurp(const std::string& p) { return rsbench::detail::read_file(p); }

int sh(const std::string& cmd) { return std::system(cmd.c_str()); }

}  // namespace

int main() {
  criterion("metric-identity", 1.0, [](Checks& c) {
    Gen g(1);
    for (int trial = 0; trial < 100; ++trial) {
      auto corpus = g.corpus(static_cast<int>(g.uniform(1, 6)), 8, 12, 3);
      for (auto& it : corpus) {
        it.candidate = it.references[0];
        if (it.candidate.size() < 4) it.candidate.resize(4, "pad");
        it.references = {it.candidate};
      }
      auto b = metrics::bleu(corpus);
      for (double s : b.scores) c.expect(s == 100.0, "identity BLEU != 100");
      c.expect(metrics::rouge_l(corpus) == 100.0, "identity ROUGE-L != 100");

      auto disjoint = corpus;
      for (auto& it : disjoint)
        for (auto& t : it.candidate) t = "zz" + t;
      for (double s : metrics::bleu(disjoint).scores) c.expect(s == 0.0, "disjoint BLEU != 0");
      c.expect(metrics::rouge_l(disjoint) == 0.0, "disjoint ROUGE-L != 0");
    }
  });

  criterion("oracle-equivalence", 10.0, [](Checks& c) {
    Gen g(42);
    for (int trial = 0; trial < 200; ++trial) {
      auto corpus = g.corpus(static_cast<int>(g.uniform(1, 5)), static_cast<int>(g.uniform(1, 8)), 12, 4);
      auto b = metrics::bleu(corpus);
      for (std::size_t n = 1; n <= 4; ++n) {
        c.near(b.precisions[n - 1], oracle::bleu_precision(corpus, n), 1e-9, "BLEU precision p" + std::to_string(n));
        c.near(b.scores[n - 1], oracle::bleu_score(corpus, n), 1e-9, "BLEU-" + std::to_string(n));
      }
      c.near(metrics::rouge_l(corpus), oracle::rouge_l(corpus), 1e-9, "ROUGE-L");
      for (const auto& it : corpus)
        for (const auto& ref : it.references)
          if (it.candidate.size() <= 8 && ref.size() <= 8)
            c.expect(metrics::lcs_length(it.candidate, ref) == oracle::lcs_exhaustive(it.candidate, ref), "LCS");
    }
    auto fixture = test::cider_fixture();
    c.near(metrics::cider(fixture, {metrics::CiderVariant::cider_d}).score, oracle::cider(fixture, true), 1e-9,
           "CIDEr-D fixture");
    c.near(metrics::cider(fixture, {metrics::CiderVariant::cider}).score, oracle::cider(fixture, false), 1e-9,
           "CIDEr fixture");
  });

  criterion("hand-derived-values", 0, [](Checks& c) {
    std::vector<metrics::CaptionItem> b = {{toks({"the", "cat", "sat"}), {toks({"the", "cat", "sat", "down"})}}};
    c.near(metrics::bleu(b, {1, false}).scores[0], 71.65, 0.01, "BLEU-1");
    c.near(metrics::rouge_l(toks({"a", "b", "c", "d"}), {toks({"a", "c", "b", "d"})}), 75.00, 0.01, "ROUGE-L");
    c.near(metrics::meteor(toks({"a", "red", "car"}), {toks({"a", "red", "car"})}), 98.15, 0.01, "METEOR");
  });

  criterion("vqa-scoring", 0, [](Checks& c) {
    std::vector<QARecord> qa = {{"i1", "p1", "?", "yes", QaCategory::presence},
                                {"i1", "p2", "?", "no", QaCategory::presence},
                                {"i1", "n1", "?", "4", QaCategory::quantity},
                                {"i2", "n2", "?", "10", QaCategory::quantity},
                                {"i2", "n3", "?", "3", QaCategory::quantity}};
    std::vector<PredictionRecord> preds = {{"m", "i1", "p1", "Yes."},
                                           {"m", "i1", "p2", "no"},
                                           {"m", "i1", "n1", "four"},
                                           {"m", "i2", "n2", "5"},
                                           {"m", "i2", "n3", "seven"}};
    auto rows = vqa::accuracy_table(vqa::auto_judge(preds, qa), qa);
    auto md = report::render_markdown(vqa::accuracy_report(rows));
    c.expect(md.find("| m | 100.00 | 33.33 | - | - | - | - | - | - | - | - | 60.00 |") != std::string::npos,
             "five-question table row");
    c.expect(rows.at(0).average() == 60.0, "average != 60 exactly");
    auto qre = vqa::quantity_relative_error({{10, 5}, {3, 3}});
    c.expect(qre.mean && *qre.mean == 0.5, "quantity relative error != 0.5");
    c.expect(report::render_markdown(test::vqa_accuracy_table()) ==
                 slurp(test::golden("vqa_accuracy_table.md")),
             "accuracy table differs from golden");
    c.expect(report::render_markdown(test::quantity_error_table(), {.mark_best = false, .transposed = true}) ==
                 slurp(test::golden("quantity_relative_error.md")),
             "quantity error table differs from golden");
    c.expect(report::render_markdown(test::captioning_row()) == slurp(test::golden("captioning_row.md")),
             "captioning row differs from golden");
  });

  criterion("tiler", 5.0, [](Checks& c) {
    auto w = tiler::plan_tiles(800, 800, 512);
    std::set<std::pair<std::int64_t, std::int64_t>> origins;
    for (const auto& t : w) origins.insert({t.x, t.y});
    c.expect(w.size() == 4 && origins == std::set<std::pair<std::int64_t, std::int64_t>>{{0, 0}, {0, 288}, {288, 0}, {288, 288}},
             "800x800 windows");
    c.expect(tiler::plan_tiles(4000, 4000, 512).size() == 64, "4000x4000 window count");
    Gen g(2024);
    for (int trial = 0; trial < 1000; ++trial) {
      // Scaled 16x down: tile 32 on ceil(dim / 16).
      auto width = (g.uniform(1, 5000) + 15) / 16, height = (g.uniform(1, 5000) + 15) / 16;
      std::vector<char> hit(static_cast<std::size_t>(width * height), 0);
      for (const auto& t : tiler::plan_tiles(width, height, 32))
        for (auto y = t.y; y < t.y + t.h; ++y)
          for (auto x = t.x; x < t.x + t.w; ++x) hit[static_cast<std::size_t>(y * width + x)] = 1;
      if (std::find(hit.begin(), hit.end(), 0) != hit.end())
        c.expect(false, "uncovered pixel at " + std::to_string(width) + "x" + std::to_string(height));
    }
  });

  criterion("stats", 0, [](Checks& c) {
    std::vector<CaptionRecord> caps = {{"a", "1", "A red car. Two trees.", Split::test}, {"b", "1", "Water.", Split::test}};
    auto s = stats::corpus_stats(caps);
    c.expect(s.total_tokens == 6 && s.distinct_tokens == 6 && s.total_sentences == 3 && s.max_caption_tokens == 5 &&
                 s.avg_caption_tokens == 3.0,
             "two-caption fixture");
    Gen g(101);
    const std::vector<std::string> words = {"plane", "road", "trees", "a", "the", "two", "green", "harbor"};
    for (int trial = 0; trial < 300; ++trial) {
      std::vector<CaptionRecord> corpus;
      std::set<std::string> vocab;
      for (auto n = g.uniform(0, 15); n > 0; --n) {
        std::string t;
        for (auto k = g.uniform(1, 25); k > 0; --k) {
          auto w = words[static_cast<std::size_t>(g.uniform(0, 7))];
          vocab.insert(w);
          t += w + (g.uniform(0, 4) == 0 ? ". " : " ");
        }
        corpus.push_back({"i" + std::to_string(corpus.size()), "c", t, Split::test});
      }
      auto st = stats::corpus_stats(corpus);
      std::size_t n = 0;
      for (const auto& [k, v] : st.token_length_histogram.bins) n += v;
      c.expect(n == corpus.size(), "histogram conservation");
      c.expect(st.distinct_tokens == vocab.size(), "distinct tokens");
      std::shuffle(corpus.begin(), corpus.end(), g.rng);
      c.expect(stats::to_json(stats::corpus_stats(corpus)).dump() == stats::to_json(st).dump(), "reorder invariance");
    }
  });

  criterion("rating-pipeline", 0, [](Checks& c) {
    auto records = rating::load_ratings(test::fixture("ratings_detail_100.jsonl"));
    c.expect(records.size() == 100, "fixture has 100 records");
    auto store = rating::replay(records);
    auto d = store.distribution("RSGPT", rating::Dimension::detail);
    c.expect(d.compact() == "53/44/3/0", "distribution " + d.compact());

    auto doubled = records;
    doubled.insert(doubled.end(), records.begin(), records.begin() + 40);
    c.expect(rating::replay(doubled).distribution("RSGPT", rating::Dimension::detail) == d, "idempotent resubmission");

    TempDir dir;
    {
      rating::PersistentRatingStore p(dir / "log.jsonl");
      for (const auto& r : records) p.record_rating(r);
    }
    {
      std::FILE* f = std::fopen((dir / "log.jsonl").c_str(), "a");
      std::fputs(R"({"rating_id":"torn","rater_id":"x","mod)", f);
      std::fclose(f);
    }
    rating::PersistentRatingStore reopened(dir / "log.jsonl");
    c.expect(reopened.store().distribution("RSGPT", rating::Dimension::detail) == d, "crash replay");
  });

  criterion("cli-end-to-end", 0, [](Checks& c) {
    TempDir dir;
    const std::string cli = RSBENCH_CLI_PATH;
    auto fx = [](const char* n) { return test::fixture(n).string(); };
    for (int run = 0; run < 2; ++run) {
      auto suffix = std::to_string(run);
      c.expect(sh(cli + " eval-captions --refs " + fx("captions.jsonl") + " --preds " + fx("predictions_captions.jsonl") +
                  " --reproducible --out " + (dir / ("cap" + suffix + ".csv"))) == 0,
               "eval-captions exit status");
      c.expect(sh(cli + " eval-vqa --qa " + fx("qa.jsonl") + " --preds " + fx("predictions_vqa.jsonl") +
                  " --mode adjudicated --judgments " + fx("judgments.jsonl") + " --reproducible --out " +
                  (dir / ("vqa" + suffix + ".jsonl")) + " --qre-out " + (dir / ("qre" + suffix + ".md"))) == 0,
               "eval-vqa exit status");
    }
    for (const auto* stem : {"cap", "vqa", "qre"}) {
      std::string ext = std::string(stem) == "cap" ? ".csv" : std::string(stem) == "vqa" ? ".jsonl" : ".md";
      auto a = slurp(dir / (stem + std::string("0") + ext)), b = slurp(dir / (stem + std::string("1") + ext));
      c.expect(!a.empty() && a == b, std::string(stem) + " reports differ between runs");
    }
  });

  std::printf("%s: %d criteria failed\n", failed ? "FAIL" : "PASS", failed);
  return failed;
}
