#include <gtest/gtest.h>

#include <thread>

#include "rsbench/image_io.hpp"
#include "rsbench/service.hpp"
#include "rsbench/service_http.hpp"
#include "test_support.hpp"

using namespace rsbench;
using namespace rsbench::service;
using rsbench::test::TempDir;

namespace {

std::vector<PredictionRecord> caption_preds() {
  return {{"m1", "i1", std::nullopt, "a plane"}, {"m2", "i1", std::nullopt, "an airport"}};
}

std::vector<QARecord> qa() { return {{"i1", "q1", "Any planes?", "yes", QaCategory::presence}}; }

rating::RatingRecord grade(std::string id, std::string rater, std::string model, rating::Dimension d,
                           rating::Grade g = rating::Grade::A) {
  return {std::move(id), std::move(rater), std::move(model), "i1", d, g, "2026-10-01T00:00:00Z"};
}

void rate_item(AnnotationService& svc, const std::string& task, const std::string& rater, const std::string& model,
               const std::string& prefix) {
  int k = 0;
  for (auto d : rating::kAllDimensions) svc.submit_rating(task, grade(prefix + std::to_string(k++), rater, model, d));
}

}  // namespace

TEST(AnnotationService, NextItemAdvancesUntilExhausted) {
  TempDir dir;
  AnnotationService svc(dir.path());
  svc.create_task(make_caption_rating_task("t", caption_preds()));
  auto first = svc.next_item("t", "alice");
  ASSERT_FALSE(first.exhausted());
  EXPECT_EQ(*first.index, 0u);
  rate_item(svc, "t", "alice", "m1", "a");
  EXPECT_EQ(*svc.next_item("t", "alice").index, 1u);
  EXPECT_EQ(*svc.next_item("t", "bob").index, 0u);
  rate_item(svc, "t", "alice", "m2", "b");
  EXPECT_TRUE(svc.next_item("t", "alice").exhausted());
}

TEST(AnnotationService, ItemDoneOnlyAfterAllDimensions) {
  TempDir dir;
  AnnotationService svc(dir.path());
  svc.create_task(make_caption_rating_task("t", caption_preds()));
  svc.submit_rating("t", grade("r1", "alice", "m1", rating::Dimension::detail));
  svc.submit_rating("t", grade("r2", "alice", "m1", rating::Dimension::position));
  EXPECT_EQ(*svc.next_item("t", "alice").index, 0u);
  EXPECT_EQ(svc.progress("t").done_by_rater.count("alice"), 0u);
  svc.submit_rating("t", grade("r3", "alice", "m1", rating::Dimension::hallucination));
  EXPECT_EQ(svc.progress("t").done_by_rater.at("alice"), 1u);
}

TEST(AnnotationService, DuplicateSubmitLeavesProgressUnchanged) {
  TempDir dir;
  AnnotationService svc(dir.path());
  svc.create_task(make_caption_rating_task("t", caption_preds()));
  rate_item(svc, "t", "alice", "m1", "a");
  auto before = svc.progress("t");
  EXPECT_EQ(svc.submit_rating("t", grade("a0", "alice", "m1", rating::Dimension::detail)),
            rating::RecordStatus::duplicate);
  EXPECT_EQ(svc.progress("t").done_by_rater, before.done_by_rater);
  EXPECT_EQ(svc.ratings().size(), 3u);
}

TEST(AnnotationService, RejectsUnknownTaskItemAndWrongKind) {
  TempDir dir;
  AnnotationService svc(dir.path());
  svc.create_task(make_caption_rating_task("t", caption_preds()));
  svc.create_task(make_vqa_task("v", {{"m1", "i1", "q1", "yes"}}, qa()));
  EXPECT_THROW(svc.next_item("nope", "a"), NotFound);
  EXPECT_THROW(svc.submit_rating("t", grade("x", "a", "not-in-task", rating::Dimension::detail)), DataError);
  EXPECT_THROW(svc.submit_rating("v", grade("y", "a", "m1", rating::Dimension::detail)), DataError);
  EXPECT_THROW(svc.create_task(make_caption_rating_task("t", caption_preds())), DataError);
  EXPECT_TRUE(svc.ratings().empty());
}

TEST(AnnotationService, JudgmentsNeedRaterAndVerdict) {
  TempDir dir;
  AnnotationService svc(dir.path());
  svc.create_task(make_vqa_task("v", {{"m1", "i1", "q1", "yes"}}, qa()));
  vqa::Judgment j{"j1", "q1", "m1", "", vqa::Verdict::correct, vqa::JudgmentSource::human, ""};
  EXPECT_THROW(svc.submit_judgment("v", j), DataError);
  j.rater_id = "alice";
  j.verdict = vqa::Verdict::unjudged;
  EXPECT_THROW(svc.submit_judgment("v", j), DataError);
  j.verdict = vqa::Verdict::correct;
  j.source = vqa::JudgmentSource::auto_judge;
  EXPECT_EQ(svc.submit_judgment("v", j), rating::RecordStatus::stored);
  EXPECT_EQ(svc.judgments()[0].source, vqa::JudgmentSource::human);
  EXPECT_TRUE(svc.next_item("v", "alice").exhausted());
}

TEST(AnnotationService, RestartReplaysEverything) {
  TempDir dir;
  std::string export_before;
  {
    AnnotationService svc(dir.path());
    svc.create_task(make_caption_rating_task("t", caption_preds()));
    svc.create_task(make_vqa_task("v", {{"m1", "i1", "q1", "yes"}}, qa()));
    rate_item(svc, "t", "alice", "m1", "a");
    svc.submit_rating("t", grade("b0", "bob", "m1", rating::Dimension::detail, rating::Grade::C));
    svc.submit_judgment("v", {"j1", "q1", "m1", "alice", vqa::Verdict::incorrect, vqa::JudgmentSource::human, "t"});
    export_before = svc.export_task("t");
  }
  AnnotationService again(dir.path());
  EXPECT_EQ(again.tasks().size(), 2u);
  EXPECT_EQ(again.export_task("t"), export_before);
  EXPECT_EQ(again.progress("t").done_by_rater.at("alice"), 1u);
  EXPECT_EQ(*again.next_item("t", "alice").index, 1u);
  EXPECT_TRUE(again.next_item("v", "alice").exhausted());
  EXPECT_EQ(again.submit_rating("t", grade("a1", "alice", "m1", rating::Dimension::position)),
            rating::RecordStatus::duplicate);
}

TEST(AnnotationService, ExportContainsExactlySubmittedRecords) {
  TempDir dir;
  AnnotationService svc(dir.path());
  svc.create_task(make_caption_rating_task("t", caption_preds()));
  svc.create_task(make_caption_rating_task("u", caption_preds()));
  auto r = grade("r1", "alice", "m2", rating::Dimension::position, rating::Grade::D);
  svc.submit_rating("t", r);
  svc.submit_rating("t", r);
  svc.submit_rating("u", grade("r2", "alice", "m2", rating::Dimension::position));
  auto exported = rating::parse_ratings(svc.export_task("t"));
  ASSERT_EQ(exported.size(), 1u);
  EXPECT_EQ(exported[0], r);
}

TEST(AnnotationService, ConcurrentRatersInterleave) {
  TempDir dir;
  {
    AnnotationService svc(dir.path());
    std::vector<PredictionRecord> preds;
    for (int i = 0; i < 10; ++i) preds.push_back({"m", "i" + std::to_string(i), std::nullopt, "x"});
    svc.create_task(make_caption_rating_task("t", preds));
    std::vector<std::thread> threads;
    for (int t = 0; t < 4; ++t)
      threads.emplace_back([&svc, t] {
        std::string rater = "rater" + std::to_string(t);
        for (int i = 0; i < 10; ++i)
          for (auto d : rating::kAllDimensions)
            svc.submit_rating("t", {rater + "-" + std::to_string(i) + std::string(rating::to_string(d)), rater, "m",
                                    "i" + std::to_string(i), d, rating::Grade::B, ""});
      });
    for (auto& th : threads) th.join();
    for (int t = 0; t < 4; ++t) EXPECT_EQ(svc.progress("t").done_by_rater.at("rater" + std::to_string(t)), 10u);
  }
  AnnotationService again(dir.path());
  EXPECT_EQ(again.ratings().size(), 120u);
}

TEST(AnnotationService, RubricCoversEveryDimensionAndGrade) {
  TempDir dir;
  AnnotationService svc(dir.path());
  for (auto d : rating::kAllDimensions)
    for (auto g : rating::kAllGrades) {
      auto dim = std::string(rating::to_string(d)), gr = std::string(rating::to_string(g));
      ASSERT_TRUE(svc.rubric().contains(dim)) << dim;
      EXPECT_TRUE(svc.rubric()[dim].contains(gr)) << dim << " " << gr;
    }
}

TEST(AnnotationService, RubricOverrideFromDataDir) {
  TempDir dir;
  test::write_text(dir.path() / "rubric.json", R"({"detail":{"A":"custom"}})");
  AnnotationService svc(dir.path());
  EXPECT_EQ(svc.rubric()["detail"]["A"], "custom");
}

// --- HTTP -------------------------------------------------------------------

namespace {

class HttpFixture : public ::testing::Test {
 protected:
  void SetUp() override {
    image_io::write_raster(dir.path() / "i1.png", image_io::Image(4, 4, 3, 128));
    save_jsonl(dir / "images.jsonl", std::vector<ImageRecord>{{"i1", 4, 4, Modality::color, "scene.png", "i1.png"},
                                                             {"ghost", 4, 4, Modality::color, "", "missing.png"}});
    svc = std::make_unique<AnnotationService>(dir.path());
    svc->create_task(make_caption_rating_task("t", caption_preds()));
    svc->create_task(make_vqa_task("v", {{"m1", "i1", "q1", "yes, a plane"}}, qa()));
    bind_routes(server, *svc);
    port = server.bind_to_any_port("127.0.0.1");
    ASSERT_GT(port, 0);
    thread = std::thread([this] { server.listen_after_bind(); });
    server.wait_until_ready();
    client = std::make_unique<httplib::Client>("127.0.0.1", port);
  }
  void TearDown() override {
    server.stop();
    if (thread.joinable()) thread.join();
  }

  static std::string rating_line(const std::string& id, const std::string& dim, const std::string& grade = "A") {
    return Json{{"rating_id", id}, {"rater_id", "alice"}, {"model_id", "m1"}, {"image_id", "i1"},
                {"dimension", dim}, {"grade", grade}, {"created_at", "2026-10-01T00:00:00Z"}}
               .dump() +
           "\n";
  }

  TempDir dir;
  std::unique_ptr<AnnotationService> svc;
  httplib::Server server;
  std::unique_ptr<httplib::Client> client;
  std::thread thread;
  int port = 0;
};

}  // namespace

TEST_F(HttpFixture, TaskListAndNextItem) {
  auto res = client->Get("/api/tasks");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  auto lines = rsbench::text::split_whitespace(res->body);
  ASSERT_EQ(lines.size(), 2u);
  EXPECT_EQ(Json::parse(lines[0])["task_id"], "t");

  res = client->Get("/api/tasks/t/next?rater_id=alice");
  ASSERT_TRUE(res);
  auto item = Json::parse(res->body);
  EXPECT_EQ(item["status"], "item");
  EXPECT_EQ(item["index"], 0);
  EXPECT_EQ(item["payload"], "a plane");
}

TEST_F(HttpFixture, RatingSubmitDuplicateAndProgress) {
  auto res = client->Post("/api/ratings?task_id=t", rating_line("r1", "detail"), "application/x-ndjson");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  EXPECT_EQ(Json::parse(res->body)["status"], "stored");

  res = client->Post("/api/ratings?task_id=t", rating_line("r1", "detail"), "application/x-ndjson");
  EXPECT_EQ(Json::parse(res->body)["status"], "duplicate");

  res = client->Post("/api/ratings?task_id=t", rating_line("r2", "position") + rating_line("r3", "hallucination"),
                     "application/x-ndjson");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);

  res = client->Get("/api/progress?task_id=t");
  auto p = Json::parse(res->body);
  EXPECT_EQ(p["total"], 2);
  EXPECT_EQ(p["done"]["alice"], 1);
  EXPECT_EQ(Json::parse(client->Get("/api/tasks/t/next?rater_id=alice")->body)["index"], 1);

  res = client->Get("/api/export?task_id=t");
  EXPECT_EQ(rating::parse_ratings(res->body).size(), 3u);
}

TEST_F(HttpFixture, BadGradeIsBadRequest) {
  auto res = client->Post("/api/ratings?task_id=t", rating_line("r1", "detail", "E"), "application/x-ndjson");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 400);
  EXPECT_NE(Json::parse(res->body)["error"].get<std::string>().find("grade"), std::string::npos);
  EXPECT_TRUE(svc->ratings().empty());
}

TEST_F(HttpFixture, TaskIdFromBodyAndUnknownTask) {
  Json line = Json::parse(rating_line("r1", "detail"));
  line["task_id"] = "t";
  auto res = client->Post("/api/ratings", line.dump() + "\n", "application/x-ndjson");
  EXPECT_EQ(res->status, 200);
  res = client->Post("/api/ratings?task_id=zzz", rating_line("r9", "detail"), "application/x-ndjson");
  EXPECT_EQ(res->status, 404);
  res = client->Post("/api/ratings", rating_line("r8", "detail"), "application/x-ndjson");
  EXPECT_EQ(res->status, 400);
  EXPECT_EQ(client->Get("/api/progress")->status, 400);
  EXPECT_EQ(client->Get("/api/tasks/zzz/next?rater_id=a")->status, 404);
}

TEST_F(HttpFixture, JudgmentFlow) {
  Json j{{"judgment_id", "j1"}, {"question_id", "q1"}, {"model_id", "m1"}, {"rater_id", "alice"},
         {"verdict", "correct"}, {"created_at", "2026-10-01T00:00:00Z"}};
  auto res = client->Post("/api/judgments?task_id=v", j.dump() + "\n", "application/x-ndjson");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  EXPECT_EQ(Json::parse(res->body)["status"], "stored");
  res = client->Post("/api/judgments?task_id=v", j.dump() + "\n", "application/x-ndjson");
  EXPECT_EQ(Json::parse(res->body)["status"], "duplicate");
  auto exported = vqa::parse_judgments(client->Get("/api/export?task_id=v")->body);
  ASSERT_EQ(exported.size(), 1u);
  EXPECT_EQ(exported[0].judgment_id, "j1");
  EXPECT_EQ(Json::parse(client->Get("/api/tasks/v/next?rater_id=alice")->body)["status"], "exhausted");
}

TEST_F(HttpFixture, ImagesServedWithContentType) {
  auto res = client->Get("/api/images/i1");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  EXPECT_EQ(res->get_header_value("Content-Type"), "image/png");
  EXPECT_EQ(res->body, rsbench::detail::read_file(dir / "i1.png"));
  EXPECT_EQ(client->Get("/api/images/nope")->status, 404);
  EXPECT_EQ(client->Get("/api/images/ghost")->status, 404);
}

TEST_F(HttpFixture, Rubric) {
  auto res = client->Get("/api/rubric");
  ASSERT_TRUE(res);
  EXPECT_TRUE(Json::parse(res->body).contains("hallucination"));
}
