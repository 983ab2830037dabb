#include <gtest/gtest.h>

#include "errors.hpp"
#include "pipeline.hpp"
#include "support.hpp"
#include "workbench/service.hpp"

#include <httplib.h>

using namespace workbench;

namespace {

class ServiceTest : public ::testing::Test {
 protected:
  void SetUp() override {
    store = std::make_unique<CorpusStore>(dir / "store");
    testsupport::populate_fixture_store(*store);
    ServeConfig config;
    config.port = 0;
    service = std::make_unique<Service>(*store, config);
    service->start();
    client = std::make_unique<httplib::Client>("127.0.0.1", service->port());
  }

  void TearDown() override {
    service->stop();
    service.reset();
    store.reset();
  }

  Json get_json(const std::string& path, int expect = 200) {
    const auto res = client->Get(path);
    EXPECT_TRUE(res) << path;
    if (!res) return {};
    EXPECT_EQ(res->status, expect) << path << ": " << res->body;
    return Json::parse(res->body);
  }

  httplib::Result post(const std::string& path, const Json& body) {
    return client->Post(path, body.dump(), "application/json");
  }

  testsupport::TempDir dir;
  std::unique_ptr<CorpusStore> store;
  std::unique_ptr<Service> service;
  std::unique_ptr<httplib::Client> client;
};

}  // namespace

TEST_F(ServiceTest, ListsRunsAndHypotheses) {
  const Json runs = get_json("/api/runs");
  ASSERT_EQ(runs.size(), 90u);
  EXPECT_EQ(runs[0]["hypotheses"], 5);
  EXPECT_EQ(runs[0]["ok"], true);
  EXPECT_EQ(get_json("/api/runs?setting=1-step/Away").size(), 15u);

  const std::string id = runs[3]["run_id"];
  const Json hyps = get_json("/api/runs/" + id + "/hypotheses");
  ASSERT_EQ(hyps.size(), 5u);
  EXPECT_TRUE(hyps[0].contains("markers"));
  EXPECT_EQ(get_json("/api/runs/nope/hypotheses", 404)["error"], "UnknownRun");

  EXPECT_EQ(get_json("/api/hypotheses").size(), 450u);
  EXPECT_EQ(get_json("/api/hypotheses?setting=4-step/Toward").size(), 75u);
}

TEST_F(ServiceTest, CodeFilterFollowsTheMatrix) {
  const Json teach = get_json("/api/hypotheses?code=Teach");
  EXPECT_EQ(teach.size(), 8u);  // 5 + 3, Away cells only
  for (const auto& u : teach) EXPECT_NE(u["setting"].get<std::string>().find("Away"), std::string::npos);
  EXPECT_EQ(get_json("/api/hypotheses?code=Agile").size(), 208u);
  EXPECT_EQ(get_json("/api/hypotheses?code=Bogus", 422)["error"], "UnknownCode");
}

TEST_F(ServiceTest, AmeEndpointMatchesLibraryOutput) {
  const AnalysisReport report = run_analysis_codes(*store, {});
  for (AmeKind k : kAllAmeKinds) {
    const std::string family(ame_label(k));
    const auto res = client->Get("/api/analysis/ame?family=" + family);
    ASSERT_TRUE(res);
    ASSERT_EQ(res->status, 200);
    EXPECT_EQ(res->body, dotwhisker_json(emit_dotwhisker(report, k), k, EffectSubject::Codes).dump());
    const auto csv = client->Get("/api/analysis/ame?format=csv&family=" + family);
    ASSERT_TRUE(csv);
    EXPECT_EQ(csv->body, dotwhisker_csv(emit_dotwhisker(report, k)));
    EXPECT_EQ(csv->get_header_value("Content-Type"), "text/csv");
  }
  EXPECT_EQ(get_json("/api/analysis/ame?family=sideways", 400)["error"], "UnknownFamily");
  EXPECT_EQ(get_json("/api/analysis/ame?family=away&subject=plants", 400)["error"], "UnknownFamily");
  EXPECT_EQ(get_json("/api/analysis/ame?family=toward&subject=markers")["rows"].size(), 78u);
}

TEST_F(ServiceTest, ReportAndExports) {
  const Json report = get_json("/api/analysis/report");
  EXPECT_EQ(report["codes"].size(), 21u);
  EXPECT_FALSE(report.contains("markers"));
  EXPECT_TRUE(get_json("/api/analysis/report?markers=1").contains("markers"));
  const auto csv = client->Get("/api/analysis/report?format=csv");
  ASSERT_TRUE(csv);
  EXPECT_EQ(csv->body, effects_csv(run_analysis_codes(*store, {})));

  EXPECT_EQ(get_json("/api/analysis/echo")["markers"].size(), 78u);
  const auto t3 = client->Get("/api/export/table3");
  ASSERT_TRUE(t3);
  EXPECT_EQ(t3->body, export_table3(store->code_matrix()));
  const auto t1 = client->Get("/api/export/table1");
  ASSERT_TRUE(t1);
  EXPECT_NE(t1->body.find("Agile,208,46.2"), std::string::npos);

  const Json cells = get_json("/api/cell-counts?code=Teach");
  EXPECT_EQ(cells["cells"]["4-step/Away"]["count"], 5);
  EXPECT_EQ(cells["cells"]["4-step/Away"]["denominator"], 75);
}

TEST_F(ServiceTest, ReadsLeaveTheStoreUntouched) {
  const std::string before = store->digest();
  for (const char* path : {"/api/runs", "/api/hypotheses?code=SSS", "/api/codebook", "/api/assignments",
                           "/api/analysis/ame?family=away", "/api/analysis/report?markers=1", "/api/export/table3",
                           "/api/cell-counts?code=Agile"}) {
    const auto res = client->Get(path);
    ASSERT_TRUE(res) << path;
    EXPECT_EQ(res->status, 200) << path;
  }
  EXPECT_EQ(store->digest(), before);
}

TEST_F(ServiceTest, AssignmentsValidateValues) {
  const std::string id = store->hypotheses()[0].id();
  for (const Json& bad : {Json(2), Json("1"), Json(0.5), Json(-1)}) {
    const auto res = post("/api/assignments", {{"hypothesis_id", id}, {"code", "Teach"}, {"value", bad}});
    ASSERT_TRUE(res);
    EXPECT_EQ(res->status, 422) << bad.dump();
    EXPECT_EQ(Json::parse(res->body)["error"], "NonBinaryCell");
  }
  const std::string before = store->digest();
  auto res = post("/api/assignments", {{"hypothesis_id", id}, {"code", "Teach"}, {"value", 1}});
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200) << res->body;
  EXPECT_NE(store->digest(), before);
  EXPECT_EQ(store->code_matrix().at(0, store->code_matrix().column_index("Teach")), 1);

  res = post("/api/assignments", {{"hypothesis_id", "missing-h1"}, {"code", "Teach"}, {"value", 0}});
  EXPECT_EQ(Json::parse(res->body)["error"], "UnknownHypothesis");
  res = post("/api/assignments", {{"hypothesis_id", id}, {"code", "Nope"}, {"value", 0}});
  EXPECT_EQ(Json::parse(res->body)["error"], "UnknownCode");
  res = post("/api/assignments", {{"code", "Teach"}});
  EXPECT_EQ(res->status, 400);
  res = client->Post("/api/assignments", "{not json", "application/json");
  EXPECT_EQ(res->status, 400);
  EXPECT_EQ(Json::parse(res->body)["error"], "MalformedJson");
}

TEST_F(ServiceTest, StaleCodebookIsAConflict) {
  const std::string id = store->hypotheses()[0].id();
  Json cb = get_json("/api/codebook");
  EXPECT_EQ(cb["version"], 1);
  cb["codes"].push_back({{"name", "Hedge"}, {"description", "Reads the note as hedging."}});
  auto res = post("/api/codebook", cb);
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 201) << res->body;
  EXPECT_EQ(Json::parse(res->body)["version"], 2);

  const std::string before = store->digest();
  res = post("/api/assignments", {{"hypothesis_id", id}, {"code", "Agile"}, {"value", 0}, {"codebook_version", 1}});
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 409);
  EXPECT_EQ(Json::parse(res->body)["error"], "StaleCodebook");
  EXPECT_EQ(store->digest(), before);

  res = post("/api/assignments", {{"hypothesis_id", id}, {"code", "Hedge"}, {"value", 1}, {"codebook_version", 2}});
  EXPECT_EQ(res->status, 200) << res->body;
  EXPECT_EQ(get_json("/api/analysis/report")["codes"].size(), 22u);

  Json dup = get_json("/api/codebook");
  dup["codes"].push_back({{"name", "Agile"}, {"description", "again"}});
  res = post("/api/codebook", dup);
  EXPECT_EQ(res->status, 422);
  EXPECT_EQ(Json::parse(res->body)["error"], "DuplicateName");
}

TEST(Service, EmptyStoreReportsNoMatrix) {
  testsupport::TempDir dir;
  CorpusStore store(dir / "store");
  ServeConfig config;
  config.port = 0;
  Service service(store, config);
  service.start();
  httplib::Client client("127.0.0.1", service.port());
  auto res = client.Get("/api/analysis/report");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 404);
  EXPECT_EQ(Json::parse(res->body)["error"], "NoMatrix");
  res = client.Get("/api/runs");
  EXPECT_EQ(res->body, "[]");
  service.stop();
  service.stop();
}

TEST(Service, PortBusy) {
  testsupport::TempDir dir;
  CorpusStore store(dir / "store");
  ServeConfig config;
  config.port = 0;
  Service first(store, config);
  first.start();
  ServeConfig clash;
  clash.port = first.port();
  Service second(store, clash);
  EXPECT_WB_ERROR(second.start(), ErrorCode::PortBusy);
}
