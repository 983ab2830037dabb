#include <gtest/gtest.h>

#include <json.hpp>
#include <set>
#include <sstream>

#include "support.hpp"
#include "workbench/workbench.h"

using Json = nlohmann::ordered_json;

namespace {

struct Owned {
  char* ptr = nullptr;
  ~Owned() { wb_string_free(ptr); }
  std::string str() const { return ptr ? ptr : ""; }
  Json json() const { return Json::parse(str()); }
};

std::string replay_options() {
  return Json{{"mode", "replay"}, {"transcripts", (testsupport::fixtures() / "replay" / "transcripts").string()}}
      .dump();
}

Json with_replay(Json extra) {
  Json o = Json::parse(replay_options());
  for (auto& [k, v] : extra.items()) o[k] = v;
  return o;
}

// Full replay pipeline plus the Table-3 code matrix.
void populate(wb_store* s) {
  Owned out;
  ASSERT_EQ(wb_stage_one(s, with_replay({{"context", (testsupport::fixtures() / "context.json").string()}}).dump().c_str(),
                         &out.ptr),
            WB_OK)
      << wb_last_error();
  Owned sampled;
  ASSERT_EQ(wb_sample(s, "{}", &sampled.ptr), WB_OK) << wb_last_error();
  Owned two;
  ASSERT_EQ(wb_stage_two(s, with_replay({{"attachments", (testsupport::fixtures() / "attachments").string()}}).dump().c_str(),
                         &two.ptr),
            WB_OK)
      << wb_last_error();
  Owned imported;
  ASSERT_EQ(wb_import_codes(s, testsupport::read_file(testsupport::fixtures() / "codes_table3.csv").c_str(), &imported.ptr),
            WB_OK)
      << wb_last_error();
}

std::multiset<std::string> sorted_lines(const std::string& text) {
  std::multiset<std::string> lines;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) lines.insert(line);
  return lines;
}

class CApi : public ::testing::Test {
 protected:
  void SetUp() override { ASSERT_EQ(wb_store_open((dir / "store").c_str(), &store), WB_OK) << wb_last_error(); }
  void TearDown() override { wb_store_close(store); }

  testsupport::TempDir dir;
  wb_store* store = nullptr;
};

}  // namespace

TEST(CApiBasics, StatusNamesAndVersion) {
  EXPECT_STREQ(wb_status_name(WB_OK), "Ok");
  EXPECT_STREQ(wb_status_name(WB_NON_BINARY_CELL), "NonBinaryCell");
  EXPECT_STREQ(wb_status_name(WB_STORE_LOCKED), "StoreLocked");
  EXPECT_STRNE(wb_version(), "");
  wb_string_free(nullptr);
  wb_store_close(nullptr);
}

TEST(CApiBasics, NullArgumentsAreRejected) {
  EXPECT_EQ(wb_store_open(nullptr, nullptr), WB_INVALID_ARGUMENT);
  EXPECT_STRNE(wb_last_error(), "");
  char* out = nullptr;
  EXPECT_EQ(wb_store_digest(nullptr, &out), WB_INVALID_ARGUMENT);
  EXPECT_EQ(out, nullptr);
}

TEST_F(CApi, StoreIsExclusive) {
  wb_store* second = nullptr;
  EXPECT_EQ(wb_store_open((dir / "store").c_str(), &second), WB_STORE_LOCKED);
  EXPECT_EQ(second, nullptr);
}

TEST_F(CApi, FullReplayPipeline) {
  Owned one;
  ASSERT_EQ(wb_stage_one(store, with_replay({{"context", (testsupport::fixtures() / "context.json").string()}}).dump().c_str(),
                         &one.ptr),
            WB_OK)
      << wb_last_error();
  const Json s1 = one.json();
  EXPECT_EQ(s1["records"], 30);
  EXPECT_EQ(s1["ok"], 30);
  EXPECT_EQ(s1["failed"], 0);

  Owned sampled;
  ASSERT_EQ(wb_sample(store, "{}", &sampled.ptr), WB_OK);
  EXPECT_EQ(sampled.json()["seeds"].size(), 15u);
  EXPECT_EQ(sampled.json()["rng_seed"], 1970);

  Owned two;
  ASSERT_EQ(wb_stage_two(store, with_replay({{"attachments", (testsupport::fixtures() / "attachments").string()}}).dump().c_str(),
                         &two.ptr),
            WB_OK)
      << wb_last_error();
  const Json s2 = two.json();
  EXPECT_EQ(s2["runs"], 90);
  EXPECT_EQ(s2["ok"], 90);
  EXPECT_EQ(s2["hypotheses"], 450);
  EXPECT_EQ(s2["intermediate_sections"], 135);

  Owned hedges;
  ASSERT_EQ(wb_hedge_counts(store, &hedges.ptr), WB_OK);
  EXPECT_EQ(hedges.json()["expected_to"], 27);
  EXPECT_EQ(hedges.json()["likely_to"], 2);
  EXPECT_EQ(hedges.json()["may"], 0);

  Owned cost;
  ASSERT_EQ(wb_cost(store, replay_options().c_str(), &cost.ptr), WB_OK) << wb_last_error();
  EXPECT_EQ(cost.json()["transcripts"], 120);
  EXPECT_NEAR(cost.json()["total_cost"].get<double>(), 6.24, 0.005);
  EXPECT_NEAR(cost.json()["reasoning_cost"].get<double>(), 2.59, 0.005);
}

TEST_F(CApi, ReplayMissWithoutTranscripts) {
  Owned out;
  EXPECT_EQ(wb_stage_one(store,
                         Json{{"mode", "replay"}, {"context", (testsupport::fixtures() / "context.json").string()}}
                             .dump()
                             .c_str(),
                         &out.ptr),
            WB_PLAN_INCOMPLETE);
  EXPECT_EQ(out.ptr, nullptr);
}

TEST_F(CApi, AnalysisOutputs) {
  populate(store);
  Owned json;
  ASSERT_EQ(wb_analyze(store, "{}", &json.ptr), WB_OK) << wb_last_error();
  const Json report = json.json();
  ASSERT_EQ(report["codes"].size(), 21u);
  EXPECT_EQ(report["codes"][0]["code"], "Agile");
  EXPECT_NEAR(report["codes"][0]["ames"]["4step"]["estimate"].get<double>(), -8.0 / 90.0, 1e-12);

  Owned effects;
  ASSERT_EQ(wb_analyze(store, R"({"output":"effects"})", &effects.ptr), WB_OK);
  EXPECT_EQ(effects.str().rfind("code,effect_kind,estimate_pp", 0), 0u);
  Owned omnibus;
  ASSERT_EQ(wb_analyze(store, R"({"output":"omnibus"})", &omnibus.ptr), WB_OK);
  EXPECT_EQ(omnibus.str().rfind("code,stat,df,rank,p,flag", 0), 0u);
  Owned bad;
  EXPECT_EQ(wb_analyze(store, R"({"output":"pdf"})", &bad.ptr), WB_INVALID_ARGUMENT);
  EXPECT_EQ(wb_analyze(store, R"({"correction":"CR9"})", &bad.ptr), WB_INVALID_ARGUMENT);
  EXPECT_EQ(wb_analyze(store, "{not json", &bad.ptr), WB_MALFORMED_JSON);

  Owned rows;
  ASSERT_EQ(wb_report(store, R"({"family":"away"})", &rows.ptr), WB_OK);
  EXPECT_EQ(rows.str().rfind("name,estimate_pp,ci_low_pp,ci_high_pp,significant\n", 0), 0u);
  const std::string text = rows.str();
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 22);
  EXPECT_EQ(wb_report(store, R"({"family":"up"})", &bad.ptr), WB_UNKNOWN_FAMILY);
  EXPECT_EQ(wb_report(store, "{}", &bad.ptr), WB_UNKNOWN_FAMILY);

  Owned cells;
  ASSERT_EQ(wb_cell_counts(store, R"({"code":"Teach"})", &cells.ptr), WB_OK);
  EXPECT_EQ(cells.json()["cells"]["1-step/Away"]["count"], 3);
  EXPECT_EQ(wb_cell_counts(store, R"({"code":"Nope"})", &bad.ptr), WB_UNKNOWN_CODE);

  Owned reiter;
  ASSERT_EQ(wb_reiter(store, "{}", &reiter.ptr), WB_OK);
  EXPECT_EQ(reiter.json().size(), 21u);
}

TEST_F(CApi, ExportsAndSynthesis) {
  populate(store);
  Owned t1, t3, matrix, synth;
  ASSERT_EQ(wb_export(store, "table1", &t1.ptr), WB_OK);
  EXPECT_NE(t1.str().find("Agile,208,46.2"), std::string::npos);
  ASSERT_EQ(wb_export(store, "table3", &t3.ptr), WB_OK);
  EXPECT_NE(t3.str().find("Teach,4-step/Away,5,6.7"), std::string::npos);
  ASSERT_EQ(wb_export(store, "matrix", &matrix.ptr), WB_OK);
  EXPECT_EQ(sorted_lines(matrix.str()), sorted_lines(testsupport::read_file(testsupport::fixtures() / "codes_table3.csv")));
  ASSERT_EQ(wb_synthesize_codes(store, testsupport::read_file(testsupport::fixtures() / "table3_counts.csv").c_str(),
                                &synth.ptr),
            WB_OK)
      << wb_last_error();
  EXPECT_EQ(sorted_lines(synth.str()), sorted_lines(matrix.str()));
  Owned bad;
  EXPECT_EQ(wb_export(store, "table9", &bad.ptr), WB_INVALID_ARGUMENT);
}

TEST_F(CApi, ImportRejectsBadCells) {
  populate(store);
  Owned before;
  ASSERT_EQ(wb_store_digest(store, &before.ptr), WB_OK);
  std::string csv = testsupport::read_file(testsupport::fixtures() / "codes_table3.csv");
  csv.replace(csv.find(",1,"), 3, ",7,");
  Owned out;
  EXPECT_EQ(wb_import_codes(store, csv.c_str(), &out.ptr), WB_NON_BINARY_CELL);
  EXPECT_NE(std::string(wb_last_error()).find("7"), std::string::npos);
  Owned after;
  ASSERT_EQ(wb_store_digest(store, &after.ptr), WB_OK);
  EXPECT_EQ(before.str(), after.str());
  EXPECT_EQ(wb_import_codes(store, "hypothesis_id,Agile\nnobody-h1,1\n", &out.ptr), WB_UNKNOWN_HYPOTHESIS);
}

TEST_F(CApi, EmptyStoreHasNoMatrix) {
  Owned out;
  EXPECT_EQ(wb_analyze(store, "{}", &out.ptr), WB_NO_MATRIX);
  EXPECT_EQ(wb_export(store, "table3", &out.ptr), WB_NO_MATRIX);
  EXPECT_EQ(wb_stage_two(store, with_replay({{"attachments", (testsupport::fixtures() / "attachments").string()}}).dump().c_str(),
                         &out.ptr),
            WB_INVALID_ARGUMENT);
}

TEST(CApiServer, ServesAndReleasesTheStore) {
  testsupport::TempDir dir;
  const std::string path = (dir / "store").string();
  {
    wb_store* s = nullptr;
    ASSERT_EQ(wb_store_open(path.c_str(), &s), WB_OK);
    populate(s);
    wb_store_close(s);
  }
  wb_server* server = nullptr;
  ASSERT_EQ(wb_server_start(path.c_str(), R"({"port":0})", &server), WB_OK) << wb_last_error();
  EXPECT_GT(wb_server_port(server), 0);
  wb_store* blocked = nullptr;
  EXPECT_EQ(wb_store_open(path.c_str(), &blocked), WB_STORE_LOCKED);
  wb_server* twin = nullptr;
  EXPECT_EQ(wb_server_start(path.c_str(), R"({"port":0})", &twin), WB_STORE_LOCKED);
  wb_server_stop(server);
  wb_store* reopened = nullptr;
  EXPECT_EQ(wb_store_open(path.c_str(), &reopened), WB_OK);
  wb_store_close(reopened);
}
