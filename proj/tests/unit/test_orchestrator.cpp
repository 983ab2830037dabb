#include <gtest/gtest.h>

#include <map>
#include <set>

#include "errors.hpp"
#include "pipeline.hpp"
#include "stub_transport.hpp"
#include "workbench/orchestrator.hpp"
#include "workbench/schema.hpp"

using namespace workbench;
using testsupport::TempDir;

namespace {

// Response text of a shipped stage-one transcript.
std::string fixture_stage_one_text(std::size_t slot) {
  ReplayStore fixture(testsupport::fixtures() / "replay" / "transcripts");
  const PromptBundle b = build_stage_one_prompt(testsupport::load_context(), classification_scheme());
  return fixture.load(transcript_key(b, ProviderConfig{}, slot * kCallStride))->response_text;
}

void store_stage_one(ReplayStore& store, std::size_t slot, std::size_t attempt, const std::string& text) {
  const PromptBundle b = build_stage_one_prompt(testsupport::load_context(), classification_scheme());
  Transcript t;
  t.key = transcript_key(b, ProviderConfig{}, slot * kCallStride + attempt);
  t.response_text = text;
  store.save(t);
}

RunManifest small_manifest(std::size_t n) {
  RunManifest m;
  m.stage_one_count = n;
  m.seed_sample_size = std::min<std::size_t>(n, 15);
  return m;
}

std::string dump_all(const auto& records) {
  std::string out;
  for (const auto& r : records) out += to_json(r).dump() + "\n";
  return out;
}

}  // namespace

TEST(StageOne, ReplayFixtureSplit) {
  ReplayStore replay(testsupport::fixtures() / "replay" / "transcripts");
  Gateway gw(replay, nullptr);
  Orchestrator o(gw);
  std::vector<std::string> sunk;
  const auto records = o.execute_stage_one(RunManifest{}, testsupport::load_context(),
                                           [&](const StageOneRecord& r) { sunk.push_back(r.id); });
  ASSERT_EQ(records.size(), 30u);
  ASSERT_EQ(sunk.size(), 30u);
  std::map<Category, int> gw_split;
  for (std::size_t i = 0; i < records.size(); ++i) {
    EXPECT_TRUE(records[i].ok());
    EXPECT_EQ(records[i].index, i);
    EXPECT_EQ(sunk[i], make_stage_one_id(i));
    EXPECT_EQ(records[i].attempt_count, 1u);
    for (const auto& c : records[i].parsed->cited_papers) {
      if (c.cited_paper == "GilbertWoolgar-1974") ++gw_split[c.classification_category];
    }
  }
  EXPECT_EQ(gw_split[Category::SupplementaryPerfunctory], 19);
  EXPECT_EQ(gw_split[Category::SupplementaryAdditionalInformation], 11);
}

TEST(StageOne, EmptyPlan) {
  TempDir dir;
  ReplayStore replay(dir.path());
  Gateway gw(replay, nullptr);
  Orchestrator o(gw);
  RunManifest m = small_manifest(0);
  EXPECT_TRUE(o.execute_stage_one(m, testsupport::load_context()).empty());
}

TEST(StageOne, RetriesMalformedOutputOnFreshCallIndex) {
  TempDir dir;
  ReplayStore replay(dir.path());
  for (std::size_t slot = 0; slot < 10; ++slot) {
    if (slot == 7) {
      store_stage_one(replay, slot, 0, "{\"citation_context\": ");
      store_stage_one(replay, slot, 1, fixture_stage_one_text(slot));
    } else {
      store_stage_one(replay, slot, 0, fixture_stage_one_text(slot));
    }
  }
  Gateway gw(replay, nullptr);
  Orchestrator o(gw);
  const auto records = o.execute_stage_one(small_manifest(10), testsupport::load_context());
  ASSERT_EQ(records.size(), 10u);
  for (std::size_t i = 0; i < records.size(); ++i) {
    EXPECT_TRUE(records[i].ok()) << i;
    EXPECT_EQ(records[i].attempt_count, i == 7 ? 2u : 1u) << i;
  }
  EXPECT_TRUE(records[7].failure.empty());
}

TEST(StageOne, ExhaustedRetriesAreRecordedThenPlanIncomplete) {
  TempDir dir;
  ReplayStore replay(dir.path());
  for (std::size_t slot = 0; slot < 4; ++slot) {
    if (slot == 2) {
      for (std::size_t a = 0; a < 3; ++a) store_stage_one(replay, slot, a, "[]");
    } else {
      store_stage_one(replay, slot, 0, fixture_stage_one_text(slot));
    }
  }
  Gateway gw(replay, nullptr);
  Orchestrator o(gw);
  std::vector<StageOneRecord> sunk;
  RunManifest m = small_manifest(4);
  EXPECT_WB_ERROR(o.execute_stage_one(m, testsupport::load_context(),
                                      [&](const StageOneRecord& r) { sunk.push_back(r); }),
                  ErrorCode::PlanIncomplete);
  ASSERT_EQ(sunk.size(), 4u);
  EXPECT_FALSE(sunk[2].ok());
  EXPECT_EQ(sunk[2].attempt_count, 3u);
  EXPECT_NE(sunk[2].failure.find("SchemaViolation"), std::string::npos);

  m.failure_tolerance = 1;
  const auto records = o.execute_stage_one(m, testsupport::load_context());
  EXPECT_EQ(std::count_if(records.begin(), records.end(), [](const auto& r) { return r.ok(); }), 3);
}

TEST(StageOne, ProviderErrorsAreNotRetried) {
  TempDir dir;
  ReplayStore replay(dir.path());
  store_stage_one(replay, 0, 0, fixture_stage_one_text(0));
  Gateway gw(replay, nullptr);
  Orchestrator o(gw);
  RunManifest m = small_manifest(2);
  m.failure_tolerance = 1;
  const auto records = o.execute_stage_one(m, testsupport::load_context());
  EXPECT_TRUE(records[0].ok());
  EXPECT_FALSE(records[1].ok());
  EXPECT_EQ(records[1].attempt_count, 1u);
  EXPECT_NE(records[1].failure.find("ReplayMiss"), std::string::npos);
}

TEST(StageOne, AuthMissingAborts) {
  TempDir dir;
  ReplayStore replay(dir.path());
  ::unsetenv("WORKBENCH_API_KEY");
  Gateway gw(replay, std::make_shared<testsupport::StubTransport>());
  Orchestrator o(gw);
  RunManifest m = small_manifest(3);
  m.provider_mode = ProviderMode::Live;
  EXPECT_WB_ERROR(o.execute_stage_one(m, testsupport::load_context()), ErrorCode::AuthMissing);
}

TEST(Sampling, ExhaustiveIsIdentity) {
  std::vector<StageOneRecord> records(30);
  for (std::size_t i = 0; i < records.size(); ++i) records[i].id = make_stage_one_id(i);
  const auto all = sample_seeds(records, 30, 5);
  ASSERT_EQ(all.size(), 30u);
  for (std::size_t i = 0; i < all.size(); ++i) EXPECT_EQ(all[i].id, records[i].id);
  EXPECT_TRUE(sample_seeds(records, 0, 5).empty());
  EXPECT_WB_ERROR(sample_seeds(records, 31, 5), ErrorCode::SampleTooLarge);
}

TEST(Sampling, DeterministicAndOrdered) {
  std::vector<StageOneRecord> records(30);
  for (std::size_t i = 0; i < records.size(); ++i) records[i].index = i;
  const auto a = sample_seeds(records, 15, 1970);
  const auto b = sample_seeds(records, 15, 1970);
  ASSERT_EQ(a.size(), 15u);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].index, b[i].index);
    if (i > 0) {
      EXPECT_LT(a[i - 1].index, a[i].index);
    }
  }
  std::set<std::size_t> other;
  for (const auto& r : sample_seeds(records, 15, 1971)) other.insert(r.index);
  std::set<std::size_t> first;
  for (const auto& r : a) first.insert(r.index);
  EXPECT_NE(first, other);
}

TEST(Sampling, InclusionFrequencyIsUniform) {
  std::vector<StageOneRecord> records(30);
  for (std::size_t i = 0; i < records.size(); ++i) records[i].index = i;
  std::vector<int> hits(30, 0);
  const int trials = 10'000;
  for (int t = 0; t < trials; ++t) {
    const auto s = sample_seeds(records, 15, static_cast<std::uint64_t>(t));
    ASSERT_EQ(s.size(), 15u);
    for (const auto& r : s) ++hits[r.index];
  }
  // Hypergeometric inclusion probability k/n = 0.5 for every record.
  for (std::size_t i = 0; i < hits.size(); ++i) {
    EXPECT_NEAR(hits[i] / static_cast<double>(trials), 0.5, 0.02) << "record " << i;
  }
}

TEST(StageTwo, FullReplayPlanShape) {
  const auto p = testsupport::run_replay_pipeline();
  EXPECT_EQ(p.stage_one.size(), 30u);
  EXPECT_EQ(p.seeds.size(), 15u);
  ASSERT_EQ(p.runs.size(), 90u);
  std::size_t units = 0, sections = 0, four_step = 0;
  std::set<std::pair<std::string, std::size_t>> grid;
  for (std::size_t i = 0; i < p.runs.size(); ++i) {
    const auto& r = p.runs[i];
    ASSERT_TRUE(r.ok()) << r.failure;
    units += hypothesis_units(*r.parsed).size();
    sections += r.parsed->intermediate_sections();
    four_step += r.setting.base == BasePrompt::FourStep;
    grid.insert({r.seed_ref, setting_index(r.setting)});
    // Seeds outer loop, settings inner loop.
    EXPECT_EQ(r.seed_ref, p.seeds[i / 6].id);
    EXPECT_EQ(r.setting, kAllSettings[i % 6]);
    EXPECT_EQ(r.run_id, make_run_id(p.seeds[i / 6].index, r.setting, i));
  }
  EXPECT_EQ(units, 450u);
  EXPECT_EQ(four_step, 45u);
  EXPECT_EQ(sections, 135u);
  EXPECT_EQ(grid.size(), 90u);
}

TEST(StageTwo, RerunIsByteIdentical) {
  const auto a = testsupport::run_replay_pipeline();
  const auto b = testsupport::run_replay_pipeline();
  EXPECT_EQ(dump_all(a.stage_one), dump_all(b.stage_one));
  EXPECT_EQ(dump_all(a.runs), dump_all(b.runs));
}

TEST(StageTwo, SingleSeedScales) {
  const auto p = testsupport::run_replay_pipeline();
  ReplayStore replay(testsupport::fixtures() / "replay" / "transcripts");
  Gateway gw(replay, nullptr);
  Orchestrator o(gw);
  const std::vector<StageOneRecord> one{p.seeds.front()};
  const auto runs = o.execute_stage_two(RunManifest{}, one, testsupport::load_fixture_attachments());
  ASSERT_EQ(runs.size(), 6u);
  std::size_t units = 0;
  for (const auto& r : runs) units += hypothesis_units(*r.parsed).size();
  EXPECT_EQ(units, 30u);
}

TEST(StageTwo, Errors) {
  TempDir dir;
  ReplayStore replay(dir.path());
  Gateway gw(replay, nullptr);
  Orchestrator o(gw);
  EXPECT_WB_ERROR(o.execute_stage_two(RunManifest{}, {}, testsupport::load_fixture_attachments()),
                  ErrorCode::InvalidArgument);
  const auto p = testsupport::run_replay_pipeline();
  std::vector<StageOneRecord> seeds{p.seeds.front()};
  auto attachments = testsupport::load_fixture_attachments();
  attachments.pop_back();
  EXPECT_WB_ERROR(o.execute_stage_two(RunManifest{}, seeds, attachments), ErrorCode::MissingAttachment);
  seeds.front().parsed.reset();
  EXPECT_WB_ERROR(o.execute_stage_two(RunManifest{}, seeds, testsupport::load_fixture_attachments()),
                  ErrorCode::InvalidArgument);
}

TEST(StageTwo, RecordModePersistsEveryRunAndChainsOnlyTheSeed) {
  const auto p = testsupport::run_replay_pipeline();
  TempDir dir;
  ReplayStore store(dir.path());
  auto transport = std::make_shared<testsupport::StubTransport>();
  transport->fallback = [](const TransportRequest& req) {
    Json hyps = Json::array();
    for (int i = 0; i < 5; ++i) hyps.push_back(Json{{"hypothesis", "h"}, {"justification", "j"}});
    Json out{{"alternative_hypotheses", hyps}};
    if (req.body.find("Pedantic Expectation Check") != std::string::npos) {
      out = Json{{"expectation_check", Json::array({Json{{"cited_paper", "Price-1970"},
                                                         {"content_presence", "yes"},
                                                         {"content_framing", "expected"},
                                                         {"content_justification", "x"},
                                                         {"citation_presence", "no"},
                                                         {"citation_function", "not applicable"},
                                                         {"citation_justification", "y"}}})},
                 {"lexical_cues", Json::array()},
                 {"extended_context",
                  Json{{"placement", "p"},
                       {"recurrence", "r"},
                       {"relational_cues", "c"},
                       {"co_citation_patterns", "cc"},
                       {"narrative_function", "n"}}},
                 {"alternative_hypotheses", hyps}};
    }
    return TransportResponse{200, testsupport::response_body(out.dump())};
  };
  GatewayOptions opts;
  opts.api_key = "k";
  opts.sleep = [](std::chrono::milliseconds) {};
  Gateway gw(store, transport, opts);
  Orchestrator o(gw);
  RunManifest m;
  m.provider_mode = ProviderMode::Record;
  const auto runs = o.execute_stage_two(m, p.seeds, testsupport::load_fixture_attachments());
  EXPECT_EQ(runs.size(), 90u);
  EXPECT_EQ(store.size(), 90u);
  EXPECT_EQ(transport->calls(), 90u);

  // Each request's payload is exactly one seed's stage-one reading, in the
  // shape for its base; nothing from other runs leaks in.
  std::multiset<std::string> expected, seen;
  for (const auto& s : p.seeds) {
    for (PromptSetting setting : kAllSettings) expected.insert(stage_two_payload(setting.base, *s.parsed).dump(2));
  }
  for (const auto& req : transport->requests()) {
    const Json body = Json::parse(req.body);
    const Json& user = body["input"][1]["content"];
    seen.insert(user[0]["text"].get<std::string>());
    EXPECT_EQ(user.size(), 4u);  // payload + citing + two cited papers
  }
  EXPECT_EQ(seen, expected);
}

TEST(Manifest, TextRoundTrip) {
  RunManifest m;
  m.rng_seed = 99;
  m.retry_limit = 1;
  m.provider_mode = ProviderMode::Record;
  m.provider.temperature = 0.5;
  const RunManifest back = parse_manifest(manifest_to_text(m));
  EXPECT_EQ(back.rng_seed, 99u);
  EXPECT_EQ(back.retry_limit, 1u);
  EXPECT_EQ(back.provider_mode, ProviderMode::Record);
  EXPECT_EQ(back.provider.temperature, 0.5);
  EXPECT_EQ(back.settings, m.settings);
  EXPECT_EQ(manifest_to_text(back), manifest_to_text(m));
}

TEST(Manifest, Validation) {
  EXPECT_WB_ERROR(parse_manifest("colour = blue\n"), ErrorCode::InvalidArgument);
  EXPECT_WB_ERROR(parse_manifest("stage_one_count = -3\n"), ErrorCode::InvalidArgument);
  EXPECT_WB_ERROR(parse_manifest("stage_one_count = 10\n"), ErrorCode::InvalidArgument);  // 15 > 10
  EXPECT_WB_ERROR(parse_manifest("settings = 4-step/Toward, 4-step/Toward\n"), ErrorCode::InvalidArgument);
  EXPECT_WB_ERROR(parse_manifest("settings = 3-step/Toward\n"), ErrorCode::UnknownLabel);
  const RunManifest m = parse_manifest("# comment\n\nrng_seed = 7  # trailing\nprovider_mode = live\n");
  EXPECT_EQ(m.rng_seed, 7u);
  EXPECT_EQ(m.provider_mode, ProviderMode::Live);
  EXPECT_EQ(m.stage_one_count, 30u);
  const RunManifest shipped = load_manifest(testsupport::fixtures() / "plan.cfg");
  EXPECT_EQ(shipped.stage_one_count, 30u);
  EXPECT_EQ(shipped.seed_sample_size, 15u);
  EXPECT_EQ(shipped.provider_mode, ProviderMode::Replay);
}

TEST(Records, JsonRoundTrip) {
  const auto p = testsupport::run_replay_pipeline();
  for (const auto& r : p.stage_one) EXPECT_EQ(to_json(stage_one_record_from_json(to_json(r))), to_json(r));
  for (const auto& r : p.runs) EXPECT_EQ(to_json(run_record_from_json(to_json(r))), to_json(r));
  RunRecord failed;
  failed.run_id = "s2-00-1step-away-004";
  failed.setting = {BasePrompt::OneStep, Nudge::Away};
  failed.failure = "ReplayMiss: x";
  failed.attempt_count = 1;
  const RunRecord back = run_record_from_json(to_json(failed));
  EXPECT_FALSE(back.ok());
  EXPECT_EQ(back.failure, failed.failure);
}
