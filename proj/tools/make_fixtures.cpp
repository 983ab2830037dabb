// Writes fixtures/replay/transcripts and fixtures/codes_table3.csv.
//
// The stage-one and stage-two responses are scripted, not model output.
// Their aggregate properties are fixed: the stage-one label split, the
// hedging phrases in the expectation notes, the 90-run grid, and token usage
// that sums to the reported totals.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "workbench/digest.hpp"
#include "workbench/error.hpp"
#include "workbench/lexical.hpp"
#include "workbench/orchestrator.hpp"
#include "workbench/provider.hpp"
#include "workbench/store.hpp"

using namespace workbench;
namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kInputTotal = 5'034'263;
constexpr std::uint64_t kOutputTotal = 618'284;
constexpr std::uint64_t kReasoningTotal = 518'080;
constexpr std::uint64_t kStageOneInput = 2'100;
constexpr std::uint64_t kStageOneOutput = 620;
constexpr std::uint64_t kStageOneReasoning = 480;

const std::set<std::size_t> kAdditionalRuns = {1, 4, 6, 9, 12, 15, 17, 20, 23, 26, 28};
constexpr std::size_t kSplitRun = 12;  // Price perfunctory, G&W additional
const std::set<std::size_t> kLikelyRuns = {7, 21};
constexpr std::size_t kNoCiteRun = 25;
const std::set<std::size_t> kEssentialExpectation = {2, 10, 16, 22, 29};
constexpr std::size_t kPerfunctoryExpectation = 18;

std::string stage_one_response(std::size_t run, const CitationContext& ctx) {
  const bool gw_additional = kAdditionalRuns.count(run) > 0;
  const bool price_additional = gw_additional && run != kSplitRun;
  auto label = [](bool additional) {
    return additional ? "Supplementary-Additional-Information" : "Supplementary-Perfunctory";
  };
  std::string function = "Supplementary-Additional-Information";
  if (kEssentialExpectation.count(run)) function = "Essential-Basic";
  if (run == kPerfunctoryExpectation) function = "Supplementary-Perfunctory";

  std::string gw_note;
  if (run == kNoCiteRun) {
    gw_note = "Gilbert and Woolgar (1974) review the uses of citation counts; the footnote gives no sign of how they "
              "treat Price, so no particular pattern is predicted.";
  } else if (kLikelyRuns.count(run)) {
    gw_note = "Gilbert and Woolgar (1974) are likely to cite Price (1970) when they define the two terms, most "
              "plausibly as " + function + ".";
  } else {
    const char* verb = run % 3 == 0 ? "reference" : "cite";
    gw_note = std::string("Gilbert and Woolgar (1974) are expected to ") + verb +
              " Price (1970) for the distinction, in a manner consistent with " + function + ".";
  }
  const std::string price_note =
      "Price (1970) predates the other two sources, so no citation of them is anticipated there.";

  Json out{{"citation_context", ctx.text},
           {"citing_paper", ctx.citing_paper},
           {"cited_papers",
            Json::array({Json{{"cited_paper", "Price-1970"},
                              {"classification_category", label(price_additional)},
                              {"classification_explanation",
                               price_additional ? "Credited as the origin of the distinction, adding some information."
                                                : "Named as a source of the distinction without further comment."},
                              {"content_expectation",
                               "Price (1970) should define 'reference' and 'citation' as two directions of a bibliographic link."},
                              {"citation_expectation", price_note}},
                         Json{{"cited_paper", "GilbertWoolgar-1974"},
                              {"classification_category", label(gw_additional)},
                              {"classification_explanation",
                               gw_additional ? "Presented as restating the distinction, which adds a second source."
                                             : "Mentioned as a restatement of the distinction without comment."},
                              {"content_expectation",
                               "Gilbert and Woolgar (1974) should restate the distinction while reviewing citation analysis."},
                              {"citation_expectation", gw_note}}})}};
  return out.dump(2);
}

struct Reading {
  const char* hypothesis;
  const char* justification;
};

// Scripted readings; a few carry the "reiter" stem.
const Reading kReadings[] = {
    {"The footnote guards against objections to mixing the two terms.",
     "Relaxing the distinction up front lets the later analyses move between reference lists and citation counts."},
    {"The pairing presents the distinction as settled by repetition.",
     "Saying the distinction was reiterated makes two sources look like a consensus."},
    {"The note gives Price priority over the later review.",
     "Price is named as the one who introduced the terms; the review only repeats them."},
    {"The authors signal that they know the terminology is policed.",
     "Naming both sources shows awareness of the debate before the terms are set aside."},
    {"The footnote turns a definitional question into an empirical one.",
     "The distinction is held back until the results are reported, so the data can decide."},
    {"The review is reduced to an echo of Price.",
     "Describing the review as having reiterated Price leaves its own critical argument out of view."},
    {"The citation appeals to readers from two research communities.",
     "Bibliometric and sociological readers each find a familiar source in the pairing."},
    {"The authors claim the right to redefine the terms for their study.",
     "The phrase 'we relax' asserts control over how the distinction applies in the paper."},
    {"The note foregrounds the findings as the real contribution.",
     "The distinction is deferred so that attention stays on the results."},
    {"Citing the review borrows its standing in the sociology of science.",
     "The review carries weight with the journal's readers, which the pairing draws on."},
    {"The footnote aligns the paper with Price's program of citation measurement.",
     "Using citation counts later in the paper fits the bibliometric line that Price represents."},
    {"The pairing works as a pointer for readers new to the topic.",
     "Two standard sources are offered as a starting point for anyone unfamiliar with the terms."},
    {"The note takes a pragmatic stance toward terminology.",
     "The terms are treated as tools to be relaxed when the analysis requires it."},
};
constexpr std::size_t kReadingCount = sizeof(kReadings) / sizeof(kReadings[0]);

const char* kTowardClauses[] = {
    " A neutral reference can hide a corrective undertone here.",
    " It rewrites the genealogy of the idea by highlighting one antecedent.",
    " The nod to a critical source mutes the critique.",
    " It enrols rival audiences while reframing the divide across perspectives.",
};
const char* kAwayClauses[] = {
    " The citation reads as a nod to collaborators that reinforces social ties.",
    " A cluster of sources lends borrowed authority although they are loosely connected.",
    " The reference list offers survey material for a student reader.",
    " Generous praise may carry a veiled criticism.",
};

std::string stage_two_response(const StageOneRecord& seed, PromptSetting setting, std::size_t slot) {
  Json hyps = Json::array();
  const std::size_t base = (slot * 3 + seed.index) % kReadingCount;
  for (std::size_t j = 0; j < kHypothesesPerRun; ++j) {
    const Reading& r = kReadings[(base + j) % kReadingCount];
    std::string justification = r.justification;
    if ((slot + j) % 3 == 0) {
      if (setting.nudge == Nudge::Toward) justification += kTowardClauses[(slot + j) % 4];
      if (setting.nudge == Nudge::Away) justification += kAwayClauses[(slot + j) % 4];
    }
    hyps.push_back(Json{{"hypothesis", r.hypothesis}, {"justification", justification}});
  }
  Json out = Json::object();
  if (setting.base == BasePrompt::FourStep) {
    Json checks = Json::array();
    for (const auto& c : seed.parsed->cited_papers) {
      const bool gw = c.cited_paper == "GilbertWoolgar-1974";
      checks.push_back(Json{{"cited_paper", c.cited_paper},
                            {"content_presence", "yes"},
                            {"content_framing", gw ? "different" : "expected"},
                            {"content_justification", gw ? "The terms are defined, but inside a critical review."
                                                         : "The two terms are defined as expected."},
                            {"citation_presence", gw ? "yes" : "not applicable"},
                            {"citation_function", gw ? "different" : "not applicable"},
                            {"citation_justification", gw ? "Price is cited, though not where the terms are defined."
                                                          : "Price cannot cite the later works."}});
    }
    out["expectation_check"] = std::move(checks);
    Json cues = Json::array();
    cues.push_back(Json{{"cue", "introduced by"}, {"explanation", "Assigns origin to one source."}});
    cues.push_back(Json{{"cue", "then reiterated"}, {"explanation", "Casts the second source as repetition."}});
    cues.push_back(Json{{"cue", "We relax"}, {"explanation", "Announces a temporary loosening of the terms."}});
    out["lexical_cues"] = std::move(cues);
    out["extended_context"] = Json{{"placement", "Footnote attached to the methods section."},
                                   {"recurrence", "Both sources recur only in the bibliometric part."},
                                   {"relational_cues", "Sequence words order the two sources in time."},
                                   {"co_citation_patterns", "The two sources appear together only here."},
                                   {"narrative_function", "Clears the ground for mixing content coding and counts."}};
  }
  out["alternative_hypotheses"] = std::move(hyps);
  return out.dump(2);
}

Transcript make_transcript(const std::string& key, const PromptBundle& bundle, std::uint64_t call_index,
                           std::string response, Usage usage) {
  Transcript t;
  t.key = key;
  t.request_summary.stage = bundle.stage;
  t.request_summary.setting_label = bundle.setting ? setting_label(*bundle.setting) : "";
  t.request_summary.call_index = call_index;
  for (const auto& a : bundle.attachments) t.request_summary.attachment_digests.push_back({a.name, sha256_hex(a.bytes)});
  t.response_text = std::move(response);
  t.usage = usage;
  t.created_at = "2025-09-01T00:00:00Z";
  t.provider_echo = Json{{"model", "gpt-5-2025-08-07"}, {"temperature", 1.0}, {"reasoning", {{"effort", "high"}}}};
  return t;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: make_fixtures <source-root>\n";
    return 2;
  }
  try {
    const fs::path root = argv[1];
    const fs::path fixtures = root / "fixtures";
    const fs::path transcripts = fixtures / "replay" / "transcripts";
    fs::create_directories(transcripts);
    for (const auto& e : fs::directory_iterator(transcripts)) {
      if (e.path().extension() == ".json") fs::remove(e.path());
    }

    std::ifstream in(fixtures / "context.json");
    const CitationContext context = citation_context_from_json(Json::parse(in));
    const auto attachments = load_attachments((fixtures / "attachments").string());
    const RunManifest manifest;
    ReplayStore replay(transcripts);

    const PromptBundle s1 = build_stage_one_prompt(context, classification_scheme());
    for (std::size_t run = 0; run < manifest.stage_one_count; ++run) {
      const std::uint64_t call = run * kCallStride;
      replay.save(make_transcript(transcript_key(s1, manifest.provider, call), s1, call,
                                  stage_one_response(run, context),
                                  {kStageOneInput, kStageOneOutput, kStageOneReasoning}));
    }

    Gateway gateway(replay, nullptr, GatewayOptions{});
    Orchestrator orchestrator(gateway);
    const auto records = orchestrator.execute_stage_one(manifest, context);
    const auto seeds = sample_seeds(records, manifest.seed_sample_size, manifest.rng_seed);

    const std::size_t runs = seeds.size() * manifest.settings.size();
    const std::uint64_t in_left = kInputTotal - kStageOneInput * manifest.stage_one_count;
    const std::uint64_t out_left = kOutputTotal - kStageOneOutput * manifest.stage_one_count;
    const std::uint64_t reason_left = kReasoningTotal - kStageOneReasoning * manifest.stage_one_count;
    const std::uint64_t out4 = out_left * 7271 / (7271 + 6469) / (runs / 2);
    const std::uint64_t out1 = out_left * 6469 / (7271 + 6469) / (runs / 2);
    std::uint64_t in_used = 0, out_used = 0, reason_used = 0;

    std::size_t slot = 0;
    for (const auto& seed : seeds) {
      for (PromptSetting setting : manifest.settings) {
        const PromptBundle bundle = build_stage_two_prompt(setting, *seed.parsed, attachments);
        const std::uint64_t call = slot * kCallStride;
        const bool last = slot + 1 == runs;
        Usage u;
        u.input_tokens = last ? in_left - in_used : in_left / runs;
        u.output_tokens = last ? out_left - out_used : (setting.base == BasePrompt::FourStep ? out4 : out1);
        u.reasoning_tokens = last ? reason_left - reason_used : u.output_tokens * reason_left / out_left;
        in_used += u.input_tokens;
        out_used += u.output_tokens;
        reason_used += u.reasoning_tokens;
        replay.save(make_transcript(transcript_key(bundle, manifest.provider, call), bundle, call,
                                    stage_two_response(seed, setting, slot), u));
        ++slot;
      }
    }

    const auto run_records = orchestrator.execute_stage_two(manifest, seeds, attachments);
    std::vector<HypothesisUnit> units;
    for (const auto& r : run_records) {
      for (auto& u : hypothesis_units(*r.parsed)) units.push_back(std::move(u));
    }
    std::ifstream counts_in(fixtures / "table3_counts.csv");
    std::stringstream counts_text;
    counts_text << counts_in.rdbuf();
    std::vector<std::pair<std::string, CellCounts>> counts;
    for (const auto& [code, cells] : parse_count_table(counts_text.str())) {
      CellCounts c{};
      for (std::size_t s = 0; s < 6; ++s) c[s].count = cells[s];
      counts.emplace_back(code, c);
    }
    std::ofstream codes_out(fixtures / "codes_table3.csv", std::ios::trunc | std::ios::binary);
    codes_out << matrix_to_csv(synthesize_matrix_from_counts(counts, layout_from_units(units)));

    const CostReport cost = accumulate_cost(replay.all(), manifest.provider);
    std::printf("transcripts %zu, input %llu, output %llu, reasoning %llu, cost $%.2f (reasoning $%.2f)\n",
                replay.size(), static_cast<unsigned long long>(cost.input_tokens),
                static_cast<unsigned long long>(cost.output_tokens),
                static_cast<unsigned long long>(cost.reasoning_tokens), cost.total_cost, cost.reasoning_cost);
    const auto hedges = hedge_counts(expectation_notes(records));
    std::printf("hedges %zu/%zu/%zu, units %zu\n", hedges.expected_to, hedges.likely_to, hedges.may, units.size());
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "make_fixtures: " << e.what() << '\n';
    return 1;
  }
}
