#include "workbench/domain.hpp"

#include <algorithm>
#include <cstdio>

#include "workbench/error.hpp"

namespace workbench {

std::string trim(std::string_view text) {
  constexpr std::string_view kSpace = " \t\r\n\f\v";
  const auto first = text.find_first_not_of(kSpace);
  if (first == std::string_view::npos) return {};
  const auto last = text.find_last_not_of(kSpace);
  return std::string(text.substr(first, last - first + 1));
}

std::string_view category_label(Category category) noexcept {
  switch (category) {
    case Category::EssentialBasic: return "Essential-Basic";
    case Category::EssentialSubsidiary: return "Essential-Subsidiary";
    case Category::SupplementaryAdditionalInformation: return "Supplementary-Additional-Information";
    case Category::SupplementaryPerfunctory: return "Supplementary-Perfunctory";
    case Category::NegationalPartial: return "Negational-Partial";
    case Category::NegationalTotal: return "Negational-Total";
  }
  return {};
}

Category parse_category(std::string_view text) {
  const std::string value = trim(text);
  for (Category c : kAllCategories) {
    if (category_label(c) == value) return c;
  }
  fail(ErrorCode::SchemaViolation, "unknown classification category \"" + value + "\"");
}

std::size_t setting_index(PromptSetting setting) noexcept {
  const auto it = std::find(kAllSettings.begin(), kAllSettings.end(), setting);
  return static_cast<std::size_t>(it - kAllSettings.begin());
}

std::string_view nudge_label(Nudge nudge) noexcept {
  switch (nudge) {
    case Nudge::Toward: return "Toward";
    case Nudge::Away: return "Away";
    case Nudge::NoNudge: return "No-nudge";
  }
  return {};
}

std::string setting_label(PromptSetting setting) {
  std::string label = setting.base == BasePrompt::FourStep ? "4-step/" : "1-step/";
  label += nudge_label(setting.nudge);
  return label;
}

PromptSetting parse_setting_label(std::string_view label) {
  for (PromptSetting s : kAllSettings) {
    if (setting_label(s) == label) return s;
  }
  fail(ErrorCode::UnknownLabel, "unknown prompt setting label \"" + std::string(label) + "\"");
}

std::string setting_slug(PromptSetting setting) {
  std::string slug = setting.base == BasePrompt::FourStep ? "4step-" : "1step-";
  switch (setting.nudge) {
    case Nudge::Toward: slug += "toward"; break;
    case Nudge::Away: slug += "away"; break;
    case Nudge::NoNudge: slug += "nonudge"; break;
  }
  return slug;
}

void CitationContext::validate() const {
  if (trim(text).empty()) fail(ErrorCode::EmptyContext, "citation context " + id + " has no text");
  if (cited_papers.empty()) {
    fail(ErrorCode::SchemaViolation, "citation context " + id + " names no cited paper");
  }
  if (citing_paper.empty()) {
    fail(ErrorCode::SchemaViolation, "citation context " + id + " names no citing paper");
  }
}

bool CitationContext::cites(std::string_view paper) const {
  return std::find(cited_papers.begin(), cited_papers.end(), paper) != cited_papers.end();
}

CitationContext citation_context_from_json(const Json& j) {
  try {
    CitationContext c;
    c.id = j.at("id").get<std::string>();
    c.text = j.at("text").get<std::string>();
    c.citing_paper = j.at("citing_paper").get<std::string>();
    c.cited_papers = j.at("cited_papers").get<std::vector<std::string>>();
    return c;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::SchemaViolation, std::string("citation context: ") + e.what());
  }
}

Json to_json(const CitationContext& context) {
  return Json{{"id", context.id},
              {"text", context.text},
              {"citing_paper", context.citing_paper},
              {"cited_papers", context.cited_papers}};
}

Json to_json(const StageOneResult& result) {
  Json cited = Json::array();
  for (const auto& r : result.cited_papers) {
    cited.push_back(Json{{"cited_paper", r.cited_paper},
                         {"classification_category", category_label(r.classification_category)},
                         {"classification_explanation", r.classification_explanation},
                         {"content_expectation", r.content_expectation},
                         {"citation_expectation", r.citation_expectation}});
  }
  return Json{{"citation_context", result.citation_context},
              {"citing_paper", result.citing_paper},
              {"cited_papers", std::move(cited)}};
}

StageOneResult stage_one_from_json(const Json& j) {
  StageOneResult r;
  r.citation_context = j.at("citation_context").get<std::string>();
  r.citing_paper = j.at("citing_paper").get<std::string>();
  for (const auto& c : j.at("cited_papers")) {
    r.cited_papers.push_back(CitedPaperReading{
        c.at("cited_paper").get<std::string>(),
        parse_category(c.at("classification_category").get<std::string>()),
        c.at("classification_explanation").get<std::string>(),
        c.at("content_expectation").get<std::string>(),
        c.at("citation_expectation").get<std::string>(),
    });
  }
  return r;
}

std::string_view presence_label(Presence p) noexcept {
  switch (p) {
    case Presence::Yes: return "yes";
    case Presence::No: return "no";
    case Presence::NotApplicable: return "not applicable";
  }
  return {};
}

std::string_view conformity_label(Conformity c) noexcept {
  switch (c) {
    case Conformity::Expected: return "expected";
    case Conformity::Different: return "different";
    case Conformity::NotApplicable: return "not applicable";
  }
  return {};
}

namespace {

Presence parse_presence(const std::string& text) {
  const std::string v = trim(text);
  for (Presence p : {Presence::Yes, Presence::No, Presence::NotApplicable}) {
    if (presence_label(p) == v) return p;
  }
  fail(ErrorCode::SchemaViolation, "bad presence label \"" + v + "\"");
}

Conformity parse_conformity(const std::string& text) {
  const std::string v = trim(text);
  for (Conformity c : {Conformity::Expected, Conformity::Different, Conformity::NotApplicable}) {
    if (conformity_label(c) == v) return c;
  }
  fail(ErrorCode::SchemaViolation, "bad framing/function label \"" + v + "\"");
}

}  // namespace

std::size_t StageTwoResult::intermediate_sections() const noexcept {
  return static_cast<std::size_t>(expectation_check.has_value()) +
         static_cast<std::size_t>(lexical_cues.has_value()) +
         static_cast<std::size_t>(extended_context.has_value());
}

Json output_json(const StageTwoResult& result) {
  Json out = Json::object();
  if (result.expectation_check) {
    Json checks = Json::array();
    for (const auto& c : *result.expectation_check) {
      checks.push_back(Json{{"cited_paper", c.cited_paper},
                            {"content_presence", presence_label(c.content_presence)},
                            {"content_framing", conformity_label(c.content_framing)},
                            {"content_justification", c.content_justification},
                            {"citation_presence", presence_label(c.citation_presence)},
                            {"citation_function", conformity_label(c.citation_function)},
                            {"citation_justification", c.citation_justification}});
    }
    out["expectation_check"] = std::move(checks);
  }
  if (result.lexical_cues) {
    Json cues = Json::array();
    for (const auto& c : *result.lexical_cues) {
      cues.push_back(Json{{"cue", c.cue}, {"explanation", c.explanation}});
    }
    out["lexical_cues"] = std::move(cues);
  }
  if (result.extended_context) {
    const auto& e = *result.extended_context;
    out["extended_context"] = Json{{"placement", e.placement},
                                   {"recurrence", e.recurrence},
                                   {"relational_cues", e.relational_cues},
                                   {"co_citation_patterns", e.co_citation_patterns},
                                   {"narrative_function", e.narrative_function}};
  }
  Json hyps = Json::array();
  for (const auto& h : result.alternative_hypotheses) {
    hyps.push_back(Json{{"hypothesis", h.hypothesis}, {"justification", h.justification}});
  }
  out["alternative_hypotheses"] = std::move(hyps);
  return out;
}

Json to_json(const StageTwoResult& result) {
  Json j{{"run_id", result.run_id},
         {"setting", setting_label(result.setting)},
         {"seed_stage_one", result.seed_stage_one}};
  j["output"] = output_json(result);
  return j;
}

StageTwoResult stage_two_from_json(const Json& j) {
  StageTwoResult r;
  r.run_id = j.at("run_id").get<std::string>();
  r.setting = parse_setting_label(j.at("setting").get<std::string>());
  r.seed_stage_one = j.at("seed_stage_one").get<std::string>();
  const Json& out = j.at("output");
  if (out.contains("expectation_check")) {
    std::vector<ExpectationCheck> checks;
    for (const auto& c : out.at("expectation_check")) {
      checks.push_back(ExpectationCheck{
          c.at("cited_paper").get<std::string>(),
          parse_presence(c.at("content_presence").get<std::string>()),
          parse_conformity(c.at("content_framing").get<std::string>()),
          c.at("content_justification").get<std::string>(),
          parse_presence(c.at("citation_presence").get<std::string>()),
          parse_conformity(c.at("citation_function").get<std::string>()),
          c.at("citation_justification").get<std::string>(),
      });
    }
    r.expectation_check = std::move(checks);
  }
  if (out.contains("lexical_cues")) {
    std::vector<LexicalCue> cues;
    for (const auto& c : out.at("lexical_cues")) {
      cues.push_back({c.at("cue").get<std::string>(), c.at("explanation").get<std::string>()});
    }
    r.lexical_cues = std::move(cues);
  }
  if (out.contains("extended_context")) {
    const Json& e = out.at("extended_context");
    r.extended_context = ExtendedContext{
        e.at("placement").get<std::string>(),
        e.at("recurrence").get<std::string>(),
        e.at("relational_cues").get<std::string>(),
        e.at("co_citation_patterns").get<std::string>(),
        e.at("narrative_function").get<std::string>(),
    };
  }
  for (const auto& h : out.at("alternative_hypotheses")) {
    r.alternative_hypotheses.push_back(
        {h.at("hypothesis").get<std::string>(), h.at("justification").get<std::string>()});
  }
  return r;
}

std::string hypothesis_id(std::string_view run_id, int index) {
  return std::string(run_id) + "-h" + std::to_string(index);
}

std::string HypothesisUnit::id() const { return hypothesis_id(run_id, index); }

std::string HypothesisUnit::text() const { return hypothesis + " " + justification; }

std::vector<HypothesisUnit> hypothesis_units(const StageTwoResult& result) {
  std::vector<HypothesisUnit> units;
  units.reserve(result.alternative_hypotheses.size());
  int index = 1;
  for (const auto& h : result.alternative_hypotheses) {
    units.push_back(HypothesisUnit{result.run_id, index++, h.hypothesis, h.justification, result.setting});
  }
  return units;
}

Json to_json(const HypothesisUnit& unit) {
  return Json{{"id", unit.id()},
              {"run_id", unit.run_id},
              {"index", unit.index},
              {"setting", setting_label(unit.setting)},
              {"hypothesis", unit.hypothesis},
              {"justification", unit.justification}};
}

HypothesisUnit hypothesis_unit_from_json(const Json& j) {
  HypothesisUnit u;
  u.run_id = j.at("run_id").get<std::string>();
  u.index = j.at("index").get<int>();
  u.setting = parse_setting_label(j.at("setting").get<std::string>());
  u.hypothesis = j.at("hypothesis").get<std::string>();
  u.justification = j.at("justification").get<std::string>();
  return u;
}

std::string make_run_id(std::size_t seed_index, PromptSetting setting, std::size_t slot) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "s2-%02zu-%s-%03zu", seed_index, setting_slug(setting).c_str(), slot);
  return buf;
}

std::string make_stage_one_id(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "s1-%02zu", index);
  return buf;
}

}  // namespace workbench
