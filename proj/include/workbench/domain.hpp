#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace workbench {

using Json = nlohmann::ordered_json;

// Chubin & Moitra's six mutually exclusive citation categories.
enum class Category {
  EssentialBasic,
  EssentialSubsidiary,
  SupplementaryAdditionalInformation,
  SupplementaryPerfunctory,
  NegationalPartial,
  NegationalTotal,
};

inline constexpr std::array<Category, 6> kAllCategories = {
    Category::EssentialBasic,
    Category::EssentialSubsidiary,
    Category::SupplementaryAdditionalInformation,
    Category::SupplementaryPerfunctory,
    Category::NegationalPartial,
    Category::NegationalTotal,
};

std::string_view category_label(Category category) noexcept;
// Exact match after trimming surrounding whitespace; throws SchemaViolation.
Category parse_category(std::string_view text);

enum class BasePrompt { OneStep, FourStep };
enum class Nudge { Toward, Away, NoNudge };

struct PromptSetting {
  BasePrompt base = BasePrompt::OneStep;
  Nudge nudge = Nudge::NoNudge;

  friend constexpr auto operator<=>(const PromptSetting&, const PromptSetting&) = default;
};

// Canonical order: 4-step/{Toward, Away, No-nudge}, then 1-step/{...}.
inline constexpr std::array<PromptSetting, 6> kAllSettings = {{
    {BasePrompt::FourStep, Nudge::Toward},
    {BasePrompt::FourStep, Nudge::Away},
    {BasePrompt::FourStep, Nudge::NoNudge},
    {BasePrompt::OneStep, Nudge::Toward},
    {BasePrompt::OneStep, Nudge::Away},
    {BasePrompt::OneStep, Nudge::NoNudge},
}};

// Position of the setting in kAllSettings.
std::size_t setting_index(PromptSetting setting) noexcept;

// "4-step/Toward", "1-step/No-nudge", ...
std::string setting_label(PromptSetting setting);
// Throws UnknownLabel for anything but the six canonical labels.
PromptSetting parse_setting_label(std::string_view label);
// Identifier-safe form used in run ids: "4step-toward", "1step-nonudge".
std::string setting_slug(PromptSetting setting);

std::string_view nudge_label(Nudge nudge) noexcept;

struct CitationContext {
  std::string id;
  std::string text;
  std::string citing_paper;
  std::vector<std::string> cited_papers;

  // Throws EmptyContext / SchemaViolation.
  void validate() const;
  bool cites(std::string_view paper) const;
};

CitationContext citation_context_from_json(const Json& j);
Json to_json(const CitationContext& context);

struct CitedPaperReading {
  std::string cited_paper;
  Category classification_category = Category::SupplementaryPerfunctory;
  std::string classification_explanation;
  std::string content_expectation;
  std::string citation_expectation;
};

struct StageOneResult {
  std::string citation_context;
  std::string citing_paper;
  std::vector<CitedPaperReading> cited_papers;
};

Json to_json(const StageOneResult& result);
// Trusted reload path (store files); no schema checks.
StageOneResult stage_one_from_json(const Json& j);

enum class Presence { Yes, No, NotApplicable };
enum class Conformity { Expected, Different, NotApplicable };

std::string_view presence_label(Presence p) noexcept;
std::string_view conformity_label(Conformity c) noexcept;

struct ExpectationCheck {
  std::string cited_paper;
  Presence content_presence = Presence::NotApplicable;
  Conformity content_framing = Conformity::NotApplicable;
  std::string content_justification;
  Presence citation_presence = Presence::NotApplicable;
  Conformity citation_function = Conformity::NotApplicable;
  std::string citation_justification;
};

struct LexicalCue {
  std::string cue;
  std::string explanation;
};

struct ExtendedContext {
  std::string placement;
  std::string recurrence;
  std::string relational_cues;
  std::string co_citation_patterns;
  std::string narrative_function;
};

struct HypothesisPair {
  std::string hypothesis;
  std::string justification;
};

inline constexpr std::size_t kHypothesesPerRun = 5;

struct StageTwoResult {
  std::string run_id;
  PromptSetting setting;
  std::string seed_stage_one;
  std::optional<std::vector<ExpectationCheck>> expectation_check;
  std::optional<std::vector<LexicalCue>> lexical_cues;
  std::optional<ExtendedContext> extended_context;
  std::vector<HypothesisPair> alternative_hypotheses;

  // Number of intermediate sections present (3 for 4-step, 0 for 1-step).
  std::size_t intermediate_sections() const noexcept;
};

// The model-output shape only (no run bookkeeping).
Json output_json(const StageTwoResult& result);
// Full record including run_id, setting and seed reference.
Json to_json(const StageTwoResult& result);
StageTwoResult stage_two_from_json(const Json& j);

struct HypothesisUnit {
  std::string run_id;
  int index = 1;  // 1..5
  std::string hypothesis;
  std::string justification;
  PromptSetting setting;

  std::string id() const;
  // Hypothesis and justification analysed together as one unit.
  std::string text() const;
};

std::string hypothesis_id(std::string_view run_id, int index);
std::vector<HypothesisUnit> hypothesis_units(const StageTwoResult& result);

Json to_json(const HypothesisUnit& unit);
HypothesisUnit hypothesis_unit_from_json(const Json& j);

// "s2-{seed}-{setting}-{counter}", e.g. "s2-07-4step-toward-042".
std::string make_run_id(std::size_t seed_index, PromptSetting setting, std::size_t slot);
std::string make_stage_one_id(std::size_t index);

std::string trim(std::string_view text);

}  // namespace workbench
