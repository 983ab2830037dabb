#pragma once

#include <array>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "workbench/lexical.hpp"
#include "workbench/stats.hpp"
#include "workbench/store.hpp"

namespace workbench {

struct AnalysisOptions {
  Correction correction = Correction::CR1;
  Reference reference = Reference::Normal;
  double alpha = 0.05;
};

struct CellContrast {
  PromptSetting a;
  PromptSetting b;
  EffectEstimate effect;
};

struct CodeEffects {
  std::string code;
  std::array<EffectEstimate, 3> ames;  // indexed like kAllAmeKinds
  TestResult omnibus;
  CellCounts counts{};
  std::vector<CellContrast> contrasts;  // every unordered pair, canonical order, a before b
  std::array<double, 6> cell_means{};   // fitted, indexed like kAllSettings
};

struct AnalysisReport {
  std::vector<CodeEffects> codes;
  std::optional<EchoStudy> markers;
  int codebook_version = 0;
  std::string matrix_digest;
  AnalysisOptions options;

  const CodeEffects& code(std::string_view name) const;
};

// Errors: stats errors.
AnalysisReport run_analysis(const CodeMatrix& matrix, const AnalysisOptions& options);
// Errors: NoMatrix, stats errors.
AnalysisReport run_analysis_codes(const CorpusStore& store, const AnalysisOptions& options);
// Adds the marker echo study over the store's hypothesis units.
void add_marker_analysis(AnalysisReport& report, const CorpusStore& store, const MarkerLexicon& lexicon);

const EffectEstimate& find_contrast(const CodeEffects& effects, PromptSetting a, PromptSetting b);

enum class EffectSubject { Codes, Markers };

struct DotWhiskerRow {
  std::string name;
  double estimate = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  bool significant = false;
};

// Ordered by estimate, largest first. Codes: flag when the CI excludes 0;
// markers: flag when q < alpha. Errors: UnknownFamily.
std::vector<DotWhiskerRow> emit_dotwhisker(const AnalysisReport& report, AmeKind family,
                                           EffectSubject subject = EffectSubject::Codes);

// name,estimate_pp,ci_low_pp,ci_high_pp,significant (or raw proportions).
std::string dotwhisker_csv(const std::vector<DotWhiskerRow>& rows, bool raw = false);
Json dotwhisker_json(const std::vector<DotWhiskerRow>& rows, AmeKind family, EffectSubject subject, bool raw = false);

// code,effect_kind,estimate_pp,se_pp,ci_low_pp,ci_high_pp,p,q,flag
std::string effects_csv(const AnalysisReport& report, bool raw = false);
// code,stat,df,rank,p,flag
std::string omnibus_csv(const AnalysisReport& report);
Json report_json(const AnalysisReport& report);
Json echo_json(const EchoStudy& study);
Json cell_counts_json(const CellCounts& counts);

// One decimal, with -0.0 printed as 0.0.
std::string format_pp(double proportion);

}  // namespace workbench
