#pragma once

#include <array>
#include <memory>
#include <optional>
#include <regex>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "workbench/domain.hpp"
#include "workbench/stats.hpp"
#include "workbench/store.hpp"

namespace workbench {

class Stopwords {
 public:
  // One word per line; '#' lines are comments.
  static Stopwords parse(std::string_view text);
  static const Stopwords& shipped();

  bool contains(std::string_view word) const { return words_.count(std::string(word)) > 0; }
  std::size_t size() const noexcept { return words_.size(); }

 private:
  std::unordered_set<std::string> words_;
};

// Lowercases, splits into word tokens (letters, digits, word-internal
// apostrophes and hyphens, any non-ASCII byte), drops stopwords and joins the
// rest with single spaces.
std::string normalize(std::string_view text, const Stopwords& stopwords = Stopwords::shipped());
// The same tokenization without stopword removal.
std::string lowercase_tokens(std::string_view text);

struct MarkerItem {
  std::string label;
  std::string pattern;
  std::vector<Nudge> sources;
  std::string example;

  // Alternatives without a space run on normalized text; multi-word ones run
  // on lowercase_tokens() so stopword removal cannot split them.
  std::optional<std::regex> single_word;
  std::optional<std::regex> multi_word;

  bool matches(const std::string& normalized, const std::string& tokens) const;
};

class MarkerLexicon {
 public:
  // label,pattern,sources,example. Errors: InvalidArgument, DuplicateName.
  static MarkerLexicon parse(std::string_view csv_text);
  static const MarkerLexicon& shipped();

  const std::vector<MarkerItem>& items() const noexcept { return items_; }
  std::size_t size() const noexcept { return items_.size(); }
  std::vector<std::string> labels() const;
  std::optional<std::size_t> index_of(std::string_view label) const;

 private:
  std::vector<MarkerItem> items_;
};

std::vector<std::uint8_t> marker_indicators(std::string_view text, const MarkerLexicon& lexicon);
std::vector<std::uint8_t> marker_indicators(const HypothesisUnit& unit, const MarkerLexicon& lexicon);

IndicatorMatrix indicator_matrix(std::span<const HypothesisUnit> units, const MarkerLexicon& lexicon);

struct HedgeCounts {
  std::size_t expected_to = 0;
  std::size_t likely_to = 0;
  std::size_t may = 0;

  friend bool operator==(const HedgeCounts&, const HedgeCounts&) = default;
};

HedgeCounts hedge_counts(std::span<const std::string> notes);
// The citation_expectation notes of every parsed stage-one record.
std::vector<std::string> expectation_notes(std::span<const StageOneRecord> records);

struct CooccurrenceShare {
  std::string code;
  std::size_t code_rows = 0;
  std::size_t term_rows = 0;
  std::size_t joint_rows = 0;
  std::optional<double> share_with_term;  // P(term | code); absent when code_rows == 0
  std::optional<double> code_given_term;  // P(code | term); absent when term_rows == 0
};

// Per-code co-occurrence with a term pattern over the units' normalized text.
// Rows are matched by hypothesis id. Errors: RowMismatch.
std::vector<CooccurrenceShare> reiter_cooccurrence(const CodeMatrix& matrix, std::span<const HypothesisUnit> units,
                                                   std::string_view term_pattern = "reiter");
// Same, with the term given as a column of an indicator matrix.
std::vector<CooccurrenceShare> reiter_cooccurrence(const CodeMatrix& matrix, const IndicatorMatrix& indicators,
                                                   std::string_view column);

struct MarkerEffects {
  std::string label;
  std::array<EffectEstimate, 3> ames;  // indexed like kAllAmeKinds
  std::array<double, 3> q_values{};
  std::array<bool, 3> significant{};
  TestResult omnibus;
  CellCounts counts{};
};

struct EchoStudy {
  std::vector<MarkerEffects> markers;
  double alpha = 0.05;
  Correction correction = Correction::CR1;
  std::string matrix_digest;
};

// One LPM per marker; BH-FDR within each AME family separately.
// Errors: DimensionMismatch (units vs design), stats errors.
EchoStudy echo_study(std::span<const HypothesisUnit> units, const MarkerLexicon& lexicon,
                     std::span<const DesignRow> design, double alpha, Correction correction = Correction::CR1);

// Fits every column of an indicator matrix; shared by echo_study.
EchoStudy echo_study(const IndicatorMatrix& indicators, std::span<const DesignRow> design, double alpha,
                     Correction correction = Correction::CR1);

std::vector<DesignRow> design_from_units(std::span<const HypothesisUnit> units);

}  // namespace workbench
