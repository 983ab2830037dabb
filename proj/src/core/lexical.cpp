#include "workbench/lexical.hpp"

#include <algorithm>
#include <set>
#include <sstream>
#include <unordered_map>

#include "assets.hpp"
#include "csv.hpp"
#include "workbench/error.hpp"

namespace workbench {

namespace {

constexpr auto kFlags = std::regex::ECMAScript | std::regex::icase | std::regex::optimize;

bool token_byte(unsigned char c) {
  return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '\'' || c == '-' || c >= 0x80;
}

// Lowercase ASCII and fold typographic apostrophes and dashes so that
// "Authors’" and "Authors'" tokenize the same way.
std::string fold(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    const unsigned char c = static_cast<unsigned char>(text[i]);
    if (c == 0xE2 && i + 2 < text.size() && static_cast<unsigned char>(text[i + 1]) == 0x80) {
      const unsigned char d = static_cast<unsigned char>(text[i + 2]);
      if (d == 0x98 || d == 0x99) {  // ‘ ’
        out += '\'';
        i += 2;
        continue;
      }
      if (d == 0x9C || d == 0x9D) {  // “ ”
        out += '"';
        i += 2;
        continue;
      }
      if (d == 0x93 || d == 0x94) {  // en and em dash
        out += ' ';
        i += 2;
        continue;
      }
    }
    out += static_cast<char>(c >= 'A' && c <= 'Z' ? c - 'A' + 'a' : c);
  }
  return out;
}

template <typename Keep>
std::string tokenize(std::string_view text, Keep keep) {
  const std::string folded = fold(text);
  std::string out;
  std::size_t i = 0;
  while (i < folded.size()) {
    if (!token_byte(static_cast<unsigned char>(folded[i]))) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < folded.size() && token_byte(static_cast<unsigned char>(folded[j]))) ++j;
    std::string_view token(folded.data() + i, j - i);
    while (!token.empty() && (token.front() == '\'' || token.front() == '-')) token.remove_prefix(1);
    while (!token.empty() && token.back() == '-') token.remove_suffix(1);
    if (!token.empty() && keep(token)) {
      if (!out.empty()) out += ' ';
      out += token;
    }
    i = j;
  }
  return out;
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(item);
  return out;
}

std::optional<std::regex> compile_alternatives(const std::vector<std::string>& parts, const std::string& label) {
  if (parts.empty()) return std::nullopt;
  std::string joined;
  for (const auto& p : parts) joined += (joined.empty() ? "" : "|") + p;
  try {
    return std::regex(joined, kFlags);
  } catch (const std::regex_error& e) {
    fail(ErrorCode::InvalidArgument, "marker " + label + " has an invalid pattern: " + e.what());
  }
}

const std::regex& hedge_regex(int which) {
  static const std::regex kExpected("[Ee]xpected to (reference|cite)");
  static const std::regex kLikely("[Ll]ikely to (reference|cite)");
  static const std::regex kMay("[Mm]ay (reference|cite)");
  return which == 0 ? kExpected : (which == 1 ? kLikely : kMay);
}

std::vector<CooccurrenceShare> shares(const CodeMatrix& matrix, const std::vector<std::uint8_t>& term) {
  std::vector<CooccurrenceShare> out;
  std::size_t term_rows = 0;
  for (auto t : term) term_rows += t;
  for (std::size_t c = 0; c < matrix.columns.size(); ++c) {
    CooccurrenceShare s;
    s.code = matrix.columns[c];
    s.term_rows = term_rows;
    for (std::size_t r = 0; r < matrix.rows(); ++r) {
      if (!matrix.at(r, c)) continue;
      ++s.code_rows;
      s.joint_rows += term[r];
    }
    if (s.code_rows > 0) s.share_with_term = static_cast<double>(s.joint_rows) / static_cast<double>(s.code_rows);
    if (term_rows > 0) s.code_given_term = static_cast<double>(s.joint_rows) / static_cast<double>(term_rows);
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace

Stopwords Stopwords::parse(std::string_view text) {
  Stopwords s;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    s.words_.insert(fold(line));
  }
  return s;
}

const Stopwords& Stopwords::shipped() {
  static const Stopwords kShipped = parse(assets::verified("lexicon/stopwords.txt"));
  return kShipped;
}

std::string normalize(std::string_view text, const Stopwords& stopwords) {
  return tokenize(text, [&](std::string_view t) { return !stopwords.contains(t); });
}

std::string lowercase_tokens(std::string_view text) {
  return tokenize(text, [](std::string_view) { return true; });
}

bool MarkerItem::matches(const std::string& normalized, const std::string& tokens) const {
  if (single_word && std::regex_search(normalized, *single_word)) return true;
  if (multi_word && std::regex_search(tokens, *multi_word)) return true;
  return false;
}

MarkerLexicon MarkerLexicon::parse(std::string_view csv_text) {
  const auto rows = csv::parse(csv_text);
  if (rows.empty() || rows[0].size() != 4 || rows[0][0] != "label" || rows[0][1] != "pattern" ||
      rows[0][2] != "sources" || rows[0][3] != "example") {
    fail(ErrorCode::InvalidArgument, "lexicon header must be label,pattern,sources,example");
  }
  MarkerLexicon lex;
  std::set<std::string> seen;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.size() != 4) fail(ErrorCode::InvalidArgument, "lexicon row " + std::to_string(r) + " needs 4 fields");
    MarkerItem item;
    item.label = trim(row[0]);
    item.pattern = trim(row[1]);
    item.example = trim(row[3]);
    if (item.label.empty() || item.pattern.empty()) {
      fail(ErrorCode::InvalidArgument, "lexicon row " + std::to_string(r) + " is incomplete");
    }
    if (!seen.insert(item.label).second) fail(ErrorCode::DuplicateName, "duplicate marker label " + item.label);
    for (const auto& s : split(row[2], ';')) {
      const std::string v = trim(s);
      if (v == "Toward") item.sources.push_back(Nudge::Toward);
      else if (v == "Away") item.sources.push_back(Nudge::Away);
      else fail(ErrorCode::InvalidArgument, "marker " + item.label + " has unknown source \"" + v + "\"");
    }
    std::vector<std::string> single, multi;
    for (const auto& alt : split(item.pattern, '|')) {
      (alt.find(' ') == std::string::npos ? single : multi).push_back(alt);
    }
    item.single_word = compile_alternatives(single, item.label);
    item.multi_word = compile_alternatives(multi, item.label);
    lex.items_.push_back(std::move(item));
  }
  return lex;
}

const MarkerLexicon& MarkerLexicon::shipped() {
  static const MarkerLexicon kShipped = parse(assets::verified("lexicon/nudge_markers.csv"));
  return kShipped;
}

std::vector<std::string> MarkerLexicon::labels() const {
  std::vector<std::string> out;
  for (const auto& i : items_) out.push_back(i.label);
  return out;
}

std::optional<std::size_t> MarkerLexicon::index_of(std::string_view label) const {
  for (std::size_t i = 0; i < items_.size(); ++i) {
    if (items_[i].label == label) return i;
  }
  return std::nullopt;
}

std::vector<std::uint8_t> marker_indicators(std::string_view text, const MarkerLexicon& lexicon) {
  const std::string normalized = normalize(text);
  const std::string tokens = lowercase_tokens(text);
  std::vector<std::uint8_t> out(lexicon.size(), 0);
  for (std::size_t i = 0; i < lexicon.size(); ++i) out[i] = lexicon.items()[i].matches(normalized, tokens) ? 1 : 0;
  return out;
}

std::vector<std::uint8_t> marker_indicators(const HypothesisUnit& unit, const MarkerLexicon& lexicon) {
  return marker_indicators(unit.text(), lexicon);
}

IndicatorMatrix indicator_matrix(std::span<const HypothesisUnit> units, const MarkerLexicon& lexicon) {
  IndicatorMatrix m;
  m.columns = lexicon.labels();
  m.cells.reserve(units.size() * m.columns.size());
  for (const auto& u : units) {
    m.row_ids.push_back(u.id());
    m.clusters.push_back(u.run_id);
    m.settings.push_back(u.setting);
    const auto row = marker_indicators(u, lexicon);
    m.cells.insert(m.cells.end(), row.begin(), row.end());
  }
  return m;
}

HedgeCounts hedge_counts(std::span<const std::string> notes) {
  HedgeCounts h;
  for (const auto& n : notes) {
    if (std::regex_search(n, hedge_regex(0))) ++h.expected_to;
    if (std::regex_search(n, hedge_regex(1))) ++h.likely_to;
    if (std::regex_search(n, hedge_regex(2))) ++h.may;
  }
  return h;
}

std::vector<std::string> expectation_notes(std::span<const StageOneRecord> records) {
  std::vector<std::string> notes;
  for (const auto& r : records) {
    if (!r.parsed) continue;
    for (const auto& c : r.parsed->cited_papers) notes.push_back(c.citation_expectation);
  }
  return notes;
}

std::vector<CooccurrenceShare> reiter_cooccurrence(const CodeMatrix& matrix, std::span<const HypothesisUnit> units,
                                                   std::string_view term_pattern) {
  std::unordered_map<std::string, const HypothesisUnit*> by_id;
  for (const auto& u : units) by_id.emplace(u.id(), &u);
  if (by_id.size() != matrix.rows()) {
    fail(ErrorCode::RowMismatch, "code matrix has " + std::to_string(matrix.rows()) + " rows but " +
                                     std::to_string(by_id.size()) + " units were given");
  }
  const std::regex term(std::string(term_pattern), kFlags);
  std::vector<std::uint8_t> hits(matrix.rows(), 0);
  for (std::size_t r = 0; r < matrix.rows(); ++r) {
    const auto it = by_id.find(matrix.row_ids[r]);
    if (it == by_id.end()) fail(ErrorCode::RowMismatch, "no unit for matrix row " + matrix.row_ids[r]);
    hits[r] = std::regex_search(normalize(it->second->text()), term) ? 1 : 0;
  }
  return shares(matrix, hits);
}

std::vector<CooccurrenceShare> reiter_cooccurrence(const CodeMatrix& matrix, const IndicatorMatrix& indicators,
                                                   std::string_view column) {
  if (matrix.row_ids != indicators.row_ids) fail(ErrorCode::RowMismatch, "code and indicator rows differ");
  const std::size_t c = indicators.column_index(column);
  std::vector<std::uint8_t> hits(matrix.rows());
  for (std::size_t r = 0; r < matrix.rows(); ++r) hits[r] = indicators.at(r, c);
  return shares(matrix, hits);
}

std::vector<DesignRow> design_from_units(std::span<const HypothesisUnit> units) {
  std::vector<DesignRow> design;
  design.reserve(units.size());
  for (const auto& u : units) design.push_back(design_row(u.setting, u.run_id));
  return design;
}

EchoStudy echo_study(const IndicatorMatrix& indicators, std::span<const DesignRow> design, double alpha,
                     Correction correction) {
  if (indicators.rows() != design.size()) {
    fail(ErrorCode::DimensionMismatch, "indicator rows and design rows differ in number");
  }
  EchoStudy study;
  study.alpha = alpha;
  study.correction = correction;
  study.matrix_digest = indicators.digest();
  for (const auto& label : indicators.columns) {
    const std::vector<double> y = indicators.column(label);
    const LpmFit fit = fit_lpm(y, design, correction, label);
    MarkerEffects m;
    m.label = label;
    for (std::size_t k = 0; k < kAllAmeKinds.size(); ++k) m.ames[k] = ame(fit, kAllAmeKinds[k]);
    m.omnibus = wald_omnibus(fit);
    m.counts = cell_counts(indicators, label);
    study.markers.push_back(std::move(m));
  }
  for (std::size_t k = 0; k < kAllAmeKinds.size(); ++k) {
    std::vector<double> p;
    for (const auto& m : study.markers) p.push_back(m.ames[k].p_value);
    const FdrResult fdr = bh_fdr(p, alpha);
    for (std::size_t i = 0; i < study.markers.size(); ++i) {
      study.markers[i].q_values[k] = fdr.q_values[i];
      study.markers[i].significant[k] = fdr.rejected[i];
    }
  }
  return study;
}

EchoStudy echo_study(std::span<const HypothesisUnit> units, const MarkerLexicon& lexicon,
                     std::span<const DesignRow> design, double alpha, Correction correction) {
  if (units.size() != design.size()) fail(ErrorCode::DimensionMismatch, "units and design differ in length");
  return echo_study(indicator_matrix(units, lexicon), design, alpha, correction);
}

}  // namespace workbench
