#include "workbench/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "csv.hpp"
#include "workbench/error.hpp"

namespace workbench {

namespace {

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  std::string s = buf;
  if (s.rfind("-0.", 0) == 0 && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
  return s;
}

std::string value_text(double proportion, bool raw) { return raw ? fmt("%.6f", proportion) : format_pp(proportion); }

std::string p_text(double p) { return fmt("%.6g", p); }

std::string contrast_kind(PromptSetting a, PromptSetting b) {
  return "contrast:" + setting_label(a) + " vs " + setting_label(b);
}

Json effect_json(const EffectEstimate& e) {
  return Json{{"estimate", e.estimate}, {"se", e.se},       {"ci_low", e.ci_low},
              {"ci_high", e.ci_high},   {"p", e.p_value},   {"degenerate", e.degenerate}};
}

Json test_json(const TestResult& t) {
  return Json{{"stat", t.stat}, {"df", t.df}, {"rank", t.rank}, {"p", t.p_value}, {"singular", t.singular}};
}

bool ci_excludes_zero(const EffectEstimate& e) { return e.ci_low > 0.0 || e.ci_high < 0.0; }

}  // namespace

std::string format_pp(double proportion) { return fmt("%.1f", proportion * 100.0); }

const CodeEffects& AnalysisReport::code(std::string_view name) const {
  for (const auto& c : codes) {
    if (c.code == name) return c;
  }
  fail(ErrorCode::UnknownCode, "report has no code \"" + std::string(name) + "\"");
}

AnalysisReport run_analysis(const CodeMatrix& matrix, const AnalysisOptions& options) {
  AnalysisReport report;
  report.options = options;
  report.codebook_version = matrix.codebook_version;
  report.matrix_digest = matrix.digest();

  std::vector<DesignRow> design;
  design.reserve(matrix.rows());
  for (std::size_t r = 0; r < matrix.rows(); ++r) design.push_back(design_row(matrix.settings[r], matrix.clusters[r]));

  for (const auto& code : matrix.columns) {
    const LpmFit fit = fit_lpm(matrix.column(code), design, options.correction, code);
    CodeEffects e;
    e.code = code;
    for (std::size_t k = 0; k < kAllAmeKinds.size(); ++k) e.ames[k] = ame(fit, kAllAmeKinds[k], options.reference);
    e.omnibus = wald_omnibus(fit, options.reference);
    e.counts = cell_counts(matrix, code);
    for (std::size_t i = 0; i < kAllSettings.size(); ++i) {
      e.cell_means[i] = fit.cell_mean(kAllSettings[i]);
      for (std::size_t j = i + 1; j < kAllSettings.size(); ++j) {
        e.contrasts.push_back(
            {kAllSettings[i], kAllSettings[j], cell_contrast(fit, kAllSettings[i], kAllSettings[j], options.reference)});
      }
    }
    report.codes.push_back(std::move(e));
  }
  return report;
}

AnalysisReport run_analysis_codes(const CorpusStore& store, const AnalysisOptions& options) {
  return run_analysis(store.code_matrix(), options);
}

void add_marker_analysis(AnalysisReport& report, const CorpusStore& store, const MarkerLexicon& lexicon) {
  const auto units = store.hypotheses();
  if (units.empty()) fail(ErrorCode::NoMatrix, "no hypothesis units are stored");
  report.markers = echo_study(units, lexicon, design_from_units(units), report.options.alpha, report.options.correction);
}

const EffectEstimate& find_contrast(const CodeEffects& effects, PromptSetting a, PromptSetting b) {
  for (const auto& c : effects.contrasts) {
    if (c.a == a && c.b == b) return c.effect;
  }
  fail(ErrorCode::InvalidArgument, "contrast " + setting_label(a) + " vs " + setting_label(b) +
                                       " is not stored; contrasts run in canonical order");
}

std::vector<DotWhiskerRow> emit_dotwhisker(const AnalysisReport& report, AmeKind family, EffectSubject subject) {
  const auto k = static_cast<std::size_t>(std::find(kAllAmeKinds.begin(), kAllAmeKinds.end(), family) - kAllAmeKinds.begin());
  std::vector<DotWhiskerRow> rows;
  if (subject == EffectSubject::Codes) {
    for (const auto& c : report.codes) {
      const auto& e = c.ames[k];
      rows.push_back({c.code, e.estimate, e.ci_low, e.ci_high, ci_excludes_zero(e)});
    }
  } else {
    if (!report.markers) fail(ErrorCode::UnknownFamily, "report holds no marker effects");
    for (const auto& m : report.markers->markers) {
      const auto& e = m.ames[k];
      rows.push_back({m.label, e.estimate, e.ci_low, e.ci_high, m.q_values[k] < report.markers->alpha});
    }
  }
  std::stable_sort(rows.begin(), rows.end(),
                   [](const DotWhiskerRow& a, const DotWhiskerRow& b) { return a.estimate > b.estimate; });
  return rows;
}

std::string dotwhisker_csv(const std::vector<DotWhiskerRow>& rows, bool raw) {
  std::string out = raw ? "name,estimate,ci_low,ci_high,significant\n" : "name,estimate_pp,ci_low_pp,ci_high_pp,significant\n";
  for (const auto& r : rows) {
    out += csv::field(r.name) + "," + value_text(r.estimate, raw) + "," + value_text(r.ci_low, raw) + "," +
           value_text(r.ci_high, raw) + "," + (r.significant ? "1" : "0") + "\n";
  }
  return out;
}

Json dotwhisker_json(const std::vector<DotWhiskerRow>& rows, AmeKind family, EffectSubject subject, bool raw) {
  Json items = Json::array();
  for (const auto& r : rows) {
    if (raw) {
      items.push_back(Json{{"name", r.name}, {"estimate", r.estimate}, {"ci_low", r.ci_low},
                           {"ci_high", r.ci_high}, {"significant", r.significant}});
    } else {
      items.push_back(Json{{"name", r.name}, {"estimate_pp", format_pp(r.estimate)},
                           {"ci_low_pp", format_pp(r.ci_low)}, {"ci_high_pp", format_pp(r.ci_high)},
                           {"significant", r.significant}});
    }
  }
  const bool codes = subject == EffectSubject::Codes;
  return Json{{"family", ame_label(family)},
              {"subject", codes ? "codes" : "markers"},
              {"significance", codes ? "95% CI excludes 0" : "BH q < alpha"},
              {"rows", std::move(items)}};
}

std::string effects_csv(const AnalysisReport& report, bool raw) {
  std::string out = raw ? "code,effect_kind,estimate,se,ci_low,ci_high,p,q,flag\n"
                        : "code,effect_kind,estimate_pp,se_pp,ci_low_pp,ci_high_pp,p,q,flag\n";
  auto line = [&](const std::string& name, const std::string& kind, const EffectEstimate& e, const std::string& q,
                  bool significant) {
    std::string flag = significant ? "significant" : "";
    if (e.degenerate) flag += flag.empty() ? "degenerate" : ";degenerate";
    out += csv::field(name) + "," + csv::field(kind) + "," + value_text(e.estimate, raw) + "," + value_text(e.se, raw) + "," +
           value_text(e.ci_low, raw) + "," + value_text(e.ci_high, raw) + "," + p_text(e.p_value) + "," + q + "," +
           flag + "\n";
  };
  for (const auto& c : report.codes) {
    for (std::size_t k = 0; k < kAllAmeKinds.size(); ++k) {
      line(c.code, "ame_" + std::string(ame_label(kAllAmeKinds[k])), c.ames[k], "", ci_excludes_zero(c.ames[k]));
    }
    for (const auto& ct : c.contrasts) line(c.code, contrast_kind(ct.a, ct.b), ct.effect, "", ci_excludes_zero(ct.effect));
  }
  if (report.markers) {
    for (const auto& m : report.markers->markers) {
      for (std::size_t k = 0; k < kAllAmeKinds.size(); ++k) {
        line("marker:" + m.label, "ame_" + std::string(ame_label(kAllAmeKinds[k])), m.ames[k], p_text(m.q_values[k]),
             m.q_values[k] < report.markers->alpha);
      }
    }
  }
  return out;
}

std::string omnibus_csv(const AnalysisReport& report) {
  std::string out = "code,stat,df,rank,p,flag\n";
  auto line = [&](const std::string& name, const TestResult& t) {
    out += csv::field(name) + "," + fmt("%.6f", t.stat) + "," + std::to_string(t.df) + "," + std::to_string(t.rank) +
           "," + p_text(t.p_value) + "," + (t.singular ? "singular" : "") + "\n";
  };
  for (const auto& c : report.codes) line(c.code, c.omnibus);
  if (report.markers) {
    for (const auto& m : report.markers->markers) line("marker:" + m.label, m.omnibus);
  }
  return out;
}

Json cell_counts_json(const CellCounts& counts) {
  Json out = Json::object();
  for (std::size_t s = 0; s < counts.size(); ++s) {
    out[setting_label(kAllSettings[s])] = Json{{"count", counts[s].count}, {"denominator", counts[s].denominator}};
  }
  return out;
}

Json echo_json(const EchoStudy& study) {
  Json markers = Json::array();
  for (const auto& m : study.markers) {
    Json ames = Json::object();
    for (std::size_t k = 0; k < kAllAmeKinds.size(); ++k) {
      Json e = effect_json(m.ames[k]);
      e["q"] = m.q_values[k];
      e["significant"] = m.q_values[k] < study.alpha;
      ames[std::string(ame_label(kAllAmeKinds[k]))] = std::move(e);
    }
    markers.push_back(Json{{"label", m.label},
                           {"ames", std::move(ames)},
                           {"omnibus", test_json(m.omnibus)},
                           {"cell_counts", cell_counts_json(m.counts)}});
  }
  return Json{{"metadata",
               {{"alpha", study.alpha},
                {"correction", correction_label(study.correction)},
                {"fdr", "Benjamini-Hochberg within each AME family"},
                {"significance", "q < alpha"},
                {"matrix_digest", study.matrix_digest}}},
              {"markers", std::move(markers)}};
}

Json report_json(const AnalysisReport& report) {
  Json codes = Json::array();
  for (const auto& c : report.codes) {
    Json ames = Json::object();
    for (std::size_t k = 0; k < kAllAmeKinds.size(); ++k) {
      ames[std::string(ame_label(kAllAmeKinds[k]))] = effect_json(c.ames[k]);
    }
    Json contrasts = Json::array();
    for (const auto& ct : c.contrasts) {
      Json e = effect_json(ct.effect);
      e["a"] = setting_label(ct.a);
      e["b"] = setting_label(ct.b);
      contrasts.push_back(std::move(e));
    }
    Json means = Json::object();
    for (std::size_t s = 0; s < kAllSettings.size(); ++s) means[setting_label(kAllSettings[s])] = c.cell_means[s];
    codes.push_back(Json{{"code", c.code},
                         {"ames", std::move(ames)},
                         {"omnibus", test_json(c.omnibus)},
                         {"cell_counts", cell_counts_json(c.counts)},
                         {"cell_means", std::move(means)},
                         {"contrasts", std::move(contrasts)}});
  }
  Json out{{"metadata",
            {{"codebook_version", report.codebook_version},
             {"matrix_digest", report.matrix_digest},
             {"correction", correction_label(report.options.correction)},
             {"reference", report.options.reference == Reference::Normal ? "normal" : "t"},
             {"alpha", report.options.alpha},
             {"significance_codes", "95% CI excludes 0"},
             {"significance_markers", "BH q < alpha"}}},
           {"codes", std::move(codes)}};
  if (report.markers) out["markers"] = echo_json(*report.markers);
  return out;
}

}  // namespace workbench
