#include "workbench/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <unordered_map>

#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "workbench/error.hpp"

namespace workbench {

namespace {

constexpr double kNumericalZero = 1e-12;

double snap(double v) { return std::abs(v) < kNumericalZero ? 0.0 : v; }

Vector6 regressors(const DesignRow& r) {
  Vector6 x;
  const double b = r.base_4step ? 1.0 : 0.0;
  const double t = r.toward ? 1.0 : 0.0;
  const double a = r.away ? 1.0 : 0.0;
  x << 1.0, b, t, a, b * t, b * a;
  return x;
}

double two_sided_p(double estimate, double se, Reference reference, std::size_t clusters) {
  if (se <= 0.0) return estimate == 0.0 ? 1.0 : 0.0;
  const double z = std::abs(estimate / se);
  if (reference == Reference::StudentT && clusters >= 2) {
    boost::math::students_t dist(static_cast<double>(clusters - 1));
    return std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, z)));
  }
  return normal_p(z);
}

}  // namespace

DesignRow design_row(PromptSetting setting, std::string cluster) {
  return DesignRow{setting.base == BasePrompt::FourStep, setting.nudge == Nudge::Toward,
                   setting.nudge == Nudge::Away, std::move(cluster)};
}

PromptSetting design_setting(const DesignRow& row) {
  return PromptSetting{row.base_4step ? BasePrompt::FourStep : BasePrompt::OneStep,
                       row.toward ? Nudge::Toward : (row.away ? Nudge::Away : Nudge::NoNudge)};
}

Vector6 design_vector(PromptSetting setting) { return regressors(design_row(setting, {})); }

std::string_view correction_label(Correction c) noexcept { return c == Correction::CR0 ? "CR0" : "CR1"; }

Correction parse_correction(std::string_view text) {
  if (text == "CR0" || text == "cr0") return Correction::CR0;
  if (text == "CR1" || text == "cr1") return Correction::CR1;
  fail(ErrorCode::InvalidArgument, "unknown correction \"" + std::string(text) + "\"");
}

double normal_p(double z) { return std::erfc(std::abs(z) / std::sqrt(2.0)); }

double chi_square_sf(double stat, int df) {
  if (df <= 0) return 1.0;
  if (stat <= 0.0) return 1.0;
  return boost::math::gamma_q(df / 2.0, stat / 2.0);
}

LpmFit fit_lpm(std::span<const double> y, std::span<const DesignRow> design, Correction correction,
               std::string outcome_name) {
  constexpr std::size_t K = 6;
  if (y.size() != design.size()) {
    fail(ErrorCode::DimensionMismatch, "outcome has " + std::to_string(y.size()) + " rows, design has " +
                                           std::to_string(design.size()));
  }
  if (y.size() < K) fail(ErrorCode::DimensionMismatch, "an LPM fit needs at least 6 rows");

  std::array<std::size_t, 6> per_cell{};
  std::unordered_map<std::string, std::size_t> cluster_ids;
  std::vector<std::size_t> cluster_of(design.size());
  for (std::size_t i = 0; i < design.size(); ++i) {
    const auto& r = design[i];
    if (r.toward && r.away) fail(ErrorCode::InvalidArgument, "design row with both Toward and Away set");
    ++per_cell[setting_index(design_setting(r))];
    cluster_of[i] = cluster_ids.try_emplace(r.cluster, cluster_ids.size()).first->second;
  }
  for (std::size_t c = 0; c < per_cell.size(); ++c) {
    if (per_cell[c] == 0) {
      fail(ErrorCode::RankDeficient, "design cell " + setting_label(kAllSettings[c]) + " has no rows");
    }
  }
  const std::size_t n = y.size();
  const std::size_t g = cluster_ids.size();
  if (correction == Correction::CR1 && g < 2) {
    fail(ErrorCode::InvalidArgument, "CR1 needs at least two clusters");
  }

  Matrix6 xtx = Matrix6::Zero();
  Vector6 xty = Vector6::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    const Vector6 x = regressors(design[i]);
    xtx.noalias() += x * x.transpose();
    xty.noalias() += x * y[i];
  }
  const Eigen::LDLT<Matrix6> ldlt(xtx);
  if (ldlt.info() != Eigen::Success) fail(ErrorCode::RankDeficient, "normal equations are singular");

  LpmFit fit;
  fit.beta = ldlt.solve(xty);
  fit.n_obs = n;
  fit.n_clusters = g;
  fit.outcome_name = std::move(outcome_name);
  fit.correction = correction;
  fit.residuals.resize(n);

  std::vector<Vector6> scores(g, Vector6::Zero());
  for (std::size_t i = 0; i < n; ++i) {
    const Vector6 x = regressors(design[i]);
    fit.residuals[i] = snap(y[i] - x.dot(fit.beta));
    scores[cluster_of[i]] += x * fit.residuals[i];
  }
  Matrix6 meat = Matrix6::Zero();
  for (const auto& s : scores) meat.noalias() += s * s.transpose();

  const Matrix6 bread = ldlt.solve(Matrix6::Identity());
  Matrix6 v = bread * meat * bread;
  if (correction == Correction::CR1 && n > K) {
    const double gd = static_cast<double>(g);
    const double nd = static_cast<double>(n);
    v *= gd / (gd - 1.0) * (nd - 1.0) / (nd - static_cast<double>(K));
  }
  fit.vcov = (v + v.transpose()) / 2.0;
  return fit;
}

std::string_view ame_label(AmeKind kind) noexcept {
  switch (kind) {
    case AmeKind::FourStep: return "4step";
    case AmeKind::Toward: return "toward";
    case AmeKind::Away: return "away";
  }
  return {};
}

AmeKind parse_ame_kind(std::string_view text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  if (lower == "4step" || lower == "4-step" || lower == "fourstep") return AmeKind::FourStep;
  if (lower == "toward") return AmeKind::Toward;
  if (lower == "away") return AmeKind::Away;
  fail(ErrorCode::UnknownFamily, "unknown effect family \"" + std::string(text) + "\"");
}

Vector6 ame_contrast(AmeKind kind) {
  Vector6 c = Vector6::Zero();
  switch (kind) {
    case AmeKind::FourStep:
      c(1) = 1.0;
      c(4) = 1.0 / 3.0;
      c(5) = 1.0 / 3.0;
      break;
    case AmeKind::Toward:
      c(2) = 1.0;
      c(4) = 0.5;
      break;
    case AmeKind::Away:
      c(3) = 1.0;
      c(5) = 0.5;
      break;
  }
  return c;
}

EffectEstimate linear_contrast(const LpmFit& fit, const Vector6& c, Reference reference) {
  EffectEstimate e;
  e.contrast = c;
  e.estimate = snap(c.dot(fit.beta));
  const double var = c.dot(fit.vcov * c);
  e.se = var > 0.0 ? std::sqrt(var) : 0.0;
  double half = kZ975 * e.se;
  if (reference == Reference::StudentT && fit.n_clusters >= 2) {
    boost::math::students_t dist(static_cast<double>(fit.n_clusters - 1));
    half = boost::math::quantile(dist, 0.975) * e.se;
  }
  e.ci_low = e.estimate - half;
  e.ci_high = e.estimate + half;
  e.p_value = two_sided_p(e.estimate, e.se, reference, fit.n_clusters);
  e.degenerate = e.se == 0.0;
  return e;
}

EffectEstimate ame(const LpmFit& fit, AmeKind kind, Reference reference) {
  return linear_contrast(fit, ame_contrast(kind), reference);
}

EffectEstimate cell_contrast(const LpmFit& fit, PromptSetting a, PromptSetting b, Reference reference) {
  if (a == b) fail(ErrorCode::InvalidArgument, "a cell contrast needs two different settings");
  return linear_contrast(fit, design_vector(a) - design_vector(b), reference);
}

TestResult wald_omnibus(const LpmFit& fit, Reference reference) {
  const Eigen::Matrix<double, 5, 1> b = fit.beta.tail<5>();
  const Eigen::Matrix<double, 5, 5> s = fit.vcov.bottomRightCorner<5, 5>();
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, 5, 5>> eig(s);
  const auto& values = eig.eigenvalues();
  const double largest = values.cwiseAbs().maxCoeff();
  const double tol = largest * 1e-10;

  TestResult r;
  r.df = 5;
  double w = 0.0;
  if (largest > 0.0) {
    for (int i = 0; i < 5; ++i) {
      if (values(i) > tol) {
        const double proj = eig.eigenvectors().col(i).dot(b);
        w += proj * proj / values(i);
        ++r.rank;
      }
    }
  }
  r.stat = w;
  r.singular = r.rank < 5;
  if (r.rank == 0) {
    r.p_value = 1.0;
  } else if (reference == Reference::StudentT && fit.n_clusters >= 2) {
    boost::math::fisher_f dist(r.rank, static_cast<double>(fit.n_clusters - 1));
    r.p_value = boost::math::cdf(boost::math::complement(dist, w / r.rank));
  } else {
    r.p_value = chi_square_sf(w, r.rank);
  }
  return r;
}

FdrResult bh_fdr(std::span<const double> p_values, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) fail(ErrorCode::InvalidArgument, "alpha must lie in (0, 1)");
  const std::size_t m = p_values.size();
  for (double p : p_values) {
    if (!(p >= 0.0 && p <= 1.0)) fail(ErrorCode::InvalidP, "p-value outside [0, 1]: " + std::to_string(p));
  }
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return p_values[a] < p_values[b]; });

  std::size_t k_star = 0;
  for (std::size_t k = 1; k <= m; ++k) {
    if (p_values[order[k - 1]] <= static_cast<double>(k) * alpha / static_cast<double>(m)) k_star = k;
  }
  FdrResult out;
  out.rejected.assign(m, false);
  out.q_values.assign(m, 1.0);
  double running = 1.0;
  for (std::size_t k = m; k >= 1; --k) {
    const std::size_t i = order[k - 1];
    running = std::min(running, p_values[i] * static_cast<double>(m) / static_cast<double>(k));
    out.q_values[i] = running;
    out.rejected[i] = k <= k_star;
  }
  return out;
}

}  // namespace workbench
