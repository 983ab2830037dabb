#pragma once

#include <array>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "workbench/domain.hpp"

namespace workbench {

using Vector6 = Eigen::Matrix<double, 6, 1>;
using Matrix6 = Eigen::Matrix<double, 6, 6>;

// Indicator coding of one observation; 1-step/No-nudge is the reference cell.
struct DesignRow {
  bool base_4step = false;
  bool toward = false;
  bool away = false;
  std::string cluster;
};

DesignRow design_row(PromptSetting setting, std::string cluster);
PromptSetting design_setting(const DesignRow& row);
// Regressor vector (1, Base, Toward, Away, Base*Toward, Base*Away).
Vector6 design_vector(PromptSetting setting);

enum class Correction { CR0, CR1 };
enum class Reference { Normal, StudentT };

std::string_view correction_label(Correction c) noexcept;
Correction parse_correction(std::string_view text);

struct LpmFit {
  Vector6 beta = Vector6::Zero();
  Matrix6 vcov = Matrix6::Zero();
  std::size_t n_obs = 0;
  std::size_t n_clusters = 0;
  std::string outcome_name;
  std::vector<double> residuals;
  Correction correction = Correction::CR1;

  double cell_mean(PromptSetting setting) const { return design_vector(setting).dot(beta); }
};

// OLS on the saturated 2x3 design with a cluster sandwich covariance.
// Errors: DimensionMismatch (|y| != |design| or fewer than 6 rows),
// RankDeficient (an empty design cell), InvalidArgument (toward and away both
// set, or CR1 with a single cluster).
LpmFit fit_lpm(std::span<const double> y, std::span<const DesignRow> design, Correction correction,
               std::string outcome_name = {});

enum class AmeKind { FourStep, Toward, Away };

inline constexpr std::array<AmeKind, 3> kAllAmeKinds = {AmeKind::FourStep, AmeKind::Toward, AmeKind::Away};

// "4step", "toward", "away"
std::string_view ame_label(AmeKind kind) noexcept;
// Errors: UnknownFamily.
AmeKind parse_ame_kind(std::string_view text);
Vector6 ame_contrast(AmeKind kind);

inline constexpr double kZ975 = 1.959963984540054;

struct EffectEstimate {
  double estimate = 0.0;
  double se = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double p_value = 1.0;
  Vector6 contrast = Vector6::Zero();
  bool degenerate = false;  // se == 0
};

EffectEstimate linear_contrast(const LpmFit& fit, const Vector6& c, Reference reference = Reference::Normal);
EffectEstimate ame(const LpmFit& fit, AmeKind kind, Reference reference = Reference::Normal);
// mean(cell a) - mean(cell b). Errors: InvalidArgument when a == b.
EffectEstimate cell_contrast(const LpmFit& fit, PromptSetting a, PromptSetting b,
                             Reference reference = Reference::Normal);

struct TestResult {
  double stat = 0.0;
  int df = 5;
  int rank = 0;
  double p_value = 1.0;
  bool singular = false;  // rank < 5
};

// Wald test of beta1..beta5 = 0 using a generalized inverse of the 5x5
// covariance block; df in the p-value equals its numerical rank.
TestResult wald_omnibus(const LpmFit& fit, Reference reference = Reference::Normal);

struct FdrResult {
  std::vector<bool> rejected;
  std::vector<double> q_values;
};

// Benjamini-Hochberg step-up. Errors: InvalidP, InvalidArgument (alpha).
FdrResult bh_fdr(std::span<const double> p_values, double alpha);

// Two-sided normal p-value for z.
double normal_p(double z);
double chi_square_sf(double stat, int df);

}  // namespace workbench
