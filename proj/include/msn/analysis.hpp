#pragma once

// Post-training diagnostics: exponent extraction and matching, constraint
// violation, Gram conditioning and the closed-form single-term rate curve.

#include "msn/basis.hpp"
#include "msn/problems.hpp"

#include <limits>
#include <vector>

namespace msn {

inline constexpr double kActiveThreshold = 0.01;  ///< |c| above this counts as active
inline constexpr double kClusterRadius = 0.02;    ///< neighbouring exponents closer than this merge
inline constexpr double kSuccessThresholdPct = 5.0;

/// Effective exponent of the term with the largest |c|; ties go to the smaller exponent.
double dominant_exponent(const MsnModel& model);

struct ActiveTerm {
  double mu;
  double c;
};

/// Terms with |c| > threshold, sorted by exponent.
std::vector<ActiveTerm> active_terms(const MsnModel& model, double threshold = kActiveThreshold);

struct ExponentMatch {
  double target;
  double mu;
  double rel_err_pct;
};

struct MatchResult {
  std::vector<ExponentMatch> matches;  ///< one per target, in target order
  std::vector<double> clusters;        ///< |c|-weighted cluster centres, ascending
  double max_rel_err_pct = 0.0;
  double mean_rel_err_pct = 0.0;
  bool under_resolved = false;         ///< fewer clusters than targets
};

/// Clusters the active exponents (single linkage, gap < kClusterRadius), then
/// assigns each target a distinct cluster minimising the worst relative
/// error. Under-resolved inputs fall back to nearest-cluster matching.
MatchResult match_exponents(const std::vector<ActiveTerm>& active, const std::vector<double>& targets);

/// Same formula as constraint_loss: sum |c_k| trig^2(mu_k omega).
double constraint_violation(const MsnModel& model, double omega, Trig trig);

/// Condition number of G_jk = (1/N) sum_i x_i^(mu_j + mu_k); +infinity when
/// the matrix is numerically singular.
double gram_condition(const Eigen::VectorXd& exponents, const Eigen::VectorXd& points);

struct RatePoint {
  double mu;
  double c_star;
  double R;
};

/// Optimal coefficient c*(mu) = (2 mu + 1) / (alpha + mu + 1) and best L2
/// error R(mu) = min_c int_0^1 (x^alpha - c x^mu)^2 dx for each mu.
std::vector<RatePoint> rate_curve(double alpha, const std::vector<double>& mus);

/// Least-squares slope of log R against log |mu - alpha| over the samples.
double loglog_slope(double alpha, const std::vector<RatePoint>& curve);

struct IdentifiabilityResult {
  bool unique = true;               ///< every exact tuple contains all targets
  std::size_t tuples_checked = 0;
  std::size_t exact_tuples = 0;     ///< tuples reproducing f below tolerance
  std::vector<std::vector<double>> counterexamples;
};

struct LatticeSpec {
  double lo = 0.01;
  double hi = 3.0;
  double step = 0.01;
  double tolerance = 1e-8;
  int extra_terms = 1;  ///< also search tuples with K* + extra_terms exponents
};

/// Brute-force identifiability check: every exponent tuple drawn from the
/// lattice (sizes K* .. K* + extra_terms) is least-squares fitted to f on the
/// grid, and any tuple that reproduces f to within `tolerance` (sup norm)
/// must contain every target exponent.
IdentifiabilityResult identifiability_oracle(const std::vector<PowerTerm>& targets, const Eigen::VectorXd& grid,
                                             const LatticeSpec& lattice = {});

/// Everything reported about one trained model.
struct RecoveryReport {
  double dominant_mu = 0.0;
  double dominant_rel_err_pct = std::numeric_limits<double>::quiet_NaN();
  MatchResult match;
  double constraint_violation = 0.0;
  std::vector<ActiveTerm> active;
  double gram_condition = 0.0;  ///< over the active exponents (1 when fewer than two)
  double headline_err_pct = std::numeric_limits<double>::quiet_NaN();
  bool success = false;
};

/// Builds the report. Single-target problems score the dominant exponent;
/// multi-target problems score the worst matched error.
RecoveryReport analyze(const MsnModel& model, const ProblemSpec& problem, const Eigen::VectorXd& gram_points);

}  // namespace msn
