#pragma once

// Catalog of model problems: operators, boundary data, admissible domains,
// exact solutions and wedge spectra.

#include "msn/basis.hpp"
#include "msn/sampling.hpp"

#include <functional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace msn {

enum class WedgeBc { DD, NN, DN, ND };
enum class Trig { Sin, Cos };

/// Data fit: D[u] = u against samples of a catalog target (or a data file).
struct SupervisedFit {
  std::string target = "single";
  double noise_sigma = 0.0;
};

/// x u'' + u'/2 = 0 on (0, 1], u(1) = 1.
struct SingularOde {};

/// -u'' = x^beta on (0, 1), u(0) = u(1) = 0.
struct SingularPoisson {
  double beta = -0.5;
};

/// Laplace equation on the wedge 0 < theta < omega, r < 1.
struct Wedge {
  double omega = 0.0;  ///< radians
  WedgeBc bc = WedgeBc::DD;
};

using ProblemSpec = std::variant<SupervisedFit, SingularOde, SingularPoisson, Wedge>;

/// Residual points of singular-forcing problems must satisfy x >= this.
inline constexpr double kForcingExclusion = 0.01;

struct PowerTerm {
  double exponent;
  double coeff;
};

struct ExactSolution {
  std::string name;
  std::vector<PowerTerm> terms;  ///< ground truth; empty when not a power law
  bool power_law = true;
  std::function<double(double)> value;

  std::vector<double> exponents() const;
};

ExactSolution poisson_exact(double beta);
ExactSolution ode_exact();

/// Catalog names: "single", "three-term", "close-pair:<delta>", "log-correction".
ExactSolution supervised_target(std::string_view name);
std::vector<std::string> supervised_target_names();

/// First n admissible exponents, ascending: n pi / omega for DD/NN,
/// (2n - 1) pi / (2 omega) for DN/ND.
std::vector<double> wedge_spectrum(double omega, WedgeBc bc, int n_modes);

Trig quantization(WedgeBc bc);

/// Everything the trainer needs to know about one wedge configuration.
struct WedgeSetup {
  Wedge problem;
  Angular angular = Angular::Sin;  ///< makes the theta = 0 edge condition exact
  Trig trig = Trig::Sin;           ///< quantization family for the constraint loss
  double fundamental = 0.0;
  BoundaryOp edge0 = BoundaryOp::Dirichlet;
  BoundaryOp edge1 = BoundaryOp::Dirichlet;

  /// Arc data g(theta) = phi(mu_1 theta).
  double arc_value(double theta) const;
};

WedgeSetup wedge_problem(double omega, WedgeBc bc);

/// [0.3 mu_1, 2.5 mu_1] with mu_1 the fundamental of the wedge.
ExponentBounds bc_adaptive_bounds(double omega, WedgeBc bc);

/// Ground truth for any problem; for wedges the single fundamental mode.
ExactSolution exact_solution(const ProblemSpec& problem);

/// Leading exponents the recovery is scored against.
std::vector<double> target_exponents(const ProblemSpec& problem);

/// Angular mode a model must use for this problem.
Angular angular_mode(const ProblemSpec& problem);

struct CollocationParams {
  int n = 200;           ///< 1D residual / data points
  double grading = 2.0;  ///< x = t^p
  double cutoff = 0.0;   ///< 1D lower cutoff (PDEs) or lower end of the data interval
  int n_interior = 500;
  int n_arc = 200;
  int n_edge = 100;
};

/// Residual points, boundary points with operator tags and data, and (for
/// supervised fits) noisy targets. Deterministic in (params, seed).
CollocationSet make_collocation(const ProblemSpec& problem, const CollocationParams& params,
                                std::uint64_t seed);

std::string to_string(WedgeBc bc);
std::string to_string(Trig trig);
std::string to_string(Angular a);
WedgeBc parse_wedge_bc(std::string_view s);

/// Short identifier of the problem family: "supervised", "ode", "poisson", "wedge".
std::string problem_kind(const ProblemSpec& problem);

}  // namespace msn
