#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <string>
#include <vector>

namespace msn {

/// Counter-based generator: the i-th draw of (seed, stream) is
/// splitmix64(seed * K1 + stream * K2 + i), so any worker can regenerate any
/// draw without shared state. Output is identical on every platform.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {}

  static std::uint64_t mix(std::uint64_t z);

  std::uint64_t next_u64();
  /// Uniform on the open interval (0, 1).
  double uniform();
  /// Uniform on (lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Standard normal via Box-Muller (cosine branch only).
  double normal();

  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t counter_ = 0;
};

enum class BoundaryOp {
  Dirichlet,  ///< u = value
  Neumann     ///< (1/r) du/dtheta = value on a wedge edge
};

/// One boundary condition sample. For 1D problems `r` holds x and `theta` is 0.
struct BoundaryPoint {
  double r = 0.0;
  double theta = 0.0;
  BoundaryOp op = BoundaryOp::Dirichlet;
  double value = 0.0;
};

/// Parameters a collocation set was generated from; enough to regenerate it.
struct GenerationRecord {
  std::string kind;  ///< "graded_1d", "graded_interval", "wedge", "data"
  int n_residual = 0;
  int n_arc = 0;
  int n_edge = 0;
  double grading = 1.0;
  double cutoff = 0.0;
  double omega = 0.0;
  std::uint64_t seed = 0;
  double noise_sigma = 0.0;
  std::string source;  ///< data file path, when kind == "data"
};

struct CollocationSet {
  Eigen::VectorXd x;        ///< 1D residual points
  Eigen::VectorXd y;        ///< supervised targets at x (empty for PDE problems)
  Eigen::MatrixX2d polar;   ///< 2D interior points, columns (r, theta)
  std::vector<BoundaryPoint> boundary;
  GenerationRecord record;

  bool empty() const { return x.size() == 0 && polar.rows() == 0 && boundary.empty(); }
};

/// x_i = t_i^p with t_i uniform on [0, 1], ascending, points below `cutoff`
/// dropped. Empty when cutoff >= 1.
Eigen::VectorXd graded_1d(int n, double p, double cutoff);

/// Exactly n points x_i = t_i^p with t_i uniform on [lo^(1/p), 1], so the
/// grid spans [lo, 1].
Eigen::VectorXd graded_interval(int n, double p, double lo);

/// Interior points (r = t^2, theta uniform in (0, omega)), n_arc points on r = 1
/// and n_edge points on each of theta = 0 and theta = omega with r = t^2 and
/// r >= 1e-3. Boundary points come out untagged (Dirichlet 0); the wedge
/// problem assigns operators and data.
CollocationSet wedge_sample(double omega, int n_interior, int n_arc, int n_edge, std::uint64_t seed);

/// Two-column numeric text (x, y), whitespace or comma separated; lines
/// starting with '#' and a non-numeric header line are skipped. Every x must
/// be >= 0. Throws std::runtime_error naming the offending line.
CollocationSet load_xy_file(const std::string& path);

inline constexpr double kEdgeMinRadius = 1e-3;

}  // namespace msn
