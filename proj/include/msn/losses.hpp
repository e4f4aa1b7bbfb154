#pragma once

// Loss components with exact gradients with respect to (raw exponents,
// coefficients). Every function returns the value and both gradient blocks.

#include "msn/basis.hpp"
#include "msn/problems.hpp"
#include "msn/sampling.hpp"

namespace msn {

struct LossWeights {
  double w_r = 1.0;
  double w_b = 100.0;
  double w_s = 0.001;
  double w_con = 0.0;

  bool valid() const { return w_r >= 0.0 && w_b >= 0.0 && w_s >= 0.0 && w_con >= 0.0; }
};

struct LossTerm {
  double value = 0.0;
  Eigen::VectorXd grad_raw;
  Eigen::VectorXd grad_c;

  static LossTerm zero(Eigen::Index k) {
    return {0.0, Eigen::VectorXd::Zero(k), Eigen::VectorXd::Zero(k)};
  }
};

struct LossBreakdown {
  double residual = 0.0;
  double bc = 0.0;
  double sparsity = 0.0;
  double constraint = 0.0;
  double total = 0.0;
  Eigen::VectorXd grad_raw;
  Eigen::VectorXd grad_c;
};

/// Mean squared residual of the problem operator over `set`. Wedges return
/// exactly zero (every r^mu phi(mu theta) is harmonic). Throws
/// std::domain_error when a residual point is outside the admissible domain.
LossTerm residual_loss(const MsnModel& model, const ProblemSpec& problem, const CollocationSet& set);

/// Mean squared boundary mismatch over the tagged boundary points.
LossTerm bc_loss(const MsnModel& model, const ProblemSpec& problem, const CollocationSet& set);

/// (1/K) sum |c_k|; subgradient 0 at c_k = 0.
LossTerm sparsity_loss(const MsnModel& model);

/// sum_k |c_k| trig^2(mu_k omega). The |c_k| weight is differentiated too.
LossTerm constraint_loss(const MsnModel& model, double omega, Trig trig);

/// Per-epoch schedule inputs to total_loss.
struct ScheduleState {
  double constraint_multiplier = 1.0;  ///< warm-up / ramp factor in [0, 1]
};

/// w_r res + w_b bc + w_s sparse + multiplier * w_con constraint. The
/// constraint term only exists for wedge problems; its trig family comes from
/// the wedge boundary type.
LossBreakdown total_loss(const MsnModel& model, const ProblemSpec& problem, const CollocationSet& set,
                         const LossWeights& weights, const ScheduleState& state = {});

}  // namespace msn
