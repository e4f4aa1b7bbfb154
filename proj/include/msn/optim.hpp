#pragma once

// Two-timescale full-batch Adam for the power-law ansatz.
//
// Exponents (slow, eta_mu) and coefficients (fast, eta_c) are separate Adam
// parameter groups fed by one loss evaluation per epoch. The concatenated
// gradient is clipped to `clip_norm` before either group is updated.

#include "msn/basis.hpp"
#include "msn/losses.hpp"
#include "msn/problems.hpp"
#include "msn/sampling.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace msn {

struct AdamParams {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Weight override that takes effect from `start_epoch` onwards.
struct Phase {
  int start_epoch = 0;
  LossWeights weights;
};

struct TrainSchedule {
  int epochs = 10000;
  double eta_mu = 0.005;
  double eta_c = 0.01;
  double clip_norm = 1.0;
  int warmup_epochs = 0;
  int ramp_epochs = 0;
  std::vector<Phase> phases;
  AdamParams adam;

  /// Throws std::invalid_argument naming the first violated invariant.
  void validate() const;
};

/// 0 during warm-up, linear 0 -> 1 over the ramp, 1 afterwards.
double constraint_multiplier(int epoch, const TrainSchedule& schedule);

/// Loss weights in force at `epoch` (the last phase whose start has passed).
LossWeights weights_at(int epoch, const LossWeights& base, const TrainSchedule& schedule);

enum class ExponentInit {
  Uniform,           ///< uniform in bounds
  UniformPerturbed,  ///< uniform in bounds, then + N(0, mu_sigma^2)
  PinnedFundamental  ///< first exponent at pinned_factor * pinned_target, rest UniformPerturbed
};

struct InitSpec {
  std::uint64_t seed = 0;
  ExponentInit exponent_init = ExponentInit::UniformPerturbed;
  double mu_sigma = 0.1;
  double pinned_target = 0.0;
  double pinned_factor = 0.98;
  double coeff_sigma = 0.1;
};

MsnModel init_model(int terms, const ExponentBounds& bounds, const InitSpec& init,
                    Angular angular = Angular::None);

struct EpochRecord {
  int epoch = 0;
  double total = 0.0, residual = 0.0, bc = 0.0, sparsity = 0.0, constraint = 0.0;
  double grad_norm = 0.0;  ///< after clipping
  Eigen::VectorXd mu;
  Eigen::VectorXd c;
};

struct TrainTrace {
  std::vector<EpochRecord> epochs;
  MsnModel final_model;
  LossBreakdown final_loss;
  std::uint64_t seed = 0;
  double wall_ms = 0.0;
};

/// Raised when a loss or gradient turns non-finite; carries the epoch.
class TrainingAborted : public std::runtime_error {
 public:
  TrainingAborted(int epoch, const std::string& what)
      : std::runtime_error("training aborted at epoch " + std::to_string(epoch) + ": " + what),
        epoch_(epoch) {}
  int epoch() const { return epoch_; }

 private:
  int epoch_;
};

struct TrainOptions {
  std::uint64_t seed = 0;     ///< echoed into the trace
  bool record_history = true; ///< one EpochRecord per epoch
};

TrainTrace train(MsnModel model, const ProblemSpec& problem, const CollocationSet& set,
                 const LossWeights& weights, const TrainSchedule& schedule, const TrainOptions& options = {});

}  // namespace msn
