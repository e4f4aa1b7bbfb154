#include "msn/optim.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

namespace msn {

void TrainSchedule::validate() const {
  if (epochs < 1) throw std::invalid_argument("TrainSchedule: epochs must be >= 1");
  if (!(eta_mu >= 0.0) || !(eta_c > 0.0)) throw std::invalid_argument("TrainSchedule: learning rates must be positive");
  if (eta_mu > eta_c) throw std::invalid_argument("TrainSchedule: need eta_mu <= eta_c");
  if (!(clip_norm > 0.0)) throw std::invalid_argument("TrainSchedule: clip_norm must be positive");
  if (warmup_epochs < 0 || ramp_epochs < 0) throw std::invalid_argument("TrainSchedule: warm-up/ramp must be >= 0");
  if (warmup_epochs + ramp_epochs > epochs) throw std::invalid_argument("TrainSchedule: warm-up + ramp exceeds epochs");
  for (std::size_t i = 0; i < phases.size(); ++i) {
    if (!phases[i].weights.valid()) throw std::invalid_argument("TrainSchedule: phase weights must be >= 0");
    if (i > 0 && phases[i].start_epoch < phases[i - 1].start_epoch) {
      throw std::invalid_argument("TrainSchedule: phases must be sorted by start epoch");
    }
  }
  if (!(adam.beta1 >= 0.0 && adam.beta1 < 1.0 && adam.beta2 >= 0.0 && adam.beta2 < 1.0 && adam.eps > 0.0)) {
    throw std::invalid_argument("TrainSchedule: invalid Adam constants");
  }
}

double constraint_multiplier(int epoch, const TrainSchedule& schedule) {
  if (epoch < schedule.warmup_epochs) return 0.0;
  if (schedule.ramp_epochs == 0) return 1.0;
  const double t = static_cast<double>(epoch - schedule.warmup_epochs) / schedule.ramp_epochs;
  return std::min(1.0, t);
}

LossWeights weights_at(int epoch, const LossWeights& base, const TrainSchedule& schedule) {
  LossWeights w = base;
  for (const Phase& p : schedule.phases) {
    if (epoch >= p.start_epoch) w = p.weights;
  }
  return w;
}

MsnModel init_model(int terms, const ExponentBounds& bounds, const InitSpec& init, Angular angular) {
  if (terms < 1) throw std::invalid_argument("init_model: need K >= 1");
  if (!bounds.valid()) throw std::invalid_argument("init_model: invalid exponent bounds");
  if (init.mu_sigma < 0.0 || init.coeff_sigma < 0.0) throw std::invalid_argument("init_model: sigmas must be >= 0");
  if (init.exponent_init == ExponentInit::PinnedFundamental &&
      !bounds.contains_strictly(init.pinned_factor * init.pinned_target)) {
    throw std::invalid_argument("init_model: pinned exponent lies outside the bounds");
  }

  CounterRng exps(init.seed, 101);
  CounterRng coeffs(init.seed, 102);
  Eigen::VectorXd mu(terms), c(terms);
  for (int k = 0; k < terms; ++k) {
    double m = exps.uniform(bounds.lo, bounds.hi);
    if (init.exponent_init != ExponentInit::Uniform) m += init.mu_sigma * exps.normal();
    mu[k] = m;
    c[k] = init.coeff_sigma * coeffs.normal();
  }
  if (init.exponent_init == ExponentInit::PinnedFundamental) mu[0] = init.pinned_factor * init.pinned_target;
  return model_from_exponents<double>(mu, c, bounds, angular);
}

namespace {

struct AdamGroup {
  Eigen::VectorXd m, v;

  explicit AdamGroup(Eigen::Index n) : m(Eigen::VectorXd::Zero(n)), v(Eigen::VectorXd::Zero(n)) {}

  void step(Eigen::VectorXd& param, const Eigen::VectorXd& grad, double lr, int t, const AdamParams& a) {
    m = a.beta1 * m + (1.0 - a.beta1) * grad;
    v = a.beta2 * v + (1.0 - a.beta2) * grad.cwiseAbs2();
    const double bc1 = 1.0 - std::pow(a.beta1, t);
    const double bc2 = 1.0 - std::pow(a.beta2, t);
    param.array() -= lr * (m.array() / bc1) / ((v.array() / bc2).sqrt() + a.eps);
  }
};

bool finite(const LossBreakdown& l) {
  return std::isfinite(l.total) && l.grad_raw.allFinite() && l.grad_c.allFinite();
}

}  // namespace

TrainTrace train(MsnModel model, const ProblemSpec& problem, const CollocationSet& set, const LossWeights& weights,
                 const TrainSchedule& schedule, const TrainOptions& options) {
  schedule.validate();
  model.validate();
  if (!weights.valid()) throw std::invalid_argument("train: loss weights must be >= 0");
  if (set.empty()) throw std::invalid_argument("train: empty collocation set");

  const auto start = std::chrono::steady_clock::now();
  const Eigen::Index K = model.terms();
  AdamGroup exp_group(K), coeff_group(K);
  TrainTrace trace;
  trace.seed = options.seed;
  if (options.record_history) trace.epochs.reserve(static_cast<std::size_t>(schedule.epochs));

  for (int epoch = 0; epoch < schedule.epochs; ++epoch) {
    const LossWeights w = weights_at(epoch, weights, schedule);
    const ScheduleState state{constraint_multiplier(epoch, schedule)};
    LossBreakdown loss = total_loss(model, problem, set, w, state);
    if (!finite(loss)) throw TrainingAborted(epoch, "non-finite loss or gradient");

    const double norm = std::sqrt(loss.grad_raw.squaredNorm() + loss.grad_c.squaredNorm());
    if (norm > schedule.clip_norm) {
      const double s = schedule.clip_norm / norm;
      loss.grad_raw *= s;
      loss.grad_c *= s;
    }

    if (options.record_history) {
      trace.epochs.push_back({epoch, loss.total, loss.residual, loss.bc, loss.sparsity, loss.constraint,
                              std::sqrt(loss.grad_raw.squaredNorm() + loss.grad_c.squaredNorm()),
                              model.exponents(), model.coeffs});
    }

    // Fast update on the coefficients, then the slow update on the exponents,
    // both from the same gradient.
    coeff_group.step(model.coeffs, loss.grad_c, schedule.eta_c, epoch + 1, schedule.adam);
    if (schedule.eta_mu > 0.0) exp_group.step(model.raw, loss.grad_raw, schedule.eta_mu, epoch + 1, schedule.adam);
  }

  const LossWeights w_end = weights_at(schedule.epochs - 1, weights, schedule);
  trace.final_loss = total_loss(model, problem, set, w_end, {constraint_multiplier(schedule.epochs - 1, schedule)});
  if (!finite(trace.final_loss)) throw TrainingAborted(schedule.epochs, "non-finite final loss");
  trace.final_model = std::move(model);
  trace.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return trace;
}

}  // namespace msn
