#include "msn/losses.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace msn {

namespace {

double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

void require_positive(double x, const char* problem) {
  if (!(x > 0.0)) {
    throw std::domain_error(std::string(problem) + ": residual point x = " + std::to_string(x) +
                            " must be > 0");
  }
}

}  // namespace

LossTerm residual_loss(const MsnModel& model, const ProblemSpec& problem, const CollocationSet& set) {
  const Eigen::Index K = model.terms();
  LossTerm out = LossTerm::zero(K);
  if (std::holds_alternative<Wedge>(problem)) return out;

  const Eigen::Index n = set.x.size();
  if (n == 0) return out;
  const double scale = 1.0 / static_cast<double>(n);

  if (std::holds_alternative<SupervisedFit>(problem)) {
    if (set.y.size() != n) throw std::invalid_argument("residual_loss: supervised fit needs targets y");
    for (Eigen::Index i = 0; i < n; ++i) {
      const ValueGrads g = value_grads(model, set.x[i]);
      const double r = g.value - set.y[i];
      out.value += scale * r * r;
      out.grad_c += (2.0 * scale * r) * g.du_dc;
      out.grad_raw += (2.0 * scale * r) * g.du_draw;
    }
    return out;
  }

  if (std::holds_alternative<SingularOde>(problem)) {
    // x u'' + u'/2
    for (Eigen::Index i = 0; i < n; ++i) {
      const double x = set.x[i];
      require_positive(x, "singular ODE");
      const ParamGrads g = param_grads(model, x);
      const double r = x * g.dd2_dc.dot(model.coeffs) + 0.5 * g.dd1_dc.dot(model.coeffs);
      out.value += scale * r * r;
      out.grad_c += (2.0 * scale * r) * (x * g.dd2_dc + 0.5 * g.dd1_dc);
      out.grad_raw += (2.0 * scale * r) * (x * g.dd2_draw + 0.5 * g.dd1_draw);
    }
    return out;
  }

  const auto& poisson = std::get<SingularPoisson>(problem);
  // -u'' - x^beta
  for (Eigen::Index i = 0; i < n; ++i) {
    const double x = set.x[i];
    if (!(x >= kForcingExclusion)) {
      throw std::domain_error("singular Poisson: residual point x = " + std::to_string(x) +
                              " lies inside the exclusion zone x < 0.01");
    }
    const ParamGrads g = param_grads(model, x);
    const double r = -g.dd2_dc.dot(model.coeffs) - std::pow(x, poisson.beta);
    out.value += scale * r * r;
    out.grad_c -= (2.0 * scale * r) * g.dd2_dc;
    out.grad_raw -= (2.0 * scale * r) * g.dd2_draw;
  }
  return out;
}

LossTerm bc_loss(const MsnModel& model, const ProblemSpec& problem, const CollocationSet& set) {
  const Eigen::Index K = model.terms();
  LossTerm out = LossTerm::zero(K);
  if (set.boundary.empty()) return out;
  const double scale = 1.0 / static_cast<double>(set.boundary.size());
  const bool wedge = std::holds_alternative<Wedge>(problem);

  for (const BoundaryPoint& b : set.boundary) {
    if (!wedge) {
      if (b.op != BoundaryOp::Dirichlet) throw std::invalid_argument("bc_loss: 1D problems take Dirichlet data");
      const ValueGrads g = value_grads(model, b.r);
      const double r = g.value - b.value;
      out.value += scale * r * r;
      out.grad_c += (2.0 * scale * r) * g.du_dc;
      out.grad_raw += (2.0 * scale * r) * g.du_draw;
      continue;
    }
    const WedgeGrads g = wedge_param_grads(model, b.r, b.theta);
    if (b.op == BoundaryOp::Dirichlet) {
      const double r = g.value - b.value;
      out.value += scale * r * r;
      out.grad_c += (2.0 * scale * r) * g.du_dc;
      out.grad_raw += (2.0 * scale * r) * g.du_draw;
    } else {
      // Normal derivative on an edge: (1/r) du/dtheta.
      const double inv_r = 1.0 / b.r;
      const double r = inv_r * g.angular_derivative - b.value;
      out.value += scale * r * r;
      out.grad_c += (2.0 * scale * r * inv_r) * g.da_dc;
      out.grad_raw += (2.0 * scale * r * inv_r) * g.da_draw;
    }
  }
  return out;
}

LossTerm sparsity_loss(const MsnModel& model) {
  const Eigen::Index K = model.terms();
  LossTerm out = LossTerm::zero(K);
  const double inv_k = 1.0 / static_cast<double>(K);
  out.value = inv_k * model.coeffs.cwiseAbs().sum();
  for (Eigen::Index k = 0; k < K; ++k) out.grad_c[k] = inv_k * sign(model.coeffs[k]);
  return out;
}

LossTerm constraint_loss(const MsnModel& model, double omega, Trig trig) {
  if (!(omega > 0.0)) throw std::invalid_argument("constraint_loss: omega must be > 0");
  const Eigen::Index K = model.terms();
  LossTerm out = LossTerm::zero(K);
  for (Eigen::Index k = 0; k < K; ++k) {
    const auto [mu, dmu] = reparam(model.raw[k], model.bounds);
    const double c = model.coeffs[k];
    const double s = std::sin(mu * omega);
    const double co = std::cos(mu * omega);
    const double t2 = trig == Trig::Sin ? s * s : co * co;
    // d/dmu sin^2(mu w) = w sin(2 mu w); d/dmu cos^2(mu w) = -w sin(2 mu w)
    const double dt2 = (trig == Trig::Sin ? 1.0 : -1.0) * omega * std::sin(2.0 * mu * omega);
    out.value += std::abs(c) * t2;
    out.grad_c[k] = sign(c) * t2;
    out.grad_raw[k] = std::abs(c) * dt2 * dmu;
  }
  return out;
}

LossBreakdown total_loss(const MsnModel& model, const ProblemSpec& problem, const CollocationSet& set,
                         const LossWeights& weights, const ScheduleState& state) {
  const Eigen::Index K = model.terms();
  const LossTerm res = residual_loss(model, problem, set);
  const LossTerm bc = bc_loss(model, problem, set);
  const LossTerm sp = sparsity_loss(model);
  LossTerm con = LossTerm::zero(K);
  if (const auto* w = std::get_if<Wedge>(&problem)) con = constraint_loss(model, w->omega, quantization(w->bc));

  const double w_con = weights.w_con * state.constraint_multiplier;
  LossBreakdown out;
  out.residual = res.value;
  out.bc = bc.value;
  out.sparsity = sp.value;
  out.constraint = con.value;
  out.total = weights.w_r * res.value + weights.w_b * bc.value + weights.w_s * sp.value + w_con * con.value;
  out.grad_raw = weights.w_r * res.grad_raw + weights.w_b * bc.grad_raw + weights.w_s * sp.grad_raw +
                 w_con * con.grad_raw;
  out.grad_c = weights.w_r * res.grad_c + weights.w_b * bc.grad_c + weights.w_s * sp.grad_c +
               w_con * con.grad_c;
  return out;
}

}  // namespace msn
