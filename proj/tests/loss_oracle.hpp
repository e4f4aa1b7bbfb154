#pragma once

// Independent long-double evaluation of the training loss, used to check the
// analytic gradients by central differences.

#include "msn/losses.hpp"
#include "msn/problems.hpp"

#include <cmath>
#include <random>
#include <string>
#include <vector>

namespace msn::oracle {

using LD = long double;

inline LD oracle_total(const BasicMsnModel<LD>& m, const ProblemSpec& problem, const CollocationSet& set,
                       const LossWeights& w, double multiplier) {
  const Eigen::Index K = m.terms();
  LD res = 0, bc = 0, sp = 0, con = 0;
  const auto n = static_cast<LD>(set.x.size());

  if (const auto* fit = std::get_if<SupervisedFit>(&problem)) {
    (void)fit;
    for (Eigen::Index i = 0; i < set.x.size(); ++i) {
      const LD r = eval(m, LD(set.x[i])) - LD(set.y[i]);
      res += r * r / n;
    }
  } else if (std::holds_alternative<SingularOde>(problem)) {
    for (Eigen::Index i = 0; i < set.x.size(); ++i) {
      const LD x = set.x[i];
      const LD r = x * d2(m, x) + d1(m, x) / 2;
      res += r * r / n;
    }
  } else if (const auto* p = std::get_if<SingularPoisson>(&problem)) {
    for (Eigen::Index i = 0; i < set.x.size(); ++i) {
      const LD x = set.x[i];
      const LD r = -d2(m, x) - std::pow(x, LD(p->beta));
      res += r * r / n;
    }
  }

  const auto nb = static_cast<LD>(set.boundary.size());
  const bool wedge = std::holds_alternative<Wedge>(problem);
  for (const BoundaryPoint& b : set.boundary) {
    LD r;
    if (!wedge) {
      r = eval(m, LD(b.r)) - LD(b.value);
    } else if (b.op == BoundaryOp::Dirichlet) {
      r = wedge_eval(m, LD(b.r), LD(b.theta)) - LD(b.value);
    } else {
      r = wedge_angular_derivative(m, LD(b.r), LD(b.theta)) / LD(b.r) - LD(b.value);
    }
    bc += r * r / nb;
  }

  for (Eigen::Index k = 0; k < K; ++k) sp += std::abs(m.coeffs[k]) / LD(K);

  if (const auto* wd = std::get_if<Wedge>(&problem)) {
    const bool use_sin = quantization(wd->bc) == Trig::Sin;
    const Vector<LD> mu = m.exponents();
    for (Eigen::Index k = 0; k < K; ++k) {
      const LD t = use_sin ? std::sin(mu[k] * LD(wd->omega)) : std::cos(mu[k] * LD(wd->omega));
      con += std::abs(m.coeffs[k]) * t * t;
    }
  }
  return LD(w.w_r) * res + LD(w.w_b) * bc + LD(w.w_s) * sp + LD(w.w_con) * LD(multiplier) * con;
}

struct GradientCase {
  std::string kind;
  MsnModel model;
  ProblemSpec problem;
  CollocationSet set;
  LossWeights weights;
  double multiplier = 1.0;
};

/// Random (model, point set, weights) for one of "supervised", "ode",
/// "poisson", "wedge".
inline GradientCase random_case(const std::string& kind, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> U(0.0, 1.0);
  auto uni = [&](double lo, double hi) { return lo + (hi - lo) * U(rng); };
  GradientCase gc;
  gc.kind = kind;
  const int K = 1 + static_cast<int>(rng() % 6);
  gc.weights = {uni(0.5, 2.0), uni(1.0, 100.0), uni(1e-3, 1.0), uni(0.5, 10.0)};
  gc.multiplier = uni(0.0, 1.0);

  ExponentBounds bounds{0.1, 3.0};
  Angular angular = Angular::None;
  const int n = 5 + static_cast<int>(rng() % 30);
  if (kind == "supervised") {
    gc.problem = SupervisedFit{"single", 0.0};
    gc.set.x.resize(n);
    gc.set.y.resize(n);
    for (int i = 0; i < n; ++i) {
      gc.set.x[i] = i == 0 ? 0.0 : uni(0.0, 1.0);
      gc.set.y[i] = std::sqrt(gc.set.x[i]) + uni(-0.1, 0.1);
    }
  } else if (kind == "ode") {
    gc.problem = SingularOde{};
    gc.set.x.resize(n);
    for (int i = 0; i < n; ++i) gc.set.x[i] = uni(1e-3, 1.0);
    gc.set.boundary.push_back({1.0, 0.0, BoundaryOp::Dirichlet, 1.0});
  } else if (kind == "poisson") {
    const double beta = uni(-0.9, 1.0);
    gc.problem = SingularPoisson{beta};
    gc.set.x.resize(n);
    for (int i = 0; i < n; ++i) gc.set.x[i] = uni(kForcingExclusion, 1.0);
    gc.set.boundary.push_back({0.0, 0.0, BoundaryOp::Dirichlet, 0.0});
    gc.set.boundary.push_back({1.0, 0.0, BoundaryOp::Dirichlet, 0.0});
  } else {
    const WedgeBc bcs[] = {WedgeBc::DD, WedgeBc::NN, WedgeBc::DN, WedgeBc::ND};
    const double omega = uni(0.3, 6.0);
    const WedgeBc bc = bcs[rng() % 4];
    gc.problem = Wedge{omega, bc};
    CollocationParams params;
    params.n_interior = 10;
    params.n_arc = 5 + static_cast<int>(rng() % 20);
    params.n_edge = 3 + static_cast<int>(rng() % 10);
    gc.set = make_collocation(gc.problem, params, rng());
    bounds = bc_adaptive_bounds(omega, bc);
    angular = angular_mode(gc.problem);
  }

  gc.model = MsnModel{Eigen::VectorXd(K), Eigen::VectorXd(K), bounds, angular};
  for (int k = 0; k < K; ++k) {
    gc.model.raw[k] = uni(-2.5, 2.5);
    // Keep |c| away from the kink of the absolute value.
    const double mag = uni(0.05, 1.5);
    gc.model.coeffs[k] = U(rng) < 0.5 ? -mag : mag;
  }
  return gc;
}

struct GradientCheck {
  double worst_rel = 0.0;
  double value_rel = 0.0;
};

/// Compares the analytic gradient of total_loss with long-double central
/// differences of the oracle loss. Relative error per component uses
/// max(|fd|, 1e-10) as the scale.
inline GradientCheck check_gradient(const GradientCase& gc, long double h = 1e-6L) {
  const LossBreakdown lb = total_loss(gc.model, gc.problem, gc.set, gc.weights, {gc.multiplier});
  BasicMsnModel<LD> m = gc.model.cast<LD>();
  GradientCheck out;
  const LD v = oracle_total(m, gc.problem, gc.set, gc.weights, gc.multiplier);
  out.value_rel = static_cast<double>(std::abs(LD(lb.total) - v) / std::max(std::abs(v), LD(1e-30)));
  for (int block = 0; block < 2; ++block) {
    auto& p = block == 0 ? m.raw : m.coeffs;
    const Eigen::VectorXd& g = block == 0 ? lb.grad_raw : lb.grad_c;
    for (Eigen::Index k = 0; k < p.size(); ++k) {
      const LD p0 = p[k];
      p[k] = p0 + h;
      const LD up = oracle_total(m, gc.problem, gc.set, gc.weights, gc.multiplier);
      p[k] = p0 - h;
      const LD down = oracle_total(m, gc.problem, gc.set, gc.weights, gc.multiplier);
      p[k] = p0;
      const LD fd = (up - down) / (2 * h);
      const LD rel = std::abs(LD(g[k]) - fd) / std::max(std::abs(fd), LD(1e-10));
      out.worst_rel = std::max(out.worst_rel, static_cast<double>(rel));
    }
  }
  return out;
}

}  // namespace msn::oracle
