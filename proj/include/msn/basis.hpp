#pragma once

// Power-law ansatz u(x) = sum_k c_k x^{mu_k} with bounded, trainable exponents.
//
// Everything here is templated on the scalar type so the same code path can
// be instantiated in long double by the finite-difference test oracles.

#include <Eigen/Core>

#include <cmath>
#include <stdexcept>
#include <string>

namespace msn {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Open interval (lo, hi) that every effective exponent lives in.
template <typename Scalar>
struct BasicExponentBounds {
  Scalar lo = Scalar(0.1);
  Scalar hi = Scalar(3.0);

  bool valid() const { return lo < hi && std::isfinite(double(lo)) && std::isfinite(double(hi)); }
  Scalar width() const { return hi - lo; }
  bool contains_strictly(Scalar mu) const { return lo < mu && mu < hi; }
};

/// Angular factor used by the separable wedge form r^mu * phi(mu * theta).
enum class Angular { None, Sin, Cos };

template <typename Scalar>
struct BasicReparam {
  Scalar mu;
  Scalar dmu_draw;
};

template <typename Scalar>
Scalar logistic(Scalar z) {
  using std::exp;
  // Split on sign so neither branch overflows.
  if (z >= Scalar(0)) {
    return Scalar(1) / (Scalar(1) + exp(-z));
  }
  const Scalar e = exp(z);
  return e / (Scalar(1) + e);
}

/// mu = lo + (hi - lo) * sigmoid(raw) together with d mu / d raw.
template <typename Scalar>
BasicReparam<Scalar> reparam(Scalar raw, const BasicExponentBounds<Scalar>& bounds) {
  const Scalar s = logistic(raw);
  return {bounds.lo + bounds.width() * s, bounds.width() * s * (Scalar(1) - s)};
}

/// Inverse of reparam. The fraction is clamped to [1e-6, 1 - 1e-6] so that
/// initial raw values never start in a saturated region of the sigmoid.
template <typename Scalar>
Scalar inverse_reparam(Scalar mu, const BasicExponentBounds<Scalar>& bounds) {
  using std::log;
  Scalar frac = (mu - bounds.lo) / bounds.width();
  const Scalar margin = Scalar(1e-6);
  if (frac < margin) frac = margin;
  if (frac > Scalar(1) - margin) frac = Scalar(1) - margin;
  return log(frac / (Scalar(1) - frac));
}

template <typename Scalar>
struct BasicMsnModel {
  Vector<Scalar> raw;     ///< unconstrained exponent parameters
  Vector<Scalar> coeffs;  ///< linear coefficients c_k
  BasicExponentBounds<Scalar> bounds;
  Angular angular = Angular::None;

  Eigen::Index terms() const { return coeffs.size(); }

  Vector<Scalar> exponents() const {
    Vector<Scalar> mu(raw.size());
    for (Eigen::Index k = 0; k < raw.size(); ++k) mu[k] = reparam(raw[k], bounds).mu;
    return mu;
  }

  /// Throws std::invalid_argument when sizes or bounds are inconsistent.
  void validate() const {
    if (raw.size() < 1 || raw.size() != coeffs.size()) {
      throw std::invalid_argument("MsnModel: need K >= 1 with |raw| == |coeffs|");
    }
    if (!bounds.valid()) throw std::invalid_argument("MsnModel: exponent bounds need lo < hi");
  }

  template <typename Other>
  BasicMsnModel<Other> cast() const {
    return {raw.template cast<Other>(), coeffs.template cast<Other>(),
            {Other(bounds.lo), Other(bounds.hi)}, angular};
  }
};

/// Builds a model whose effective exponents equal `mu` (up to the clamp in
/// inverse_reparam).
template <typename Scalar>
BasicMsnModel<Scalar> model_from_exponents(const Vector<Scalar>& mu, const Vector<Scalar>& coeffs,
                                           const BasicExponentBounds<Scalar>& bounds,
                                           Angular angular = Angular::None) {
  BasicMsnModel<Scalar> m{Vector<Scalar>(mu.size()), coeffs, bounds, angular};
  for (Eigen::Index k = 0; k < mu.size(); ++k) m.raw[k] = inverse_reparam(mu[k], bounds);
  m.validate();
  return m;
}

namespace detail {

// x^mu for x > 0 through exp(mu log x); x == 0 handled by the caller.
template <typename Scalar>
Scalar pow_pos(Scalar x, Scalar mu) {
  using std::exp;
  using std::log;
  return exp(mu * log(x));
}

template <typename Scalar>
Scalar phi(Angular a, Scalar t) {
  using std::cos;
  using std::sin;
  return a == Angular::Cos ? cos(t) : sin(t);
}

template <typename Scalar>
Scalar dphi(Angular a, Scalar t) {
  using std::cos;
  using std::sin;
  return a == Angular::Cos ? -sin(t) : cos(t);
}

[[noreturn]] inline void domain(const std::string& what) { throw std::domain_error(what); }

}  // namespace detail

/// u(x) = sum c_k x^{mu_k}. x == 0 is allowed when every mu_k > 0.
template <typename Scalar>
Scalar eval(const BasicMsnModel<Scalar>& model, Scalar x) {
  if (model.angular != Angular::None) {
    detail::domain("eval: wedge models are evaluated with wedge_eval");
  }
  if (!(x >= Scalar(0))) detail::domain("eval: x must be >= 0 (use SignedMsnModel for x < 0)");
  Scalar sum(0);
  for (Eigen::Index k = 0; k < model.terms(); ++k) {
    const Scalar mu = reparam(model.raw[k], model.bounds).mu;
    if (x == Scalar(0)) {
      if (!(mu > Scalar(0))) detail::domain("eval: x = 0 needs every exponent > 0");
      continue;
    }
    sum += model.coeffs[k] * detail::pow_pos(x, mu);
  }
  return sum;
}

template <typename Scalar>
Scalar d1(const BasicMsnModel<Scalar>& model, Scalar x) {
  if (!(x > Scalar(0))) detail::domain("d1: x must be > 0");
  Scalar sum(0);
  for (Eigen::Index k = 0; k < model.terms(); ++k) {
    const Scalar mu = reparam(model.raw[k], model.bounds).mu;
    sum += model.coeffs[k] * mu * detail::pow_pos(x, mu - Scalar(1));
  }
  return sum;
}

template <typename Scalar>
Scalar d2(const BasicMsnModel<Scalar>& model, Scalar x) {
  if (!(x > Scalar(0))) detail::domain("d2: x must be > 0");
  Scalar sum(0);
  for (Eigen::Index k = 0; k < model.terms(); ++k) {
    const Scalar mu = reparam(model.raw[k], model.bounds).mu;
    sum += model.coeffs[k] * mu * (mu - Scalar(1)) * detail::pow_pos(x, mu - Scalar(2));
  }
  return sum;
}

/// Sensitivities of u, u', u'' with respect to every coefficient and every
/// raw exponent. Exponent derivatives are already chained through reparam.
template <typename Scalar>
struct BasicParamGrads {
  Vector<Scalar> du_dc, du_draw;
  Vector<Scalar> dd1_dc, dd1_draw;
  Vector<Scalar> dd2_dc, dd2_draw;
};

template <typename Scalar>
BasicParamGrads<Scalar> param_grads(const BasicMsnModel<Scalar>& model, Scalar x) {
  using std::log;
  if (!(x > Scalar(0))) detail::domain("param_grads: x must be > 0");
  const Eigen::Index K = model.terms();
  BasicParamGrads<Scalar> g{Vector<Scalar>(K), Vector<Scalar>(K), Vector<Scalar>(K),
                            Vector<Scalar>(K), Vector<Scalar>(K), Vector<Scalar>(K)};
  const Scalar lx = log(x);
  for (Eigen::Index k = 0; k < K; ++k) {
    const auto [mu, dmu] = reparam(model.raw[k], model.bounds);
    const Scalar c = model.coeffs[k];
    const Scalar p0 = detail::pow_pos(x, mu);
    const Scalar p1 = detail::pow_pos(x, mu - Scalar(1));
    const Scalar p2 = detail::pow_pos(x, mu - Scalar(2));
    g.du_dc[k] = p0;
    g.du_draw[k] = c * p0 * lx * dmu;
    g.dd1_dc[k] = mu * p1;
    g.dd1_draw[k] = c * p1 * (Scalar(1) + mu * lx) * dmu;
    g.dd2_dc[k] = mu * (mu - Scalar(1)) * p2;
    g.dd2_draw[k] = c * p2 * ((Scalar(2) * mu - Scalar(1)) + mu * (mu - Scalar(1)) * lx) * dmu;
  }
  return g;
}

/// Value-only sensitivities, valid at x = 0 when all exponents are positive
/// (x^mu log x -> 0 is returned as exactly 0 there).
template <typename Scalar>
struct BasicValueGrads {
  Scalar value;
  Vector<Scalar> du_dc, du_draw;
};

template <typename Scalar>
BasicValueGrads<Scalar> value_grads(const BasicMsnModel<Scalar>& model, Scalar x) {
  using std::log;
  if (!(x >= Scalar(0))) detail::domain("value_grads: x must be >= 0");
  const Eigen::Index K = model.terms();
  BasicValueGrads<Scalar> g{Scalar(0), Vector<Scalar>::Zero(K), Vector<Scalar>::Zero(K)};
  for (Eigen::Index k = 0; k < K; ++k) {
    const auto [mu, dmu] = reparam(model.raw[k], model.bounds);
    if (x == Scalar(0)) {
      if (!(mu > Scalar(0))) detail::domain("value_grads: x = 0 needs every exponent > 0");
      continue;
    }
    const Scalar p0 = detail::pow_pos(x, mu);
    g.value += model.coeffs[k] * p0;
    g.du_dc[k] = p0;
    g.du_draw[k] = model.coeffs[k] * p0 * log(x) * dmu;
  }
  return g;
}

// ---------------------------------------------------------------------------
// Wedge form u(r, theta) = sum c_k r^{mu_k} phi(mu_k theta)

template <typename Scalar>
Scalar wedge_eval(const BasicMsnModel<Scalar>& model, Scalar r, Scalar theta) {
  if (model.angular == Angular::None) detail::domain("wedge_eval: model has no angular mode");
  if (!(r > Scalar(0))) detail::domain("wedge_eval: r must be > 0");
  Scalar sum(0);
  for (Eigen::Index k = 0; k < model.terms(); ++k) {
    const Scalar mu = reparam(model.raw[k], model.bounds).mu;
    sum += model.coeffs[k] * detail::pow_pos(r, mu) * detail::phi(model.angular, mu * theta);
  }
  return sum;
}

/// d u / d theta = sum c_k mu_k r^{mu_k} phi'(mu_k theta).
template <typename Scalar>
Scalar wedge_angular_derivative(const BasicMsnModel<Scalar>& model, Scalar r, Scalar theta) {
  if (model.angular == Angular::None) detail::domain("wedge_angular_derivative: no angular mode");
  if (!(r > Scalar(0))) detail::domain("wedge_angular_derivative: r must be > 0");
  Scalar sum(0);
  for (Eigen::Index k = 0; k < model.terms(); ++k) {
    const Scalar mu = reparam(model.raw[k], model.bounds).mu;
    sum += model.coeffs[k] * mu * detail::pow_pos(r, mu) * detail::dphi(model.angular, mu * theta);
  }
  return sum;
}

template <typename Scalar>
struct BasicWedgeGrads {
  Scalar value, angular_derivative;
  Vector<Scalar> du_dc, du_draw;  ///< of u
  Vector<Scalar> da_dc, da_draw;  ///< of d u / d theta
};

template <typename Scalar>
BasicWedgeGrads<Scalar> wedge_param_grads(const BasicMsnModel<Scalar>& model, Scalar r, Scalar theta) {
  using std::log;
  if (model.angular == Angular::None) detail::domain("wedge_param_grads: no angular mode");
  if (!(r > Scalar(0))) detail::domain("wedge_param_grads: r must be > 0");
  const Eigen::Index K = model.terms();
  BasicWedgeGrads<Scalar> g{Scalar(0), Scalar(0), Vector<Scalar>(K), Vector<Scalar>(K),
                            Vector<Scalar>(K), Vector<Scalar>(K)};
  const Scalar lr = log(r);
  for (Eigen::Index k = 0; k < K; ++k) {
    const auto [mu, dmu] = reparam(model.raw[k], model.bounds);
    const Scalar c = model.coeffs[k];
    const Scalar rp = detail::pow_pos(r, mu);
    const Scalar f = detail::phi(model.angular, mu * theta);
    const Scalar df = detail::dphi(model.angular, mu * theta);
    // phi'' = -phi for both sin and cos.
    g.value += c * rp * f;
    g.angular_derivative += c * mu * rp * df;
    g.du_dc[k] = rp * f;
    g.du_draw[k] = c * rp * (lr * f + theta * df) * dmu;
    g.da_dc[k] = mu * rp * df;
    g.da_draw[k] = c * rp * (df + mu * lr * df - mu * theta * f) * dmu;
  }
  return g;
}

// ---------------------------------------------------------------------------
// Signed-domain extension: even part a_k |x|^{mu_k}, odd part b_k sign(x) |x|^{lambda_k}.

template <typename Scalar>
struct BasicSignedMsnModel {
  Vector<Scalar> even_coeffs, even_exponents;
  Vector<Scalar> odd_coeffs, odd_exponents;

  void validate() const {
    if (even_coeffs.size() != even_exponents.size() || odd_coeffs.size() != odd_exponents.size()) {
      throw std::invalid_argument("SignedMsnModel: coefficient/exponent length mismatch");
    }
  }
};

template <typename Scalar>
Scalar signed_eval(const BasicSignedMsnModel<Scalar>& model, Scalar x) {
  using std::abs;
  model.validate();
  if (x == Scalar(0)) return Scalar(0);
  const Scalar ax = abs(x);
  const Scalar sgn = x > Scalar(0) ? Scalar(1) : Scalar(-1);
  Scalar sum(0);
  for (Eigen::Index k = 0; k < model.even_coeffs.size(); ++k) {
    sum += model.even_coeffs[k] * detail::pow_pos(ax, model.even_exponents[k]);
  }
  for (Eigen::Index k = 0; k < model.odd_coeffs.size(); ++k) {
    sum += model.odd_coeffs[k] * sgn * detail::pow_pos(ax, model.odd_exponents[k]);
  }
  return sum;
}

using ExponentBounds = BasicExponentBounds<double>;
using MsnModel = BasicMsnModel<double>;
using SignedMsnModel = BasicSignedMsnModel<double>;
using ParamGrads = BasicParamGrads<double>;
using ValueGrads = BasicValueGrads<double>;
using WedgeGrads = BasicWedgeGrads<double>;
using Reparam = BasicReparam<double>;

}  // namespace msn
