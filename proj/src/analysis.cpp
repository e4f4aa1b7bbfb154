#include "msn/analysis.hpp"
#include "msn/losses.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <stdexcept>

namespace msn {

double dominant_exponent(const MsnModel& model) {
  model.validate();
  const Eigen::VectorXd mu = model.exponents();
  Eigen::Index best = 0;
  for (Eigen::Index k = 1; k < model.terms(); ++k) {
    const double a = std::abs(model.coeffs[k]);
    const double b = std::abs(model.coeffs[best]);
    if (a > b || (a == b && mu[k] < mu[best])) best = k;
  }
  return mu[best];
}

std::vector<ActiveTerm> active_terms(const MsnModel& model, double threshold) {
  const Eigen::VectorXd mu = model.exponents();
  std::vector<ActiveTerm> out;
  for (Eigen::Index k = 0; k < model.terms(); ++k) {
    if (std::abs(model.coeffs[k]) > threshold) out.push_back({mu[k], model.coeffs[k]});
  }
  std::sort(out.begin(), out.end(), [](const ActiveTerm& a, const ActiveTerm& b) {
    return a.mu < b.mu || (a.mu == b.mu && a.c < b.c);
  });
  return out;
}

namespace {

double rel_err_pct(double mu, double target) { return std::abs(mu - target) / std::abs(target) * 100.0; }

std::vector<double> cluster_centres(std::vector<ActiveTerm> active) {
  std::sort(active.begin(), active.end(), [](const ActiveTerm& a, const ActiveTerm& b) { return a.mu < b.mu; });
  std::vector<double> centres;
  std::size_t i = 0;
  while (i < active.size()) {
    double wsum = 0.0, musum = 0.0;
    std::size_t j = i;
    do {
      wsum += std::abs(active[j].c);
      musum += std::abs(active[j].c) * active[j].mu;
      ++j;
    } while (j < active.size() && active[j].mu - active[j - 1].mu < kClusterRadius);
    centres.push_back(musum / wsum);
    i = j;
  }
  return centres;
}

}  // namespace

MatchResult match_exponents(const std::vector<ActiveTerm>& active, const std::vector<double>& targets) {
  MatchResult out;
  out.clusters = cluster_centres(active);
  const std::size_t nt = targets.size();
  const std::size_t nc = out.clusters.size();
  if (nt == 0) return out;

  out.under_resolved = nc < nt;
  std::vector<std::size_t> assignment(nt, 0);
  if (nc == 0) {
    for (double t : targets) out.matches.push_back({t, std::nan(""), std::numeric_limits<double>::infinity()});
    out.max_rel_err_pct = out.mean_rel_err_pct = std::numeric_limits<double>::infinity();
    return out;
  }

  if (out.under_resolved) {
    for (std::size_t t = 0; t < nt; ++t) {
      std::size_t best = 0;
      for (std::size_t c = 1; c < nc; ++c) {
        if (rel_err_pct(out.clusters[c], targets[t]) < rel_err_pct(out.clusters[best], targets[t])) best = c;
      }
      assignment[t] = best;
    }
  } else {
    // Exhaustive search over injective assignments; order by (max, sum).
    std::vector<std::size_t> current(nt);
    std::vector<bool> used(nc, false);
    double best_max = std::numeric_limits<double>::infinity();
    double best_sum = std::numeric_limits<double>::infinity();
    std::function<void(std::size_t, double, double)> search = [&](std::size_t t, double mx, double sum) {
      if (mx > best_max) return;
      if (t == nt) {
        if (mx < best_max || (mx == best_max && sum < best_sum)) {
          best_max = mx;
          best_sum = sum;
          assignment = current;
        }
        return;
      }
      for (std::size_t c = 0; c < nc; ++c) {
        if (used[c]) continue;
        const double e = rel_err_pct(out.clusters[c], targets[t]);
        used[c] = true;
        current[t] = c;
        search(t + 1, std::max(mx, e), sum + e);
        used[c] = false;
      }
    };
    search(0, 0.0, 0.0);
  }

  double sum = 0.0;
  for (std::size_t t = 0; t < nt; ++t) {
    const double mu = out.clusters[assignment[t]];
    const double e = rel_err_pct(mu, targets[t]);
    out.matches.push_back({targets[t], mu, e});
    out.max_rel_err_pct = std::max(out.max_rel_err_pct, e);
    sum += e;
  }
  out.mean_rel_err_pct = sum / static_cast<double>(nt);
  return out;
}

double constraint_violation(const MsnModel& model, double omega, Trig trig) {
  if (!(omega > 0.0)) throw std::invalid_argument("constraint_violation: omega must be > 0");
  return constraint_loss(model, omega, trig).value;
}

double gram_condition(const Eigen::VectorXd& exponents, const Eigen::VectorXd& points) {
  if (exponents.size() < 2 || points.size() < 2) {
    throw std::invalid_argument("gram_condition: need at least two exponents and two points");
  }
  Eigen::MatrixXd phi(points.size(), exponents.size());
  for (Eigen::Index i = 0; i < points.size(); ++i) {
    for (Eigen::Index k = 0; k < exponents.size(); ++k) {
      phi(i, k) = points[i] == 0.0 ? 0.0 : std::pow(points[i], exponents[k]);
    }
  }
  const Eigen::MatrixXd gram = (phi.transpose() * phi) / static_cast<double>(points.size());
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram, Eigen::EigenvaluesOnly);
  const double lmax = eig.eigenvalues().maxCoeff();
  const double lmin = eig.eigenvalues().minCoeff();
  if (!(lmax > 0.0) || lmin <= lmax * 1e-13) return std::numeric_limits<double>::infinity();
  return lmax / lmin;
}

std::vector<RatePoint> rate_curve(double alpha, const std::vector<double>& mus) {
  if (!(alpha > 0.0)) throw std::invalid_argument("rate_curve: alpha must be > 0");
  std::vector<RatePoint> out;
  out.reserve(mus.size());
  for (double mu : mus) {
    if (!(mu > -0.5)) throw std::invalid_argument("rate_curve: every mu must be > -1/2");
    const double s = alpha + mu + 1.0;
    const double c_star = (2.0 * mu + 1.0) / s;
    // 1/(2a+1) - (2mu+1)/s^2 collapses to (mu-a)^2 / ((2a+1) s^2).
    const double d = mu - alpha;
    out.push_back({mu, c_star, d * d / ((2.0 * alpha + 1.0) * s * s)});
  }
  return out;
}

double loglog_slope(double alpha, const std::vector<RatePoint>& curve) {
  std::vector<double> lx, ly;
  for (const auto& p : curve) {
    if (p.mu == alpha || !(p.R > 0.0)) continue;
    lx.push_back(std::log(std::abs(p.mu - alpha)));
    ly.push_back(std::log(p.R));
  }
  if (lx.size() < 2) throw std::invalid_argument("loglog_slope: need two samples away from alpha");
  const double n = static_cast<double>(lx.size());
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / n;
  const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  return sxy / sxx;
}

IdentifiabilityResult identifiability_oracle(const std::vector<PowerTerm>& targets, const Eigen::VectorXd& grid,
                                             const LatticeSpec& lattice) {
  if (targets.empty()) throw std::invalid_argument("identifiability_oracle: need at least one target");
  for (std::size_t i = 0; i < targets.size(); ++i) {
    if (targets[i].coeff == 0.0) throw std::invalid_argument("identifiability_oracle: coefficients must be nonzero");
    for (std::size_t j = 0; j < i; ++j) {
      if (targets[i].exponent == targets[j].exponent) {
        throw std::invalid_argument("identifiability_oracle: target exponents must be distinct");
      }
    }
  }
  if (grid.size() < 2) throw std::invalid_argument("identifiability_oracle: grid too small");

  const auto first = static_cast<long>(std::llround(lattice.lo / lattice.step));
  const auto last = static_cast<long>(std::llround(lattice.hi / lattice.step));
  std::vector<double> values;
  for (long i = first; i <= last; ++i) values.push_back(static_cast<double>(i) * lattice.step);
  const auto m = static_cast<Eigen::Index>(values.size());
  const Eigen::Index n = grid.size();

  Eigen::MatrixXd basis(n, m);
  for (Eigen::Index j = 0; j < m; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) basis(i, j) = std::pow(grid[i], values[static_cast<std::size_t>(j)]);
  }
  Eigen::VectorXd f = Eigen::VectorXd::Zero(n);
  for (const auto& t : targets) {
    for (Eigen::Index i = 0; i < n; ++i) f[i] += t.coeff * std::pow(grid[i], t.exponent);
  }
  const Eigen::MatrixXd gram = basis.transpose() * basis;
  const Eigen::VectorXd rhs = basis.transpose() * f;

  auto contains_targets = [&](const std::vector<Eigen::Index>& idx) {
    for (const auto& t : targets) {
      bool hit = false;
      for (Eigen::Index j : idx) hit = hit || std::abs(values[static_cast<std::size_t>(j)] - t.exponent) < 0.5 * lattice.step;
      if (!hit) return false;
    }
    return true;
  };

  IdentifiabilityResult out;
  const int k_star = static_cast<int>(targets.size());
  std::vector<Eigen::Index> idx;
  for (int size = k_star; size <= k_star + lattice.extra_terms; ++size) {
    idx.assign(static_cast<std::size_t>(size), 0);
    std::function<void(int, Eigen::Index)> visit = [&](int pos, Eigen::Index from) {
      if (pos == size) {
        ++out.tuples_checked;
        Eigen::MatrixXd g(size, size);
        Eigen::VectorXd b(size);
        for (int a = 0; a < size; ++a) {
          b[a] = rhs[idx[static_cast<std::size_t>(a)]];
          for (int c = 0; c < size; ++c) g(a, c) = gram(idx[static_cast<std::size_t>(a)], idx[static_cast<std::size_t>(c)]);
        }
        Eigen::MatrixXd cols(n, size);
        for (int a = 0; a < size; ++a) cols.col(a) = basis.col(idx[static_cast<std::size_t>(a)]);
        // Cheap normal-equation screen, then an accurate QR solve for candidates.
        const Eigen::VectorXd coarse = g.ldlt().solve(b);
        double err = (cols * coarse - f).cwiseAbs().maxCoeff();
        if (std::isfinite(err) && !(err < std::max(1e-4, 2.0 * lattice.tolerance))) return;
        const Eigen::VectorXd fine = cols.colPivHouseholderQr().solve(f);
        err = (cols * fine - f).cwiseAbs().maxCoeff();
        if (err < lattice.tolerance) {
          ++out.exact_tuples;
          if (!contains_targets(idx)) {
            out.unique = false;
            std::vector<double> tuple;
            for (Eigen::Index j : idx) tuple.push_back(values[static_cast<std::size_t>(j)]);
            out.counterexamples.push_back(std::move(tuple));
          }
        }
        return;
      }
      for (Eigen::Index j = from; j < m; ++j) {
        idx[static_cast<std::size_t>(pos)] = j;
        visit(pos + 1, j + 1);
      }
    };
    visit(0, 0);
  }
  return out;
}

RecoveryReport analyze(const MsnModel& model, const ProblemSpec& problem, const Eigen::VectorXd& gram_points) {
  RecoveryReport rep;
  rep.dominant_mu = dominant_exponent(model);
  rep.active = active_terms(model);
  const std::vector<double> targets = target_exponents(problem);
  rep.match = match_exponents(rep.active, targets);
  if (const auto* w = std::get_if<Wedge>(&problem)) {
    rep.constraint_violation = constraint_violation(model, w->omega, quantization(w->bc));
  }
  if (rep.active.size() >= 2 && gram_points.size() >= 2) {
    Eigen::VectorXd mus(static_cast<Eigen::Index>(rep.active.size()));
    for (std::size_t i = 0; i < rep.active.size(); ++i) mus[static_cast<Eigen::Index>(i)] = rep.active[i].mu;
    rep.gram_condition = gram_condition(mus, gram_points);
  } else {
    rep.gram_condition = 1.0;
  }
  if (targets.size() == 1) {
    rep.dominant_rel_err_pct = rel_err_pct(rep.dominant_mu, targets.front());
    rep.headline_err_pct = rep.dominant_rel_err_pct;
    rep.success = rep.headline_err_pct < kSuccessThresholdPct;
  } else if (targets.size() > 1) {
    rep.headline_err_pct = rep.match.under_resolved ? std::numeric_limits<double>::infinity()
                                                    : rep.match.max_rel_err_pct;
    rep.success = !rep.match.under_resolved && rep.headline_err_pct < kSuccessThresholdPct;
  }
  return rep;
}

}  // namespace msn
