#include "msn/problems.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace msn {

namespace {

constexpr double kPi = std::numbers::pi;

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

ExactSolution power_sum(std::string name, std::vector<PowerTerm> terms) {
  ExactSolution s;
  s.name = std::move(name);
  s.terms = terms;
  s.value = [terms](double x) {
    double v = 0.0;
    for (const auto& t : terms) v += t.coeff * (x == 0.0 ? 0.0 : std::pow(x, t.exponent));
    return v;
  };
  return s;
}

}  // namespace

std::vector<double> ExactSolution::exponents() const {
  std::vector<double> out;
  out.reserve(terms.size());
  for (const auto& t : terms) out.push_back(t.exponent);
  return out;
}

ExactSolution poisson_exact(double beta) {
  if (!(beta > -1.0)) throw std::invalid_argument("poisson_exact: beta must be > -1");
  const double a1 = 1.0 / ((beta + 1.0) * (beta + 2.0));
  return power_sum("poisson", {{1.0, a1}, {beta + 2.0, -a1}});
}

ExactSolution ode_exact() { return power_sum("ode", {{0.5, 1.0}}); }

std::vector<std::string> supervised_target_names() {
  return {"single", "three-term", "close-pair:<delta>", "log-correction"};
}

ExactSolution supervised_target(std::string_view name) {
  if (name == "single") return power_sum("single", {{0.5, 1.0}});
  if (name == "three-term") return power_sum("three-term", {{0.1, 0.5}, {0.5, 1.0}, {1.5, 0.3}});
  if (name.starts_with("close-pair:")) {
    const std::string arg(name.substr(11));
    std::size_t used = 0;
    double delta = 0.0;
    try {
      delta = std::stod(arg, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != arg.size() || !(delta > 0.0)) {
      throw std::invalid_argument("supervised_target: bad separation in '" + std::string(name) + "'");
    }
    return power_sum(std::string(name), {{0.5, 1.0}, {0.5 + delta, 1.0}});
  }
  if (name == "log-correction") {
    ExactSolution s;
    s.name = "log-correction";
    s.power_law = false;
    s.value = [](double x) { return x == 0.0 ? 0.0 : std::sqrt(x) * std::log(x); };
    return s;
  }
  throw std::invalid_argument("supervised_target: unknown target '" + std::string(name) + "'");
}

Trig quantization(WedgeBc bc) {
  return (bc == WedgeBc::DD || bc == WedgeBc::NN) ? Trig::Sin : Trig::Cos;
}

std::vector<double> wedge_spectrum(double omega, WedgeBc bc, int n_modes) {
  if (!(omega > 0.0)) throw std::invalid_argument("wedge_spectrum: omega must be > 0");
  if (n_modes < 1) throw std::invalid_argument("wedge_spectrum: need n_modes >= 1");
  std::vector<double> mu;
  mu.reserve(static_cast<std::size_t>(n_modes));
  for (int n = 1; n <= n_modes; ++n) {
    mu.push_back(quantization(bc) == Trig::Sin ? n * kPi / omega : (2 * n - 1) * kPi / (2.0 * omega));
  }
  return mu;
}

double WedgeSetup::arc_value(double theta) const {
  return angular == Angular::Cos ? std::cos(fundamental * theta) : std::sin(fundamental * theta);
}

WedgeSetup wedge_problem(double omega, WedgeBc bc) {
  if (!(omega > 0.0 && omega < 2.0 * kPi)) {
    throw std::invalid_argument("wedge_problem: omega must lie in (0, 2 pi)");
  }
  WedgeSetup s;
  s.problem = {omega, bc};
  s.trig = quantization(bc);
  s.fundamental = wedge_spectrum(omega, bc, 1).front();
  const bool dirichlet_at_zero = bc == WedgeBc::DD || bc == WedgeBc::DN;
  const bool dirichlet_at_omega = bc == WedgeBc::DD || bc == WedgeBc::ND;
  s.angular = dirichlet_at_zero ? Angular::Sin : Angular::Cos;
  s.edge0 = dirichlet_at_zero ? BoundaryOp::Dirichlet : BoundaryOp::Neumann;
  s.edge1 = dirichlet_at_omega ? BoundaryOp::Dirichlet : BoundaryOp::Neumann;
  return s;
}

ExponentBounds bc_adaptive_bounds(double omega, WedgeBc bc) {
  const double mu1 = wedge_spectrum(omega, bc, 1).front();
  return {0.3 * mu1, 2.5 * mu1};
}

ExactSolution exact_solution(const ProblemSpec& problem) {
  return std::visit(
      overloaded{
          [](const SupervisedFit& p) { return supervised_target(p.target); },
          [](const SingularOde&) { return ode_exact(); },
          [](const SingularPoisson& p) { return poisson_exact(p.beta); },
          [](const Wedge& p) {
            const WedgeSetup s = wedge_problem(p.omega, p.bc);
            ExactSolution e;
            e.name = "wedge-" + to_string(p.bc);
            e.terms = {{s.fundamental, 1.0}};
            // Radial profile along the bisector is not meaningful here; value
            // is the arc trace g(theta).
            e.value = [s](double theta) { return s.arc_value(theta); };
            return e;
          },
      },
      problem);
}

std::vector<double> target_exponents(const ProblemSpec& problem) {
  if (const auto* s = std::get_if<SupervisedFit>(&problem); s && s->target.starts_with("data:")) {
    return {};
  }
  return exact_solution(problem).exponents();
}

Angular angular_mode(const ProblemSpec& problem) {
  if (const auto* w = std::get_if<Wedge>(&problem)) return wedge_problem(w->omega, w->bc).angular;
  return Angular::None;
}

CollocationSet make_collocation(const ProblemSpec& problem, const CollocationParams& params,
                                std::uint64_t seed) {
  return std::visit(
      overloaded{
          [&](const SupervisedFit& p) {
            if (p.target.starts_with("data:")) return load_xy_file(p.target.substr(5));
            const ExactSolution target = supervised_target(p.target);
            CollocationSet set;
            set.x = graded_interval(params.n, params.grading, params.cutoff);
            set.y.resize(set.x.size());
            CounterRng noise(seed, 17);
            for (Eigen::Index i = 0; i < set.x.size(); ++i) {
              set.y[i] = target.value(set.x[i]) + p.noise_sigma * noise.normal();
            }
            set.record = {"graded_interval", params.n, 0, 0, params.grading, params.cutoff, 0.0, seed,
                          p.noise_sigma, ""};
            return set;
          },
          [&](const SingularOde&) {
            CollocationSet set;
            set.x = graded_1d(params.n, params.grading, params.cutoff);
            if (set.x.size() > 0 && set.x[0] == 0.0) set.x = set.x.tail(set.x.size() - 1).eval();
            set.boundary.push_back({1.0, 0.0, BoundaryOp::Dirichlet, 1.0});
            set.record = {"graded_1d", static_cast<int>(set.x.size()), 0, 0, params.grading,
                          params.cutoff, 0.0, seed, 0.0, ""};
            return set;
          },
          [&](const SingularPoisson&) {
            CollocationSet set;
            set.x = graded_1d(params.n, params.grading, std::max(params.cutoff, kForcingExclusion));
            set.boundary.push_back({0.0, 0.0, BoundaryOp::Dirichlet, 0.0});
            set.boundary.push_back({1.0, 0.0, BoundaryOp::Dirichlet, 0.0});
            set.record = {"graded_1d", static_cast<int>(set.x.size()), 0, 0, params.grading,
                          std::max(params.cutoff, kForcingExclusion), 0.0, seed, 0.0, ""};
            return set;
          },
          [&](const Wedge& p) {
            const WedgeSetup s = wedge_problem(p.omega, p.bc);
            CollocationSet set = wedge_sample(p.omega, params.n_interior, params.n_arc, params.n_edge, seed);
            // wedge_sample lays out arc points first, then theta = 0, then theta = omega.
            const auto n_arc = static_cast<std::size_t>(params.n_arc);
            const auto n_edge = static_cast<std::size_t>(params.n_edge);
            for (std::size_t i = 0; i < set.boundary.size(); ++i) {
              auto& b = set.boundary[i];
              if (i < n_arc) {
                b.op = BoundaryOp::Dirichlet;
                b.value = s.arc_value(b.theta);
              } else {
                b.op = i < n_arc + n_edge ? s.edge0 : s.edge1;
                b.value = 0.0;
              }
            }
            return set;
          },
      },
      problem);
}

std::string to_string(WedgeBc bc) {
  switch (bc) {
    case WedgeBc::DD: return "DD";
    case WedgeBc::NN: return "NN";
    case WedgeBc::DN: return "DN";
    case WedgeBc::ND: return "ND";
  }
  return "?";
}

std::string to_string(Trig trig) { return trig == Trig::Sin ? "sin" : "cos"; }

std::string to_string(Angular a) {
  switch (a) {
    case Angular::None: return "none";
    case Angular::Sin: return "sin";
    case Angular::Cos: return "cos";
  }
  return "?";
}

WedgeBc parse_wedge_bc(std::string_view s) {
  if (s == "DD") return WedgeBc::DD;
  if (s == "NN") return WedgeBc::NN;
  if (s == "DN") return WedgeBc::DN;
  if (s == "ND") return WedgeBc::ND;
  throw std::invalid_argument("unknown wedge boundary type '" + std::string(s) + "' (DD|NN|DN|ND)");
}

std::string problem_kind(const ProblemSpec& problem) {
  return std::visit(overloaded{
                        [](const SupervisedFit&) { return std::string("supervised"); },
                        [](const SingularOde&) { return std::string("ode"); },
                        [](const SingularPoisson&) { return std::string("poisson"); },
                        [](const Wedge&) { return std::string("wedge"); },
                    },
                    problem);
}

}  // namespace msn
