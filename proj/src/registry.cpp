#include "msn/bench.hpp"

#include <numbers>

namespace msn {

namespace {

std::string fmt(double v) { return format_number(v); }

// Supervised fits on N points graded towards the origin over [0.01, 1].
Instance supervised(const std::string& key, const std::string& target, double sigma = 0.0) {
  Instance inst;
  inst.key = key;
  inst.problem = SupervisedFit{target, sigma};
  inst.collocation.n = 200;
  inst.collocation.grading = 2.0;
  inst.collocation.cutoff = 0.01;
  return inst;
}

ExperimentConfig make(std::string id, std::string description, std::vector<Instance> instances) {
  ExperimentConfig cfg;
  cfg.id = std::move(id);
  cfg.description = std::move(description);
  cfg.instances = std::move(instances);
  return cfg;
}

const char* kCleanDataNote =
    "Clean-data error is reported at about 1.45% for the single-exponent fit but 5.2% for the sigma = 0 row "
    "of the noise sweep under nominally identical settings; both configurations are kept as-is.";

Instance corner(Method method) {
  Instance inst;
  inst.key = "omega=270,bc=DD";
  inst.problem = Wedge{1.5 * std::numbers::pi, WedgeBc::DD};
  inst.method = method;
  inst.schedule.epochs = 15000;
  inst.weights.w_con = 10.0;
  LossWeights fine = inst.weights;
  fine.w_con = 1.0;
  inst.schedule.phases = {{5000, fine}};
  return inst;
}

Instance wedge_bench(double deg, WedgeBc bc, Method method) {
  Instance inst;
  inst.key = "omega=" + fmt(deg) + ",bc=" + to_string(bc);
  inst.problem = Wedge{deg * std::numbers::pi / 180.0, bc};
  inst.method = method;
  inst.terms = 6;
  inst.schedule.epochs = 5000;
  inst.schedule.eta_mu = 5e-4;
  inst.schedule.eta_c = 1e-2;
  if (method == Method::ConstraintAware) {
    inst.bounds_source = BoundsSource::BcAdaptive;
    inst.init.exponent_init = ExponentInit::PinnedFundamental;
    inst.schedule.warmup_epochs = 1000;
    inst.schedule.ramp_epochs = 1500;
    inst.weights.w_con = 10.0;
  }
  return inst;
}

std::map<std::string, ExperimentConfig> build() {
  std::map<std::string, ExperimentConfig> reg;
  auto add = [&](ExperimentConfig cfg) { reg.emplace(cfg.id, std::move(cfg)); };

  {
    auto cfg = make("single-exponent", "Supervised fit of x^0.5, K = 4, N = 200", {supervised("single", "single")});
    cfg.notes = kCleanDataNote;
    add(std::move(cfg));
  }
  {
    std::vector<Instance> v;
    for (double s : {0.0, 1e-4, 1e-3, 1e-2, 5e-2}) v.push_back(supervised("sigma=" + fmt(s), "single", s));
    auto cfg = make("noise-sweep", "x^0.5 with Gaussian noise of standard deviation sigma", std::move(v));
    cfg.notes = kCleanDataNote;
    add(std::move(cfg));
  }
  {
    std::vector<Instance> v;
    for (int n : {20, 50, 100, 200, 500}) {
      Instance inst = supervised("N=" + std::to_string(n), "single");
      inst.collocation.n = n;
      v.push_back(inst);
    }
    add(make("sample-sweep", "x^0.5 sampled at N graded points", std::move(v)));
  }
  {
    Instance inst = supervised("three-term", "three-term");
    inst.terms = 5;
    add(make("three-term", "0.5 x^0.1 + x^0.5 + 0.3 x^1.5, K = 5", {inst}));
  }
  {
    std::vector<Instance> v;
    for (double d : {0.02, 0.05, 0.1, 0.2, 0.3}) v.push_back(supervised("delta=" + fmt(d), "close-pair:" + fmt(d)));
    add(make("close-pair", "x^0.5 + x^(0.5 + delta)", std::move(v)));
  }
  {
    auto cfg = make("log-correction", "x^0.5 log x fitted by pure power laws (expected failure)",
                    {supervised("log-correction", "log-correction")});
    cfg.notes = "No power-law ground truth; success is never claimed. Expected signature: two or more active exponents.";
    add(std::move(cfg));
  }
  {
    Instance inst;
    inst.key = "ode";
    inst.problem = SingularOde{};
    inst.collocation.cutoff = 1e-3;
    add(make("singular-ode", "x u'' + u'/2 = 0, u(1) = 1; target exponent 0.5", {inst}));
  }
  add(make("corner-dd", "Laplace wedge, omega = 270 deg, Dirichlet edges; naive vs constraint-aware",
           {corner(Method::Naive), corner(Method::ConstraintAware)}));
  {
    Instance inst;
    inst.key = "beta=-0.5";
    inst.problem = SingularPoisson{-0.5};
    inst.collocation.cutoff = kForcingExclusion;
    add(make("singular-forcing", "-u'' = x^-0.5, u(0) = u(1) = 0; targets 1.0 and 1.5", {inst}));
  }
  {
    std::vector<Instance> v;
    for (Method m : {Method::Naive, Method::ConstraintAware}) {
      for (double deg : {90.0, 150.0, 210.0, 270.0, 330.0}) {
        for (WedgeBc bc : {WedgeBc::DD, WedgeBc::NN, WedgeBc::DN, WedgeBc::ND}) v.push_back(wedge_bench(deg, bc, m));
      }
    }
    auto cfg = make("wedge-benchmark", "5 angles x 4 boundary conditions x 2 methods", std::move(v));
    cfg.seeds = {0};
    cfg.notes = "Angles are evenly spaced over [90, 330] degrees.";
    add(std::move(cfg));
  }
  {
    std::vector<Instance> v;
    for (int k : {2, 4, 8, 16}) {
      Instance inst = supervised("K=" + std::to_string(k), "single");
      inst.terms = k;
      v.push_back(inst);
    }
    add(make("k-sweep", "single-exponent fit with K terms", std::move(v)));
  }
  {
    std::vector<Instance> v;
    for (double ratio : {1.0, 0.5, 0.1}) {
      Instance inst = supervised("ratio=" + fmt(ratio), "single");
      inst.schedule.eta_c = 0.01;
      inst.schedule.eta_mu = ratio * 0.01;
      v.push_back(inst);
    }
    add(make("lr-ratio", "single-exponent fit with eta_mu = ratio * eta_c", std::move(v)));
  }
  return reg;
}

}  // namespace

const std::map<std::string, ExperimentConfig>& registry() {
  static const std::map<std::string, ExperimentConfig> reg = build();
  return reg;
}

std::vector<std::string> registry_ids() {
  std::vector<std::string> ids;
  for (const auto& [id, cfg] : registry()) ids.push_back(id);
  return ids;
}

}  // namespace msn
