#include "msn/bench.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <mutex>
#include <numbers>
#include <set>
#include <stdexcept>
#include <thread>

namespace msn {

std::string to_string(Method m) { return m == Method::Naive ? "naive" : "constraint"; }

Method parse_method(std::string_view s) {
  if (s == "naive") return Method::Naive;
  if (s == "constraint" || s == "constraint-aware") return Method::ConstraintAware;
  throw std::invalid_argument("unknown method '" + std::string(s) + "' (expected naive or constraint)");
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void ExperimentConfig::validate() const {
  if (id.empty()) throw std::invalid_argument("experiment: empty id");
  if (instances.empty()) throw std::invalid_argument("experiment '" + id + "': no instances");
  if (seeds.empty()) throw std::invalid_argument("experiment '" + id + "': no seeds");
  if (std::set<std::uint64_t>(seeds.begin(), seeds.end()).size() != seeds.size()) {
    throw std::invalid_argument("experiment '" + id + "': seeds must be distinct");
  }
  for (const Instance& inst : instances) {
    const std::string where = "experiment '" + id + "', instance '" + inst.label() + "': ";
    try {
      if (inst.terms < 1) throw std::invalid_argument("K must be >= 1");
      if (inst.bounds_source == BoundsSource::BcAdaptive && !std::holds_alternative<Wedge>(inst.problem)) {
        throw std::invalid_argument("bc-adaptive bounds need a wedge problem");
      }
      if (inst.bounds_source == BoundsSource::Fixed && !inst.bounds.valid()) {
        throw std::invalid_argument("invalid exponent bounds");
      }
      if (!inst.weights.valid()) throw std::invalid_argument("loss weights must be >= 0");
      inst.schedule.validate();
      if (const auto* s = std::get_if<SupervisedFit>(&inst.problem); !(s && s->target.starts_with("data:"))) {
        (void)exact_solution(inst.problem);
      }
      if (const auto* s = std::get_if<SupervisedFit>(&inst.problem); s && !(s->noise_sigma >= 0.0)) {
        throw std::invalid_argument("noise sigma must be >= 0");
      }
      const ResolvedRun r = resolve(inst, seeds.front());
      (void)init_model(inst.terms, r.bounds, r.init, angular_mode(inst.problem));
    } catch (const std::exception& e) {
      throw std::invalid_argument(where + e.what());
    }
  }
}

ResolvedRun resolve(const Instance& inst, std::uint64_t seed) {
  ResolvedRun r;
  const auto* wedge = std::get_if<Wedge>(&inst.problem);
  r.bounds = inst.bounds_source == BoundsSource::BcAdaptive && wedge ? bc_adaptive_bounds(wedge->omega, wedge->bc)
                                                                     : inst.bounds;
  r.init = inst.init;
  r.init.seed = seed;
  if (r.init.exponent_init == ExponentInit::PinnedFundamental && !(r.init.pinned_target > 0.0)) {
    if (!wedge) throw std::invalid_argument("pinned initialisation needs pinned_target outside wedge problems");
    r.init.pinned_target = wedge_problem(wedge->omega, wedge->bc).fundamental;
  }
  r.weights = inst.weights;
  r.schedule = inst.schedule;
  if (inst.method == Method::Naive) {
    r.weights.w_con = 0.0;
    for (Phase& p : r.schedule.phases) p.weights.w_con = 0.0;
  }
  if (wedge) r.trig = quantization(wedge->bc);
  return r;
}

namespace {

const Eigen::VectorXd& gram_points() {
  static const Eigen::VectorXd pts = graded_interval(200, 2.0, 0.01);
  return pts;
}

// The constraint family used in training must annihilate the fundamental of
// the spectrum for this BC.
bool quantization_matches(const Wedge& w, Trig trig) {
  const double mu1 = wedge_spectrum(w.omega, w.bc, 1).front();
  const double v = trig == Trig::Sin ? std::sin(mu1 * w.omega) : std::cos(mu1 * w.omega);
  return std::abs(v) < 1e-9 && trig == quantization(w.bc);
}

void fill_headline(RunRecord& rec) {
  const std::vector<double> targets = target_exponents(rec.problem);
  const RecoveryReport& rep = rec.report;
  if (targets.size() == 1) {
    rec.target_mu = targets.front();
    rec.discovered_mu = rep.dominant_mu;
  } else if (!rep.match.matches.empty()) {
    // The row reports the worst-matched target.
    const auto worst = std::max_element(rep.match.matches.begin(), rep.match.matches.end(),
                                        [](const ExponentMatch& a, const ExponentMatch& b) {
                                          return a.rel_err_pct < b.rel_err_pct;
                                        });
    rec.target_mu = worst->target;
    rec.discovered_mu = worst->mu;
  }
  rec.rel_err_pct = rep.headline_err_pct;
  rec.success = rep.success;
}

double percentile(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) return std::numeric_limits<double>::quiet_NaN();
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  if (frac == 0.0) return sorted[lo];
  if (std::isinf(sorted[hi])) return sorted[hi];
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

}  // namespace

RunRecord run_one(const ExperimentConfig& config, std::size_t instance, std::uint64_t seed,
                  const std::string& trace_path) {
  const Instance& inst = config.instances.at(instance);
  RunRecord rec;
  rec.experiment_id = config.id;
  rec.instance = instance;
  rec.key = inst.key;
  rec.method = inst.method;
  rec.problem = inst.problem;
  rec.seed = seed;

  const ResolvedRun r = resolve(inst, seed);
  if (const auto* w = std::get_if<Wedge>(&inst.problem)) {
    rec.quantization_ok = quantization_matches(*w, r.trig);
    if (!rec.quantization_ok) {
      rec.failed = true;
      rec.error = "quantization family does not match the wedge spectrum";
      return rec;
    }
  }

  try {
    const CollocationSet set = make_collocation(inst.problem, inst.collocation, seed);
    rec.collocation = set.record;
    const MsnModel model = init_model(inst.terms, r.bounds, r.init, angular_mode(inst.problem));
    const TrainTrace trace = train(model, inst.problem, set, r.weights, r.schedule, {seed, !trace_path.empty()});
    if (!trace_path.empty()) {
      std::ofstream out(trace_path);
      if (!out) throw std::runtime_error("cannot write trace file " + trace_path);
      write_trace_csv(out, trace);
    }
    rec.epochs = r.schedule.epochs;
    rec.mu = trace.final_model.exponents();
    rec.c = trace.final_model.coeffs;
    rec.loss = trace.final_loss;
    rec.loss.grad_raw.resize(0);
    rec.loss.grad_c.resize(0);
    rec.report = analyze(trace.final_model, inst.problem, gram_points());
    rec.wall_ms = trace.wall_ms;
    fill_headline(rec);
  } catch (const TrainingAborted& e) {
    rec.failed = true;
    rec.error = e.what();
    rec.epochs = e.epoch();
  } catch (const std::exception& e) {
    rec.failed = true;
    rec.error = e.what();
  }
  if (rec.failed) {
    rec.rel_err_pct = std::numeric_limits<double>::infinity();
    rec.success = false;
  }
  return rec;
}

Stats aggregate(const std::vector<const RunRecord*>& runs) {
  Stats s;
  s.runs = runs.size();
  if (runs.empty()) {
    s.mean_err_pct = s.median_err_pct = s.p90_err_pct = std::numeric_limits<double>::quiet_NaN();
    return s;
  }
  std::vector<double> errs;
  std::size_t successes = 0, wedge_ok = 0;
  double viol = 0.0;
  for (const RunRecord* r : runs) {
    if (r->failed) ++s.failed;
    if (r->success) ++successes;
    if (!std::isnan(r->rel_err_pct)) errs.push_back(r->rel_err_pct);
    if (!r->failed && std::holds_alternative<Wedge>(r->problem)) {
      viol += r->report.constraint_violation;
      ++wedge_ok;
    }
  }
  s.success_pct = 100.0 * static_cast<double>(successes) / static_cast<double>(runs.size());
  std::sort(errs.begin(), errs.end());
  double sum = 0.0;
  for (double e : errs) sum += e;
  s.mean_err_pct = errs.empty() ? std::numeric_limits<double>::quiet_NaN() : sum / static_cast<double>(errs.size());
  s.median_err_pct = percentile(errs, 0.5);
  s.p90_err_pct = percentile(errs, 0.9);
  s.mean_constraint_violation = wedge_ok ? viol / static_cast<double>(wedge_ok) : 0.0;
  return s;
}

ImprovementReport compare(const std::vector<const RunRecord*>& baseline,
                          const std::vector<const RunRecord*>& improved) {
  using GridKey = std::pair<std::string, std::uint64_t>;
  std::map<GridKey, const RunRecord*> base;
  for (const RunRecord* r : baseline) {
    if (!base.emplace(GridKey{r->key, r->seed}, r).second) {
      throw std::invalid_argument("compare: duplicate grid point " + r->key + " seed " + std::to_string(r->seed));
    }
  }
  if (base.size() != improved.size()) throw std::invalid_argument("compare: run grids differ in size");

  ImprovementReport out;
  std::vector<double> finite;
  for (const RunRecord* r : improved) {
    const auto it = base.find({r->key, r->seed});
    if (it == base.end()) {
      throw std::invalid_argument("compare: grid point " + r->key + " seed " + std::to_string(r->seed) +
                                  " missing from the baseline");
    }
    Improvement imp;
    imp.key = r->key;
    imp.seed = r->seed;
    imp.baseline_err_pct = it->second->rel_err_pct;
    imp.improved_err_pct = r->rel_err_pct;
    if (imp.improved_err_pct == 0.0) {
      imp.exact = true;
      imp.factor = imp.baseline_err_pct == 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
    } else {
      imp.factor = imp.baseline_err_pct / imp.improved_err_pct;
    }
    if (std::isfinite(imp.factor)) finite.push_back(imp.factor);
    out.pairs.push_back(imp);
  }
  std::sort(finite.begin(), finite.end());
  double sum = 0.0;
  for (double f : finite) sum += f;
  out.mean_factor = finite.empty() ? std::numeric_limits<double>::quiet_NaN() : sum / static_cast<double>(finite.size());
  out.median_factor = percentile(finite, 0.5);
  return out;
}

void BenchSummary::recompute() {
  by_instance.assign(config.instances.size(), Stats{});
  std::vector<std::vector<const RunRecord*>> per_instance(config.instances.size());
  std::map<std::string, std::vector<const RunRecord*>> per_method;
  std::vector<const RunRecord*> all;
  for (const RunRecord& r : runs) {
    if (r.instance < per_instance.size()) per_instance[r.instance].push_back(&r);
    per_method[to_string(r.method)].push_back(&r);
    all.push_back(&r);
  }
  for (std::size_t i = 0; i < per_instance.size(); ++i) by_instance[i] = aggregate(per_instance[i]);
  by_method.clear();
  for (const auto& [name, list] : per_method) by_method[name] = aggregate(list);
  overall = aggregate(all);

  improvement.reset();
  const auto naive = per_method.find(to_string(Method::Naive));
  const auto con = per_method.find(to_string(Method::ConstraintAware));
  if (naive != per_method.end() && con != per_method.end()) {
    try {
      improvement = compare(naive->second, con->second);
    } catch (const std::invalid_argument&) {
      // Methods ran on different grids; nothing to pair.
    }
  }
}

BenchSummary run(const ExperimentConfig& config, const RunOptions& options) {
  config.validate();
  BenchSummary summary;
  summary.config = config;

  struct Task {
    std::size_t instance;
    std::uint64_t seed;
  };
  std::vector<Task> tasks;
  for (std::size_t i = 0; i < config.instances.size(); ++i) {
    for (std::uint64_t s : config.seeds) tasks.push_back({i, s});
  }
  summary.runs.resize(tasks.size());

  std::atomic<std::size_t> next{0};
  std::mutex report_mutex;
  auto worker = [&] {
    for (std::size_t t = next++; t < tasks.size(); t = next++) {
      std::string trace_path;
      if (!options.trace_dir.empty()) {
        trace_path = options.trace_dir + "/trace_" + config.id + "_i" + std::to_string(tasks[t].instance) + "_s" +
                     std::to_string(tasks[t].seed) + ".csv";
      }
      summary.runs[t] = run_one(config, tasks[t].instance, tasks[t].seed, trace_path);
      if (options.on_complete) {
        std::lock_guard lock(report_mutex);
        options.on_complete(summary.runs[t]);
      }
    }
  };

  const std::size_t n_workers = std::min<std::size_t>(static_cast<std::size_t>(std::max(1, options.jobs)), tasks.size());
  if (n_workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < n_workers; ++w) pool.emplace_back(worker);
  }
  summary.recompute();
  return summary;
}

void write_csv(std::ostream& os, const BenchSummary& summary) {
  os << "experiment_id,method,omega_deg,bc,seed,target_mu,discovered_mu,rel_err_pct,constraint_violation,success\n";
  for (const RunRecord& r : summary.runs) {
    std::string omega_deg, bc;
    if (const auto* w = std::get_if<Wedge>(&r.problem)) {
      omega_deg = format_number(w->omega * 180.0 / std::numbers::pi);
      bc = to_string(w->bc);
    }
    os << r.experiment_id << ',' << to_string(r.method) << ',' << omega_deg << ',' << bc << ',' << r.seed << ','
       << format_number(r.target_mu) << ',' << format_number(r.discovered_mu) << ','
       << format_number(r.rel_err_pct) << ',' << format_number(r.report.constraint_violation) << ','
       << (r.success ? 1 : 0) << '\n';
  }
}

void write_trace_csv(std::ostream& os, const TrainTrace& trace) {
  const Eigen::Index K = trace.final_model.terms();
  os << "epoch,total,residual,bc,sparsity,constraint";
  for (Eigen::Index k = 0; k < K; ++k) os << ",mu_" << (k + 1);
  os << '\n';
  for (const EpochRecord& e : trace.epochs) {
    os << e.epoch << ',' << format_number(e.total) << ',' << format_number(e.residual) << ',' << format_number(e.bc)
       << ',' << format_number(e.sparsity) << ',' << format_number(e.constraint);
    for (Eigen::Index k = 0; k < e.mu.size(); ++k) os << ',' << format_number(e.mu[k]);
    os << '\n';
  }
}

}  // namespace msn
