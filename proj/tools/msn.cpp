// Command-line driver: fit, solve, bench, replay, list, rate-curve, gram.
//
// Exit codes: 0 success, 1 usage or input error, 2 numerical abort.

#include "msn/analysis.hpp"
#include "msn/bench.hpp"
#include "msn/bench_json.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>

namespace fs = std::filesystem;
using namespace msn;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitNumerical = 2;

struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string fixed(double v, int prec) {
  if (!std::isfinite(v)) return format_number(v);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", prec, v);
  return buf;
}

std::string sci(double v) {
  if (!std::isfinite(v)) return format_number(v);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

std::string pad(std::string s, std::size_t w) {
  if (s.size() < w) s.append(w - s.size(), ' ');
  return s;
}

fs::path output_dir(const std::string& flag) {
  fs::path dir = flag;
  if (dir.empty()) {
    const char* env = std::getenv("MSN_OUT_DIR");
    dir = env && *env ? env : ".";
  }
  fs::create_directories(dir);
  return dir;
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw InputError(path + ": " + e.what());
  }
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  out << text;
}

// Applies a partial instance JSON on top of `base`.
Instance apply_config_file(const Instance& base, const std::string& path) {
  if (path.empty()) return base;
  Json j = to_json(base);
  j.merge_patch(read_json_file(path));
  return instance_from_json(j);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, sep);) out.push_back(item);
  return out;
}

double parse_double(const std::string& s, const std::string& what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size()) throw InputError(what + ": '" + s + "' is not a number");
  return v;
}

/// Common training flags; each is applied only when given.
struct TrainFlags {
  int terms = 0;
  int epochs = 0;
  double eta_mu = 0.0, eta_c = 0.0, w_s = 0.0, w_b = 0.0, w_con = 0.0;
  std::uint64_t seed = 0;
  std::string config, out;
  bool trace = false;
  CLI::Option *o_terms{}, *o_epochs{}, *o_eta_mu{}, *o_eta_c{}, *o_w_s{}, *o_w_b{}, *o_w_con{};

  void add(CLI::App* app) {
    o_terms = app->add_option("--K", terms, "number of power-law terms")->check(CLI::PositiveNumber);
    o_epochs = app->add_option("--epochs", epochs, "training epochs")->check(CLI::PositiveNumber);
    o_eta_mu = app->add_option("--eta-mu", eta_mu, "exponent learning rate");
    o_eta_c = app->add_option("--eta-c", eta_c, "coefficient learning rate");
    o_w_s = app->add_option("--w-s", w_s, "sparsity weight");
    o_w_b = app->add_option("--w-b", w_b, "boundary weight");
    o_w_con = app->add_option("--w-con", w_con, "constraint weight (wedges)");
    app->add_option("--seed", seed, "random seed")->capture_default_str();
    app->add_option("--config", config, "JSON file with instance settings (overridden by flags)");
    app->add_option("--out", out, "output directory (default: $MSN_OUT_DIR or .)");
    app->add_flag("--trace", trace, "write the per-epoch trace CSV");
  }

  void apply(Instance& inst) const {
    if (o_terms->count()) inst.terms = terms;
    if (o_epochs->count()) {
      inst.schedule.epochs = epochs;
      // Keep warm-up, ramp and phase starts inside a shortened run.
      if (inst.schedule.warmup_epochs + inst.schedule.ramp_epochs > epochs) {
        inst.schedule.warmup_epochs = std::min(inst.schedule.warmup_epochs, epochs);
        inst.schedule.ramp_epochs = epochs - inst.schedule.warmup_epochs;
      }
    }
    if (o_eta_mu->count()) inst.schedule.eta_mu = eta_mu;
    if (o_eta_c->count()) inst.schedule.eta_c = eta_c;
    auto set_weights = [&](LossWeights& w) {
      if (o_w_s->count()) w.w_s = w_s;
      if (o_w_b->count()) w.w_b = w_b;
    };
    set_weights(inst.weights);
    for (Phase& p : inst.schedule.phases) set_weights(p.weights);
    if (o_w_con->count()) {
      inst.weights.w_con = w_con;
      inst.schedule.phases.clear();
    }
  }
};

void print_report(const RunRecord& r) {
  std::cout << pad("experiment", 22) << r.experiment_id << '\n';
  std::cout << pad("problem", 22) << problem_kind(r.problem);
  if (const auto* s = std::get_if<SupervisedFit>(&r.problem)) std::cout << " (" << s->target << ")";
  if (const auto* w = std::get_if<Wedge>(&r.problem)) {
    std::cout << " (omega " << fixed(w->omega * 180.0 / std::numbers::pi, 2) << " deg, " << to_string(w->bc)
              << ")";
  }
  std::cout << '\n';
  std::cout << pad("method", 22) << to_string(r.method) << '\n';
  std::cout << pad("seed", 22) << r.seed << '\n';
  if (r.failed) {
    std::cout << pad("status", 22) << "FAILED: " << r.error << '\n';
    return;
  }
  std::cout << pad("dominant exponent", 22) << fixed(r.report.dominant_mu, 6) << '\n';
  if (std::isfinite(r.target_mu)) {
    std::cout << pad("target exponent", 22) << fixed(r.target_mu, 6) << '\n';
    std::cout << pad("discovered", 22) << fixed(r.discovered_mu, 6) << '\n';
  }
  std::cout << pad("relative error", 22) << fixed(r.rel_err_pct, 4) << " %\n";
  std::cout << pad("success (< 5%)", 22) << (r.success ? "yes" : "no") << '\n';
  if (r.report.match.matches.size() > 1 || r.report.match.under_resolved) {
    std::cout << "matches" << (r.report.match.under_resolved ? " (under-resolved)" : "") << '\n';
    for (const ExponentMatch& m : r.report.match.matches) {
      std::cout << "  target " << fixed(m.target, 4) << "  mu " << fixed(m.mu, 6) << "  err "
                << fixed(m.rel_err_pct, 4) << " %\n";
    }
  }
  std::cout << "active terms (|c| > " << kActiveThreshold << ")\n";
  for (const ActiveTerm& t : r.report.active) std::cout << "  mu " << fixed(t.mu, 6) << "  c " << fixed(t.c, 6) << '\n';
  if (const auto* w = std::get_if<Wedge>(&r.problem)) {
    std::cout << pad("constraint violation", 22) << sci(r.report.constraint_violation) << '\n';
    std::cout << "spectrum (" << to_string(quantization(w->bc)) << " family)\n";
    for (double mu_n : wedge_spectrum(w->omega, w->bc, 3)) {
      double nearest = std::numeric_limits<double>::quiet_NaN();
      for (const ActiveTerm& t : r.report.active) {
        if (std::isnan(nearest) || std::abs(t.mu - mu_n) < std::abs(nearest - mu_n)) nearest = t.mu;
      }
      std::cout << "  mu_n " << fixed(mu_n, 6) << "  nearest learned " << fixed(nearest, 6) << '\n';
    }
  }
  std::cout << pad("gram condition", 22) << sci(r.report.gram_condition) << '\n';
  std::cout << "loss  total " << sci(r.loss.total) << "  residual " << sci(r.loss.residual) << "  bc "
            << sci(r.loss.bc) << "  sparsity " << sci(r.loss.sparsity) << "  constraint " << sci(r.loss.constraint)
            << '\n';
  std::cout << pad("wall time", 22) << fixed(r.wall_ms, 0) << " ms\n";
}

// Runs a one-instance experiment and writes <out>/<id>.json.
int run_single(const std::string& id, const Instance& inst, const TrainFlags& flags) {
  ExperimentConfig cfg;
  cfg.id = id;
  cfg.instances = {inst};
  cfg.seeds = {flags.seed};
  const fs::path dir = output_dir(flags.out);
  RunOptions opts;
  if (flags.trace) opts.trace_dir = dir.string();
  const BenchSummary summary = run(cfg, opts);
  write_text(dir / (id + ".json"), result_record(summary).dump(2) + "\n");
  const RunRecord& r = summary.runs.front();
  print_report(r);
  std::cout << "wrote " << (dir / (id + ".json")).string() << '\n';
  return r.failed ? kExitNumerical : kExitOk;
}

void print_summary(const BenchSummary& s) {
  std::cout << pad("instance", 28) << pad("runs", 6) << pad("fail", 6) << pad("succ%", 8) << pad("mean%", 11)
            << pad("median%", 11) << pad("p90%", 11) << "viol\n";
  auto row = [](const std::string& label, const Stats& st) {
    std::cout << pad(label, 28) << pad(std::to_string(st.runs), 6) << pad(std::to_string(st.failed), 6)
              << pad(fixed(st.success_pct, 1), 8) << pad(fixed(st.mean_err_pct, 4), 11)
              << pad(fixed(st.median_err_pct, 4), 11) << pad(fixed(st.p90_err_pct, 4), 11)
              << sci(st.mean_constraint_violation) << '\n';
  };
  for (std::size_t i = 0; i < s.by_instance.size(); ++i) row(s.config.instances[i].label(), s.by_instance[i]);
  if (s.by_method.size() > 1) {
    for (const auto& [name, st] : s.by_method) row("[" + name + "]", st);
  }
  row("[all]", s.overall);
  if (s.improvement) {
    std::cout << "improvement naive -> constraint: mean " << fixed(s.improvement->mean_factor, 1) << "x, median "
              << fixed(s.improvement->median_factor, 1) << "x over " << s.improvement->pairs.size() << " pairs\n";
  }
}

int bench_config(const ExperimentConfig& cfg, const std::string& out, int jobs, bool trace) {
  const fs::path dir = output_dir(out);
  RunOptions opts;
  opts.jobs = jobs;
  if (trace) {
    opts.trace_dir = (dir / "traces").string();
    fs::create_directories(opts.trace_dir);
  }
  std::size_t done = 0;
  const std::size_t total = cfg.run_count();
  opts.on_complete = [&](const RunRecord& r) {
    ++done;
    std::cerr << "[" << done << "/" << total << "] " << r.key << "/" << to_string(r.method) << " seed " << r.seed
              << (r.failed ? "  FAILED: " + r.error : "  err " + fixed(r.rel_err_pct, 4) + " %") << '\n';
  };
  const BenchSummary summary = run(cfg, opts);
  write_text(dir / (cfg.id + ".json"), result_record(summary).dump(2) + "\n");
  std::ostringstream csv;
  write_csv(csv, summary);
  write_text(dir / (cfg.id + ".csv"), csv.str());
  print_summary(summary);
  std::cout << "wrote " << (dir / (cfg.id + ".json")).string() << " and " << (dir / (cfg.id + ".csv")).string()
            << '\n';
  return kExitOk;
}

std::string known_ids() {
  std::string s;
  for (const std::string& id : registry_ids()) s += "  " + id + "\n";
  return s;
}

Eigen::VectorXd parse_points(const std::string& spec) {
  const auto parts = split(spec, ':');
  if (parts.size() >= 2 && (parts[0] == "graded" || parts[0] == "uniform")) {
    const double n = parse_double(parts[1], "--points count");
    const double p = parts[0] == "uniform" ? 1.0 : (parts.size() > 2 ? parse_double(parts[2], "--points grading") : 2.0);
    const double lo = parts.size() > 3 ? parse_double(parts[3], "--points lower end") : 0.01;
    if (n < 2 || n != std::floor(n)) throw InputError("--points: count must be an integer >= 2");
    if (!(lo > 0.0 && lo < 1.0)) throw InputError("--points: lower end must lie in (0, 1)");
    return graded_interval(static_cast<int>(n), p, lo);
  }
  throw InputError("--points: expected graded:N[:p[:lo]] or uniform:N[::lo], got '" + spec + "'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Power-law exponent discovery with trainable-exponent networks"};
  app.require_subcommand(1);

  // fit
  auto* fit = app.add_subcommand("fit", "supervised fit of a catalog target or a data file");
  std::string target = "single", data_file;
  double noise = 0.0, grading = 2.0, lo = 0.01;
  int n_points = 200;
  TrainFlags fit_flags;
  auto* o_target = fit->add_option("--target", target, "single | three-term | close-pair:<delta> | log-correction");
  auto* o_data = fit->add_option("--data", data_file, "two-column x,y text file");
  o_target->excludes(o_data);
  auto* o_noise = fit->add_option("--noise", noise, "Gaussian noise sigma added to catalog targets");
  auto* o_n = fit->add_option("--n", n_points, "number of samples")->check(CLI::PositiveNumber);
  auto* o_grading = fit->add_option("--grading", grading, "x = t^p grading exponent");
  auto* o_lo = fit->add_option("--lo", lo, "lower end of the sample interval");
  fit_flags.add(fit);

  // solve
  auto* solve = app.add_subcommand("solve", "physics-informed discovery (ode | poisson | corner)");
  std::string problem, bc = "DD", method = "constraint";
  double omega_deg = 270.0, beta = -0.5, cutoff = 0.0;
  TrainFlags solve_flags;
  solve->add_option("problem", problem, "ode | poisson | corner")->required();
  auto* o_omega = solve->add_option("--omega-deg", omega_deg, "wedge opening angle in degrees");
  auto* o_bc = solve->add_option("--bc", bc, "DD | NN | DN | ND");
  solve->add_option("--method", method, "naive | constraint")->capture_default_str();
  auto* o_beta = solve->add_option("--beta", beta, "forcing exponent of -u'' = x^beta");
  auto* o_cutoff = solve->add_option("--cutoff", cutoff, "lower cutoff of the residual points");
  solve_flags.add(solve);

  // bench
  auto* bench = app.add_subcommand("bench", "run a registry experiment");
  std::string bench_id, bench_out, bench_config_file, bench_seeds;
  int jobs = 1;
  bool bench_trace = false;
  bench->add_option("id", bench_id, "experiment id (see `list`)");
  bench->add_option("--out", bench_out, "output directory (default: $MSN_OUT_DIR or .)");
  bench->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
  bench->add_option("--config", bench_config_file, "JSON experiment config (merged over the registry entry)");
  bench->add_option("--seeds", bench_seeds, "comma-separated seed list");
  bench->add_flag("--trace", bench_trace, "write per-epoch trace CSVs");

  // replay
  auto* replay = app.add_subcommand("replay", "re-run the configuration echoed in a result record");
  std::string replay_file, replay_out;
  int replay_jobs = 1;
  replay->add_option("record", replay_file, "result JSON")->required();
  replay->add_option("--out", replay_out, "output directory (default: $MSN_OUT_DIR or .)");
  replay->add_option("--jobs", replay_jobs, "worker threads")->check(CLI::PositiveNumber);

  auto* list = app.add_subcommand("list", "list registry experiments");

  // rate-curve
  auto* rate = app.add_subcommand("rate-curve", "closed-form best error R(mu) for x^alpha");
  double alpha = 0.5, span = 0.5;
  int rate_n = 101;
  std::string rate_out;
  rate->add_option("--alpha", alpha, "true exponent")->capture_default_str();
  rate->add_option("--span", span, "half-width of the mu range around alpha")->capture_default_str();
  rate->add_option("--n", rate_n, "number of samples (odd keeps mu = alpha)")->check(CLI::PositiveNumber);
  rate->add_option("--out", rate_out, "CSV file (default: stdout)");

  // gram
  auto* gram = app.add_subcommand("gram", "Gram-matrix condition number of a set of exponents");
  std::string mus_list, points_spec = "graded:200:2";
  gram->add_option("--mus", mus_list, "comma-separated exponents")->required();
  gram->add_option("--points", points_spec, "graded:N[:p[:lo]] | uniform:N")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInput;
  }

  try {
    if (*fit) {
      Instance inst = registry().at("single-exponent").instances.front();
      inst.key = "fit";
      inst = apply_config_file(inst, fit_flags.config);
      auto& sup = std::get<SupervisedFit>(inst.problem);
      if (*o_data) {
        if (!fs::exists(data_file)) throw InputError("--data: file not found: " + data_file);
        sup.target = "data:" + data_file;
        (void)load_xy_file(data_file);
      } else if (*o_target) {
        sup.target = target;
      }
      if (*o_noise) sup.noise_sigma = noise;
      if (*o_n) inst.collocation.n = n_points;
      if (*o_grading) inst.collocation.grading = grading;
      if (*o_lo) inst.collocation.cutoff = lo;
      fit_flags.apply(inst);
      return run_single("fit", inst, fit_flags);
    }

    if (*solve) {
      Instance inst;
      const Method m = parse_method(method);
      if (problem == "ode") {
        inst = registry().at("singular-ode").instances.front();
      } else if (problem == "poisson") {
        inst = registry().at("singular-forcing").instances.front();
      } else if (problem == "corner") {
        inst = registry().at("corner-dd").instances.at(m == Method::Naive ? 0 : 1);
      } else {
        throw InputError("problem: expected ode, poisson or corner, got '" + problem + "'");
      }
      inst.method = m;
      inst = apply_config_file(inst, solve_flags.config);
      if (auto* w = std::get_if<Wedge>(&inst.problem)) {
        if (*o_omega) w->omega = omega_deg * std::numbers::pi / 180.0;
        if (*o_bc) w->bc = parse_wedge_bc(bc);
        inst.key = "omega=" + format_number(w->omega * 180.0 / std::numbers::pi) + ",bc=" + to_string(w->bc);
      } else if (*o_omega || *o_bc) {
        throw InputError("--omega-deg/--bc apply to the corner problem only");
      }
      if (auto* p = std::get_if<SingularPoisson>(&inst.problem)) {
        if (*o_beta) p->beta = beta;
        inst.key = "beta=" + format_number(p->beta);
      } else if (*o_beta) {
        throw InputError("--beta applies to the poisson problem only");
      }
      if (*o_cutoff) inst.collocation.cutoff = cutoff;
      solve_flags.apply(inst);
      return run_single("solve-" + problem, inst, solve_flags);
    }

    if (*bench) {
      ExperimentConfig cfg;
      if (!bench_id.empty()) {
        const auto it = registry().find(bench_id);
        if (it == registry().end()) {
          std::cerr << "unknown experiment '" << bench_id << "'; known ids:\n" << known_ids();
          return kExitInput;
        }
        cfg = it->second;
      } else if (bench_config_file.empty()) {
        std::cerr << "bench: give an experiment id or --config; known ids:\n" << known_ids();
        return kExitInput;
      }
      if (!bench_config_file.empty()) {
        Json j = to_json(cfg);
        j.merge_patch(read_json_file(bench_config_file));
        cfg = config_from_json(j);
      }
      if (!bench_seeds.empty()) {
        cfg.seeds.clear();
        for (const std::string& s : split(bench_seeds, ',')) {
          const double v = parse_double(s, "--seeds");
          if (v < 0 || v != std::floor(v)) throw InputError("--seeds: '" + s + "' is not a non-negative integer");
          cfg.seeds.push_back(static_cast<std::uint64_t>(v));
        }
      }
      return bench_config(cfg, bench_out, jobs, bench_trace);
    }

    if (*replay) {
      const Json j = read_json_file(replay_file);
      if (!j.contains("config")) throw InputError(replay_file + ": no config section");
      const BenchSummary stored = summary_from_record(j);
      const ExperimentConfig cfg = stored.config;
      const int rc = bench_config(cfg, replay_out, replay_jobs, false);
      return rc;
    }

    if (*list) {
      for (const auto& [id, cfg] : registry()) {
        std::cout << pad(id, 20) << pad(std::to_string(cfg.run_count()) + " runs", 10) << cfg.description << '\n';
      }
      return kExitOk;
    }

    if (*rate) {
      if (!(span > 0.0)) throw InputError("--span must be > 0");
      std::vector<double> mus;
      for (int i = 0; i < rate_n; ++i) {
        const double t = rate_n == 1 ? 0.0 : -1.0 + 2.0 * i / (rate_n - 1);
        const double mu = (2 * i + 1 == rate_n) ? alpha : alpha + span * t;
        if (mu > -0.5) mus.push_back(mu);
      }
      const auto curve = rate_curve(alpha, mus);
      std::ostringstream csv;
      csv << "mu,c_star,R\n";
      for (const RatePoint& p : curve) {
        csv << format_number(p.mu) << ',' << format_number(p.c_star) << ',' << format_number(p.R) << '\n';
      }
      // Slope over |mu - alpha| in [1e-3, 1e-2], log-spaced.
      std::vector<double> near;
      for (int i = 0; i <= 20; ++i) near.push_back(alpha + std::pow(10.0, -3.0 + i / 20.0));
      const double slope = loglog_slope(alpha, rate_curve(alpha, near));
      if (rate_out.empty()) {
        std::cout << csv.str();
        std::cerr << "loglog_slope " << fixed(slope, 6) << '\n';
      } else {
        write_text(rate_out, csv.str());
        std::cout << "wrote " << rate_out << "\nloglog_slope " << fixed(slope, 6) << '\n';
      }
      return kExitOk;
    }

    if (*gram) {
      std::vector<double> mus;
      for (const std::string& s : split(mus_list, ',')) mus.push_back(parse_double(s, "--mus"));
      if (mus.size() < 2) throw InputError("--mus: need at least two exponents");
      const Eigen::VectorXd e = Eigen::Map<const Eigen::VectorXd>(mus.data(), static_cast<Eigen::Index>(mus.size()));
      const double cond = gram_condition(e, parse_points(points_spec));
      std::cout << "gram_condition " << sci(cond) << '\n';
      return kExitOk;
    }
  } catch (const TrainingAborted& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  }
  return kExitOk;
}
