#pragma once

// Experiment registry, parallel runner, aggregate statistics and persistence
// (JSON result record, flat CSV, per-epoch trace CSV).

#include "msn/analysis.hpp"
#include "msn/optim.hpp"
#include "msn/problems.hpp"

#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace msn {

enum class Method { Naive, ConstraintAware };
enum class BoundsSource { Fixed, BcAdaptive };

std::string to_string(Method m);
Method parse_method(std::string_view s);

/// One problem instance of an experiment; every seed of the experiment is run on it.
struct Instance {
  std::string key;  ///< grid coordinate, e.g. "sigma=0.01" or "omega=270,bc=DD"; shared by paired methods
  ProblemSpec problem;
  Method method = Method::ConstraintAware;
  int terms = 4;
  BoundsSource bounds_source = BoundsSource::Fixed;
  ExponentBounds bounds;
  InitSpec init;  ///< seed is overwritten per run
  TrainSchedule schedule;
  LossWeights weights;
  CollocationParams collocation;

  std::string label() const { return key + "/" + to_string(method); }
};

struct ExperimentConfig {
  std::string id;
  std::string description;
  std::string notes;  ///< free-form metadata echoed into the result record
  std::vector<Instance> instances;
  std::vector<std::uint64_t> seeds{0, 1, 2};

  std::size_t run_count() const { return instances.size() * seeds.size(); }
  /// Throws std::invalid_argument naming the first problem found.
  void validate() const;
};

/// Everything needed to train one (instance, seed) pair.
struct ResolvedRun {
  ExponentBounds bounds;
  InitSpec init;
  LossWeights weights;
  TrainSchedule schedule;
  Trig trig = Trig::Sin;  ///< quantization family used by the constraint loss (wedges only)
};

/// Resolves bc-adaptive bounds, the pinned fundamental and the seed. Naive
/// runs get w_con = 0 in every phase.
ResolvedRun resolve(const Instance& inst, std::uint64_t seed);

struct RunRecord {
  std::string experiment_id;
  std::size_t instance = 0;
  std::string key;
  Method method = Method::ConstraintAware;
  ProblemSpec problem;
  std::uint64_t seed = 0;
  bool failed = false;
  std::string error;       ///< set when failed
  int epochs = 0;          ///< completed epochs (the abort epoch for failures)
  Eigen::VectorXd mu, c;
  LossBreakdown loss;      ///< values only; gradients are not persisted
  RecoveryReport report;
  double target_mu = std::numeric_limits<double>::quiet_NaN();
  double discovered_mu = std::numeric_limits<double>::quiet_NaN();
  double rel_err_pct = std::numeric_limits<double>::infinity();
  bool success = false;
  bool quantization_ok = true;  ///< wedge runs: training trig == spectrum family
  GenerationRecord collocation;
  double wall_ms = 0.0;
};

struct Stats {
  std::size_t runs = 0;
  std::size_t failed = 0;
  double success_pct = 0.0;
  double mean_err_pct = 0.0;
  double median_err_pct = 0.0;
  double p90_err_pct = 0.0;
  double mean_constraint_violation = 0.0;
};

/// Aggregates over any subset of runs. Percentiles interpolate linearly
/// between order statistics; failed runs carry infinite error.
Stats aggregate(const std::vector<const RunRecord*>& runs);

struct Improvement {
  std::string key;
  std::uint64_t seed = 0;
  double baseline_err_pct = 0.0;
  double improved_err_pct = 0.0;
  double factor = 0.0;  ///< baseline / improved; +inf when improved is exactly 0
  bool exact = false;   ///< improved error is exactly 0
};

struct ImprovementReport {
  std::vector<Improvement> pairs;
  double mean_factor = 0.0;    ///< over pairs with finite factors
  double median_factor = 0.0;
};

/// Pairs runs by (key, seed). Throws std::invalid_argument when the two sets
/// do not cover the same grid.
ImprovementReport compare(const std::vector<const RunRecord*>& baseline,
                          const std::vector<const RunRecord*>& improved);

struct BenchSummary {
  ExperimentConfig config;
  std::vector<RunRecord> runs;                  ///< instance-major, then seed order
  std::vector<Stats> by_instance;               ///< parallel to config.instances
  std::map<std::string, Stats> by_method;       ///< keyed by to_string(Method)
  Stats overall;
  std::optional<ImprovementReport> improvement; ///< naive vs constraint-aware, when both ran

  /// Recomputes every aggregate from `runs`.
  void recompute();
};

struct RunOptions {
  int jobs = 1;
  std::string trace_dir;  ///< when set, one per-epoch CSV per run is written here
  std::function<void(const RunRecord&)> on_complete;  ///< called serially
};

/// Trains every (instance, seed); never throws for per-run numerical failures.
BenchSummary run(const ExperimentConfig& config, const RunOptions& options = {});

/// Trains a single run (no threading).
RunRecord run_one(const ExperimentConfig& config, std::size_t instance, std::uint64_t seed,
                  const std::string& trace_path = {});

/// Experiment id -> configuration.
const std::map<std::string, ExperimentConfig>& registry();
std::vector<std::string> registry_ids();

/// Header: experiment_id,method,omega_deg,bc,seed,target_mu,discovered_mu,rel_err_pct,constraint_violation,success
void write_csv(std::ostream& os, const BenchSummary& summary);
void write_trace_csv(std::ostream& os, const TrainTrace& trace);

/// Shortest round-trip decimal; "inf", "-inf", "nan" for non-finite values.
std::string format_number(double v);

}  // namespace msn
