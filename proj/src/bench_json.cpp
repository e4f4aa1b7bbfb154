#include "msn/bench_json.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <set>
#include <stdexcept>

namespace msn {

namespace {

Json num(double v) {
  if (std::isfinite(v)) return v;
  return format_number(v);
}

double to_double(const Json& j, const std::string& path) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  }
  throw std::invalid_argument(path + ": expected a number");
}

Json vec(const Eigen::VectorXd& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(num(v[i]));
  return a;
}

// Reads an object field by field and rejects keys nobody asked for.
class Reader {
 public:
  Reader(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw std::invalid_argument(path_ + ": expected an object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }
  std::string at(const std::string& key) const { return path_ + "." + key; }

  const Json* find(const std::string& key) {
    if (!j_.contains(key)) return nullptr;
    seen_.insert(key);
    return &j_[key];
  }

  void get(const std::string& key, double& out) {
    if (const Json* v = find(key)) out = to_double(*v, at(key));
  }
  void get(const std::string& key, int& out) {
    if (const Json* v = find(key)) {
      if (!v->is_number_integer()) throw std::invalid_argument(at(key) + ": expected an integer");
      out = v->get<int>();
    }
  }
  void get(const std::string& key, std::uint64_t& out) {
    if (const Json* v = find(key)) {
      if (!v->is_number_unsigned() && !(v->is_number_integer() && v->get<long long>() >= 0)) {
        throw std::invalid_argument(at(key) + ": expected a non-negative integer");
      }
      out = v->get<std::uint64_t>();
    }
  }
  void get(const std::string& key, bool& out) {
    if (const Json* v = find(key)) {
      if (!v->is_boolean()) throw std::invalid_argument(at(key) + ": expected true or false");
      out = v->get<bool>();
    }
  }
  void get(const std::string& key, std::string& out) {
    if (const Json* v = find(key)) {
      if (!v->is_string()) throw std::invalid_argument(at(key) + ": expected a string");
      out = v->get<std::string>();
    }
  }
  void get(const std::string& key, Eigen::VectorXd& out) {
    if (const Json* v = find(key)) {
      if (!v->is_array()) throw std::invalid_argument(at(key) + ": expected an array");
      out.resize(static_cast<Eigen::Index>(v->size()));
      for (std::size_t i = 0; i < v->size(); ++i) {
        out[static_cast<Eigen::Index>(i)] = to_double((*v)[i], at(key) + "[" + std::to_string(i) + "]");
      }
    }
  }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.count(key)) throw std::invalid_argument(at(key) + ": unknown key");
    }
  }

 private:
  const Json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

std::string init_name(ExponentInit e) {
  switch (e) {
    case ExponentInit::Uniform: return "uniform";
    case ExponentInit::UniformPerturbed: return "uniform-perturbed";
    case ExponentInit::PinnedFundamental: return "pinned-fundamental";
  }
  return "";
}

ExponentInit parse_init(const std::string& s, const std::string& path) {
  if (s == "uniform") return ExponentInit::Uniform;
  if (s == "uniform-perturbed") return ExponentInit::UniformPerturbed;
  if (s == "pinned-fundamental") return ExponentInit::PinnedFundamental;
  throw std::invalid_argument(path + ": unknown exponent init '" + s + "'");
}

Json weights_json(const LossWeights& w) {
  return {{"w_r", w.w_r}, {"w_b", w.w_b}, {"w_s", w.w_s}, {"w_con", w.w_con}};
}

LossWeights weights_from(const Json& j, const std::string& path, LossWeights w = {}) {
  Reader r(j, path);
  r.get("w_r", w.w_r);
  r.get("w_b", w.w_b);
  r.get("w_s", w.w_s);
  r.get("w_con", w.w_con);
  r.finish();
  return w;
}

Json schedule_json(const TrainSchedule& s) {
  Json phases = Json::array();
  for (const Phase& p : s.phases) phases.push_back({{"start_epoch", p.start_epoch}, {"weights", weights_json(p.weights)}});
  return {{"epochs", s.epochs},
          {"eta_mu", s.eta_mu},
          {"eta_c", s.eta_c},
          {"clip_norm", s.clip_norm},
          {"warmup_epochs", s.warmup_epochs},
          {"ramp_epochs", s.ramp_epochs},
          {"phases", phases},
          {"adam", {{"beta1", s.adam.beta1}, {"beta2", s.adam.beta2}, {"eps", s.adam.eps}}}};
}

TrainSchedule schedule_from(const Json& j, const std::string& path, TrainSchedule s, const LossWeights& base) {
  Reader r(j, path);
  r.get("epochs", s.epochs);
  r.get("eta_mu", s.eta_mu);
  r.get("eta_c", s.eta_c);
  r.get("clip_norm", s.clip_norm);
  r.get("warmup_epochs", s.warmup_epochs);
  r.get("ramp_epochs", s.ramp_epochs);
  if (const Json* p = r.find("phases")) {
    if (!p->is_array()) throw std::invalid_argument(r.at("phases") + ": expected an array");
    s.phases.clear();
    for (std::size_t i = 0; i < p->size(); ++i) {
      const std::string where = r.at("phases") + "[" + std::to_string(i) + "]";
      Reader pr((*p)[i], where);
      Phase ph;
      ph.weights = base;
      pr.get("start_epoch", ph.start_epoch);
      if (const Json* w = pr.find("weights")) ph.weights = weights_from(*w, where + ".weights", base);
      pr.finish();
      s.phases.push_back(ph);
    }
  }
  if (const Json* a = r.find("adam")) {
    Reader ar(*a, r.at("adam"));
    ar.get("beta1", s.adam.beta1);
    ar.get("beta2", s.adam.beta2);
    ar.get("eps", s.adam.eps);
    ar.finish();
  }
  r.finish();
  return s;
}

Json report_json(const RecoveryReport& rep) {
  Json active = Json::array();
  for (const ActiveTerm& t : rep.active) active.push_back({{"mu", num(t.mu)}, {"c", num(t.c)}});
  Json matches = Json::array();
  for (const ExponentMatch& m : rep.match.matches) {
    matches.push_back({{"target", num(m.target)}, {"mu", num(m.mu)}, {"rel_err_pct", num(m.rel_err_pct)}});
  }
  Json clusters = Json::array();
  for (double c : rep.match.clusters) clusters.push_back(num(c));
  return {{"dominant_mu", num(rep.dominant_mu)},
          {"dominant_rel_err_pct", num(rep.dominant_rel_err_pct)},
          {"headline_err_pct", num(rep.headline_err_pct)},
          {"success", rep.success},
          {"constraint_violation", num(rep.constraint_violation)},
          {"gram_condition", num(rep.gram_condition)},
          {"active", active},
          {"match",
           {{"matches", matches},
            {"clusters", clusters},
            {"max_rel_err_pct", num(rep.match.max_rel_err_pct)},
            {"mean_rel_err_pct", num(rep.match.mean_rel_err_pct)},
            {"under_resolved", rep.match.under_resolved}}}};
}

RecoveryReport report_from(const Json& j, const std::string& path) {
  RecoveryReport rep;
  Reader r(j, path);
  r.get("dominant_mu", rep.dominant_mu);
  r.get("dominant_rel_err_pct", rep.dominant_rel_err_pct);
  r.get("headline_err_pct", rep.headline_err_pct);
  r.get("success", rep.success);
  r.get("constraint_violation", rep.constraint_violation);
  r.get("gram_condition", rep.gram_condition);
  if (const Json* a = r.find("active")) {
    for (std::size_t i = 0; i < a->size(); ++i) {
      const std::string where = r.at("active") + "[" + std::to_string(i) + "]";
      ActiveTerm t{};
      Reader tr((*a)[i], where);
      tr.get("mu", t.mu);
      tr.get("c", t.c);
      tr.finish();
      rep.active.push_back(t);
    }
  }
  if (const Json* m = r.find("match")) {
    Reader mr(*m, r.at("match"));
    if (const Json* ms = mr.find("matches")) {
      for (std::size_t i = 0; i < ms->size(); ++i) {
        const std::string where = mr.at("matches") + "[" + std::to_string(i) + "]";
        ExponentMatch em{};
        Reader er((*ms)[i], where);
        er.get("target", em.target);
        er.get("mu", em.mu);
        er.get("rel_err_pct", em.rel_err_pct);
        er.finish();
        rep.match.matches.push_back(em);
      }
    }
    Eigen::VectorXd clusters;
    mr.get("clusters", clusters);
    rep.match.clusters.assign(clusters.data(), clusters.data() + clusters.size());
    mr.get("max_rel_err_pct", rep.match.max_rel_err_pct);
    mr.get("mean_rel_err_pct", rep.match.mean_rel_err_pct);
    mr.get("under_resolved", rep.match.under_resolved);
    mr.finish();
  }
  r.finish();
  return rep;
}

Json record_json(const GenerationRecord& g) {
  return {{"kind", g.kind},         {"n_residual", g.n_residual}, {"n_arc", g.n_arc},
          {"n_edge", g.n_edge},     {"grading", g.grading},       {"cutoff", g.cutoff},
          {"omega", g.omega},       {"seed", g.seed},             {"noise_sigma", g.noise_sigma},
          {"source", g.source}};
}

GenerationRecord record_from(const Json& j, const std::string& path) {
  GenerationRecord g;
  Reader r(j, path);
  r.get("kind", g.kind);
  r.get("n_residual", g.n_residual);
  r.get("n_arc", g.n_arc);
  r.get("n_edge", g.n_edge);
  r.get("grading", g.grading);
  r.get("cutoff", g.cutoff);
  r.get("omega", g.omega);
  r.get("seed", g.seed);
  r.get("noise_sigma", g.noise_sigma);
  r.get("source", g.source);
  r.finish();
  return g;
}

Json improvement_json(const ImprovementReport& rep) {
  Json pairs = Json::array();
  for (const Improvement& p : rep.pairs) {
    pairs.push_back({{"key", p.key},
                     {"seed", p.seed},
                     {"baseline_err_pct", num(p.baseline_err_pct)},
                     {"improved_err_pct", num(p.improved_err_pct)},
                     {"factor", p.exact ? Json("exact") : num(p.factor)}});
  }
  return {{"mean_factor", num(rep.mean_factor)}, {"median_factor", num(rep.median_factor)}, {"pairs", pairs}};
}

}  // namespace

Json to_json(const ProblemSpec& p) {
  return std::visit(
      [](const auto& q) -> Json {
        using T = std::decay_t<decltype(q)>;
        if constexpr (std::is_same_v<T, SupervisedFit>) {
          return {{"type", "supervised"}, {"target", q.target}, {"noise_sigma", q.noise_sigma}};
        } else if constexpr (std::is_same_v<T, SingularOde>) {
          return {{"type", "ode"}};
        } else if constexpr (std::is_same_v<T, SingularPoisson>) {
          return {{"type", "poisson"}, {"beta", q.beta}};
        } else {
          return {{"type", "wedge"},
                  {"omega", q.omega},
                  {"omega_deg", q.omega * 180.0 / std::numbers::pi},
                  {"bc", to_string(q.bc)}};
        }
      },
      p);
}

ProblemSpec problem_from_json(const Json& j) {
  Reader r(j, "problem");
  std::string type;
  r.get("type", type);
  if (type == "supervised") {
    SupervisedFit s;
    r.get("target", s.target);
    r.get("noise_sigma", s.noise_sigma);
    r.finish();
    return s;
  }
  if (type == "ode") {
    r.finish();
    return SingularOde{};
  }
  if (type == "poisson") {
    SingularPoisson p;
    r.get("beta", p.beta);
    r.finish();
    return p;
  }
  if (type == "wedge") {
    Wedge w;
    double deg = std::numeric_limits<double>::quiet_NaN();
    r.get("omega_deg", deg);
    if (r.has("omega")) {
      r.get("omega", w.omega);
    } else if (!std::isnan(deg)) {
      w.omega = deg * std::numbers::pi / 180.0;
    } else {
      throw std::invalid_argument("problem.omega: wedge needs omega (radians) or omega_deg");
    }
    std::string bc = "DD";
    r.get("bc", bc);
    w.bc = parse_wedge_bc(bc);
    r.finish();
    return w;
  }
  throw std::invalid_argument("problem.type: expected supervised, ode, poisson or wedge, got '" + type + "'");
}

Json to_json(const Instance& inst) {
  return {{"key", inst.key},
          {"problem", to_json(inst.problem)},
          {"method", to_string(inst.method)},
          {"K", inst.terms},
          {"bounds_source", inst.bounds_source == BoundsSource::Fixed ? "fixed" : "bc-adaptive"},
          {"bounds", {{"lo", inst.bounds.lo}, {"hi", inst.bounds.hi}}},
          {"init",
           {{"exponent_init", init_name(inst.init.exponent_init)},
            {"mu_sigma", inst.init.mu_sigma},
            {"pinned_target", inst.init.pinned_target},
            {"pinned_factor", inst.init.pinned_factor},
            {"coeff_sigma", inst.init.coeff_sigma}}},
          {"schedule", schedule_json(inst.schedule)},
          {"weights", weights_json(inst.weights)},
          {"collocation",
           {{"n", inst.collocation.n},
            {"grading", inst.collocation.grading},
            {"cutoff", inst.collocation.cutoff},
            {"n_interior", inst.collocation.n_interior},
            {"n_arc", inst.collocation.n_arc},
            {"n_edge", inst.collocation.n_edge}}}};
}

Instance instance_from_json(const Json& j) {
  Instance inst;
  Reader r(j, "instance");
  r.get("key", inst.key);
  if (const Json* p = r.find("problem")) inst.problem = problem_from_json(*p);
  std::string method = to_string(inst.method);
  r.get("method", method);
  inst.method = parse_method(method);
  r.get("K", inst.terms);
  std::string bounds_source = "fixed";
  r.get("bounds_source", bounds_source);
  if (bounds_source == "fixed") {
    inst.bounds_source = BoundsSource::Fixed;
  } else if (bounds_source == "bc-adaptive") {
    inst.bounds_source = BoundsSource::BcAdaptive;
  } else {
    throw std::invalid_argument(r.at("bounds_source") + ": expected fixed or bc-adaptive");
  }
  if (const Json* b = r.find("bounds")) {
    Reader br(*b, r.at("bounds"));
    br.get("lo", inst.bounds.lo);
    br.get("hi", inst.bounds.hi);
    br.finish();
  }
  if (const Json* in = r.find("init")) {
    Reader ir(*in, r.at("init"));
    std::string e = init_name(inst.init.exponent_init);
    ir.get("exponent_init", e);
    inst.init.exponent_init = parse_init(e, ir.at("exponent_init"));
    ir.get("mu_sigma", inst.init.mu_sigma);
    ir.get("pinned_target", inst.init.pinned_target);
    ir.get("pinned_factor", inst.init.pinned_factor);
    ir.get("coeff_sigma", inst.init.coeff_sigma);
    ir.finish();
  }
  if (const Json* w = r.find("weights")) inst.weights = weights_from(*w, r.at("weights"));
  if (const Json* s = r.find("schedule")) inst.schedule = schedule_from(*s, r.at("schedule"), {}, inst.weights);
  if (const Json* c = r.find("collocation")) {
    Reader cr(*c, r.at("collocation"));
    cr.get("n", inst.collocation.n);
    cr.get("grading", inst.collocation.grading);
    cr.get("cutoff", inst.collocation.cutoff);
    cr.get("n_interior", inst.collocation.n_interior);
    cr.get("n_arc", inst.collocation.n_arc);
    cr.get("n_edge", inst.collocation.n_edge);
    cr.finish();
  }
  r.finish();
  return inst;
}

Json to_json(const ExperimentConfig& cfg) {
  Json instances = Json::array();
  for (const Instance& i : cfg.instances) instances.push_back(to_json(i));
  return {{"id", cfg.id},
          {"description", cfg.description},
          {"notes", cfg.notes},
          {"seeds", cfg.seeds},
          {"instances", instances}};
}

ExperimentConfig config_from_json(const Json& j) {
  ExperimentConfig cfg;
  Reader r(j, "config");
  r.get("id", cfg.id);
  r.get("description", cfg.description);
  r.get("notes", cfg.notes);
  if (const Json* s = r.find("seeds")) {
    if (!s->is_array()) throw std::invalid_argument(r.at("seeds") + ": expected an array");
    cfg.seeds.clear();
    for (const Json& v : *s) {
      if (!v.is_number_integer() || v.get<long long>() < 0) {
        throw std::invalid_argument(r.at("seeds") + ": seeds must be non-negative integers");
      }
      cfg.seeds.push_back(v.get<std::uint64_t>());
    }
  }
  if (const Json* in = r.find("instances")) {
    if (!in->is_array()) throw std::invalid_argument(r.at("instances") + ": expected an array");
    cfg.instances.clear();
    for (const Json& v : *in) cfg.instances.push_back(instance_from_json(v));
  }
  r.finish();
  return cfg;
}

Json to_json(const RunRecord& r) {
  return {{"experiment_id", r.experiment_id},
          {"instance", r.instance},
          {"key", r.key},
          {"method", to_string(r.method)},
          {"seed", r.seed},
          {"problem", to_json(r.problem)},
          {"failed", r.failed},
          {"error", r.error},
          {"epochs", r.epochs},
          {"mu", vec(r.mu)},
          {"c", vec(r.c)},
          {"loss",
           {{"total", num(r.loss.total)},
            {"residual", num(r.loss.residual)},
            {"bc", num(r.loss.bc)},
            {"sparsity", num(r.loss.sparsity)},
            {"constraint", num(r.loss.constraint)}}},
          {"report", report_json(r.report)},
          {"target_mu", num(r.target_mu)},
          {"discovered_mu", num(r.discovered_mu)},
          {"rel_err_pct", num(r.rel_err_pct)},
          {"success", r.success},
          {"quantization_ok", r.quantization_ok},
          {"collocation", record_json(r.collocation)},
          {"wall_ms", r.wall_ms}};
}

RunRecord run_from_json(const Json& j) {
  RunRecord rec;
  Reader r(j, "run");
  r.get("experiment_id", rec.experiment_id);
  std::uint64_t instance = 0;
  r.get("instance", instance);
  rec.instance = static_cast<std::size_t>(instance);
  r.get("key", rec.key);
  std::string method = to_string(rec.method);
  r.get("method", method);
  rec.method = parse_method(method);
  r.get("seed", rec.seed);
  if (const Json* p = r.find("problem")) rec.problem = problem_from_json(*p);
  r.get("failed", rec.failed);
  r.get("error", rec.error);
  r.get("epochs", rec.epochs);
  r.get("mu", rec.mu);
  r.get("c", rec.c);
  if (const Json* l = r.find("loss")) {
    Reader lr(*l, r.at("loss"));
    lr.get("total", rec.loss.total);
    lr.get("residual", rec.loss.residual);
    lr.get("bc", rec.loss.bc);
    lr.get("sparsity", rec.loss.sparsity);
    lr.get("constraint", rec.loss.constraint);
    lr.finish();
  }
  if (const Json* rep = r.find("report")) rec.report = report_from(*rep, r.at("report"));
  r.get("target_mu", rec.target_mu);
  r.get("discovered_mu", rec.discovered_mu);
  r.get("rel_err_pct", rec.rel_err_pct);
  r.get("success", rec.success);
  r.get("quantization_ok", rec.quantization_ok);
  if (const Json* g = r.find("collocation")) rec.collocation = record_from(*g, r.at("collocation"));
  r.get("wall_ms", rec.wall_ms);
  r.finish();
  return rec;
}

Json to_json(const Stats& s) {
  return {{"runs", s.runs},
          {"failed", s.failed},
          {"success_pct", num(s.success_pct)},
          {"mean_err_pct", num(s.mean_err_pct)},
          {"median_err_pct", num(s.median_err_pct)},
          {"p90_err_pct", num(s.p90_err_pct)},
          {"mean_constraint_violation", num(s.mean_constraint_violation)}};
}

Json aggregates_json(const BenchSummary& s) {
  Json by_instance = Json::array();
  for (std::size_t i = 0; i < s.by_instance.size(); ++i) {
    Json e = to_json(s.by_instance[i]);
    e["label"] = s.config.instances[i].label();
    by_instance.push_back(e);
  }
  Json by_method = Json::object();
  for (const auto& [name, st] : s.by_method) by_method[name] = to_json(st);
  Json out = {{"overall", to_json(s.overall)}, {"by_method", by_method}, {"by_instance", by_instance}};
  out["improvement"] = s.improvement ? improvement_json(*s.improvement) : Json(nullptr);
  return out;
}

Json result_record(const BenchSummary& s) {
  Json runs = Json::array();
  for (const RunRecord& r : s.runs) runs.push_back(to_json(r));
  return {{"format", "msn-bench-result/1"},
          {"config", to_json(s.config)},
          {"runs", runs},
          {"aggregates", aggregates_json(s)}};
}

BenchSummary summary_from_record(const Json& j) {
  if (!j.is_object() || !j.contains("config") || !j.contains("runs")) {
    throw std::invalid_argument("result record: expected an object with config and runs");
  }
  BenchSummary s;
  s.config = config_from_json(j["config"]);
  for (const Json& r : j["runs"]) s.runs.push_back(run_from_json(r));
  s.recompute();
  return s;
}

}  // namespace msn
