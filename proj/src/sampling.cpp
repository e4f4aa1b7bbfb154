#include "msn/sampling.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace msn {

std::uint64_t CounterRng::mix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t CounterRng::next_u64() {
  const std::uint64_t key = mix(seed_ * 0xd1342543de82ef95ULL + mix(stream_));
  return mix(key + 0x9e3779b97f4a7c15ULL * counter_++);
}

double CounterRng::uniform() {
  // 53 random bits, shifted by half an ulp so 0 is never produced.
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double CounterRng::normal() {
  const double u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

Eigen::VectorXd graded_1d(int n, double p, double cutoff) {
  if (n < 2) throw std::invalid_argument("graded_1d: need N >= 2");
  if (p < 1.0) throw std::invalid_argument("graded_1d: need grading p >= 1");
  if (cutoff < 0.0) throw std::invalid_argument("graded_1d: need cutoff >= 0");
  std::vector<double> pts;
  pts.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(n - 1);
    const double x = std::pow(t, p);
    if (x >= cutoff && cutoff < 1.0) pts.push_back(x);
  }
  return Eigen::Map<Eigen::VectorXd>(pts.data(), static_cast<Eigen::Index>(pts.size()));
}

Eigen::VectorXd graded_interval(int n, double p, double lo) {
  if (n < 2) throw std::invalid_argument("graded_interval: need N >= 2");
  if (p < 1.0) throw std::invalid_argument("graded_interval: need grading p >= 1");
  if (!(lo >= 0.0 && lo < 1.0)) throw std::invalid_argument("graded_interval: need 0 <= lo < 1");
  const double t0 = std::pow(lo, 1.0 / p);
  Eigen::VectorXd x(n);
  for (int i = 0; i < n; ++i) {
    const double t = t0 + (1.0 - t0) * static_cast<double>(i) / static_cast<double>(n - 1);
    x[i] = std::pow(t, p);
  }
  x[0] = lo;
  x[n - 1] = 1.0;
  return x;
}

namespace {
enum Stream : std::uint64_t { kInterior = 1, kArc = 2, kEdge0 = 3, kEdge1 = 4 };
}  // namespace

CollocationSet wedge_sample(double omega, int n_interior, int n_arc, int n_edge, std::uint64_t seed) {
  if (!(omega > 0.0)) throw std::invalid_argument("wedge_sample: omega must be > 0");
  if (n_interior < 0 || n_arc < 0 || n_edge < 0) {
    throw std::invalid_argument("wedge_sample: counts must be >= 0");
  }
  CollocationSet set;
  set.polar.resize(n_interior, 2);
  CounterRng interior(seed, kInterior);
  for (int i = 0; i < n_interior; ++i) {
    const double t = interior.uniform();
    set.polar(i, 0) = t * t;
    set.polar(i, 1) = omega * interior.uniform();
  }

  set.boundary.reserve(static_cast<std::size_t>(n_arc + 2 * n_edge));
  CounterRng arc(seed, kArc);
  for (int i = 0; i < n_arc; ++i) set.boundary.push_back({1.0, omega * arc.uniform()});

  const double t_min = std::sqrt(kEdgeMinRadius);
  for (const auto& [stream, theta] : {std::pair{kEdge0, 0.0}, std::pair{kEdge1, omega}}) {
    CounterRng edge(seed, stream);
    for (int i = 0; i < n_edge; ++i) {
      const double t = t_min + (1.0 - t_min) * edge.uniform();
      set.boundary.push_back({t * t, theta});
    }
  }

  set.record.kind = "wedge";
  set.record.n_residual = n_interior;
  set.record.n_arc = n_arc;
  set.record.n_edge = n_edge;
  set.record.grading = 2.0;
  set.record.cutoff = kEdgeMinRadius;
  set.record.omega = omega;
  set.record.seed = seed;
  return set;
}

CollocationSet load_xy_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open data file '" + path + "'");
  std::vector<double> xs, ys;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ss(line);
    std::string first;
    if (!(ss >> first) || first.starts_with("#")) continue;
    std::istringstream row(line);
    row.imbue(std::locale::classic());
    double x = 0.0, y = 0.0;
    if (!(row >> x >> y)) {
      if (xs.empty() && lineno == 1) continue;  // header
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected two numbers (x y)");
    }
    if (!(x >= 0.0) || !std::isfinite(y)) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": need x >= 0 and finite y");
    }
    xs.push_back(x);
    ys.push_back(y);
  }
  if (xs.size() < 2) throw std::runtime_error("data file '" + path + "' has fewer than two rows");
  CollocationSet set;
  set.x = Eigen::Map<Eigen::VectorXd>(xs.data(), static_cast<Eigen::Index>(xs.size()));
  set.y = Eigen::Map<Eigen::VectorXd>(ys.data(), static_cast<Eigen::Index>(ys.size()));
  set.record.kind = "data";
  set.record.n_residual = static_cast<int>(xs.size());
  set.record.source = path;
  return set;
}

}  // namespace msn
