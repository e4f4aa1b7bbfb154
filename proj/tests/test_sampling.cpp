#include "msn/sampling.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>

using namespace msn;

namespace {

std::string temp_file(const std::string& name, const std::string& body) {
  const auto path = std::filesystem::temp_directory_path() / ("msn_sampling_" + name);
  std::ofstream(path) << body;
  return path.string();
}

double median(Eigen::VectorXd v) {
  std::sort(v.data(), v.data() + v.size());
  const Eigen::Index n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

TEST(CounterRng, DeterministicAndStreamSeparated) {
  CounterRng a(42, 1), b(42, 1), c(42, 2), d(43, 1);
  bool differs_stream = false, differs_seed = false;
  for (int i = 0; i < 100; ++i) {
    const auto va = a.next_u64();
    EXPECT_EQ(va, b.next_u64());
    differs_stream = differs_stream || va != c.next_u64();
    differs_seed = differs_seed || va != d.next_u64();
  }
  EXPECT_TRUE(differs_stream);
  EXPECT_TRUE(differs_seed);
  EXPECT_EQ(a.counter(), 100u);
}

TEST(CounterRng, PinnedOutput) {
  // Reference splitmix64 finalizer values.
  EXPECT_EQ(CounterRng::mix(0), 0xe220a8397b1dcdafULL);
  EXPECT_EQ(CounterRng::mix(1), 0x910a2dec89025cc1ULL);
}

TEST(CounterRng, UniformRangeAndMoments) {
  CounterRng rng(7, 3);
  const int n = 200000;
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    ASSERT_GT(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
    sq += u * u;
  }
  EXPECT_NEAR(sum / n, 0.5, 0.005);
  EXPECT_NEAR(sq / n - (sum / n) * (sum / n), 1.0 / 12.0, 0.002);
}

TEST(CounterRng, NormalMoments) {
  CounterRng rng(9, 4);
  const int n = 200000;
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    sum += z;
    sq += z * z;
  }
  EXPECT_NEAR(sum / n, 0.0, 0.01);
  EXPECT_NEAR(sq / n, 1.0, 0.015);
}

TEST(Graded1d, SmallGrids) {
  const Eigen::VectorXd g = graded_1d(3, 2.0, 0.0);
  ASSERT_EQ(g.size(), 3);
  EXPECT_DOUBLE_EQ(g[0], 0.0);
  EXPECT_DOUBLE_EQ(g[1], 0.25);
  EXPECT_DOUBLE_EQ(g[2], 1.0);
  const Eigen::VectorXd u = graded_1d(5, 1.0, 0.0);
  ASSERT_EQ(u.size(), 5);
  for (int i = 0; i < 5; ++i) EXPECT_DOUBLE_EQ(u[i], 0.25 * i);
}

TEST(Graded1d, CutoffAndOrdering) {
  const Eigen::VectorXd g = graded_1d(200, 2.0, 0.01);
  ASSERT_GT(g.size(), 0);
  EXPECT_GE(g.minCoeff(), 0.01);
  for (Eigen::Index i = 1; i < g.size(); ++i) EXPECT_LT(g[i - 1], g[i]);
  EXPECT_EQ(graded_1d(50, 2.0, 1.0).size(), 0);
  EXPECT_EQ(graded_1d(50, 2.0, 1.5).size(), 0);
  EXPECT_THROW(graded_1d(1, 2.0, 0.0), std::invalid_argument);
  EXPECT_THROW(graded_1d(10, 0.5, 0.0), std::invalid_argument);
  EXPECT_THROW(graded_1d(10, 2.0, -0.1), std::invalid_argument);
}

TEST(Graded1d, StrongerGradingLowersMedian) {
  double prev = 1.0;
  for (double p : {1.0, 1.5, 2.0, 3.0, 4.0}) {
    const double m = median(graded_1d(101, p, 0.0));
    EXPECT_LE(m, prev);
    prev = m;
  }
}

TEST(GradedInterval, SpansInterval) {
  const Eigen::VectorXd g = graded_interval(200, 2.0, 0.01);
  ASSERT_EQ(g.size(), 200);
  EXPECT_EQ(g[0], 0.01);
  EXPECT_EQ(g[199], 1.0);
  for (Eigen::Index i = 1; i < g.size(); ++i) EXPECT_LT(g[i - 1], g[i]);
  // Interior points follow x = t^2 with t uniform on [0.1, 1].
  EXPECT_NEAR(g[100], std::pow(0.1 + 0.9 * 100.0 / 199.0, 2.0), 1e-15);
  EXPECT_THROW(graded_interval(10, 2.0, 1.0), std::invalid_argument);
}

TEST(WedgeSample, CountsAndLayout) {
  const double omega = 1.5 * std::numbers::pi;
  const CollocationSet set = wedge_sample(omega, 500, 200, 100, 3);
  EXPECT_EQ(set.polar.rows(), 500);
  ASSERT_EQ(set.boundary.size(), 400u);
  for (Eigen::Index i = 0; i < set.polar.rows(); ++i) {
    EXPECT_GT(set.polar(i, 0), 0.0);
    EXPECT_LE(set.polar(i, 0), 1.0);
    EXPECT_GT(set.polar(i, 1), 0.0);
    EXPECT_LT(set.polar(i, 1), omega);
  }
  for (std::size_t i = 0; i < 200; ++i) {
    EXPECT_EQ(set.boundary[i].r, 1.0);
    EXPECT_GT(set.boundary[i].theta, 0.0);
    EXPECT_LT(set.boundary[i].theta, omega);
  }
  for (std::size_t i = 200; i < 400; ++i) {
    EXPECT_EQ(set.boundary[i].theta, i < 300 ? 0.0 : omega);
    EXPECT_GE(set.boundary[i].r, kEdgeMinRadius);
    EXPECT_LE(set.boundary[i].r, 1.0);
  }
  EXPECT_EQ(set.record.kind, "wedge");
  EXPECT_EQ(set.record.n_residual, 500);
  EXPECT_EQ(set.record.n_arc, 200);
  EXPECT_EQ(set.record.n_edge, 100);
  EXPECT_EQ(set.record.seed, 3u);
}

TEST(WedgeSample, InteriorGradedTowardCorner) {
  const CollocationSet set = wedge_sample(2.0, 4000, 0, 0, 1);
  // r = t^2 with t uniform: P(r < 1/4) = 1/2.
  const double below = (set.polar.col(0).array() < 0.25).cast<double>().mean();
  EXPECT_NEAR(below, 0.5, 0.03);
}

TEST(WedgeSample, SeedDeterminism) {
  const CollocationSet a = wedge_sample(2.0, 50, 20, 10, 8);
  const CollocationSet b = wedge_sample(2.0, 50, 20, 10, 8);
  const CollocationSet c = wedge_sample(2.0, 50, 20, 10, 9);
  EXPECT_EQ(a.polar, b.polar);
  for (std::size_t i = 0; i < a.boundary.size(); ++i) {
    EXPECT_EQ(a.boundary[i].r, b.boundary[i].r);
    EXPECT_EQ(a.boundary[i].theta, b.boundary[i].theta);
  }
  EXPECT_NE(a.polar, c.polar);
  EXPECT_THROW(wedge_sample(2.0, -1, 0, 0, 0), std::invalid_argument);
  EXPECT_THROW(wedge_sample(0.0, 1, 0, 0, 0), std::invalid_argument);
}

TEST(LoadXy, ParsesHeaderCommentsAndSeparators) {
  const auto path = temp_file("ok.csv", "x,y\n# comment\n0.25, 0.5\n1 1\n\n0.04\t0.2\n");
  const CollocationSet set = load_xy_file(path);
  ASSERT_EQ(set.x.size(), 3);
  EXPECT_EQ(set.x[0], 0.25);
  EXPECT_EQ(set.y[0], 0.5);
  EXPECT_EQ(set.x[2], 0.04);
  EXPECT_EQ(set.record.kind, "data");
  EXPECT_EQ(set.record.source, path);
  std::remove(path.c_str());
}

TEST(LoadXy, Errors) {
  EXPECT_THROW(load_xy_file("/nonexistent/points.csv"), std::runtime_error);
  const auto bad = temp_file("bad.csv", "0.1 0.2\nabc def\n");
  try {
    load_xy_file(bad);
    FAIL() << "expected an error";
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find(":2:"), std::string::npos) << e.what();
  }
  const auto negative = temp_file("neg.csv", "-0.1 0.2\n0.5 0.3\n");
  EXPECT_THROW(load_xy_file(negative), std::runtime_error);
  const auto short_file = temp_file("short.csv", "0.1 0.2\n");
  EXPECT_THROW(load_xy_file(short_file), std::runtime_error);
  for (const auto& p : {bad, negative, short_file}) std::remove(p.c_str());
}
