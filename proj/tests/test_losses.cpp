#include "loss_oracle.hpp"

#include "msn/losses.hpp"
#include "msn/optim.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace msn;

namespace {

constexpr double kPi = std::numbers::pi;

MsnModel model(std::vector<double> mu, std::vector<double> c, ExponentBounds b = {0.05, 3.0},
               Angular a = Angular::None) {
  return model_from_exponents<double>(Eigen::Map<Eigen::VectorXd>(mu.data(), static_cast<Eigen::Index>(mu.size())),
                                      Eigen::Map<Eigen::VectorXd>(c.data(), static_cast<Eigen::Index>(c.size())), b, a);
}

// Exact models built through inverse_reparam carry a representation error of
// a few ulp in the exponent; residuals scale with it.
constexpr double kExactTol = 1e-20;

}  // namespace

TEST(Residual, ExactOdeSolution) {
  CollocationParams params;
  params.cutoff = 1e-3;
  const CollocationSet set = make_collocation(SingularOde{}, params, 0);
  const MsnModel m = model({0.5}, {1.0});
  EXPECT_LT(residual_loss(m, SingularOde{}, set).value, 1e-18);
  EXPECT_LT(bc_loss(m, SingularOde{}, set).value, kExactTol);
}

TEST(Residual, ExactPoissonSolution) {
  const CollocationSet set = make_collocation(SingularPoisson{-0.5}, {}, 0);
  const MsnModel m = model({1.0, 1.5}, {4.0 / 3.0, -4.0 / 3.0});
  EXPECT_LT(residual_loss(m, SingularPoisson{-0.5}, set).value, 1e-18);
  // Boundary point x = 0 with positive exponents contributes nothing.
  EXPECT_LT(bc_loss(m, SingularPoisson{-0.5}, set).value, kExactTol);
}

TEST(Residual, PoissonExclusionZone) {
  CollocationSet set;
  set.x = Eigen::VectorXd::LinSpaced(5, 0.005, 1.0);
  EXPECT_THROW(residual_loss(model({1.0}, {1.0}), SingularPoisson{-0.5}, set), std::domain_error);
  set.x[0] = 0.0;
  EXPECT_THROW(residual_loss(model({1.0}, {1.0}), SingularOde{}, set), std::domain_error);
}

TEST(Residual, WedgeIsIdenticallyZero) {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 20; ++i) {
    oracle::GradientCase gc = oracle::random_case("wedge", rng);
    const LossTerm t = residual_loss(gc.model, gc.problem, gc.set);
    EXPECT_EQ(t.value, 0.0);
    EXPECT_TRUE(t.grad_raw.isZero(0.0));
    EXPECT_TRUE(t.grad_c.isZero(0.0));
  }
}

TEST(Bc, ReentrantCornerExactModel) {
  const double omega = 1.5 * kPi;
  const ProblemSpec p = Wedge{omega, WedgeBc::DD};
  const CollocationSet set = make_collocation(p, {}, 0);
  const MsnModel m = model({2.0 / 3.0}, {1.0}, {0.1, 3.0}, Angular::Sin);
  EXPECT_LT(bc_loss(m, p, set).value, kExactTol);
  EXPECT_GT(bc_loss(model({0.6}, {1.0}, {0.1, 3.0}, Angular::Sin), p, set).value, 1e-4);
}

TEST(Bc, OneDimensionalRejectsNeumann) {
  CollocationSet set;
  set.boundary.push_back({1.0, 0.0, BoundaryOp::Neumann, 0.0});
  EXPECT_THROW(bc_loss(model({0.5}, {1.0}), SingularOde{}, set), std::invalid_argument);
}

TEST(Sparsity, Examples) {
  EXPECT_EQ(sparsity_loss(model({0.5, 1.0}, {0.0, 0.0})).value, 0.0);
  EXPECT_DOUBLE_EQ(sparsity_loss(model({0.5, 1.0}, {1.0, -1.0})).value, 1.0);
  const LossTerm t = sparsity_loss(model({1.0, 1.5, 0.3, 2.0}, {4.0 / 3.0, -4.0 / 3.0, 0.0, 0.0}));
  EXPECT_NEAR(t.value, 2.0 / 3.0, 1e-15);
  EXPECT_EQ(t.grad_c[0], 0.25);
  EXPECT_EQ(t.grad_c[1], -0.25);
  EXPECT_EQ(t.grad_c[2], 0.0);
  EXPECT_TRUE(t.grad_raw.isZero(0.0));
}

TEST(Constraint, Examples) {
  const double omega = 1.5 * kPi;
  EXPECT_LT(constraint_loss(model({2.0 / 3.0}, {1.0}), omega, Trig::Sin).value, 1e-28);
  EXPECT_NEAR(constraint_loss(model({1.0}, {1.0}), omega, Trig::Sin).value, 1.0, 1e-14);
  EXPECT_LT(constraint_loss(model({1.0 / 3.0}, {1.0}), omega, Trig::Cos).value, 1e-28);
  EXPECT_THROW(constraint_loss(model({1.0}, {1.0}), 0.0, Trig::Sin), std::invalid_argument);
}

TEST(Constraint, ZeroExactlyWhenActiveTermsAreQuantized) {
  const double omega = 1.25 * kPi;
  for (WedgeBc bc : {WedgeBc::DD, WedgeBc::DN}) {
    const auto modes = wedge_spectrum(omega, bc, 3);
    const Trig trig = quantization(bc);
    // Quantized active terms plus a zero-coefficient off-spectrum term.
    const MsnModel on = model({modes[0], modes[1], modes[2], 0.77}, {1.0, -0.4, 0.2, 0.0}, {0.05, 5.0});
    EXPECT_LT(constraint_loss(on, omega, trig).value, 1e-24);
    // Any active term off the spectrum makes it positive.
    const MsnModel off = model({modes[0], modes[1] + 0.01}, {1.0, -0.4}, {0.05, 5.0});
    EXPECT_GT(constraint_loss(off, omega, trig).value, 1e-6);
  }
}

TEST(Constraint, GradientFormula) {
  const double omega = 1.5 * kPi;
  const MsnModel m = model({0.9, 1.2}, {0.7, -0.3});
  const LossTerm t = constraint_loss(m, omega, Trig::Sin);
  const Eigen::VectorXd mu = m.exponents();
  for (int k = 0; k < 2; ++k) {
    const double dmu = reparam(m.raw[k], m.bounds).dmu_draw;
    EXPECT_NEAR(t.grad_raw[k], std::abs(m.coeffs[k]) * omega * std::sin(2 * mu[k] * omega) * dmu, 1e-13);
    const double s = std::sin(mu[k] * omega);
    EXPECT_NEAR(t.grad_c[k], (m.coeffs[k] > 0 ? 1.0 : -1.0) * s * s, 1e-15);
  }
}

TEST(Total, AllWeightsZero) {
  std::mt19937_64 rng(2);
  const oracle::GradientCase gc = oracle::random_case("wedge", rng);
  const LossBreakdown lb = total_loss(gc.model, gc.problem, gc.set, {0.0, 0.0, 0.0, 0.0});
  EXPECT_EQ(lb.total, 0.0);
  EXPECT_TRUE(lb.grad_raw.isZero(0.0));
  EXPECT_TRUE(lb.grad_c.isZero(0.0));
}

TEST(Total, ExactCornerModelLeavesOnlySparsity) {
  const double omega = 1.5 * kPi;
  const ProblemSpec p = Wedge{omega, WedgeBc::DD};
  const CollocationSet set = make_collocation(p, {}, 0);
  const MsnModel m = model({2.0 / 3.0}, {1.0}, {0.1, 3.0}, Angular::Sin);
  const LossWeights w{1.0, 100.0, 0.001, 10.0};
  const LossBreakdown lb = total_loss(m, p, set, w);
  EXPECT_EQ(lb.residual, 0.0);
  EXPECT_LT(lb.bc, kExactTol);
  EXPECT_LT(lb.constraint, 1e-28);
  EXPECT_NEAR(lb.total, 0.001 * 1.0, 1e-15);
}

TEST(Total, WarmupSuppressesConstraint) {
  const double omega = 1.5 * kPi;
  const ProblemSpec p = Wedge{omega, WedgeBc::DD};
  const CollocationSet set = make_collocation(p, {}, 0);
  const MsnModel m = model({1.0, 0.5}, {0.8, 0.3}, {0.1, 3.0}, Angular::Sin);
  TrainSchedule sched;
  sched.warmup_epochs = 1000;
  sched.ramp_epochs = 1500;
  const LossWeights w{1.0, 100.0, 0.001, 10.0};
  const LossWeights no_con{1.0, 100.0, 0.001, 0.0};
  for (int epoch : {0, 500, 999}) {
    const LossBreakdown a = total_loss(m, p, set, w, {constraint_multiplier(epoch, sched)});
    const LossBreakdown b = total_loss(m, p, set, no_con);
    EXPECT_GT(a.constraint, 0.0);
    EXPECT_EQ(a.total, b.total);
    EXPECT_EQ(a.grad_raw, b.grad_raw);
  }
  const LossBreakdown late = total_loss(m, p, set, w, {constraint_multiplier(1750, sched)});
  const LossBreakdown base = total_loss(m, p, set, no_con);
  EXPECT_NEAR(late.total - base.total, 0.5 * 10.0 * late.constraint, 1e-12);
}

TEST(Total, BreakdownIdentityAndNonNegative) {
  std::mt19937_64 rng(3);
  for (const char* kind : {"supervised", "ode", "poisson", "wedge"}) {
    for (int i = 0; i < 10; ++i) {
      const oracle::GradientCase gc = oracle::random_case(kind, rng);
      const LossBreakdown lb = total_loss(gc.model, gc.problem, gc.set, gc.weights, {gc.multiplier});
      EXPECT_GE(lb.residual, 0.0);
      EXPECT_GE(lb.bc, 0.0);
      EXPECT_GE(lb.sparsity, 0.0);
      EXPECT_GE(lb.constraint, 0.0);
      const double expect = gc.weights.w_r * lb.residual + gc.weights.w_b * lb.bc + gc.weights.w_s * lb.sparsity +
                            gc.weights.w_con * gc.multiplier * lb.constraint;
      EXPECT_NEAR(lb.total, expect, 1e-12 * std::max(1.0, expect));
    }
  }
}

TEST(Total, PermutationInvariant) {
  std::mt19937_64 rng(4);
  for (const char* kind : {"supervised", "ode", "poisson", "wedge"}) {
    for (int i = 0; i < 10; ++i) {
      const oracle::GradientCase gc = oracle::random_case(kind, rng);
      const Eigen::Index K = gc.model.terms();
      Eigen::VectorXi perm(K);
      for (Eigen::Index k = 0; k < K; ++k) perm[k] = static_cast<int>(K - 1 - k);
      MsnModel shuffled = gc.model;
      for (Eigen::Index k = 0; k < K; ++k) {
        shuffled.raw[k] = gc.model.raw[perm[k]];
        shuffled.coeffs[k] = gc.model.coeffs[perm[k]];
      }
      const LossBreakdown a = total_loss(gc.model, gc.problem, gc.set, gc.weights, {gc.multiplier});
      const LossBreakdown b = total_loss(shuffled, gc.problem, gc.set, gc.weights, {gc.multiplier});
      EXPECT_NEAR(a.total, b.total, 1e-12 * std::max(1.0, a.total));
      for (Eigen::Index k = 0; k < K; ++k) {
        EXPECT_NEAR(a.grad_c[perm[k]], b.grad_c[k], 1e-10 * std::max(1.0, std::abs(a.grad_c[perm[k]])));
        EXPECT_NEAR(a.grad_raw[perm[k]], b.grad_raw[k], 1e-10 * std::max(1.0, std::abs(a.grad_raw[perm[k]])));
      }
    }
  }
}

class GradientProperty : public ::testing::TestWithParam<const char*> {};

TEST_P(GradientProperty, MatchesCentralDifferences) {
  std::uint64_t seed = 0;
  for (char ch : std::string(GetParam())) seed = seed * 131 + static_cast<unsigned char>(ch);
  std::mt19937_64 rng(seed);
  for (int i = 0; i < 100; ++i) {
    const oracle::GradientCase gc = oracle::random_case(GetParam(), rng);
    const oracle::GradientCheck c = oracle::check_gradient(gc);
    EXPECT_LT(c.value_rel, 1e-10) << "case " << i;
    EXPECT_LT(c.worst_rel, 1e-4) << "case " << i;
  }
}

INSTANTIATE_TEST_SUITE_P(AllProblems, GradientProperty, ::testing::Values("supervised", "ode", "poisson", "wedge"));
