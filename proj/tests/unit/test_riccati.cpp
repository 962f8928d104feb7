#include <gtest/gtest.h>

#include <cmath>

#include "compctl/riccati.hpp"
#include "compctl/rng.hpp"
#include "helpers.hpp"

namespace compctl {
namespace {

using testing::scalar;

// Positive root of P^2 - 0.25 P - 1 = 0 (scalar LQR with A = 0.5, B = Q = 1).
const double kScalarLqr = (0.25 + std::sqrt(0.0625 + 4.0)) / 2.0;

Matrix oracle_step(const Matrix& A, const Matrix& B, const Matrix& R,
                   const Matrix& Q, const Matrix& P) {
  const Matrix H = R + B.transpose() * P * B;
  return Q + A.transpose() * P * A -
         A.transpose() * P * B * H.inverse() * B.transpose() * P * A;
}

TEST(HinfBackward, SingleStageScalar) {
  const RiccatiSchedule s = hinf_backward(promote(scalar(0, 1, 1, 1), 1), 1.0);
  ASSERT_EQ(s.P.size(), 2u);
  EXPECT_DOUBLE_EQ(s.P[1](0, 0), 0.0);
  EXPECT_DOUBLE_EQ(s.P[0](0, 0), 1.0);
  EXPECT_TRUE(s.causal.feasible);
  EXPECT_DOUBLE_EQ(s.causal_lhs[0], 0.0);
}

TEST(HinfBackward, LargeGammaApproachesLqr) {
  const RiccatiSchedule s = hinf_backward(promote(scalar(0.5, 1, 1, 1), 200), 1e6);
  ASSERT_TRUE(s.causal.feasible);
  EXPECT_NEAR(s.P[0](0, 0), kScalarLqr, 1e-6);
}

TEST(HinfBackward, MatchesIndependentRecursion) {
  const LtvPlant plant = random_ltv_plant(4, 3, 2, 2, 8);
  const double gamma = 50.0;
  const RiccatiSchedule s = hinf_backward(plant, gamma);
  ASSERT_TRUE(s.causal.feasible) << s.causal.detail;
  Matrix P = Matrix::Zero(3, 3);
  for (int t = plant.horizon() - 1; t >= 0; --t) {
    Matrix Bt(3, 4);
    Bt << plant.Bu[t], plant.Bw[t];
    P = oracle_step(plant.A[t], Bt, game_weight(2, 2, gamma), plant.Q[t], P);
    EXPECT_LT(testing::rel_err(s.P[t], P), 1e-10) << "t=" << t;
  }
}

TEST(HinfBackward, FeasibilityIsMonotoneInGamma) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const LtvPlant plant = promote(random_plant(seed, 2, 1, 2), 15);
    bool seen_feasible = false;
    for (double g = 0.25; g < 200.0; g *= 1.5) {
      const bool ok = hinf_backward(plant, g).causal.feasible;
      if (seen_feasible) EXPECT_TRUE(ok) << "seed " << seed << " gamma " << g;
      seen_feasible = seen_feasible || ok;
    }
    EXPECT_TRUE(seen_feasible);
  }
}

TEST(HinfBackward, TinyGammaIsInfeasible) {
  const RiccatiSchedule s = hinf_backward(promote(testing::boeing(), 10), 1e-3);
  EXPECT_FALSE(s.causal.feasible);
  EXPECT_GE(s.causal.timestep, 0);
}

TEST(Dare, ScalarLqr) {
  const Matrix A = Matrix::Constant(1, 1, 0.5);
  const Matrix B = Matrix::Ones(1, 1);
  const auto fp = dare_fixed_point(A, B, Matrix::Identity(1, 1), Matrix::Ones(1, 1));
  ASSERT_TRUE(fp.verdict.feasible);
  EXPECT_NEAR(fp.P(0, 0), kScalarLqr, 1e-12);
  EXPECT_TRUE(fp.stable);
  EXPECT_TRUE(fp.psd);
}

TEST(Dare, ZeroCostGivesZeroSolution) {
  PhiloxStream rng(2);
  const Matrix A = 0.6 * Matrix::Identity(3, 3);
  const Matrix B = random_normal_matrix(rng, 3, 2);
  const auto fp = dare_fixed_point(A, B, Matrix::Identity(2, 2), Matrix::Zero(3, 3));
  ASSERT_TRUE(fp.verdict.feasible);
  EXPECT_LT(fp.P.norm(), 1e-14);
}

TEST(Dare, DoublingMatchesIteration) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const LtiPlant p = random_plant(seed, 3, 2, 2, 0.9);
    Matrix Bt(3, 4);
    Bt << p.Bu, p.Bw;
    const Matrix R = game_weight(2, 2, 20.0);
    DareOptions it;
    it.method = DareMethod::kIteration;
    const auto a = dare_fixed_point(p.A, Bt, R, p.Q);
    const auto b = dare_fixed_point(p.A, Bt, R, p.Q, it);
    ASSERT_TRUE(a.verdict.feasible) << seed;
    ASSERT_TRUE(b.verdict.feasible) << seed;
    EXPECT_LT(testing::rel_err(a.P, b.P), 1e-9) << seed;
    // Residual against an independent one-step evaluation.
    const Matrix next = oracle_step(p.A, Bt, R, p.Q, a.P);
    EXPECT_LT(testing::rel_err(next, a.P), 1e-9) << seed;
    EXPECT_EQ(a.htilde_inertia, (Inertia{2, 2, 0}));
  }
}

TEST(Dare, TinyGammaFailsWithVerdict) {
  const LtiPlant p = testing::boeing();
  Matrix Bt(4, 6);
  Bt << p.Bu, p.Bw;
  const auto fp = dare_fixed_point(p.A, Bt, game_weight(2, 4, 1e-4), p.Q);
  EXPECT_FALSE(fp.verdict.feasible);
  EXPECT_NE(fp.verdict.reason, Reason::kNone);
}

TEST(Dare, ResidualHelperAgreesWithOracle) {
  const Matrix A = Matrix::Constant(1, 1, 0.5);
  const Matrix B = Matrix::Ones(1, 1);
  const Matrix P = Matrix::Constant(1, 1, 2.0);
  const Matrix next = oracle_step(A, B, Matrix::Identity(1, 1), Matrix::Ones(1, 1), P);
  EXPECT_NEAR(riccati_residual(A, B, Matrix::Identity(1, 1), Matrix::Ones(1, 1), P),
              std::abs(next(0, 0) - 2.0) / 2.0, 1e-15);
}

TEST(Reason, NamesAreStable) {
  EXPECT_EQ(to_string(Reason::kNoStabilizingSolution), "no-stabilizing-solution");
  EXPECT_EQ(to_string(Reason::kSingularHtilde), "singular-Htilde");
}

}  // namespace
}  // namespace compctl
