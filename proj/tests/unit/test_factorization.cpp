#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "compctl/controllers.hpp"
#include "compctl/factorization.hpp"
#include "compctl/rng.hpp"
#include "helpers.hpp"

namespace compctl {
namespace {

using testing::gaussian_sequence;
using testing::scalar;

// |Delta(z) Delta(z)* - (I + F(z)F(z)*)| / |I + FF*| with F computed directly.
double spectral_identity_error(const LtiPlant& p, const SpectralFactor& f,
                               double omega) {
  const int n = p.state_dim();
  const Complex z = std::polar(1.0, omega);
  const CMatrix F = psd_sqrt(p.Q).cast<Complex>() *
                    (z * CMatrix::Identity(n, n) - p.A.cast<Complex>())
                        .partialPivLu()
                        .solve(p.Bu.cast<Complex>());
  const CMatrix target = CMatrix::Identity(n, n) + F * F.adjoint();
  const CMatrix d = delta_at(p, f, z);
  return (d * d.adjoint() - target).norm() / target.norm();
}

TEST(Whitening, SingleStage) {
  const LtvPlant plant = promote(scalar(0.7, 1, 1, 2), 1);
  const WhiteningSchedule ws = whitening_fh(plant);
  ASSERT_EQ(ws.horizon(), 1);
  EXPECT_DOUBLE_EQ(ws.Sigma[0](0, 0), 1.0);
  EXPECT_DOUBLE_EQ(ws.K[0](0, 0), 0.0);
  EXPECT_DOUBLE_EQ(dense_delta(ws, plant)(0, 0), 1.0);
}

TEST(Whitening, ScalarTwoStageByHand) {
  const LtvPlant plant = promote(scalar(1, 1, 1, 1), 2);
  const WhiteningSchedule ws = whitening_fh(plant);
  EXPECT_DOUBLE_EQ(ws.Sigma[0](0, 0), 1.0);
  EXPECT_DOUBLE_EQ(ws.Sigma[1](0, 0), 2.0);
  EXPECT_DOUBLE_EQ(ws.K[0](0, 0), 0.0);
  EXPECT_DOUBLE_EQ(ws.K[1](0, 0), 0.5);
  const Matrix d = dense_delta(ws, plant);
  EXPECT_NEAR(d(0, 0), 1.0, 1e-15);
  EXPECT_NEAR(d(1, 1), std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(d(0, 1), 0.0, 1e-15);
  EXPECT_NEAR(d(1, 0), 0.0, 1e-15);
}

TEST(Whitening, DenseIdentityOnRandomPlants) {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    const int n = 1 + static_cast<int>(seed % 4);
    const int T = 2 + static_cast<int>(seed % 19);
    const LtvPlant plant = random_ltv_plant(seed, n, 1 + seed % 2, 2, T);
    const WhiteningSchedule ws = whitening_fh(plant);
    ASSERT_TRUE(ws.verdict.feasible);
    const auto ops = build_dense_operators(plant);
    const Matrix target = Matrix::Identity(n * T, n * T) + ops.F * ops.F.transpose();
    const Matrix d = dense_delta(ws, plant);
    EXPECT_LT(testing::rel_err(d * d.transpose(), target), 1e-8) << seed;
    // Causal: block lower triangular.
    for (int i = 0; i < T; ++i) {
      for (int j = i + 1; j < T; ++j) {
        EXPECT_EQ(d.block(i * n, j * n, n, n).norm(), 0.0);
      }
    }
  }
}

TEST(SpectralFactor, ZeroCost) {
  LtiPlant p = random_plant(3, 3, 2, 1, 0.8);
  p.Q.setZero();
  const SpectralFactor f = spectral_factor_ih(p);
  ASSERT_TRUE(f.verdict.feasible);
  // With no output to whiten, P is the controllability Gramian of (A, Bu).
  const Matrix gram = p.A * f.P * p.A.transpose() + p.Bu * p.Bu.transpose();
  EXPECT_LT(testing::rel_err(gram, f.P), 1e-10);
  EXPECT_LT((f.Sigma - Matrix::Identity(3, 3)).norm(), 1e-12);
  EXPECT_LT(f.K.norm(), 1e-12);
  const CMatrix d = delta_at(p, f, std::polar(1.0, 0.3));
  EXPECT_LT((d - CMatrix::Identity(3, 3)).norm(), 1e-12);
}

TEST(SpectralFactor, ScalarRootAndIdentity) {
  const LtiPlant p = scalar(0.5, 1, 1, 1);
  // P = 0.25 P + 1 - 0.25 P^2 / (1 + P), solved by bisection on [0, 10].
  auto g = [](double P) { return 0.25 * P + 1.0 - 0.25 * P * P / (1.0 + P) - P; };
  double lo = 0.0, hi = 10.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (g(mid) > 0 ? lo : hi) = mid;
  }
  const SpectralFactor f = spectral_factor_ih(p);
  ASSERT_TRUE(f.verdict.feasible);
  EXPECT_NEAR(f.P(0, 0), lo, 1e-12);
  for (double omega : {0.0, std::numbers::pi / 2, std::numbers::pi}) {
    EXPECT_LT(spectral_identity_error(p, f, omega), 1e-12);
  }
}

TEST(SpectralFactor, BoeingIdentityAcrossFrequencies) {
  const LtiPlant p = testing::boeing();
  const SpectralFactor f = spectral_factor_ih(p);
  ASSERT_TRUE(f.verdict.feasible);
  EXPECT_LT(f.whitening_radius, 1.0);
  for (int k = 0; k < 256; ++k) {
    EXPECT_LT(spectral_identity_error(p, f, std::numbers::pi * k / 255.0), 1e-7);
  }
}

TEST(SpectralFactor, RandomPlantsIdentity) {
  for (std::uint64_t seed = 100; seed < 110; ++seed) {
    const LtiPlant p = random_plant(seed, 1 + seed % 4, 1 + seed % 3, 2, 1.05);
    const SpectralFactor f = spectral_factor_ih(p);
    ASSERT_TRUE(f.verdict.feasible) << seed;
    for (int k = 0; k < 64; ++k) {
      EXPECT_LT(spectral_identity_error(p, f, std::numbers::pi * k / 63.0), 1e-7);
    }
  }
}

TEST(SpectralFactor, RejectsUndetectablePlant) {
  // Unstable mode invisible to Q.
  Matrix A(2, 2);
  A << 1.5, 0, 0, 0.5;
  Matrix Q = Matrix::Zero(2, 2);
  Q(1, 1) = 1.0;
  const LtiPlant p = normalize_control_weight(A, Matrix::Identity(2, 2),
                                              Matrix::Identity(2, 2), Q);
  EXPECT_FALSE(is_detectable(A, psd_sqrt(Q)));
  EXPECT_THROW(spectral_factor_ih(p), std::invalid_argument);
}

TEST(Pbh, Stabilizability) {
  Matrix A(2, 2);
  A << 2.0, 0, 0, 0.5;
  Matrix B(2, 1);
  B << 0, 1;
  EXPECT_FALSE(is_stabilizable(A, B));
  B << 1, 0;
  EXPECT_TRUE(is_stabilizable(A, B));
}

TEST(Synthetic, ScalarBlocks) {
  const LtvPlant plant = promote(scalar(1, 1, 1, 1), 1);
  const SyntheticSystem s = build_synthetic(plant, whitening_fh(plant));
  Matrix A(2, 2);
  A << 1, 0, 0, 0;
  EXPECT_EQ(s.A[0], A);
  EXPECT_LT((s.Q[0] - Matrix::Ones(2, 2)).norm(), 1e-15);
}

TEST(Synthetic, BoeingDimensions) {
  const LtiPlant p = testing::boeing();
  const SyntheticSystem s = build_synthetic(p, spectral_factor_ih(p));
  EXPECT_EQ(s.A[0].rows(), 8);
  EXPECT_EQ(s.Bu[0].cols(), 2);
  EXPECT_EQ(s.Bw[0].cols(), 4);
}

TEST(Synthetic, CostMatrixIsPsdWithRankAtMostN) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const LtiPlant p = random_plant(seed, 3, 2, 2);
    const SyntheticSystem s = build_synthetic(p, spectral_factor_ih(p));
    Eigen::SelfAdjointEigenSolver<Matrix> es(s.Q[0]);
    EXPECT_GE(es.eigenvalues().minCoeff(), -1e-10);
    int rank = 0;
    const double top = es.eigenvalues().maxCoeff();
    for (int i = 0; i < 6; ++i) rank += es.eigenvalues()(i) > 1e-10 * top;
    EXPECT_LE(rank, 3);
  }
}

TEST(WPrime, StartsAtZero) {
  const LtiPlant p = testing::boeing();
  WPrimeFilter f(spectral_factor_ih(p), p.Bw);
  EXPECT_EQ(f.current().norm(), 0.0);
}

TEST(WPrime, ScalarOneStep) {
  const LtvPlant plant = promote(scalar(1, 1, 1, 1), 2);
  WPrimeFilter f(whitening_fh(plant), plant);
  const Vector next = f.step(Vector::Constant(1, 3.0));
  EXPECT_NEAR(next(0), 3.0 / std::sqrt(2.0), 1e-15);
}

TEST(WPrime, EnergyEqualsOfflineOptimum) {
  PhiloxStream rng(77);
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const LtvPlant plant = random_ltv_plant(seed, 3, 2, 2, 12);
    const auto ops = build_dense_operators(plant);
    const auto w = gaussian_sequence(rng, 12, 2);
    WPrimeFilter f(whitening_fh(plant), plant);
    const double energy = stack(f.run(w)).squaredNorm();
    const double opt = offline_cost_dense(ops, stack(w));
    EXPECT_NEAR(energy, opt, 1e-8 * opt) << seed;
  }
}

TEST(WPrime, StrictCausalityPairedRuns) {
  PhiloxStream rng(5);
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const int T = 15;
    const LtvPlant plant = random_ltv_plant(seed, 3, 1, 2, T);
    const WhiteningSchedule ws = whitening_fh(plant);
    auto w = gaussian_sequence(rng, T, 2);
    const int t = static_cast<int>(seed % (T - 1));
    WPrimeFilter a(ws, plant);
    const auto base = a.run(w);
    for (int s = t + 1; s < T; ++s) w[s] = 100.0 * gaussian_sequence(rng, 1, 2)[0];
    WPrimeFilter b(ws, plant);
    const auto pert = b.run(w);
    for (int s = 0; s <= t + 1; ++s) {
      EXPECT_EQ(base[s], pert[s]) << "seed " << seed << " s " << s;
    }
  }
}

TEST(WPrime, RetargetKeepsState) {
  const LtiPlant p1 = scalar(0.5, 1, 1, 1);
  const LtiPlant p2 = scalar(0.9, 1, 1, 1);
  WPrimeFilter a(spectral_factor_ih(p1), p1.Bw);
  const WPrimeFilter b(spectral_factor_ih(p2), p2.Bw);
  a.step(Vector::Ones(1));
  const Vector nu = a.state();
  a.retarget(b);
  EXPECT_EQ(a.state(), nu);
  EXPECT_EQ(a.time(), 1);
  EXPECT_EQ(a.transition(0), b.transition(0));
}

}  // namespace
}  // namespace compctl
