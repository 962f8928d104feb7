#include <gtest/gtest.h>

#include <cmath>

#include "compctl/controllers.hpp"
#include "compctl/rng.hpp"
#include "compctl/search.hpp"
#include "compctl/sim.hpp"
#include "helpers.hpp"

namespace compctl {
namespace {

using testing::boeing;
using testing::gaussian_sequence;
using testing::scalar;

const double kScalarLqr = (0.25 + std::sqrt(0.0625 + 4.0)) / 2.0;

// Brute-force offline optimum: least squares over u of |[s; u]|^2 with the
// trajectory built column by column from unit inputs.
double brute_force_opt(const LtvPlant& plant, std::span<const Vector> w) {
  const int T = plant.horizon();
  const int m = plant.control_dim();
  std::vector<Vector> zero_u(T, Vector::Zero(m));
  auto outputs = [&](std::span<const Vector> u) {
    Vector out(T * plant.state_dim() + T * m);
    Vector x = plant.initial_state();
    const int n = plant.state_dim();
    for (int t = 0; t < T; ++t) {
      out.segment(t * n, n) = psd_sqrt(plant.Q[t]) * x;
      out.segment(T * n + t * m, m) = u[t];
      x = plant.A[t] * x + plant.Bu[t] * u[t] + plant.Bw[t] * w[t];
    }
    return out;
  };
  const Vector base = outputs(zero_u);
  Matrix M(base.size(), T * m);
  std::vector<Vector> unit = zero_u;
  for (int k = 0; k < T * m; ++k) {
    unit[k / m](k % m) = 1.0;
    M.col(k) = outputs(unit) - base;
    unit[k / m](k % m) = 0.0;
  }
  const Vector u = M.colPivHouseholderQr().solve(-base);
  return (M * u + base).squaredNorm();
}

TEST(H2, ZeroCostGivesZeroGain) {
  LtiPlant p = random_plant(1, 3, 2, 2, 0.7);
  p.Q.setZero();
  const Controller c = synth_h2_ih(p);
  EXPECT_LT(c.Kx[0].norm(), 1e-14);
  EXPECT_LT(c.Kw[0].norm(), 1e-14);
}

TEST(H2, ScalarGain) {
  const Controller c = synth_h2_ih(scalar(0.5, 1, 1, 1), Causality::kStrictlyCausal);
  EXPECT_NEAR(c.Kx[0](0, 0), kScalarLqr * 0.5 / (1 + kScalarLqr), 1e-12);
  EXPECT_NEAR(c.Kx[0](0, 0), 0.2657, 2e-4);
  EXPECT_FALSE(c.gamma.has_value());
}

TEST(H2, BoeingClosedLoopIsStable) {
  const LtiPlant p = boeing();
  const Controller c = synth_h2_ih(p);
  EXPECT_LT(spectral_radius(p.A - p.Bu * c.Kx[0]), 1.0);
}

TEST(Hinf, LargeGammaMatchesLqr) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const LtiPlant p = random_plant(seed, 3, 2, 2);
    const Controller h2 = synth_h2_ih(p);
    const SynthesisResult h = synth_hinf(p, 1e6, Causality::kCausal, std::nullopt);
    ASSERT_TRUE(h.feasible()) << seed;
    EXPECT_LT((h.controller->Kx[0] - h2.Kx[0]).cwiseAbs().maxCoeff(), 1e-4);
    EXPECT_LT((h.controller->Kw[0] - h2.Kw[0]).cwiseAbs().maxCoeff(), 1e-4);
  }
}

TEST(Hinf, SingleStageScalarGivesZeroControl) {
  const LtvPlant plant = promote(scalar(0, 1, 1, 1), 1);
  const SynthesisResult h = synth_hinf(plant, 1.0, Causality::kCausal);
  ASSERT_TRUE(h.feasible());
  ControllerState st = initial_state(*h.controller);
  const Vector u = control_step(*h.controller, st, Vector::Ones(1), Vector::Ones(1));
  EXPECT_EQ(u(0), 0.0);
}

TEST(Hinf, CausalControlMatchesClosedForm) {
  const LtiPlant p = boeing();
  const double gamma = 30.0;
  const SynthesisResult h = synth_hinf(p, gamma, Causality::kCausal, std::nullopt);
  ASSERT_TRUE(h.feasible());
  Matrix Bt(4, 6);
  Bt << p.Bu, p.Bw;
  const Matrix P = dare_fixed_point(p.A, Bt, game_weight(2, 4, gamma), p.Q).P;
  const Matrix H = Matrix::Identity(2, 2) + p.Bu.transpose() * P * p.Bu;
  PhiloxStream rng(3);
  ControllerState st = initial_state(*h.controller);
  for (int t = 0; t < 5; ++t) {
    const Vector x = gaussian_sequence(rng, 1, 4)[0];
    const Vector w = gaussian_sequence(rng, 1, 4)[0];
    const Vector expected = -H.inverse() * p.Bu.transpose() * P * (p.A * x + p.Bw * w);
    const Vector u = control_step(*h.controller, st, x, w);
    EXPECT_LT((u - expected).norm(), 1e-9 * (1 + expected.norm()));
  }
}

TEST(Hinf, BoeingCostBoundAboveOptimum) {
  const LtiPlant p = boeing();
  const GammaOptimum opt = optimize_hinf(p, Causality::kCausal, std::nullopt);
  ASSERT_TRUE(opt.search.found);
  const double gamma = opt.search.gamma * 1.01;
  const SynthesisResult h = synth_hinf(p, gamma, Causality::kCausal, std::nullopt);
  ASSERT_TRUE(h.feasible());
  PhiloxStream rng(12);
  for (int k = 0; k < 20; ++k) {
    const auto w = gaussian_sequence(rng, 200, 4);
    const Trace tr = rollout(p, *h.controller, w);
    EXPECT_LT(tr.total_cost, gamma * gamma * stack(w).squaredNorm());
  }
}

TEST(Competitive, BoeingBracket) {
  const LtiPlant p = boeing();
  // The bisection optimum is 1.3312, so 1.33 itself sits just below it.
  EXPECT_TRUE(synth_competitive(p, 1.335, Causality::kCausal, std::nullopt).feasible());
  EXPECT_FALSE(synth_competitive(p, 1.30, Causality::kCausal, std::nullopt).feasible());
  EXPECT_FALSE(synth_competitive(p, 1.20, Causality::kCausal, std::nullopt).feasible());
}

TEST(Competitive, BoeingFiniteHorizonFeasibleAboveOptimum) {
  const SynthesisResult r =
      synth_competitive(promote(boeing(), 50), 1.335, Causality::kCausal);
  EXPECT_TRUE(r.feasible()) << to_string(r.verdict.reason);
}

TEST(Competitive, ZeroCostPlantNeverActs) {
  LtiPlant p = random_plant(4, 2, 1, 2, 0.8);
  p.Q.setZero();
  const SynthesisResult r = synth_competitive(promote(p, 20), 1.5, Causality::kCausal);
  ASSERT_TRUE(r.feasible());
  PhiloxStream rng(1);
  const auto w = gaussian_sequence(rng, 20, 2);
  const Trace tr = rollout(promote(p, 20), *r.controller, w);
  EXPECT_EQ(tr.total_cost, 0.0);
  for (const auto& s : tr.steps) EXPECT_EQ(s.u.norm(), 0.0);
}

TEST(Competitive, RatioBoundOnRandomScalarPlant) {
  const LtiPlant p = random_plant(9, 1, 1, 1, 0.9);
  const int T = 100;
  const GammaOptimum opt = optimize_competitive(p, Causality::kCausal, T);
  ASSERT_TRUE(opt.search.found);
  const double gamma = 1.05 * opt.search.gamma;
  const LtvPlant plant = promote(p, T);
  const SynthesisResult r = synth_competitive(plant, gamma, Causality::kCausal);
  ASSERT_TRUE(r.feasible());
  const auto ops = build_dense_operators(plant);
  PhiloxStream rng(33);
  for (int k = 0; k < 50; ++k) {
    const auto w = gaussian_sequence(rng, T, 1);
    const double alg = rollout(plant, *r.controller, w).total_cost;
    EXPECT_LE(alg / offline_cost_dense(ops, stack(w)), gamma * gamma);
  }
}

TEST(Competitive, StrictlyCausalFirstControlIsZero) {
  const LtiPlant p = boeing();
  const GammaOptimum opt =
      optimize_competitive(p, Causality::kStrictlyCausal, std::nullopt);
  ASSERT_TRUE(opt.search.found);
  const SynthesisResult& r = opt.synthesis;
  ASSERT_TRUE(r.feasible()) << to_string(r.verdict.reason);
  ControllerState st = initial_state(*r.controller);
  const Vector u = control_step(*r.controller, st, Vector::Zero(4), Vector::Ones(4));
  EXPECT_EQ(u.norm(), 0.0);
  EXPECT_EQ(r.controller->diagnostics.extra_condition, "condition-untestable");
}

TEST(Competitive, StrictlyCausalNeedsLargerGamma) {
  const LtiPlant p = random_plant(6, 2, 1, 2);
  const auto causal = optimize_competitive(p, Causality::kCausal, std::nullopt);
  const auto strict = optimize_competitive(p, Causality::kStrictlyCausal, std::nullopt);
  ASSERT_TRUE(causal.search.found);
  ASSERT_TRUE(strict.search.found);
  EXPECT_GE(strict.search.gamma, causal.search.gamma - 2e-3);
}

TEST(Zero, AlwaysZero) {
  const Controller c = zero_controller(2, 1, 2);
  ControllerState st = initial_state(c);
  for (int t = 0; t < 3; ++t) {
    EXPECT_EQ(control_step(c, st, Vector::Ones(2), Vector::Ones(2)).norm(), 0.0);
  }
}

TEST(Offline, ZeroDisturbance) {
  const LtvPlant plant = promote(boeing(), 5);
  const std::vector<Vector> w(5, Vector::Zero(4));
  const OfflineSolution s = offline_optimal(plant, w);
  EXPECT_EQ(s.cost, 0.0);
  for (const auto& u : s.u) EXPECT_EQ(u.norm(), 0.0);
}

TEST(Offline, ScalarTwoStep) {
  const LtvPlant plant = promote(scalar(0, 1, 1, 1), 2);
  const std::vector<Vector> w{Vector::Ones(1), Vector::Zero(1)};
  for (OfflineRoute route : {OfflineRoute::kDense, OfflineRoute::kSweep}) {
    const OfflineSolution s = offline_optimal(plant, w, route);
    EXPECT_NEAR(s.u[0](0), -0.5, 1e-14);
    EXPECT_NEAR(s.u[1](0), 0.0, 1e-14);
    EXPECT_NEAR(s.cost, 0.5, 1e-14);
  }
}

TEST(Offline, MatchesBruteForce) {
  PhiloxStream rng(8);
  for (std::uint64_t seed = 1; seed <= 15; ++seed) {
    const LtvPlant plant = random_ltv_plant(seed, 1 + seed % 3, 1 + seed % 2, 2, 12);
    const auto w = gaussian_sequence(rng, 12, 2);
    const double bf = brute_force_opt(plant, w);
    const OfflineSolution dense = offline_optimal(plant, w, OfflineRoute::kDense);
    const OfflineSolution sweep = offline_optimal(plant, w, OfflineRoute::kSweep);
    EXPECT_NEAR(dense.cost, bf, 1e-8 * std::max(1.0, bf)) << seed;
    EXPECT_NEAR(sweep.cost, bf, 1e-8 * std::max(1.0, bf)) << seed;
    EXPECT_NEAR(simulate_cost(plant, dense.u, w), dense.cost, 1e-8 * std::max(1.0, bf));
  }
}

TEST(Offline, NonzeroInitialStateUsesSweep) {
  LtvPlant plant = random_ltv_plant(3, 3, 2, 2, 10);
  plant.x0 = Vector::Ones(3);
  PhiloxStream rng(4);
  const auto w = gaussian_sequence(rng, 10, 2);
  const OfflineSolution s = offline_optimal(plant, w);
  EXPECT_EQ(s.route, OfflineRoute::kSweep);
  const double bf = brute_force_opt(plant, w);
  EXPECT_NEAR(s.cost, bf, 1e-8 * std::max(1.0, bf));
  EXPECT_THROW(offline_optimal(plant, w, OfflineRoute::kDense), std::invalid_argument);
}

TEST(Offline, TrackingSolverMatchesFirstControl) {
  const LtiPlant p = random_plant(5, 2, 1, 1);
  const LtiTrackingSolver solver(p, 30);
  PhiloxStream rng(6);
  for (int L : {1, 7, 30}) {
    const auto w = gaussian_sequence(rng, L, 1);
    const Vector x0 = gaussian_sequence(rng, 1, 2)[0];
    LtvPlant plant = promote(p, L);
    plant.x0 = x0;
    const OfflineSolution s = offline_optimal(plant, w, OfflineRoute::kSweep);
    EXPECT_LT((solver.first_control(x0, w) - s.u[0]).norm(), 1e-10) << L;
  }
}

TEST(Names, ParseRoundTrip) {
  for (auto k : {ControllerKind::kH2, ControllerKind::kHinf, ControllerKind::kCompetitive,
                 ControllerKind::kOffline, ControllerKind::kZero}) {
    EXPECT_EQ(parse_controller_kind(to_string(k)), k);
  }
  EXPECT_EQ(parse_causality("strict"), Causality::kStrictlyCausal);
  EXPECT_THROW(parse_controller_kind("pid"), std::invalid_argument);
}

}  // namespace
}  // namespace compctl
