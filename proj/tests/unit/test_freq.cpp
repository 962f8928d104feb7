#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "compctl/freq.hpp"
#include "compctl/search.hpp"
#include "compctl/sim.hpp"
#include "helpers.hpp"

namespace compctl {
namespace {

using testing::boeing;

struct BoeingLoops {
  LtiPlant plant = boeing();
  Controller h2 = synth_h2_ih(plant);
  Controller hinf =
      *optimize_hinf(plant, Causality::kCausal, std::nullopt).synthesis.controller;
  Controller comp =
      *optimize_competitive(plant, Causality::kCausal, std::nullopt).synthesis.controller;
};

const BoeingLoops& loops() {
  static const BoeingLoops l;
  return l;
}

// Steady-state response to w_t = Re(v e^{i omega t}) read off a long rollout
// and compared against T(e^{i omega}) v.
double time_domain_mismatch(const LtiPlant& p, const Controller& c, double omega) {
  const int n = p.state_dim();
  const int m = p.control_dim();
  const int pdim = p.disturbance_dim();
  const int steps = 3000;
  CVector v(pdim);
  for (int j = 0; j < pdim; ++j) v(j) = Complex(1.0 + j, 0.5 * j);
  std::vector<Vector> w(steps, Vector(pdim));
  for (int t = 0; t < steps; ++t) {
    w[t] = (v * std::polar(1.0, omega * t)).real();
  }
  const Trace tr = rollout(p, c, w);
  const CMatrix Tz = transfer_at(closed_loop(p, c), omega);
  const CVector y = Tz * v;
  const Matrix qs = psd_sqrt(p.Q);
  double worst = 0.0;
  for (int t = steps - 5; t < steps; ++t) {
    const CVector phase = y * std::polar(1.0, omega * t);
    const Vector s = qs * tr.steps[t].x;
    worst = std::max(worst, (s - phase.head(n).real()).norm());
    worst = std::max(worst, (tr.steps[t].u - phase.tail(m).real()).norm());
  }
  return worst / y.norm();
}

TEST(Transfer, ZeroControllerScalarHasUnitGain) {
  const LtiPlant p = testing::scalar(0, 1, 1, 1);
  const ClosedLoop loop = closed_loop(p, zero_controller(1, 1, 1));
  for (double omega : uniform_grid(16)) {
    EXPECT_NEAR(sigma_max(transfer_at(loop, omega)), 1.0, 1e-14);
  }
}

TEST(Transfer, StaticFeedbackMatchesHandFormula) {
  const LtiPlant& p = loops().plant;
  const Controller& c = loops().h2;
  const Matrix Acl = p.A - p.Bu * c.Kx[0];
  const Matrix Bcl = p.Bw - p.Bu * c.Kw[0];
  for (double omega : {0.0, 0.7, 2.0}) {
    const Complex z = std::polar(1.0, omega);
    const CMatrix X = (z * CMatrix::Identity(4, 4) - Acl.cast<Complex>())
                          .partialPivLu()
                          .solve(Bcl.cast<Complex>());
    CMatrix expected(6, 4);
    expected.topRows(4) = psd_sqrt(p.Q).cast<Complex>() * X;
    expected.bottomRows(2) = -c.Kx[0].cast<Complex>() * X - c.Kw[0].cast<Complex>();
    EXPECT_LT((transfer_at(closed_loop(p, c), omega) - expected).norm(),
              1e-12 * expected.norm());
  }
}

TEST(Transfer, CompetitiveLoopMatchesRollout) {
  for (double omega : {0.0, 0.5, 2.5}) {
    EXPECT_LT(time_domain_mismatch(loops().plant, loops().comp, omega), 1e-8) << omega;
  }
}

TEST(Transfer, HinfLoopMatchesRollout) {
  EXPECT_LT(time_domain_mismatch(loops().plant, loops().hinf, 1.3), 1e-8);
}

TEST(OfflineDensity, MatchesDirectFormula) {
  const LtiPlant& p = loops().plant;
  const double omega = 0.9;
  const Complex z = std::polar(1.0, omega);
  const CMatrix resolvent =
      (z * CMatrix::Identity(4, 4) - p.A.cast<Complex>()).inverse();
  const CMatrix F = resolvent * p.Bu.cast<Complex>();
  const CMatrix G = resolvent * p.Bw.cast<Complex>();
  const CMatrix N =
      G.adjoint() * (CMatrix::Identity(4, 4) + F * F.adjoint()).inverse() * G;
  EXPECT_LT((offline_density(p, omega) - N).norm(), 1e-10 * N.norm());
}

TEST(PerFreqCr, OfflineReferenceIsOne) {
  const FreqPoint pt = offline_freq_point(loops().plant, 1.0);
  EXPECT_EQ(pt.cr, 1.0);
}

TEST(PerFreqCr, BoeingH2IsFlat) {
  const LtiPlant& p = loops().plant;
  for (const auto& pt : sweep(p, closed_loop(p, loops().h2), uniform_grid(512))) {
    EXPECT_NEAR(pt.cr, 2.8, 0.15);
  }
}

TEST(PerFreqCr, BoeingHinfAndCompetitivePeaks) {
  const LtiPlant& p = loops().plant;
  const auto grid = uniform_grid(512);
  double hinf_max = 0.0, comp_max = 0.0;
  for (const auto& pt : sweep(p, closed_loop(p, loops().hinf), grid)) hinf_max = std::max(hinf_max, pt.cr);
  for (const auto& pt : sweep(p, closed_loop(p, loops().comp), grid)) comp_max = std::max(comp_max, pt.cr);
  EXPECT_NEAR(hinf_max, 43.3, 4.33);
  EXPECT_NEAR(comp_max, 1.77, 0.02);
  // The per-frequency ratio never exceeds the synthesized level.
  EXPECT_LE(comp_max, std::pow(*loops().comp.gamma, 2) + 1e-9);
}

TEST(PerFreqCr, CrEqualsRayleighQuotientMaximum) {
  // Brute-force the generalized Rayleigh quotient over random directions.
  const LtiPlant& p = loops().plant;
  const ClosedLoop loop = closed_loop(p, loops().comp);
  const double omega = 0.4;
  const CMatrix T = transfer_at(loop, omega);
  const CMatrix N = offline_density(p, omega);
  const double cr = per_freq_cr(p, loop, omega).cr;
  PhiloxStream rng(3);
  double best = 0.0;
  for (int k = 0; k < 2000; ++k) {
    CVector v(4);
    for (int j = 0; j < 4; ++j) v(j) = Complex(rng.normal(), rng.normal());
    const double q = (T * v).squaredNorm() / (v.adjoint() * N * v)(0).real();
    best = std::max(best, q);
  }
  EXPECT_LE(best, cr * (1 + 1e-9));
  EXPECT_GE(best, 0.9 * cr);
}

TEST(Sigma, HinfHasLowestPeak) {
  const LtiPlant& p = loops().plant;
  const auto grid = uniform_grid(512);
  auto peak = [&](const Controller& c) {
    double m = 0.0;
    for (const auto& pt : sweep(p, closed_loop(p, c), grid)) m = std::max(m, pt.sigma_max);
    return m;
  };
  const double hinf = peak(loops().hinf);
  EXPECT_LT(hinf, peak(loops().h2));
  EXPECT_LT(hinf, peak(loops().comp));
}

TEST(Sweep, ParallelMatchesSerial) {
  const LtiPlant& p = loops().plant;
  const ClosedLoop loop = closed_loop(p, loops().comp);
  const auto grid = uniform_grid(512);
  const auto a = sweep(p, loop, grid);
  const auto b = sweep_serial(p, loop, grid);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].sigma_max, b[i].sigma_max);
    EXPECT_EQ(a[i].cr, b[i].cr);
  }
}

TEST(Grid, EndpointsAndSize) {
  const auto g = uniform_grid(512);
  ASSERT_EQ(g.size(), 512u);
  EXPECT_EQ(g.front(), 0.0);
  EXPECT_DOUBLE_EQ(g.back(), std::numbers::pi);
}

TEST(Extremal, ScalarPlant) {
  const LtiPlant p = testing::scalar(0.5, 1, 1, 1);
  const ExtremalDc e = extremal_dc(p, synth_h2_ih(p));
  EXPECT_EQ(e.best(0), 1.0);
  EXPECT_EQ(e.worst(0), 1.0);
}

TEST(Extremal, BoeingDirectionsAreOrthonormal) {
  const ExtremalDc e = extremal_dc(loops().plant, loops().comp);
  EXPECT_NEAR(e.best.norm(), 1.0, 1e-12);
  EXPECT_NEAR(e.worst.norm(), 1.0, 1e-12);
  EXPECT_LT(std::abs(e.best.dot(e.worst)), 1e-8);
  EXPECT_LT(e.eigenvalues(0), e.eigenvalues(3));
}

}  // namespace
}  // namespace compctl
