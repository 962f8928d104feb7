#include "verify.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "compctl/controllers.hpp"
#include "compctl/factorization.hpp"
#include "compctl/rng.hpp"
#include "compctl/search.hpp"
#include "compctl/sim.hpp"

namespace compctl::tools {
namespace {

std::vector<Vector> random_sequence(PhiloxStream& rng, int T, int dim) {
  std::vector<Vector> out(T, Vector(dim));
  for (auto& v : out) {
    for (int j = 0; j < dim; ++j) v(j) = rng.normal();
  }
  return out;
}

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(3);
  s << std::scientific << v;
  return s.str();
}

PropertyResult check(std::string name, double error, double tol) {
  PropertyResult r;
  r.name = std::move(name);
  r.passed = error <= tol;
  r.detail = "error " + fmt(error) + " (tol " + fmt(tol) + ")";
  return r;
}

double rel(double a, double b) { return std::abs(a - b) / std::max(1e-300, std::abs(b)); }

}  // namespace

std::vector<PropertyResult> verify_plant(const LtiPlant& lti_in, int T,
                                         std::uint64_t seed) {
  std::vector<PropertyResult> out;
  LtiPlant lti = lti_in;
  lti.x0 = Vector();
  const LtvPlant plant = promote(lti, T);
  const int n = plant.state_dim();
  const int m = plant.control_dim();
  const int p = plant.disturbance_dim();
  PhiloxStream rng(seed, 7);
  const DenseOperators ops = build_dense_operators(plant);

  {
    double worst = 0.0;
    for (int k = 0; k < 5; ++k) {
      const auto u = random_sequence(rng, T, m);
      const auto w = random_sequence(rng, T, p);
      Vector s = ops.F * stack(u) + ops.G * stack(w);
      Vector x = Vector::Zero(n);
      Vector sim(n * T);
      const Matrix qs = psd_sqrt(lti.Q);
      for (int t = 0; t < T; ++t) {
        sim.segment(t * n, n) = qs * x;
        x = lti.A * x + lti.Bu * u[t] + lti.Bw * w[t];
      }
      worst = std::max(worst, (s - sim).norm() / std::max(1.0, sim.norm()));
    }
    out.push_back(check("dense-operators", worst, 1e-10));
  }

  const WhiteningSchedule ws = whitening_fh(plant);
  {
    const Matrix delta = dense_delta(ws, plant);
    const Matrix target =
        Matrix::Identity(n * T, n * T) + ops.F * ops.F.transpose();
    out.push_back(check("whitening-identity",
                        (delta * delta.transpose() - target).norm() / target.norm(),
                        1e-8));
  }

  {
    PropertyResult r;
    r.name = "spectral-identity";
    try {
      const SpectralFactor f = spectral_factor_ih(lti);
      if (!f.verdict.feasible) {
        r.detail = "factorization failed: " + std::string(to_string(f.verdict.reason));
      } else {
        const Matrix qs = psd_sqrt(lti.Q);
        double worst = 0.0;
        for (int k = 0; k < 64; ++k) {
          const double omega = std::numbers::pi * k / 63.0;
          const Complex z = std::polar(1.0, omega);
          const CMatrix d = delta_at(lti, f, z);
          const CMatrix F = qs.cast<Complex>() *
                            (z * CMatrix::Identity(n, n) - lti.A.cast<Complex>())
                                .partialPivLu()
                                .solve(lti.Bu.cast<Complex>());
          const CMatrix target = CMatrix::Identity(n, n) + F * F.adjoint();
          worst = std::max(worst, (d * d.adjoint() - target).norm() / target.norm());
        }
        r = check("spectral-identity", worst, 1e-7);
      }
    } catch (const std::exception& e) {
      r.skipped = true;
      r.passed = true;
      r.detail = std::string("skipped: ") + e.what();
    }
    out.push_back(r);
  }

  {
    const auto w = random_sequence(rng, T, p);
    WPrimeFilter filter(ws, plant);
    const auto wp = filter.run(w);
    const Vector b = ops.G * stack(w);
    const double target = offline_cost_dense(ops, stack(w));
    out.push_back(check("wprime-energy", rel(stack(wp).squaredNorm(), target), 1e-8));
    (void)b;
  }

  {
    double changed = 0.0;
    for (int k = 0; k < 5; ++k) {
      auto w = random_sequence(rng, T, p);
      const int t = static_cast<int>(rng.uniform() * (T - 1));
      WPrimeFilter a(ws, plant);
      const auto base = a.run(w);
      for (int s = t + 1; s < T; ++s) w[s] = random_sequence(rng, 1, p)[0];
      WPrimeFilter b(ws, plant);
      const auto pert = b.run(w);
      for (int s = 0; s <= t + 1 && s < T; ++s) {
        changed = std::max(changed, (base[s] - pert[s]).cwiseAbs().maxCoeff());
      }
    }
    out.push_back(check("strict-causality", changed, 0.0));
  }

  {
    double worst = 0.0;
    double route_gap = 0.0;
    for (int k = 0; k < 5; ++k) {
      const auto w = random_sequence(rng, T, p);
      const OfflineSolution dense = offline_optimal(plant, w, OfflineRoute::kDense);
      const OfflineSolution sweep = offline_optimal(plant, w, OfflineRoute::kSweep);
      // Brute force: least squares on [F; I] u = [-G w; 0].
      const Eigen::Index rows = ops.F.rows() + ops.F.cols();
      Matrix stacked(rows, ops.F.cols());
      stacked << ops.F, Matrix::Identity(ops.F.cols(), ops.F.cols());
      Vector rhs = Vector::Zero(rows);
      rhs.head(ops.F.rows()) = -ops.G * stack(w);
      const Vector u = stacked.colPivHouseholderQr().solve(rhs);
      const double ls = (stacked * u - rhs).squaredNorm();
      worst = std::max(worst, rel(dense.cost, ls));
      route_gap = std::max(route_gap, rel(sweep.cost, dense.cost));
    }
    out.push_back(check("offline-least-squares", worst, 1e-8));
    out.push_back(check("offline-sweep-route", route_gap, 1e-8));
  }

  GammaSearchOptions so;
  so.tol = 1e-4;
  const GammaOptimum comp = optimize_competitive(lti, Causality::kCausal, T, so);
  const GammaOptimum hinf = optimize_hinf(lti, Causality::kCausal, T, so);
  if (!comp.search.found || !hinf.search.found) {
    out.push_back({"gamma-search", false, false, "no feasible gamma found"});
    return out;
  }
  const double gc = 1.05 * comp.search.gamma;
  const double gh = 1.05 * hinf.search.gamma;
  const SynthesisResult c = synth_competitive(plant, gc, Causality::kCausal);
  const SynthesisResult h = synth_hinf(plant, gh, Causality::kCausal);
  const Controller h2 = synth_h2_fh(plant);
  if (!c.feasible() || !h.feasible()) {
    out.push_back({"gamma-search", false, false, "synthesis infeasible above gamma*"});
    return out;
  }

  {
    double worst_ratio = 0.0;
    double worst_hinf = 0.0;
    double dominance = 0.0;
    double reduction = 0.0;
    for (int k = 0; k < 10; ++k) {
      const auto w = random_sequence(rng, T, p);
      const double opt = offline_cost_dense(ops, stack(w));
      const Trace tc = rollout(plant, *c.controller, w);
      const Trace th = rollout(plant, *h.controller, w);
      const Trace t2 = rollout(plant, h2, w);
      if (opt > 1e-12) worst_ratio = std::max(worst_ratio, tc.total_cost / opt);
      worst_hinf = std::max(worst_hinf, th.total_cost / stack(w).squaredNorm());
      for (double alg : {tc.total_cost, th.total_cost, t2.total_cost}) {
        dominance = std::max(dominance, (opt - alg) / std::max(1.0, opt));
      }
      // The same controls drive the synthetic plant with w'.
      WPrimeFilter f(whitening_fh(plant), plant);
      const auto wp = f.run(w);
      std::vector<Vector> wp_next(T);
      for (int t = 0; t < T; ++t) wp_next[t] = t + 1 < T ? wp[t + 1] : Vector(Vector::Zero(n));
      const SyntheticSystem syn = build_synthetic(plant, ws);
      std::vector<Vector> u(T);
      for (int t = 0; t < T; ++t) u[t] = tc.steps[t].u;
      const double syn_cost = simulate_cost(syn.as_plant(), u, wp_next);
      reduction = std::max(reduction, rel(syn_cost, tc.total_cost));
    }
    out.push_back(check("competitive-bound", std::max(0.0, worst_ratio - gc * gc), 1e-6));
    out.push_back(check("hinf-bound", std::max(0.0, worst_hinf - gh * gh), 1e-6));
    out.push_back(check("offline-dominance", std::max(0.0, dominance), 1e-9));
    out.push_back(check("reduction-consistency", reduction, 1e-8));
  }
  return out;
}

}  // namespace compctl::tools
