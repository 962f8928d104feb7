#include "compctl/freq.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace compctl {

ClosedLoop closed_loop(const LtiPlant& plant, const Controller& c) {
  if (!c.infinite()) {
    throw std::invalid_argument("closed loop needs an infinite-horizon controller");
  }
  const Matrix& A = plant.A;
  const Matrix& Bu = plant.Bu;
  const Matrix& Bw = plant.Bw;
  const Eigen::Index n = A.rows();
  const Eigen::Index m = Bu.cols();
  const Eigen::Index p = Bw.cols();
  const Matrix qs = psd_sqrt(plant.Q);
  ClosedLoop cl;
  switch (c.kind) {
    case ControllerKind::kZero:
      cl.A = A;
      cl.B = Bw;
      cl.C = Matrix::Zero(n + m, n);
      cl.C.topRows(n) = qs;
      cl.D = Matrix::Zero(n + m, p);
      return cl;
    case ControllerKind::kH2:
    case ControllerKind::kHinf: {
      const Matrix& Kx = c.Kx[0];
      const Matrix& Kw = c.Kw[0];
      cl.A = A - Bu * Kx;
      cl.B = Bw - Bu * Kw;
      cl.C.resize(n + m, n);
      cl.C << qs, -Kx;
      cl.D = Matrix::Zero(n + m, p);
      cl.D.bottomRows(m) = -Kw;
      return cl;
    }
    case ControllerKind::kCompetitive: {
      // xi = [alpha; w'_t] with alpha = x - nu and w'_t = C_nu nu_t.
      const Matrix& L = c.L[0];
      const Matrix L1 = L.leftCols(n);
      const Matrix L2 = L.rightCols(n);
      const Matrix k_sigma = c.Ahat[0].topRightCorner(n, n);  // K Sigma^{1/2}
      const Matrix& a_nu = c.filter.transition(0);
      const Matrix& c_nu = c.filter.output(0);
      const bool causal = c.causality == Causality::kCausal;
      Matrix ku = -L1 * k_sigma * c_nu;
      Matrix kw = Matrix::Zero(m, p);
      if (causal) {
        ku -= L2 * c_nu * a_nu;
        kw = -L2 * c_nu * Bw;
      }
      const Matrix ka = -L1 * A;
      cl.A = Matrix::Zero(2 * n, 2 * n);
      cl.A.topLeftCorner(n, n) = a_nu;
      cl.A.bottomLeftCorner(n, n) = k_sigma * c_nu + Bu * ku;
      cl.A.bottomRightCorner(n, n) = A + Bu * ka;
      cl.B.resize(2 * n, p);
      cl.B << Bw, Bu * kw;
      cl.C.resize(n + m, 2 * n);
      cl.C << qs, qs, ku, ka;
      cl.D = Matrix::Zero(n + m, p);
      cl.D.bottomRows(m) = kw;
      return cl;
    }
    case ControllerKind::kOffline:
      break;
  }
  throw std::invalid_argument("the offline controller has no closed loop");
}

CMatrix transfer_at(const ClosedLoop& loop, double omega) {
  const Complex z = std::polar(1.0, omega);
  const Eigen::Index k = loop.A.rows();
  const CMatrix shifted = z * CMatrix::Identity(k, k) - loop.A.cast<Complex>();
  Eigen::PartialPivLU<CMatrix> lu(shifted);
  const double det = std::abs(lu.determinant());
  if (!(det > 0.0) || !std::isfinite(det)) {
    throw std::runtime_error("numeric-failure: pole on the unit circle");
  }
  CMatrix t = loop.C.cast<Complex>() * lu.solve(loop.B.cast<Complex>()) +
              loop.D.cast<Complex>();
  if (!t.allFinite()) {
    throw std::runtime_error("numeric-failure: pole on the unit circle");
  }
  return t;
}

double sigma_max(const CMatrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<CMatrix> svd(m);
  return svd.singularValues()(0);
}

CMatrix offline_density(const LtiPlant& plant, double omega) {
  const Complex z = std::polar(1.0, omega);
  const Eigen::Index n = plant.A.rows();
  const CMatrix qs = psd_sqrt(plant.Q).cast<Complex>();
  Eigen::PartialPivLU<CMatrix> lu(z * CMatrix::Identity(n, n) -
                                  plant.A.cast<Complex>());
  const CMatrix F = qs * lu.solve(plant.Bu.cast<Complex>());
  const CMatrix G = qs * lu.solve(plant.Bw.cast<Complex>());
  CMatrix gram = CMatrix::Identity(n, n) + F * F.adjoint();
  const CMatrix N = G.adjoint() * gram.llt().solve(G);
  return 0.5 * (N + N.adjoint());
}

namespace {

constexpr double kDegenerate = 1e-12;

bool factor_density(const CMatrix& N, Eigen::LLT<CMatrix>& llt) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(N, Eigen::EigenvaluesOnly);
  const double top = es.eigenvalues().maxCoeff();
  if (!(top > 0.0) || es.eigenvalues().minCoeff() <= kDegenerate * top) {
    return false;
  }
  llt.compute(N);
  return llt.info() == Eigen::Success;
}

}  // namespace

FreqPoint per_freq_cr(const LtiPlant& plant, const ClosedLoop& loop,
                      double omega) {
  FreqPoint pt;
  pt.omega = omega;
  const CMatrix T = transfer_at(loop, omega);
  pt.sigma_max = sigma_max(T);
  const CMatrix N = offline_density(plant, omega);
  Eigen::LLT<CMatrix> llt;
  if (!factor_density(N, llt)) {
    pt.degenerate = true;
    pt.cr = std::numeric_limits<double>::quiet_NaN();
    return pt;
  }
  // L^{-1} T*T L^{-*} has the same spectrum as N^{-1/2} T*T N^{-1/2}.
  const CMatrix y = llt.matrixL().solve(T.adjoint());  // L^{-1} T*
  CMatrix x = y * y.adjoint();
  x = 0.5 * (x + x.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> es(x, Eigen::EigenvaluesOnly);
  pt.cr = es.eigenvalues().maxCoeff();
  return pt;
}

FreqPoint offline_freq_point(const LtiPlant& plant, double omega) {
  FreqPoint pt;
  pt.omega = omega;
  const CMatrix N = offline_density(plant, omega);
  Eigen::SelfAdjointEigenSolver<CMatrix> es(N, Eigen::EigenvaluesOnly);
  pt.sigma_max = std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
  Eigen::LLT<CMatrix> llt;
  pt.degenerate = !factor_density(N, llt);
  pt.cr = pt.degenerate ? std::numeric_limits<double>::quiet_NaN() : 1.0;
  return pt;
}

std::vector<double> uniform_grid(int points) {
  if (points < 2) throw std::invalid_argument("grid needs at least 2 points");
  std::vector<double> grid(points);
  for (int i = 0; i < points; ++i) {
    grid[i] = std::numbers::pi * i / (points - 1);
  }
  return grid;
}

std::vector<FreqPoint> sweep(const LtiPlant& plant, const ClosedLoop& loop,
                             std::span<const double> grid) {
  const int count = static_cast<int>(grid.size());
  std::vector<FreqPoint> out(count);
  bool failed = false;
#pragma omp parallel for schedule(static)
  for (int i = 0; i < count; ++i) {
    try {
      out[i] = per_freq_cr(plant, loop, grid[i]);
    } catch (const std::exception&) {
#pragma omp atomic write
      failed = true;
    }
  }
  if (failed) throw std::runtime_error("numeric-failure: pole on the unit circle");
  return out;
}

std::vector<FreqPoint> sweep_serial(const LtiPlant& plant,
                                    const ClosedLoop& loop,
                                    std::span<const double> grid) {
  std::vector<FreqPoint> out;
  out.reserve(grid.size());
  for (double w : grid) out.push_back(per_freq_cr(plant, loop, w));
  return out;
}

ExtremalDc extremal_dc(const LtiPlant& plant, const Controller& controller) {
  const CMatrix T = transfer_at(closed_loop(plant, controller), 0.0);
  const Matrix tr = T.real();
  const Matrix gram = symmetrize(tr.transpose() * tr);
  Eigen::SelfAdjointEigenSolver<Matrix> es(gram);
  auto canonical = [](Vector v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      if (std::abs(v(i)) > 1e-12) {
        if (v(i) < 0) v = -v;
        break;
      }
    }
    return v;
  };
  ExtremalDc out;
  out.eigenvalues = es.eigenvalues();
  out.best = canonical(es.eigenvectors().col(0).normalized());
  out.worst =
      canonical(es.eigenvectors().col(gram.cols() - 1).normalized());
  return out;
}

}  // namespace compctl
