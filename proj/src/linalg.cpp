#include "compctl/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace compctl {

Matrix symmetrize(const Matrix& m) { return 0.5 * (m + m.transpose()); }

Matrix psd_sqrt(const Matrix& m) {
  if (m.size() == 0) return m;
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(m));
  Vector root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * root.asDiagonal() * es.eigenvectors().transpose();
}

Matrix pd_inv_sqrt(const Matrix& m, double floor) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(m));
  if (es.eigenvalues().minCoeff() <= floor) {
    throw std::invalid_argument("pd_inv_sqrt: matrix is not positive definite");
  }
  Vector inv_root = es.eigenvalues().cwiseSqrt().cwiseInverse();
  return es.eigenvectors() * inv_root.asDiagonal() *
         es.eigenvectors().transpose();
}

double min_eigenvalue(const Matrix& symmetric) {
  if (symmetric.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(symmetric),
                                           Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

double max_eigenvalue(const Matrix& symmetric) {
  if (symmetric.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(symmetric),
                                           Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

double spectral_radius(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::EigenSolver<Matrix> es(m, false);
  if (es.info() != Eigen::Success) {
    throw std::runtime_error("spectral_radius: eigensolver failed");
  }
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

bool is_stable(const Matrix& m, double margin) {
  return spectral_radius(m) < 1.0 - margin;
}

Inertia inertia(const Matrix& symmetric, double threshold) {
  Inertia out;
  if (symmetric.size() == 0) return out;
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(symmetric),
                                           Eigen::EigenvaluesOnly);
  for (double lambda : es.eigenvalues()) {
    if (lambda > threshold) {
      ++out.positive;
    } else if (lambda < -threshold) {
      ++out.negative;
    } else {
      ++out.zero;
    }
  }
  return out;
}

double max_abs(const Matrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

bool solve_symmetric(const Matrix& h, const Matrix& b, Matrix& x,
                     double pivot_guard) {
  const Matrix hs = symmetrize(h);
  Eigen::LDLT<Matrix> ldlt(hs);
  if (ldlt.info() == Eigen::Success) {
    const Vector d = ldlt.vectorD().cwiseAbs();
    const double scale = d.size() > 0 ? d.maxCoeff() : 1.0;
    if (scale > 0.0 && (d.size() == 0 || d.minCoeff() >= pivot_guard * scale)) {
      x = ldlt.solve(b);
      return x.allFinite();
    }
  }
  // LDL^T without 2x2 pivots can break down on indefinite matrices with a
  // small diagonal; fall back to full-pivot LU under the same guard.
  Eigen::FullPivLU<Matrix> lu(hs);
  lu.setThreshold(pivot_guard);
  if (!lu.isInvertible()) return false;
  x = lu.solve(b);
  return x.allFinite();
}

Matrix block_diag(const Matrix& a, const Matrix& b) {
  Matrix out = Matrix::Zero(a.rows() + b.rows(), a.cols() + b.cols());
  out.topLeftCorner(a.rows(), a.cols()) = a;
  out.bottomRightCorner(b.rows(), b.cols()) = b;
  return out;
}

Vector stack(std::span<const Vector> parts) {
  Eigen::Index total = 0;
  for (const auto& p : parts) total += p.size();
  Vector out(total);
  Eigen::Index offset = 0;
  for (const auto& p : parts) {
    out.segment(offset, p.size()) = p;
    offset += p.size();
  }
  return out;
}

std::vector<Vector> unstack(const Vector& v, int width) {
  if (width <= 0 || v.size() % width != 0) {
    throw std::invalid_argument("unstack: length is not a multiple of width");
  }
  std::vector<Vector> out;
  out.reserve(static_cast<std::size_t>(v.size() / width));
  for (Eigen::Index i = 0; i < v.size(); i += width) {
    out.emplace_back(v.segment(i, width));
  }
  return out;
}

}  // namespace compctl
