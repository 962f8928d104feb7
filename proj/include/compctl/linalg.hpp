#pragma once

#include <Eigen/Dense>

#include <complex>
#include <span>
#include <vector>

namespace compctl {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using Complex = std::complex<double>;

/// Eigenvalue counts of a symmetric matrix split at +/- threshold.
struct Inertia {
  int positive = 0;
  int negative = 0;
  int zero = 0;

  friend bool operator==(const Inertia&, const Inertia&) = default;
};

// Symmetric PSD square root with eigenvalues clamped at max(lambda, 0).
Matrix psd_sqrt(const Matrix& m);

// Inverse of the symmetric square root; eigenvalues must exceed `floor`.
Matrix pd_inv_sqrt(const Matrix& m, double floor = 1e-12);

Matrix symmetrize(const Matrix& m);

double min_eigenvalue(const Matrix& symmetric);
double max_eigenvalue(const Matrix& symmetric);

/// Largest eigenvalue modulus. Uses the general (nonsymmetric) eigensolver.
double spectral_radius(const Matrix& m);

/// A square matrix is treated as stable when its spectral radius is below
/// 1 - margin.
bool is_stable(const Matrix& m, double margin = 1e-9);

Inertia inertia(const Matrix& symmetric, double threshold = 1e-10);

/// Infinity norm of the entries (max |m_ij|); 0 for empty matrices.
double max_abs(const Matrix& m);

/// Solves H x = b for symmetric (possibly indefinite) H via pivoted LDL^T,
/// returning false when a pivot falls below `pivot_guard` times the largest
/// pivot magnitude.
bool solve_symmetric(const Matrix& h, const Matrix& b, Matrix& x,
                     double pivot_guard = 1e-12);

/// Block-diagonal assembly diag(a, b).
Matrix block_diag(const Matrix& a, const Matrix& b);

/// Stacks a sequence of equally sized vectors into one long vector.
Vector stack(std::span<const Vector> parts);

/// Inverse of `stack`: splits into `count` chunks of size `width`.
std::vector<Vector> unstack(const Vector& v, int width);

}  // namespace compctl
