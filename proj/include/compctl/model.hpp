#pragma once

#include <optional>
#include <vector>

#include "compctl/linalg.hpp"

namespace compctl {

/// Time-invariant plant x_{t+1} = A x_t + B_u u_t + B_w w_t with stage cost
/// x'Qx + u'u. The control weight has already been normalized to identity;
/// `control_weight_sqrt` holds R^{1/2} so controls can be mapped back.
struct LtiPlant {
  Matrix A;
  Matrix Bu;
  Matrix Bw;
  Matrix Q;
  Matrix control_weight_sqrt;  // R^{1/2}, identity when R = I
  Vector x0;                   // empty means zero

  int state_dim() const { return static_cast<int>(A.rows()); }
  int control_dim() const { return static_cast<int>(Bu.cols()); }
  int disturbance_dim() const { return static_cast<int>(Bw.cols()); }
  Vector initial_state() const;

  /// Maps a normalized control u' back to physical units u = R^{-1/2} u'.
  Vector physical_control(const Vector& normalized) const;
};

/// Time-varying plant over horizon T (stages 0..T-1).
struct LtvPlant {
  std::vector<Matrix> A;
  std::vector<Matrix> Bu;
  std::vector<Matrix> Bw;
  std::vector<Matrix> Q;
  Vector x0;  // empty means zero

  int horizon() const { return static_cast<int>(A.size()); }
  int state_dim() const { return A.empty() ? 0 : static_cast<int>(A[0].rows()); }
  int control_dim() const {
    return Bu.empty() ? 0 : static_cast<int>(Bu[0].cols());
  }
  int disturbance_dim() const {
    return Bw.empty() ? 0 : static_cast<int>(Bw[0].cols());
  }
  Vector initial_state() const;
  bool has_zero_initial_state() const;
};

/// Stacked operators with s = F u + G w, s_t = Q_t^{1/2} x_t, x_0 = 0.
struct DenseOperators {
  Matrix F;  // (nT) x (mT)
  Matrix G;  // (nT) x (pT)
};

/// Builds an LTI plant, replacing B_u by B_u R^{-1/2}. An empty R means
/// identity. Throws std::invalid_argument on inconsistent dimensions or when
/// R is not positive definite (min eigenvalue <= 1e-12). Q is clamped to PSD.
LtiPlant normalize_control_weight(const Matrix& A, const Matrix& Bu,
                                  const Matrix& Bw, const Matrix& Q,
                                  const Matrix& R = Matrix());

/// Per-stage analogue; `R` may be empty (identity at every stage).
LtvPlant normalize_control_weight(const LtvPlant& plant,
                                  const std::vector<Matrix>& R);

/// Checks stage dimensions and PSD-ness of every Q_t (after clamping).
void validate(const LtvPlant& plant);

/// Replicates an LTI plant over `horizon` stages.
LtvPlant promote(const LtiPlant& plant, int horizon);

/// Plant state map Phi(i, j) = A_{i-1} ... A_j (identity when i == j).
Matrix transition(const LtvPlant& plant, int i, int j);

/// Requires x0 = 0 and T >= 1.
DenseOperators build_dense_operators(const LtvPlant& plant);

/// Cost sum_t x_t'Q_t x_t + u_t'u_t of the trajectory produced by `u` and `w`
/// from the plant's initial state. Both sequences have length T.
double simulate_cost(const LtvPlant& plant, std::span<const Vector> u,
                     std::span<const Vector> w);

}  // namespace compctl
