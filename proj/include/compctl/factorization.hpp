#pragma once

#include <span>
#include <vector>

#include "compctl/linalg.hpp"
#include "compctl/model.hpp"
#include "compctl/riccati.hpp"

namespace compctl {

/// Forward Kalman-type recursion that whitens I + FF* over a finite horizon.
struct WhiteningSchedule {
  std::vector<Matrix> P;           // P_0 .. P_T, P_0 = 0
  std::vector<Matrix> K;           // K_t = A_t P_t Q_t^{1/2} Sigma_t^{-1}
  std::vector<Matrix> Sigma;       // Sigma_t = I + Q_t^{1/2} P_t Q_t^{1/2}
  std::vector<Matrix> SigmaSqrt;
  std::vector<Matrix> SigmaInvSqrt;
  std::vector<Matrix> QSqrt;
  Verdict verdict;

  int horizon() const { return static_cast<int>(K.size()); }
};

WhiteningSchedule whitening_fh(const LtvPlant& plant);

/// Dense causal factor Delta with Delta Delta* = I + FF* (test oracle).
Matrix dense_delta(const WhiteningSchedule& schedule, const LtvPlant& plant);

/// Stabilizing solution of the dual Riccati equation
///   P = A P A' + Bu Bu' - K Sigma K'
/// with K = A P Q^{1/2} Sigma^{-1} and Sigma = I + Q^{1/2} P Q^{1/2}.
struct SpectralFactor {
  Matrix P;
  Matrix K;
  Matrix Sigma;
  Matrix SigmaSqrt;
  Matrix SigmaInvSqrt;
  Matrix QSqrt;
  Matrix Aw;  // A - K Q^{1/2}
  double residual = 0.0;
  double whitening_radius = 0.0;
  long long iterations = 0;
  Verdict verdict;
};

/// PBH rank test: (A, B) has no uncontrollable mode with |lambda| >= 1.
bool is_stabilizable(const Matrix& A, const Matrix& B, double tol = 1e-8);
/// PBH rank test: (A, C) has no unobservable mode with |lambda| >= 1.
bool is_detectable(const Matrix& A, const Matrix& C, double tol = 1e-8);

/// Throws std::invalid_argument when (A, Bu) is not stabilizable or
/// (A, Q^{1/2}) is not detectable. Convergence failure is a verdict.
SpectralFactor spectral_factor_ih(const LtiPlant& plant,
                                  const DareOptions& options = {});

/// Delta(z) = (I + Q^{1/2}(zI - A)^{-1}K) Sigma^{1/2}.
CMatrix delta_at(const LtiPlant& plant, const SpectralFactor& factor,
                 Complex z);

/// Doubled synthetic plant (state [x - nu; w'], disturbance w').
struct SyntheticSystem {
  std::vector<Matrix> A;   // [[A_t, K_t Sigma_t^{1/2}], [0, 0]]
  std::vector<Matrix> Bu;  // [Bu_t; 0]
  std::vector<Matrix> Bw;  // [0; I_n]
  std::vector<Matrix> Q;   // C_t' C_t with C_t = [Q_t^{1/2}, Sigma_t^{1/2}]

  int horizon() const { return static_cast<int>(A.size()); }
  /// Views the synthetic system as a plant (x0 = 0).
  LtvPlant as_plant() const;
};

SyntheticSystem build_synthetic(const LtvPlant& plant,
                                const WhiteningSchedule& schedule);
/// Single-stage synthetic system for the infinite-horizon case.
SyntheticSystem build_synthetic(const LtiPlant& plant,
                                const SpectralFactor& factor);

/// Online filter producing w' = Delta^{-1} G w strictly causally:
///   nu_{t+1} = (A_t - K_t Q_t^{1/2}) nu_t + Bw_t w_t,
///   w'_t = Sigma_t^{-1/2} Q_t^{1/2} nu_t,  nu_0 = 0.
/// Time-invariant filters hold one stage; finite-horizon filters hold T.
class WPrimeFilter {
 public:
  WPrimeFilter() = default;
  explicit WPrimeFilter(const SpectralFactor& factor, const Matrix& Bw);
  WPrimeFilter(const WhiteningSchedule& schedule, const LtvPlant& plant);
  /// Raw construction (deserialization); all sequences share one length.
  WPrimeFilter(std::vector<Matrix> transition, std::vector<Matrix> input,
               std::vector<Matrix> output, bool finite);

  /// w'_t for the current step (before absorbing w_t).
  Vector current() const;
  /// Absorbs w_t and returns w'_{t+1}. For a finite-horizon filter the
  /// value after the last stage is reported as zero.
  Vector step(const Vector& w);
  int time() const { return t_; }
  const Vector& state() const { return nu_; }
  int output_dim() const;

  std::vector<Vector> run(std::span<const Vector> w);

  /// Swaps in the matrices of `model` while keeping the filter state and
  /// time index (used when the plant is relinearized).
  void retarget(const WPrimeFilter& model);

  bool finite() const { return finite_; }
  const Matrix& transition(int t) const { return transition_[stage(t)]; }
  const Matrix& input(int t) const { return input_[stage(t)]; }
  const Matrix& output(int t) const { return output_[stage(t)]; }
  int stages() const { return static_cast<int>(transition_.size()); }

 private:
  int stage(int t) const { return finite_ ? t : 0; }

  std::vector<Matrix> transition_;
  std::vector<Matrix> input_;
  std::vector<Matrix> output_;
  Vector nu_;
  int t_ = 0;
  bool finite_ = false;
};

}  // namespace compctl
