#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "compctl/linalg.hpp"
#include "compctl/model.hpp"

namespace compctl {

/// Why a synthesis or feasibility check failed. Feasibility failures are
/// values, not exceptions: gamma bisection consumes them.
enum class Reason {
  kNone,
  kSingularHtilde,
  kCausalCondition,
  kStrictCausalCondition,
  kNoStabilizingSolution,
  kNotStabilizing,
  kInertiaMismatch,
  kNotPsd,
  kNumericFailure,
  kPrecondition,
};

std::string_view to_string(Reason reason);

struct Verdict {
  bool feasible = true;
  Reason reason = Reason::kNone;
  int timestep = -1;  // stage where a finite-horizon sweep failed, else -1
  std::string detail;

  static Verdict ok() { return {}; }
  static Verdict fail(Reason r, std::string detail = {}, int timestep = -1) {
    return {false, r, timestep, std::move(detail)};
  }
};

/// Backward sweep of the indefinite (game) Riccati recursion
///   P_t = Q_t + A'P A - A'P Bt Ht^{-1} Bt' P A,  P_T = 0,
/// with Bt = [Bu Bw], Rt = diag(I, -gamma^2 I), Ht = Rt + Bt' P_{t+1} Bt.
struct RiccatiSchedule {
  double gamma = 0.0;
  std::vector<Matrix> P;       // P_0 .. P_T; entries past a failure are empty
  std::vector<Matrix> H;       // H_t = I + Bu' P_{t+1} Bu
  std::vector<Matrix> Htilde;  // Ht_t
  // Largest eigenvalue of Bw'[P - P Bu H^{-1} Bu' P]Bw per stage (causal
  // condition requires < gamma^2).
  std::vector<double> causal_lhs;
  // Largest eigenvalue of Bw' P_{t+1} Bw (w-channel strictly-causal check).
  std::vector<double> strict_w_lhs;
  // Largest eigenvalue of Bu' P_{t+1} Bu (u-channel form, reported only).
  std::vector<double> strict_u_lhs;
  Verdict causal;
  Verdict strictly_causal;  // gated by the w-channel check
  bool strict_u_channel_ok = true;

  int horizon() const { return static_cast<int>(H.size()); }
};

/// Strict matrix inequalities lambda_max < gamma^2 are tested with this
/// margin.
inline constexpr double kStrictMargin = 1e-9;

RiccatiSchedule hinf_backward(const LtvPlant& plant, double gamma);

enum class DareMethod { kDoubling, kIteration };

struct DareOptions {
  DareMethod method = DareMethod::kDoubling;
  double step_tol = 1e-13;          // relative to max(1, |P|_inf)
  long long max_iterations = 100000;  // plain iteration
  int max_doublings = 64;
  double divergence = 1e12;
  double residual_tol = 1e-9;       // relative to max(1, |P|_inf)
  double psd_tol = 1e-9;            // relative to max(1, |P|_inf)
  double inertia_threshold = 1e-10;
};

/// Fixed point of the backward recursion started from P = 0, with the
/// stabilizing-solution diagnostics.
struct RiccatiFixedPoint {
  Matrix P;
  double residual = 0.0;
  long long iterations = 0;  // backward steps represented by P
  bool converged = false;
  double closed_loop_radius = 0.0;  // of A - Bt Ht^{-1} Bt' P A
  bool stable = false;
  Inertia rtilde_inertia;
  Inertia htilde_inertia;
  bool inertia_match = false;
  double min_eigenvalue = 0.0;
  bool psd = false;
  Verdict verdict;
};

RiccatiFixedPoint dare_fixed_point(const Matrix& A, const Matrix& Btilde,
                                   const Matrix& Rtilde, const Matrix& Q,
                                   const DareOptions& options = {});

/// Rt = diag(I_m, -gamma^2 I_p).
Matrix game_weight(int m, int p, double gamma);

/// One backward step; returns false if Ht is singular.
bool riccati_step(const Matrix& A, const Matrix& Btilde, const Matrix& Rtilde,
                  const Matrix& Q, const Matrix& P_next, Matrix& P_out);

/// Relative one-step defect |step(P) - P|_inf / max(1, |P|_inf).
double riccati_residual(const Matrix& A, const Matrix& Btilde,
                        const Matrix& Rtilde, const Matrix& Q, const Matrix& P);

}  // namespace compctl
