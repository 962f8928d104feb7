#include "compctl/riccati.hpp"

#include <cmath>
#include <limits>

namespace compctl {

std::string_view to_string(Reason reason) {
  switch (reason) {
    case Reason::kNone: return "none";
    case Reason::kSingularHtilde: return "singular-Htilde";
    case Reason::kCausalCondition: return "causal-condition";
    case Reason::kStrictCausalCondition: return "strictly-causal-condition";
    case Reason::kNoStabilizingSolution: return "no-stabilizing-solution";
    case Reason::kNotStabilizing: return "not-stabilizing";
    case Reason::kInertiaMismatch: return "inertia-mismatch";
    case Reason::kNotPsd: return "not-psd";
    case Reason::kNumericFailure: return "numeric-failure";
    case Reason::kPrecondition: return "precondition";
  }
  return "unknown";
}

Matrix game_weight(int m, int p, double gamma) {
  Matrix r = Matrix::Zero(m + p, m + p);
  r.topLeftCorner(m, m).setIdentity();
  r.bottomRightCorner(p, p) = -gamma * gamma * Matrix::Identity(p, p);
  return r;
}

bool riccati_step(const Matrix& A, const Matrix& Btilde, const Matrix& Rtilde,
                  const Matrix& Q, const Matrix& P_next, Matrix& P_out) {
  const Matrix pa = P_next * A;
  const Matrix htilde = Rtilde + Btilde.transpose() * P_next * Btilde;
  Matrix x;
  if (!solve_symmetric(htilde, Btilde.transpose() * pa, x)) return false;
  P_out = symmetrize(Q + A.transpose() * pa - pa.transpose() * Btilde * x);
  return true;
}

double riccati_residual(const Matrix& A, const Matrix& Btilde,
                        const Matrix& Rtilde, const Matrix& Q,
                        const Matrix& P) {
  Matrix next;
  if (!riccati_step(A, Btilde, Rtilde, Q, P, next)) {
    return std::numeric_limits<double>::infinity();
  }
  return max_abs(next - P) / std::max(1.0, max_abs(P));
}

RiccatiSchedule hinf_backward(const LtvPlant& plant, double gamma) {
  if (!(gamma > 0.0)) throw std::invalid_argument("gamma must be positive");
  validate(plant);
  const int T = plant.horizon();
  const int n = plant.state_dim();
  const int m = plant.control_dim();
  const int p = plant.disturbance_dim();
  const double g2 = gamma * gamma;
  const Matrix rtilde = game_weight(m, p, gamma);

  RiccatiSchedule s;
  s.gamma = gamma;
  s.P.assign(T + 1, Matrix());
  s.H.assign(T, Matrix());
  s.Htilde.assign(T, Matrix());
  s.causal_lhs.assign(T, std::numeric_limits<double>::quiet_NaN());
  s.strict_w_lhs.assign(T, std::numeric_limits<double>::quiet_NaN());
  s.strict_u_lhs.assign(T, std::numeric_limits<double>::quiet_NaN());
  s.P[T] = Matrix::Zero(n, n);

  for (int t = T - 1; t >= 0; --t) {
    const Matrix& P = s.P[t + 1];
    const Matrix& A = plant.A[t];
    const Matrix& Bu = plant.Bu[t];
    const Matrix& Bw = plant.Bw[t];
    Matrix btilde(n, m + p);
    btilde << Bu, Bw;

    s.H[t] = Matrix::Identity(m, m) + Bu.transpose() * P * Bu;
    Matrix h_inv_bup;
    if (!solve_symmetric(s.H[t], Bu.transpose() * P, h_inv_bup)) {
      s.causal = Verdict::fail(Reason::kNumericFailure, "H_t singular", t);
      s.strictly_causal = s.causal;
      return s;
    }
    const Matrix reduced = P - P * Bu * h_inv_bup;
    s.causal_lhs[t] = max_eigenvalue(Bw.transpose() * reduced * Bw);
    s.strict_w_lhs[t] = max_eigenvalue(Bw.transpose() * P * Bw);
    s.strict_u_lhs[t] = max_eigenvalue(Bu.transpose() * P * Bu);

    const double bound = g2 - kStrictMargin;
    if (s.strict_u_lhs[t] >= bound) s.strict_u_channel_ok = false;
    if (s.strictly_causal.feasible && s.strict_w_lhs[t] >= bound) {
      s.strictly_causal = Verdict::fail(
          Reason::kStrictCausalCondition,
          "lambda_max(Bw' P Bw) = " + std::to_string(s.strict_w_lhs[t]), t);
    }
    if (s.causal_lhs[t] >= bound) {
      s.causal = Verdict::fail(
          Reason::kCausalCondition,
          "lambda_max(Bw'[P - P Bu H^-1 Bu' P]Bw) = " +
              std::to_string(s.causal_lhs[t]),
          t);
      if (s.strictly_causal.feasible) s.strictly_causal = s.causal;
      return s;
    }

    s.Htilde[t] = rtilde + btilde.transpose() * P * btilde;
    if (!riccati_step(A, btilde, rtilde, plant.Q[t], P, s.P[t])) {
      s.causal = Verdict::fail(Reason::kSingularHtilde, "Htilde singular", t);
      if (s.strictly_causal.feasible) s.strictly_causal = s.causal;
      return s;
    }
  }
  return s;
}

namespace {

void finish_diagnostics(const Matrix& A, const Matrix& Btilde,
                        const Matrix& Rtilde, const Matrix& Q,
                        const DareOptions& options, RiccatiFixedPoint& out) {
  const double scale = std::max(1.0, max_abs(out.P));
  out.residual = riccati_residual(A, Btilde, Rtilde, Q, out.P);
  const Matrix htilde = Rtilde + Btilde.transpose() * out.P * Btilde;
  Matrix gain;
  if (!solve_symmetric(htilde, Btilde.transpose() * out.P * A, gain)) {
    out.verdict = Verdict::fail(Reason::kSingularHtilde, "Htilde singular");
    return;
  }
  try {
    out.closed_loop_radius = spectral_radius(A - Btilde * gain);
  } catch (const std::runtime_error&) {
    out.verdict = Verdict::fail(Reason::kNumericFailure, "eigensolver failed");
    return;
  }
  out.stable = out.closed_loop_radius < 1.0 - kStrictMargin;
  out.rtilde_inertia = inertia(Rtilde, options.inertia_threshold);
  out.htilde_inertia = inertia(htilde, options.inertia_threshold);
  out.inertia_match = out.rtilde_inertia == out.htilde_inertia;
  out.min_eigenvalue = min_eigenvalue(out.P);
  out.psd = out.min_eigenvalue >= -options.psd_tol * scale;

  if (!out.converged) {
    out.verdict = Verdict::fail(Reason::kNoStabilizingSolution,
                                "recursion did not converge");
  } else if (!(out.residual < options.residual_tol)) {
    out.verdict = Verdict::fail(Reason::kNoStabilizingSolution,
                                "residual " + std::to_string(out.residual));
  } else if (!out.stable) {
    out.verdict = Verdict::fail(
        Reason::kNotStabilizing,
        "closed-loop radius " + std::to_string(out.closed_loop_radius));
  } else if (!out.inertia_match) {
    out.verdict = Verdict::fail(Reason::kInertiaMismatch);
  } else if (!out.psd) {
    out.verdict = Verdict::fail(
        Reason::kNotPsd, "min eigenvalue " + std::to_string(out.min_eigenvalue));
  } else {
    out.verdict = Verdict::ok();
  }
}

void iterate(const Matrix& A, const Matrix& Btilde, const Matrix& Rtilde,
             const Matrix& Q, const DareOptions& options,
             RiccatiFixedPoint& out) {
  Matrix P = Matrix::Zero(A.rows(), A.cols());
  Matrix next;
  for (long long k = 0; k < options.max_iterations; ++k) {
    if (!riccati_step(A, Btilde, Rtilde, Q, P, next)) {
      out.P = P;
      out.iterations = k;
      out.verdict = Verdict::fail(Reason::kSingularHtilde, "Htilde singular");
      return;
    }
    const double step = max_abs(next - P);
    P.swap(next);
    out.iterations = k + 1;
    if (!P.allFinite() || max_abs(P) > options.divergence) break;
    if (step <= options.step_tol * std::max(1.0, max_abs(P))) {
      out.converged = true;
      break;
    }
  }
  out.P = P;
}

// Structure-preserving doubling: after k rounds H_k equals the backward
// recursion from P = 0 run for 2^k steps.
void doubling(const Matrix& A, const Matrix& Btilde, const Matrix& Rtilde,
              const Matrix& Q, const DareOptions& options,
              RiccatiFixedPoint& out) {
  const Eigen::Index n = A.rows();
  Matrix r_inv_bt;
  if (!solve_symmetric(Rtilde, Btilde.transpose(), r_inv_bt)) {
    out.verdict = Verdict::fail(Reason::kPrecondition, "Rtilde singular");
    out.P = Matrix::Zero(n, n);
    return;
  }
  Matrix a = A;
  Matrix g = symmetrize(Btilde * r_inv_bt);
  Matrix h = symmetrize(Q);
  out.iterations = 1;
  const Matrix eye = Matrix::Identity(n, n);
  for (int k = 0; k < options.max_doublings; ++k) {
    Eigen::PartialPivLU<Matrix> lu(eye + g * h);
    const Matrix x = lu.solve(a);
    const Matrix y = lu.solve(g);
    Matrix h_next = symmetrize(h + a.transpose() * h * x);
    Matrix g_next = symmetrize(g + a * y * a.transpose());
    Matrix a_next = a * x;
    if (!h_next.allFinite() || !g_next.allFinite() || !a_next.allFinite()) {
      out.verdict = Verdict::fail(Reason::kNumericFailure,
                                  "doubling produced non-finite values");
      break;
    }
    const double step = max_abs(h_next - h);
    h.swap(h_next);
    g.swap(g_next);
    a.swap(a_next);
    out.iterations = out.iterations > (1LL << 61) ? out.iterations
                                                  : out.iterations * 2;
    if (max_abs(h) > options.divergence) break;
    if (step <= options.step_tol * std::max(1.0, max_abs(h))) {
      out.converged = true;
      break;
    }
  }
  out.P = h;
}

}  // namespace

RiccatiFixedPoint dare_fixed_point(const Matrix& A, const Matrix& Btilde,
                                   const Matrix& Rtilde, const Matrix& Q,
                                   const DareOptions& options) {
  if (A.rows() != A.cols() || Btilde.rows() != A.rows() ||
      Rtilde.rows() != Btilde.cols() || Rtilde.cols() != Rtilde.rows() ||
      Q.rows() != A.rows() || Q.cols() != A.cols()) {
    throw std::invalid_argument("dare_fixed_point: inconsistent dimensions");
  }
  RiccatiFixedPoint out;
  if (options.method == DareMethod::kIteration) {
    iterate(A, Btilde, Rtilde, Q, options, out);
  } else {
    doubling(A, Btilde, Rtilde, Q, options, out);
  }
  if (!out.verdict.feasible) return out;
  finish_diagnostics(A, Btilde, Rtilde, Q, options, out);
  return out;
}

}  // namespace compctl
