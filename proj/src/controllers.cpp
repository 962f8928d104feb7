#include "compctl/controllers.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace compctl {

std::string_view to_string(ControllerKind kind) {
  switch (kind) {
    case ControllerKind::kH2: return "h2";
    case ControllerKind::kHinf: return "hinf";
    case ControllerKind::kCompetitive: return "competitive";
    case ControllerKind::kOffline: return "offline";
    case ControllerKind::kZero: return "zero";
  }
  return "unknown";
}

std::string_view to_string(Causality causality) {
  switch (causality) {
    case Causality::kCausal: return "causal";
    case Causality::kStrictlyCausal: return "strictly-causal";
    case Causality::kNoncausal: return "noncausal";
  }
  return "unknown";
}

ControllerKind parse_controller_kind(std::string_view text) {
  if (text == "h2") return ControllerKind::kH2;
  if (text == "hinf") return ControllerKind::kHinf;
  if (text == "competitive") return ControllerKind::kCompetitive;
  if (text == "offline") return ControllerKind::kOffline;
  if (text == "zero") return ControllerKind::kZero;
  throw std::invalid_argument("unknown controller kind: " + std::string(text));
}

Causality parse_causality(std::string_view text) {
  if (text == "causal") return Causality::kCausal;
  if (text == "strictly-causal" || text == "strict") {
    return Causality::kStrictlyCausal;
  }
  if (text == "noncausal") return Causality::kNoncausal;
  throw std::invalid_argument("unknown causality: " + std::string(text));
}

namespace {

// Gains of u = -H^{-1} Bu' P (A x + Bw w) for a given P.
struct FeedbackGains {
  Matrix H;
  Matrix Kx;
  Matrix Kw;
  Matrix reduced;  // P - P Bu H^{-1} Bu' P
};

FeedbackGains feedback_gains(const Matrix& A, const Matrix& Bu,
                             const Matrix& Bw, const Matrix& P) {
  FeedbackGains g;
  g.H = symmetrize(Matrix::Identity(Bu.cols(), Bu.cols()) +
                   Bu.transpose() * P * Bu);
  Eigen::LLT<Matrix> llt(g.H);
  const Matrix h_inv_bup = llt.solve(Bu.transpose() * P);
  g.Kx = h_inv_bup * A;
  g.Kw = h_inv_bup * Bw;
  g.reduced = symmetrize(P - P * Bu * h_inv_bup);
  return g;
}

// Infinite-horizon H-infinity synthesis core shared by the hinf and
// competitive controllers.
struct InfiniteCore {
  Verdict verdict;
  SynthesisDiagnostics diag;
  Matrix P;
  FeedbackGains gains;
};

InfiniteCore hinf_infinite(const Matrix& A, const Matrix& Bu, const Matrix& Bw,
                           const Matrix& Q, double gamma, Causality causality,
                           const DareOptions& options) {
  InfiniteCore core;
  const Eigen::Index n = A.rows();
  const int m = static_cast<int>(Bu.cols());
  const int p = static_cast<int>(Bw.cols());
  Matrix btilde(n, m + p);
  btilde << Bu, Bw;
  const RiccatiFixedPoint fp =
      dare_fixed_point(A, btilde, game_weight(m, p, gamma), Q, options);
  auto& d = core.diag;
  d.residual = fp.residual;
  d.iterations = fp.iterations;
  d.closed_loop_radius = fp.closed_loop_radius;
  d.inertia_match = fp.inertia_match;
  d.psd = fp.psd;
  d.min_eigenvalue = fp.min_eigenvalue;
  core.verdict = fp.verdict;
  core.P = fp.P;
  if (!core.verdict.feasible) return core;

  core.gains = feedback_gains(A, Bu, Bw, core.P);
  const double g2 = gamma * gamma;
  d.causal_lhs = max_eigenvalue(Bw.transpose() * core.gains.reduced * Bw);
  d.strict_w_lhs = max_eigenvalue(Bw.transpose() * core.P * Bw);
  d.strict_u_lhs = max_eigenvalue(Bu.transpose() * core.P * Bu);
  d.strict_u_channel_ok = d.strict_u_lhs < g2 - kStrictMargin;
  if (d.causal_lhs >= g2 - kStrictMargin) {
    core.verdict = Verdict::fail(Reason::kCausalCondition,
                                 "causal condition violated");
    return core;
  }
  if (causality == Causality::kStrictlyCausal) {
    if (p == m) {
      const Matrix inner =
          Matrix::Identity(n, n) - g2 * Bu * Bu.transpose() * core.P;
      Eigen::FullPivLU<Matrix> lu(inner);
      if (lu.isInvertible()) {
        const Matrix extra = Matrix::Identity(p, m) +
                             Bw.transpose() * core.P * lu.solve(Bu);
        if (max_abs(extra - extra.transpose()) <=
            1e-8 * std::max(1.0, max_abs(extra))) {
          d.extra_condition =
              min_eigenvalue(extra) > kStrictMargin ? "pass" : "fail";
        } else {
          d.extra_condition = "condition-untestable";
        }
      } else {
        d.extra_condition = "condition-untestable";
      }
    } else {
      d.extra_condition = "condition-untestable";
    }
    if (d.strict_w_lhs >= g2 - kStrictMargin) {
      core.verdict = Verdict::fail(Reason::kStrictCausalCondition,
                                   "lambda_max(Bw' P Bw) = " +
                                       std::to_string(d.strict_w_lhs));
    }
  }
  return core;
}

void check_causal_request(Causality causality) {
  if (causality == Causality::kNoncausal) {
    throw std::invalid_argument(
        "noncausal synthesis is the offline controller");
  }
}

void fill_schedule_diagnostics(const RiccatiSchedule& s,
                               SynthesisDiagnostics& d) {
  d.iterations = s.horizon();
  d.strict_u_channel_ok = s.strict_u_channel_ok;
  for (int t = 0; t < s.horizon(); ++t) {
    if (!std::isnan(s.causal_lhs[t])) {
      d.causal_lhs = std::max(d.causal_lhs, s.causal_lhs[t]);
      d.strict_w_lhs = std::max(d.strict_w_lhs, s.strict_w_lhs[t]);
      d.strict_u_lhs = std::max(d.strict_u_lhs, s.strict_u_lhs[t]);
    }
  }
  double min_eig = 0.0;
  for (const auto& P : s.P) {
    if (P.size() > 0) min_eig = std::min(min_eig, min_eigenvalue(P));
  }
  d.min_eigenvalue = min_eig;
  d.psd = true;
  for (const auto& P : s.P) {
    if (P.size() > 0 && min_eigenvalue(P) < -1e-9 * std::max(1.0, max_abs(P))) {
      d.psd = false;
    }
  }
}

}  // namespace

Controller zero_controller(int n, int m, int p) {
  Controller c;
  c.kind = ControllerKind::kZero;
  c.causality = Causality::kStrictlyCausal;
  c.n = n;
  c.m = m;
  c.p = p;
  return c;
}

Controller offline_controller(int n, int m, int p) {
  Controller c = zero_controller(n, m, p);
  c.kind = ControllerKind::kOffline;
  c.causality = Causality::kNoncausal;
  return c;
}

Controller synth_h2_ih(const LtiPlant& plant, Causality causality) {
  check_causal_request(causality);
  const Matrix q_sqrt = psd_sqrt(plant.Q);
  if (!is_stabilizable(plant.A, plant.Bu)) {
    throw std::invalid_argument("(A, Bu) is not stabilizable");
  }
  if (!is_detectable(plant.A, q_sqrt)) {
    throw std::invalid_argument("(A, Q^{1/2}) is not detectable");
  }
  const int m = plant.control_dim();
  const RiccatiFixedPoint fp = dare_fixed_point(
      plant.A, plant.Bu, Matrix::Identity(m, m), plant.Q);
  if (!fp.verdict.feasible) {
    throw std::runtime_error("LQ Riccati equation failed: " +
                             std::string(to_string(fp.verdict.reason)));
  }
  const FeedbackGains g = feedback_gains(plant.A, plant.Bu, plant.Bw, fp.P);
  Controller c;
  c.kind = ControllerKind::kH2;
  c.causality = causality;
  c.n = plant.state_dim();
  c.m = m;
  c.p = plant.disturbance_dim();
  c.Kx = {g.Kx};
  c.Kw = {causality == Causality::kCausal ? g.Kw
                                          : Matrix(Matrix::Zero(c.m, c.p))};
  c.diagnostics.residual = fp.residual;
  c.diagnostics.iterations = fp.iterations;
  c.diagnostics.closed_loop_radius = spectral_radius(plant.A - plant.Bu * g.Kx);
  c.diagnostics.min_eigenvalue = fp.min_eigenvalue;
  return c;
}

Controller synth_h2_fh(const LtvPlant& plant, Causality causality) {
  check_causal_request(causality);
  validate(plant);
  const int T = plant.horizon();
  Controller c;
  c.kind = ControllerKind::kH2;
  c.causality = causality;
  c.horizon = T;
  c.n = plant.state_dim();
  c.m = plant.control_dim();
  c.p = plant.disturbance_dim();
  c.Kx.resize(T);
  c.Kw.resize(T);
  Matrix P = Matrix::Zero(c.n, c.n);
  for (int t = T - 1; t >= 0; --t) {
    const FeedbackGains g = feedback_gains(plant.A[t], plant.Bu[t], plant.Bw[t], P);
    c.Kx[t] = g.Kx;
    c.Kw[t] = causality == Causality::kCausal ? g.Kw
                                              : Matrix(Matrix::Zero(c.m, c.p));
    P = symmetrize(plant.Q[t] + plant.A[t].transpose() * g.reduced * plant.A[t]);
  }
  c.diagnostics.iterations = T;
  return c;
}

SynthesisResult synth_hinf(const LtiPlant& plant, double gamma,
                           Causality causality, std::optional<int> horizon,
                           const DareOptions& options) {
  check_causal_request(causality);
  if (!(gamma > 0.0)) throw std::invalid_argument("gamma must be positive");
  if (horizon) return synth_hinf(promote(plant, *horizon), gamma, causality);

  SynthesisResult r;
  InfiniteCore core = hinf_infinite(plant.A, plant.Bu, plant.Bw, plant.Q,
                                    gamma, causality, options);
  r.verdict = core.verdict;
  r.diagnostics = core.diag;
  if (!r.verdict.feasible) return r;
  Controller c;
  c.kind = ControllerKind::kHinf;
  c.causality = causality;
  c.gamma = gamma;
  c.n = plant.state_dim();
  c.m = plant.control_dim();
  c.p = plant.disturbance_dim();
  c.Kx = {core.gains.Kx};
  c.Kw = {causality == Causality::kCausal ? core.gains.Kw
                                          : Matrix(Matrix::Zero(c.m, c.p))};
  c.diagnostics = core.diag;
  r.controller = std::move(c);
  return r;
}

SynthesisResult synth_hinf(const LtvPlant& plant, double gamma,
                           Causality causality) {
  check_causal_request(causality);
  const RiccatiSchedule s = hinf_backward(plant, gamma);
  SynthesisResult r;
  r.verdict =
      causality == Causality::kCausal ? s.causal : s.strictly_causal;
  fill_schedule_diagnostics(s, r.diagnostics);
  if (!r.verdict.feasible) return r;
  const int T = plant.horizon();
  Controller c;
  c.kind = ControllerKind::kHinf;
  c.causality = causality;
  c.horizon = T;
  c.gamma = gamma;
  c.n = plant.state_dim();
  c.m = plant.control_dim();
  c.p = plant.disturbance_dim();
  c.Kx.resize(T);
  c.Kw.resize(T);
  for (int t = 0; t < T; ++t) {
    const FeedbackGains g =
        feedback_gains(plant.A[t], plant.Bu[t], plant.Bw[t], s.P[t + 1]);
    c.Kx[t] = g.Kx;
    c.Kw[t] = causality == Causality::kCausal ? g.Kw
                                              : Matrix(Matrix::Zero(c.m, c.p));
  }
  c.diagnostics = r.diagnostics;
  r.controller = std::move(c);
  return r;
}

CompetitivePrep prepare_competitive(const LtiPlant& plant,
                                    const DareOptions& options) {
  CompetitivePrep prep;
  prep.plant = plant;
  prep.factor = spectral_factor_ih(plant, options);
  if (prep.factor.verdict.feasible) {
    prep.synthetic = build_synthetic(plant, prep.factor);
  }
  return prep;
}

SynthesisResult synth_competitive(const CompetitivePrep& prep, double gamma,
                                  Causality causality,
                                  const DareOptions& options) {
  check_causal_request(causality);
  if (!(gamma > 0.0)) throw std::invalid_argument("gamma must be positive");
  SynthesisResult r;
  if (!prep.factor.verdict.feasible) {
    r.verdict = prep.factor.verdict;
    return r;
  }
  const SyntheticSystem& syn = prep.synthetic;
  InfiniteCore core = hinf_infinite(syn.A[0], syn.Bu[0], syn.Bw[0], syn.Q[0],
                                    gamma, causality, options);
  r.verdict = core.verdict;
  r.diagnostics = core.diag;
  r.diagnostics.factor_residual = prep.factor.residual;
  r.diagnostics.whitening_radius = prep.factor.whitening_radius;
  if (!r.verdict.feasible) return r;

  const LtiPlant& plant = prep.plant;
  Controller c;
  c.kind = ControllerKind::kCompetitive;
  c.causality = causality;
  c.gamma = gamma;
  c.n = plant.state_dim();
  c.m = plant.control_dim();
  c.p = plant.disturbance_dim();
  c.L = {core.gains.H.llt().solve(syn.Bu[0].transpose() * core.P)};
  c.Ahat = {syn.A[0]};
  c.Buhat = {syn.Bu[0]};
  c.filter = WPrimeFilter(prep.factor, plant.Bw);
  c.diagnostics = r.diagnostics;
  r.controller = std::move(c);
  return r;
}

SynthesisResult synth_competitive(const LtiPlant& plant, double gamma,
                                  Causality causality,
                                  std::optional<int> horizon,
                                  const DareOptions& options) {
  if (horizon) {
    return synth_competitive(promote(plant, *horizon), gamma, causality);
  }
  return synth_competitive(prepare_competitive(plant, options), gamma,
                           causality, options);
}

SynthesisResult synth_competitive(const LtvPlant& plant, double gamma,
                                  Causality causality) {
  check_causal_request(causality);
  if (!(gamma > 0.0)) throw std::invalid_argument("gamma must be positive");
  SynthesisResult r;
  const WhiteningSchedule ws = whitening_fh(plant);
  if (!ws.verdict.feasible) {
    r.verdict = ws.verdict;
    return r;
  }
  const SyntheticSystem syn = build_synthetic(plant, ws);
  const LtvPlant syn_plant = syn.as_plant();
  const RiccatiSchedule s = hinf_backward(syn_plant, gamma);
  r.verdict =
      causality == Causality::kCausal ? s.causal : s.strictly_causal;
  fill_schedule_diagnostics(s, r.diagnostics);
  if (!r.verdict.feasible) return r;

  const int T = plant.horizon();
  Controller c;
  c.kind = ControllerKind::kCompetitive;
  c.causality = causality;
  c.horizon = T;
  c.gamma = gamma;
  c.n = plant.state_dim();
  c.m = plant.control_dim();
  c.p = plant.disturbance_dim();
  c.L.resize(T);
  for (int t = 0; t < T; ++t) {
    const FeedbackGains g =
        feedback_gains(syn.A[t], syn.Bu[t], syn.Bw[t], s.P[t + 1]);
    c.L[t] = g.H.llt().solve(syn.Bu[t].transpose() * s.P[t + 1]);
  }
  c.Ahat = syn.A;
  c.Buhat = syn.Bu;
  c.filter = WPrimeFilter(ws, plant);
  c.diagnostics = r.diagnostics;
  r.controller = std::move(c);
  return r;
}

ControllerState initial_state(const Controller& controller) {
  ControllerState s;
  if (controller.kind == ControllerKind::kCompetitive) {
    s.xi = Vector::Zero(2 * controller.n);
    s.filter = controller.filter;
    s.wprime = s.filter.current();
  }
  return s;
}

Vector control_step(const Controller& c, ControllerState& state,
                    const Vector& x, const Vector& w) {
  if (c.kind == ControllerKind::kOffline) {
    throw std::logic_error("the offline controller has no online stepping");
  }
  if (!c.infinite() && state.t >= *c.horizon) {
    throw std::out_of_range("time step beyond the controller horizon");
  }
  if (x.size() != c.n || w.size() != c.p) {
    throw std::invalid_argument("state or disturbance has wrong dimension");
  }
  const int k = c.stage(state.t);
  Vector u;
  switch (c.kind) {
    case ControllerKind::kZero:
      u = Vector::Zero(c.m);
      break;
    case ControllerKind::kH2:
    case ControllerKind::kHinf:
      u = -c.Kx[k] * x;
      if (c.causality == Causality::kCausal) u -= c.Kw[k] * w;
      break;
    case ControllerKind::kCompetitive: {
      const Vector next = state.filter.step(w);  // w'_{t+1}
      Vector drive = c.Ahat[k] * state.xi;
      if (c.causality == Causality::kCausal) drive.tail(c.n) += next;
      u = -c.L[k] * drive;
      Vector xi = c.Ahat[k] * state.xi + c.Buhat[k] * u;
      xi.tail(c.n) += next;
      state.xi = std::move(xi);
      state.wprime = next;
      break;
    }
    case ControllerKind::kOffline:
      break;
  }
  ++state.t;
  return u;
}

// ---------------------------------------------------------------------------

double offline_cost_dense(const DenseOperators& ops, const Vector& w_stacked) {
  const Vector b = ops.G * w_stacked;
  const Eigen::Index rows = ops.F.rows();
  Matrix gram = Matrix::Identity(rows, rows);
  gram.noalias() += ops.F * ops.F.transpose();
  return b.dot(gram.llt().solve(b));
}

namespace {

OfflineSolution offline_dense(const LtvPlant& plant,
                              std::span<const Vector> w) {
  const DenseOperators ops = build_dense_operators(plant);
  const Vector ws = stack(w);
  const Vector b = ops.G * ws;
  const Eigen::Index cols = ops.F.cols();
  Matrix normal = Matrix::Identity(cols, cols);
  normal.noalias() += ops.F.transpose() * ops.F;
  const Vector u = -normal.llt().solve(ops.F.transpose() * b);
  OfflineSolution sol;
  sol.route = OfflineRoute::kDense;
  sol.u = unstack(u, plant.control_dim());
  // (I + FF')^{-1} = I - F (I + F'F)^{-1} F'
  sol.cost = b.squaredNorm() + b.dot(ops.F * u);
  return sol;
}

OfflineSolution offline_sweep(const LtvPlant& plant,
                              std::span<const Vector> w) {
  const int T = plant.horizon();
  const int n = plant.state_dim();
  // Cost-to-go x'P_t x + 2 v_t'x + const; u_t = -H^{-1}Bu'(P_{t+1} y + v_{t+1})
  // with y = A x + Bw w.
  std::vector<Matrix> h_inv_bu_t(T);
  std::vector<Matrix> P(T + 1);
  std::vector<Vector> v(T + 1);
  P[T] = Matrix::Zero(n, n);
  v[T] = Vector::Zero(n);
  for (int t = T - 1; t >= 0; --t) {
    const Matrix& A = plant.A[t];
    const Matrix& Bu = plant.Bu[t];
    const Matrix& Pn = P[t + 1];
    const Matrix H = symmetrize(
        Matrix::Identity(Bu.cols(), Bu.cols()) + Bu.transpose() * Pn * Bu);
    h_inv_bu_t[t] = H.llt().solve(Bu.transpose());
    const Matrix pb = Pn * Bu;
    const Matrix M = symmetrize(Pn - pb * h_inv_bu_t[t] * Pn);
    v[t] = A.transpose() * (M * (plant.Bw[t] * w[t]) + v[t + 1] -
                            pb * (h_inv_bu_t[t] * v[t + 1]));
    P[t] = symmetrize(plant.Q[t] + A.transpose() * M * A);
  }
  OfflineSolution sol;
  sol.route = OfflineRoute::kSweep;
  sol.u.resize(T);
  Vector x = plant.initial_state();
  for (int t = 0; t < T; ++t) {
    const Vector y = plant.A[t] * x + plant.Bw[t] * w[t];
    sol.u[t] = -h_inv_bu_t[t] * (P[t + 1] * y + v[t + 1]);
    x = y + plant.Bu[t] * sol.u[t];
  }
  sol.cost = simulate_cost(plant, sol.u, w);
  return sol;
}

}  // namespace

OfflineSolution offline_optimal(const LtvPlant& plant, std::span<const Vector> w,
                                OfflineRoute route) {
  validate(plant);
  if (static_cast<int>(w.size()) != plant.horizon()) {
    throw std::invalid_argument("disturbance length must equal the horizon");
  }
  for (const auto& wt : w) {
    if (wt.size() != plant.disturbance_dim()) {
      throw std::invalid_argument("disturbance has wrong dimension");
    }
  }
  if (route == OfflineRoute::kAuto) {
    const bool large =
        static_cast<long long>(plant.horizon()) * plant.state_dim() > 2000;
    route = (large || !plant.has_zero_initial_state()) ? OfflineRoute::kSweep
                                                       : OfflineRoute::kDense;
  }
  return route == OfflineRoute::kDense ? offline_dense(plant, w)
                                       : offline_sweep(plant, w);
}

LtiTrackingSolver::LtiTrackingSolver(const LtiPlant& plant, int max_horizon) {
  if (max_horizon < 1) throw std::invalid_argument("max_horizon must be >= 1");
  const Matrix& A = plant.A;
  const Matrix& Bu = plant.Bu;
  const Matrix& Bw = plant.Bw;
  const Eigen::Index n = A.rows();
  const Eigen::Index m = Bu.cols();
  const auto size = static_cast<std::size_t>(max_horizon) + 1;
  gx_.resize(size);
  gw_.resize(size);
  gv_.resize(size);
  vw_.resize(size);
  vv_.resize(size);
  Matrix P = Matrix::Zero(n, n);  // cost-to-go with k - 1 steps left
  for (int k = 1; k <= max_horizon; ++k) {
    const Matrix H =
        symmetrize(Matrix::Identity(m, m) + Bu.transpose() * P * Bu);
    const Matrix h_inv_bu_t = H.llt().solve(Bu.transpose());
    const Matrix h_inv_bu_t_p = h_inv_bu_t * P;
    const Matrix M = symmetrize(P - P * Bu * h_inv_bu_t_p);
    gx_[k] = h_inv_bu_t_p * A;
    gw_[k] = h_inv_bu_t_p * Bw;
    gv_[k] = h_inv_bu_t;
    vw_[k] = A.transpose() * M * Bw;
    vv_[k] = A.transpose() *
             (Matrix::Identity(n, n) - P * Bu * h_inv_bu_t);
    P = symmetrize(plant.Q + A.transpose() * M * A);
  }
}

Vector LtiTrackingSolver::first_control(const Vector& x0,
                                        std::span<const Vector> w) const {
  const int L = static_cast<int>(w.size());
  if (L < 1 || L > max_horizon()) {
    throw std::invalid_argument("window length outside the cached range");
  }
  Vector v = Vector::Zero(x0.size());  // v_L
  for (int t = L - 1; t >= 1; --t) {
    const int k = L - t;
    v = vw_[k] * w[t] + vv_[k] * v;
  }
  return -(gx_[L] * x0 + gw_[L] * w[0] + gv_[L] * v);
}

}  // namespace compctl
