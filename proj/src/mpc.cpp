#include "compctl/mpc.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <stdexcept>

#include "compctl/search.hpp"

namespace compctl {

void PendulumParams::validate() const {
  if (!(m > 0 && l > 0 && g > 0 && J > 0)) {
    throw std::invalid_argument("pendulum parameters must be positive");
  }
  if (!(dt > 0 && dt <= 0.1)) {
    throw std::invalid_argument("dt must lie in (0, 0.1]");
  }
}

std::array<double, 2> pendulum_derivative(const PendulumState& s, double u,
                                          double w, const PendulumParams& p) {
  const double c = std::cos(s.theta);
  return {s.theta_dot,
          (p.m * p.g * p.l / p.J) * std::sin(s.theta) + (p.l / p.J) * (u + w) * c};
}

LtiPlant linearize(const PendulumState& s, const PendulumParams& p) {
  const double c = std::cos(s.theta);
  Matrix A(2, 2);
  A << 1.0, p.dt, p.dt * (p.m * p.g * p.l / p.J) * c, 1.0;
  Matrix B(2, 1);
  B << 0.0, p.dt * (p.l / p.J) * c;
  return normalize_control_weight(A, B, B, Matrix::Identity(2, 2));
}

double mpc_initial_gamma(ControllerKind kind, Causality causality,
                         const PendulumState& state,
                         const PendulumParams& params, double tol) {
  const LtiPlant plant = linearize(state, params);
  GammaSearchOptions opts;
  opts.tol = tol;
  GammaOptimum opt;
  if (kind == ControllerKind::kCompetitive) {
    opt = optimize_competitive(plant, causality, std::nullopt, opts);
  } else if (kind == ControllerKind::kHinf) {
    opt = optimize_hinf(plant, causality, std::nullopt, opts);
  } else {
    throw std::invalid_argument("gamma applies to hinf and competitive only");
  }
  if (!opt.search.found) {
    throw std::runtime_error("no feasible gamma for the initial linearization");
  }
  return opt.search.gamma;
}

namespace {

// Forward Euler on the nonlinear model.
PendulumState advance(const PendulumState& s, double u, double w,
                      const PendulumParams& p) {
  const auto d = pendulum_derivative(s, u, w, p);
  return {s.theta + p.dt * d[0], s.theta_dot + p.dt * d[1]};
}

constexpr std::size_t kTrackingCacheSize = 16;

}  // namespace

MpcResult mpc_rollout(const MpcOptions& options, std::span<const double> w,
                      const PendulumParams& params) {
  params.validate();
  if (w.empty()) throw std::invalid_argument("steps must be >= 1");
  const int steps = static_cast<int>(w.size());
  const ControllerKind kind = options.kind;
  const bool needs_gamma =
      kind == ControllerKind::kHinf || kind == ControllerKind::kCompetitive;

  MpcResult result;
  Trace& trace = result.trace;
  trace.name = std::string(to_string(kind));
  trace.n = 2;
  trace.m = 1;
  trace.p = 1;
  trace.wprime_dim = kind == ControllerKind::kCompetitive ? 2 : 0;

  if (needs_gamma) {
    result.gamma = options.gamma
                       ? *options.gamma
                       : options.gamma_factor *
                             mpc_initial_gamma(kind, options.causality,
                                               options.initial, params,
                                               options.gamma_tol);
  }

  const LtiPlant frozen = linearize(options.initial, params);
  std::map<long long, Controller> gains;
  std::map<long long, std::shared_ptr<const LtiTrackingSolver>> planners;

  auto key_of = [&](double theta) {
    return options.freeze ? 0LL
                          : static_cast<long long>(std::llround(theta / options.quantum));
  };
  auto plant_for = [&](long long key) {
    if (options.freeze) return frozen;
    return linearize({static_cast<double>(key) * options.quantum, 0.0}, params);
  };
  auto controller_for = [&](long long key) -> const Controller* {
    if (auto it = gains.find(key); it != gains.end()) {
      ++result.cache_hits;
      return &it->second;
    }
    ++result.cache_misses;
    const LtiPlant plant = plant_for(key);
    std::optional<Controller> c;
    switch (kind) {
      case ControllerKind::kH2:
        c = synth_h2_ih(plant, options.causality);
        break;
      case ControllerKind::kHinf:
        c = synth_hinf(plant, *result.gamma, options.causality, std::nullopt)
                .controller;
        break;
      case ControllerKind::kCompetitive:
        c = synth_competitive(plant, *result.gamma, options.causality,
                              std::nullopt)
                .controller;
        break;
      case ControllerKind::kZero:
        c = zero_controller(2, 1, 1);
        break;
      case ControllerKind::kOffline:
        break;
    }
    if (!c) return nullptr;
    return &gains.emplace(key, std::move(*c)).first->second;
  };
  auto planner_for = [&](long long key) {
    if (auto it = planners.find(key); it != planners.end()) {
      ++result.cache_hits;
      return it->second;
    }
    ++result.cache_misses;
    if (planners.size() >= kTrackingCacheSize) planners.clear();
    auto solver = std::make_shared<const LtiTrackingSolver>(plant_for(key), steps);
    planners.emplace(key, solver);
    return solver;
  };

  std::vector<Vector> w_vec(steps, Vector(1));
  for (int t = 0; t < steps; ++t) w_vec[t](0) = w[t];

  PendulumState state = options.initial;
  ControllerState cstate;
  bool have_state = false;
  double cum = 0.0;
  trace.steps.reserve(steps);
  for (int t = 0; t < steps; ++t) {
    const long long key = key_of(state.theta);
    Vector x(2);
    x << state.theta, state.theta_dot;
    Vector u;
    Vector wprime;
    if (kind == ControllerKind::kOffline) {
      const auto planner = planner_for(key);
      u = planner->first_control(
          x, std::span<const Vector>(w_vec).subspan(static_cast<std::size_t>(t)));
    } else {
      const Controller* c = controller_for(key);
      if (c == nullptr) {
        result.failed = true;
        result.failed_step = t;
        result.status = "infeasible";
        trace.failed = true;
        trace.failure = "synthesis infeasible at step " + std::to_string(t);
        break;
      }
      if (!have_state) {
        cstate = initial_state(*c);
        have_state = true;
      }
      // Internal filter states carry over; only the matrices change.
      if (kind == ControllerKind::kCompetitive) cstate.filter.retarget(c->filter);
      wprime = cstate.wprime;
      u = control_step(*c, cstate, x, w_vec[t]);
    }
    TraceStep s;
    s.t = t;
    s.w = w_vec[t];
    s.x = x;
    s.wprime = wprime;
    s.u = u;
    s.step_cost = x.squaredNorm() + u.squaredNorm();
    cum += s.step_cost;
    s.cum_cost = cum;
    trace.steps.push_back(std::move(s));

    if (options.freeze) {
      const Vector next = frozen.A * x + frozen.Bu * u + frozen.Bw * w_vec[t];
      state = {next(0), next(1)};
    } else {
      state = advance(state, u(0), w[t], params);
    }
    if (!std::isfinite(state.theta) || !std::isfinite(state.theta_dot) ||
        std::hypot(state.theta, state.theta_dot) > options.blow_up) {
      result.failed = true;
      result.failed_step = t + 1;
      result.status = "diverged";
      trace.failed = true;
      trace.failure = "diverged at step " + std::to_string(t + 1);
      break;
    }
  }
  trace.total_cost = cum;
  return result;
}

}  // namespace compctl
