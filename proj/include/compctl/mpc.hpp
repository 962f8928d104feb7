#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>

#include "compctl/controllers.hpp"
#include "compctl/model.hpp"
#include "compctl/sim.hpp"

namespace compctl {

struct PendulumParams {
  double m = 1.0;
  double l = 1.0;
  double g = 1.0;
  double J = 1.0;
  double dt = 0.001;

  /// Throws std::invalid_argument unless all parameters are positive and
  /// dt lies in (0, 0.1].
  void validate() const;
};

struct PendulumState {
  double theta = 0.0;
  double theta_dot = 0.0;
};

/// (d theta, d theta_dot) for torque u and disturbance torque w.
std::array<double, 2> pendulum_derivative(const PendulumState& state, double u,
                                          double w, const PendulumParams& params);

/// Forward-Euler discretization of the Jacobian at (state, u = 0, w = 0),
/// packaged as a plant with Q = I and R = I.
LtiPlant linearize(const PendulumState& state, const PendulumParams& params);

struct MpcOptions {
  ControllerKind kind = ControllerKind::kCompetitive;
  Causality causality = Causality::kCausal;
  std::optional<double> gamma;  // fixed level; otherwise factor * bisection
  double gamma_factor = 1.01;
  double gamma_tol = 1e-3;
  double quantum = 1e-3;        // theta quantization of the gain cache
  bool freeze = false;          // keep the initial linearization throughout
  PendulumState initial;
  double blow_up = 1e6;
};

struct MpcResult {
  Trace trace;
  std::optional<double> gamma;
  bool failed = false;
  int failed_step = -1;
  std::string status = "ok";  // "ok", "diverged", "infeasible"
  std::size_t cache_hits = 0;
  std::size_t cache_misses = 0;
};

/// Iterative-linearization rollout: at each step the controller of the
/// requested kind is synthesized (or fetched from a cache keyed by the
/// quantized angle) for the local LTI model, one control is applied, and the
/// nonlinear state advances by forward Euler with the true disturbance.
/// Controller-internal filter states persist across relinearizations. The
/// offline kind applies the first control of the clairvoyant plan over the
/// remaining disturbance on the frozen local model.
MpcResult mpc_rollout(const MpcOptions& options, std::span<const double> w,
                      const PendulumParams& params = {});

/// Bisection-optimal gamma for the linearization at `state` (hinf or
/// competitive).
double mpc_initial_gamma(ControllerKind kind, Causality causality,
                         const PendulumState& state,
                         const PendulumParams& params, double tol = 1e-3);

}  // namespace compctl
