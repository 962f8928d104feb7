#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "compctl/factorization.hpp"
#include "compctl/linalg.hpp"
#include "compctl/model.hpp"
#include "compctl/riccati.hpp"

namespace compctl {

enum class ControllerKind { kH2, kHinf, kCompetitive, kOffline, kZero };
enum class Causality { kCausal, kStrictlyCausal, kNoncausal };

std::string_view to_string(ControllerKind kind);
std::string_view to_string(Causality causality);
ControllerKind parse_controller_kind(std::string_view text);
Causality parse_causality(std::string_view text);

/// Numbers reported alongside a synthesized controller.
struct SynthesisDiagnostics {
  double residual = 0.0;
  long long iterations = 0;
  double closed_loop_radius = 0.0;
  bool inertia_match = true;
  bool psd = true;
  double min_eigenvalue = 0.0;
  // Largest eigenvalue of the causal condition's left side, maximized over
  // stages for finite horizons.
  double causal_lhs = 0.0;
  double strict_w_lhs = 0.0;
  double strict_u_lhs = 0.0;
  bool strict_u_channel_ok = true;
  // Extra strictly-causal infinite-horizon check: "pass", "fail",
  // "condition-untestable" or "" when not applicable.
  std::string extra_condition;
  double factor_residual = 0.0;
  double whitening_radius = 0.0;
};

/// A synthesized controller. Feedback kinds use
///   u_t = -Kx_t x_t - Kw_t w_t      (Kw dropped when strictly causal);
/// the competitive kind uses the synthetic state xi and the w' filter:
///   u_t = -L_t (Ahat_t xi_t + Bwhat w'_{t+1}).
/// Infinite-horizon controllers hold a single stage.
struct Controller {
  ControllerKind kind = ControllerKind::kZero;
  Causality causality = Causality::kCausal;
  std::optional<int> horizon;  // empty means infinite
  std::optional<double> gamma;
  int n = 0;
  int m = 0;
  int p = 0;

  std::vector<Matrix> Kx;
  std::vector<Matrix> Kw;

  std::vector<Matrix> L;     // m x 2n
  std::vector<Matrix> Ahat;  // 2n x 2n
  std::vector<Matrix> Buhat; // 2n x m
  WPrimeFilter filter;       // template, nu = 0

  SynthesisDiagnostics diagnostics;

  bool infinite() const { return !horizon.has_value(); }
  int stage(int t) const { return infinite() ? 0 : t; }
  int internal_dim() const {
    return kind == ControllerKind::kCompetitive ? 2 * n : 0;
  }
};

struct SynthesisResult {
  std::optional<Controller> controller;
  Verdict verdict;
  SynthesisDiagnostics diagnostics;

  bool feasible() const { return verdict.feasible && controller.has_value(); }
};

/// Runtime state of a causal controller.
struct ControllerState {
  int t = 0;
  Vector xi;      // synthetic state (competitive only)
  WPrimeFilter filter;
  Vector wprime;  // w'_t for the current step (zero-length if unused)
};

ControllerState initial_state(const Controller& controller);

/// Emits u_t and advances the internal state. The competitive controller
/// first absorbs w_t into the w' filter; strictly-causal variants never use
/// w_t in u_t.
Vector control_step(const Controller& controller, ControllerState& state,
                    const Vector& x, const Vector& w);

Controller zero_controller(int n, int m, int p);
Controller offline_controller(int n, int m, int p);

/// Infinite-horizon LQ controller. The causal form also feeds the current
/// disturbance forward (the gamma -> infinity limit of the causal H-infinity
/// controller); the strictly-causal form is classic state feedback. Throws
/// std::invalid_argument if the PBH preconditions fail.
Controller synth_h2_ih(const LtiPlant& plant,
                       Causality causality = Causality::kCausal);

/// Finite-horizon LQ counterpart over the plant's horizon.
Controller synth_h2_fh(const LtvPlant& plant,
                       Causality causality = Causality::kCausal);

SynthesisResult synth_hinf(const LtiPlant& plant, double gamma,
                           Causality causality, std::optional<int> horizon,
                           const DareOptions& options = {});
SynthesisResult synth_hinf(const LtvPlant& plant, double gamma,
                           Causality causality);

SynthesisResult synth_competitive(const LtiPlant& plant, double gamma,
                                  Causality causality,
                                  std::optional<int> horizon,
                                  const DareOptions& options = {});
SynthesisResult synth_competitive(const LtvPlant& plant, double gamma,
                                  Causality causality);

/// Precomputed infinite-horizon ingredients of competitive synthesis that do
/// not depend on gamma (used by bisection).
struct CompetitivePrep {
  LtiPlant plant;
  SpectralFactor factor;
  SyntheticSystem synthetic;
};
CompetitivePrep prepare_competitive(const LtiPlant& plant,
                                    const DareOptions& options = {});
SynthesisResult synth_competitive(const CompetitivePrep& prep, double gamma,
                                  Causality causality,
                                  const DareOptions& options = {});

// ---------------------------------------------------------------------------
// Clairvoyant offline optimum.

enum class OfflineRoute { kAuto, kDense, kSweep };

struct OfflineSolution {
  std::vector<Vector> u;
  double cost = 0.0;
  OfflineRoute route = OfflineRoute::kDense;
};

/// Minimizes sum x'Qx + u'u given the whole disturbance sequence. The dense
/// route requires x0 = 0 and solves (I + F'F) u = -F'G w; the sweep route is
/// a backward Riccati/costate pass. kAuto picks the sweep when T n > 2000 or
/// x0 != 0.
OfflineSolution offline_optimal(const LtvPlant& plant, std::span<const Vector> w,
                                OfflineRoute route = OfflineRoute::kAuto);

/// OPT(w) = w'G'(I + FF')^{-1}G w evaluated densely.
double offline_cost_dense(const DenseOperators& ops, const Vector& w_stacked);

/// Receding-horizon helper for a time-invariant plant: caches the gains
/// indexed by steps-to-go so repeated first-control queries cost O(L n^2).
class LtiTrackingSolver {
 public:
  LtiTrackingSolver(const LtiPlant& plant, int max_horizon);
  /// First control of the optimal plan from x0 over w (|w| <= max_horizon).
  Vector first_control(const Vector& x0, std::span<const Vector> w) const;
  int max_horizon() const { return static_cast<int>(gx_.size()) - 1; }

 private:
  // Index k = steps to go at the stage being controlled (1..max_horizon).
  std::vector<Matrix> gx_, gw_, gv_, vw_, vv_;
};

}  // namespace compctl
