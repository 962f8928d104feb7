#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "compctl/controllers.hpp"
#include "compctl/linalg.hpp"
#include "compctl/model.hpp"

namespace compctl {

enum class DisturbanceKind {
  kWhiteGaussian,
  kSinusoid,
  kStep,
  kDc,
  kSineMeanGaussian,
  kMixture,
};

std::string_view to_string(DisturbanceKind kind);
DisturbanceKind parse_disturbance_kind(std::string_view text);

/// Disturbance recipe. `direction` defaults to e_1 and is normalized to unit
/// norm unless `normalize_direction` is false. Gaussian draws come from the
/// Philox stream (seed, stream) and fill w_t coordinate by coordinate in
/// time order.
struct DisturbanceSpec {
  DisturbanceKind kind = DisturbanceKind::kWhiteGaussian;
  int length = 0;
  int dim = 1;
  std::uint64_t seed = 0;
  std::uint32_t stream = 0;

  double sigma = 1.0;      // white-gaussian, sine-mean-gaussian
  double omega = 0.0;      // sinusoid: amplitude * sin(omega t + phase) v
  double amplitude = 1.0;
  double phase = 0.0;
  Vector direction;
  bool normalize_direction = true;

  std::vector<double> levels;     // step: levels[k] on [switch[k-1], switch[k])
  std::vector<int> switch_times;  // increasing, size = levels.size() - 1

  double mean_amplitude = 1.0;    // sine-mean: mean = a sin(mean_omega t) v
  double mean_omega = 1.0;

  std::vector<DisturbanceSpec> components;  // mixture
  std::vector<double> weights;
};

/// Deterministic expansion of a spec into w_0 .. w_{length-1}.
std::vector<Vector> generate_disturbance(const DisturbanceSpec& spec);

struct TraceStep {
  int t = 0;
  Vector w;
  Vector wprime;  // zeros for controllers without a synthetic disturbance
  Vector x;
  Vector u;
  double step_cost = 0.0;
  double cum_cost = 0.0;
};

struct Trace {
  std::string name;
  int n = 0;
  int m = 0;
  int p = 0;
  int wprime_dim = 0;
  std::vector<TraceStep> steps;
  double total_cost = 0.0;
  bool failed = false;
  std::string failure;
  std::optional<double> ratio_to_opt;
};

/// Closed-loop rollout of x_{t+1} = A x + Bu u + Bw w. The offline
/// controller is precomputed by offline_optimal and replayed. A non-finite
/// state or |x| > 1e12 ends the trace early with `failed` set.
Trace rollout(const LtvPlant& plant, const Controller& controller,
              std::span<const Vector> w, const std::string& name = {});
Trace rollout(const LtiPlant& plant, const Controller& controller,
              std::span<const Vector> w, const std::string& name = {});

struct NamedController {
  std::string name;
  Controller controller;
};

struct ComparisonRow {
  std::string name;
  double total_cost = 0.0;
  std::optional<double> ratio_to_opt;  // empty when degenerate
  std::string status;                  // "ok", "degenerate-denominator", ...
};

struct Comparison {
  double opt_cost = 0.0;
  std::vector<ComparisonRow> rows;  // OPT row first, then inputs in order
  std::vector<Trace> traces;        // same order as rows
};

/// Ratio convention: OPT < 1e-12 gives 1 if ALG < 1e-12, otherwise the row
/// is flagged "degenerate-denominator".
std::optional<double> cost_ratio(double alg, double opt);

/// Runs every controller plus the offline optimum on `w`. Rollouts execute
/// in parallel (OpenMP); results are assembled by index.
Comparison compare(const LtvPlant& plant,
                   std::span<const NamedController> controllers,
                   std::span<const Vector> w);
/// Sequential reference of compare().
Comparison compare_serial(const LtvPlant& plant,
                          std::span<const NamedController> controllers,
                          std::span<const Vector> w);

/// Trace CSV: t, w_*, wprime_*, x_*, u_*, step_cost, cum_cost; 17 significant
/// digits; a "# FAILED: <reason>" footer row for failed traces.
void write_trace_csv(std::ostream& out, const Trace& trace);
std::string trace_csv(const Trace& trace);

/// Formats a double with 17 significant digits.
std::string format_double(double value);

}  // namespace compctl
