#include "compctl/sim.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "compctl/rng.hpp"

namespace compctl {

std::string_view to_string(DisturbanceKind kind) {
  switch (kind) {
    case DisturbanceKind::kWhiteGaussian: return "white-gaussian";
    case DisturbanceKind::kSinusoid: return "sinusoid";
    case DisturbanceKind::kStep: return "step";
    case DisturbanceKind::kDc: return "dc";
    case DisturbanceKind::kSineMeanGaussian: return "sine-mean-gaussian";
    case DisturbanceKind::kMixture: return "mixture";
  }
  return "unknown";
}

DisturbanceKind parse_disturbance_kind(std::string_view text) {
  if (text == "white-gaussian") return DisturbanceKind::kWhiteGaussian;
  if (text == "sinusoid") return DisturbanceKind::kSinusoid;
  if (text == "step") return DisturbanceKind::kStep;
  if (text == "dc") return DisturbanceKind::kDc;
  if (text == "sine-mean-gaussian") return DisturbanceKind::kSineMeanGaussian;
  if (text == "mixture") return DisturbanceKind::kMixture;
  throw std::invalid_argument("unknown disturbance kind: " + std::string(text));
}

namespace {

Vector unit_direction(const DisturbanceSpec& spec) {
  Vector d = spec.direction;
  if (d.size() == 0) {
    d = Vector::Zero(spec.dim);
    if (spec.dim > 0) d(0) = 1.0;
    return d;
  }
  if (d.size() != spec.dim) {
    throw std::invalid_argument("direction has wrong dimension");
  }
  if (spec.normalize_direction) {
    const double norm = d.norm();
    if (norm == 0.0) throw std::invalid_argument("direction must be nonzero");
    d /= norm;
  }
  return d;
}

void add_gaussian(std::vector<Vector>& w, const DisturbanceSpec& spec) {
  PhiloxStream rng(spec.seed, spec.stream);
  for (auto& wt : w) {
    for (Eigen::Index j = 0; j < wt.size(); ++j) wt(j) += spec.sigma * rng.normal();
  }
}

}  // namespace

std::vector<Vector> generate_disturbance(const DisturbanceSpec& spec) {
  if (spec.length < 0 || spec.dim < 1) {
    throw std::invalid_argument("disturbance length/dimension invalid");
  }
  std::vector<Vector> w(spec.length, Vector::Zero(spec.dim));
  switch (spec.kind) {
    case DisturbanceKind::kWhiteGaussian:
      add_gaussian(w, spec);
      break;
    case DisturbanceKind::kSinusoid: {
      const Vector d = unit_direction(spec);
      for (int t = 0; t < spec.length; ++t) {
        w[t] = spec.amplitude * std::sin(spec.omega * t + spec.phase) * d;
      }
      break;
    }
    case DisturbanceKind::kDc: {
      const Vector d = unit_direction(spec);
      for (auto& wt : w) wt = spec.amplitude * d;
      break;
    }
    case DisturbanceKind::kStep: {
      if (spec.levels.empty() ||
          spec.switch_times.size() + 1 != spec.levels.size()) {
        throw std::invalid_argument(
            "step disturbance needs levels.size() == switch_times.size() + 1");
      }
      const Vector d = unit_direction(spec);
      std::size_t k = 0;
      for (int t = 0; t < spec.length; ++t) {
        while (k < spec.switch_times.size() && t >= spec.switch_times[k]) ++k;
        w[t] = spec.levels[k] * d;
      }
      break;
    }
    case DisturbanceKind::kSineMeanGaussian: {
      const Vector d = unit_direction(spec);
      for (int t = 0; t < spec.length; ++t) {
        w[t] = spec.mean_amplitude * std::sin(spec.mean_omega * t) * d;
      }
      add_gaussian(w, spec);
      break;
    }
    case DisturbanceKind::kMixture: {
      if (spec.components.size() != spec.weights.size() ||
          spec.components.empty()) {
        throw std::invalid_argument("mixture needs one weight per component");
      }
      for (std::size_t i = 0; i < spec.components.size(); ++i) {
        DisturbanceSpec c = spec.components[i];
        c.length = spec.length;
        c.dim = spec.dim;
        c.seed = spec.seed;
        c.stream = spec.stream + static_cast<std::uint32_t>(i) + 1;
        const auto part = generate_disturbance(c);
        for (int t = 0; t < spec.length; ++t) w[t] += spec.weights[i] * part[t];
      }
      break;
    }
  }
  return w;
}

namespace {

LtvPlant truncate(const LtvPlant& plant, int T) {
  if (T > plant.horizon()) {
    throw std::invalid_argument("disturbance longer than the plant horizon");
  }
  LtvPlant out;
  out.A.assign(plant.A.begin(), plant.A.begin() + T);
  out.Bu.assign(plant.Bu.begin(), plant.Bu.begin() + T);
  out.Bw.assign(plant.Bw.begin(), plant.Bw.begin() + T);
  out.Q.assign(plant.Q.begin(), plant.Q.begin() + T);
  out.x0 = plant.x0;
  return out;
}

constexpr double kBlowUp = 1e12;

}  // namespace

Trace rollout(const LtvPlant& plant, const Controller& controller,
              std::span<const Vector> w, const std::string& name) {
  const int T = static_cast<int>(w.size());
  Trace trace;
  trace.name = name.empty() ? std::string(to_string(controller.kind)) : name;
  trace.n = plant.state_dim();
  trace.m = plant.control_dim();
  trace.p = plant.disturbance_dim();
  trace.wprime_dim = controller.kind == ControllerKind::kCompetitive
                         ? controller.n
                         : 0;
  if (T == 0) return trace;
  if (T > plant.horizon()) {
    throw std::invalid_argument("disturbance longer than the plant horizon");
  }
  if (controller.n != trace.n || controller.m != trace.m ||
      controller.p != trace.p) {
    throw std::invalid_argument("controller dimensions do not match plant");
  }
  if (!controller.infinite() && *controller.horizon < T) {
    throw std::invalid_argument("controller horizon shorter than rollout");
  }

  std::vector<Vector> planned;
  if (controller.kind == ControllerKind::kOffline) {
    planned = offline_optimal(truncate(plant, T), w).u;
  }
  ControllerState state = initial_state(controller);
  Vector x = plant.initial_state();
  trace.steps.reserve(T);
  double cum = 0.0;
  for (int t = 0; t < T; ++t) {
    TraceStep s;
    s.t = t;
    s.w = w[t];
    s.x = x;
    s.wprime = trace.wprime_dim > 0 ? state.wprime : Vector();
    s.u = controller.kind == ControllerKind::kOffline
              ? planned[t]
              : control_step(controller, state, x, w[t]);
    s.step_cost = x.dot(plant.Q[t] * x) + s.u.squaredNorm();
    cum += s.step_cost;
    s.cum_cost = cum;
    trace.steps.push_back(std::move(s));
    x = plant.A[t] * x + plant.Bu[t] * trace.steps.back().u + plant.Bw[t] * w[t];
    if (!x.allFinite() || x.cwiseAbs().maxCoeff() > kBlowUp) {
      trace.failed = true;
      trace.failure = "diverged at step " + std::to_string(t + 1);
      break;
    }
  }
  trace.total_cost = cum;
  return trace;
}

Trace rollout(const LtiPlant& plant, const Controller& controller,
              std::span<const Vector> w, const std::string& name) {
  return rollout(promote(plant, std::max<int>(1, static_cast<int>(w.size()))),
                 controller, w, name);
}

std::optional<double> cost_ratio(double alg, double opt) {
  if (opt < 1e-12) {
    if (alg < 1e-12) return 1.0;
    return std::nullopt;
  }
  return alg / opt;
}

namespace {

Trace run_job(const LtvPlant& plant, std::span<const NamedController> ctrls,
              std::span<const Vector> w, int job) {
  const int n = plant.state_dim();
  const int m = plant.control_dim();
  const int p = plant.disturbance_dim();
  try {
    if (job == 0) return rollout(plant, offline_controller(n, m, p), w, "offline");
    const auto& nc = ctrls[job - 1];
    return rollout(plant, nc.controller, w, nc.name);
  } catch (const std::exception& e) {
    Trace t;
    t.name = job == 0 ? "offline" : ctrls[job - 1].name;
    t.n = n;
    t.m = m;
    t.p = p;
    t.failed = true;
    t.failure = e.what();
    return t;
  }
}

Comparison assemble(std::vector<Trace> traces) {
  Comparison c;
  c.opt_cost = traces[0].total_cost;
  for (auto& t : traces) {
    ComparisonRow row;
    row.name = t.name;
    row.total_cost = t.total_cost;
    if (t.failed) {
      row.status = "failed: " + t.failure;
    } else {
      row.ratio_to_opt = cost_ratio(t.total_cost, c.opt_cost);
      row.status = row.ratio_to_opt ? "ok" : "degenerate-denominator";
    }
    t.ratio_to_opt = row.ratio_to_opt;
    c.rows.push_back(std::move(row));
  }
  c.traces = std::move(traces);
  return c;
}

}  // namespace

Comparison compare(const LtvPlant& plant,
                   std::span<const NamedController> controllers,
                   std::span<const Vector> w) {
  const int jobs = static_cast<int>(controllers.size()) + 1;
  std::vector<Trace> traces(jobs);
#pragma omp parallel for schedule(dynamic)
  for (int j = 0; j < jobs; ++j) traces[j] = run_job(plant, controllers, w, j);
  return assemble(std::move(traces));
}

Comparison compare_serial(const LtvPlant& plant,
                          std::span<const NamedController> controllers,
                          std::span<const Vector> w) {
  const int jobs = static_cast<int>(controllers.size()) + 1;
  std::vector<Trace> traces(jobs);
  for (int j = 0; j < jobs; ++j) traces[j] = run_job(plant, controllers, w, j);
  return assemble(std::move(traces));
}

std::string format_double(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

void write_trace_csv(std::ostream& out, const Trace& trace) {
  out << "t";
  for (int j = 0; j < trace.p; ++j) out << ",w_" << j;
  for (int j = 0; j < trace.n; ++j) out << ",wprime_" << j;
  for (int j = 0; j < trace.n; ++j) out << ",x_" << j;
  for (int j = 0; j < trace.m; ++j) out << ",u_" << j;
  out << ",step_cost,cum_cost\n";
  for (const auto& s : trace.steps) {
    out << s.t;
    for (int j = 0; j < trace.p; ++j) out << ',' << format_double(s.w(j));
    for (int j = 0; j < trace.n; ++j) {
      out << ',' << format_double(j < s.wprime.size() ? s.wprime(j) : 0.0);
    }
    for (int j = 0; j < trace.n; ++j) out << ',' << format_double(s.x(j));
    for (int j = 0; j < trace.m; ++j) out << ',' << format_double(s.u(j));
    out << ',' << format_double(s.step_cost) << ','
        << format_double(s.cum_cost) << '\n';
  }
  if (trace.failed) out << "# FAILED: " << trace.failure << '\n';
}

std::string trace_csv(const Trace& trace) {
  std::ostringstream out;
  write_trace_csv(out, trace);
  return out.str();
}

}  // namespace compctl
