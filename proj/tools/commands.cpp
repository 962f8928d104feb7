#include "commands.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>

#include "compctl/controllers.hpp"
#include "compctl/freq.hpp"
#include "compctl/io.hpp"
#include "compctl/mpc.hpp"
#include "compctl/rng.hpp"
#include "compctl/search.hpp"
#include "compctl/sim.hpp"
#include "verify.hpp"

namespace fs = std::filesystem;

namespace compctl::tools {
namespace {

// Raised for outcomes that are valid answers rather than failures: an
// infeasible fixed gamma or an unbounded search.
struct Infeasible {
  Json payload;
};

std::uint64_t default_seed() {
  if (const char* env = std::getenv("COMPCTL_SEED")) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      throw std::invalid_argument("COMPCTL_SEED must be a non-negative integer");
    }
  }
  return 0;
}

std::optional<int> parse_horizon(const std::string& text) {
  if (text.empty() || text == "infinite") return std::nullopt;
  std::size_t used = 0;
  const int T = std::stoi(text, &used);
  if (used != text.size() || T < 1) {
    throw std::invalid_argument("horizon must be \"infinite\" or a positive integer");
  }
  return T;
}

Json horizon_json(std::optional<int> h) {
  return h ? Json(*h) : Json("infinite");
}

Json search_to_json(const GammaSearchResult& s) {
  return Json{{"found", s.found},
              {"lo", s.lo},
              {"hi", s.hi},
              {"iterations", s.iterations},
              {"achieved_tol", s.achieved_tol},
              {"lo_at_bound", s.lo_at_bound},
              {"warnings", s.warnings}};
}

Json diagnostics_json(const SynthesisDiagnostics& d) {
  return Json{{"riccati_residual", d.residual},
              {"iterations", d.iterations},
              {"closed_loop_radius", d.closed_loop_radius},
              {"inertia_match", d.inertia_match},
              {"psd", d.psd},
              {"min_eigenvalue", d.min_eigenvalue},
              {"causal_lhs", d.causal_lhs},
              {"strict_w_lhs", d.strict_w_lhs},
              {"strict_u_lhs", d.strict_u_lhs},
              {"strict_u_channel_ok", d.strict_u_channel_ok},
              {"extra_condition", d.extra_condition},
              {"factor_residual", d.factor_residual},
              {"whitening_radius", d.whitening_radius}};
}

void write_json_file(const fs::path& path, const Json& j) {
  write_file_atomic(path, j.dump(2) + "\n");
}

fs::path ensure_dir(const std::string& dir) {
  const fs::path p(dir);
  fs::create_directories(p);
  return p;
}

// ---------------------------------------------------------------------------
// Controller construction shared by synth, simulate and freq.

struct SynthRequest {
  ControllerKind kind = ControllerKind::kH2;
  Causality causality = Causality::kCausal;
  std::optional<int> horizon;
  std::optional<double> gamma;  // fixed level, otherwise bisection
  double tol = 1e-3;
};

struct SynthOutcome {
  Controller controller;
  Json report;
};

SynthOutcome synthesize(const LtiPlant& plant, const SynthRequest& req) {
  SynthOutcome out;
  Json& r = out.report;
  r["schema_version"] = kSchemaVersion;
  r["mode"] = std::string(to_string(req.kind));
  r["causality"] = std::string(to_string(req.causality));
  r["horizon"] = horizon_json(req.horizon);

  if (req.kind == ControllerKind::kH2) {
    out.controller = req.horizon ? synth_h2_fh(promote(plant, *req.horizon),
                                               req.causality)
                                 : synth_h2_ih(plant, req.causality);
    r["status"] = "ok";
    r["diagnostics"] = diagnostics_json(out.controller.diagnostics);
    return out;
  }
  if (req.kind == ControllerKind::kZero) {
    out.controller = zero_controller(plant.state_dim(), plant.control_dim(),
                                     plant.disturbance_dim());
    r["status"] = "ok";
    return out;
  }
  if (req.kind == ControllerKind::kOffline) {
    out.controller = offline_controller(plant.state_dim(), plant.control_dim(),
                                        plant.disturbance_dim());
    r["status"] = "ok";
    return out;
  }

  const bool competitive = req.kind == ControllerKind::kCompetitive;
  SynthesisResult result;
  if (req.gamma) {
    result = competitive
                 ? synth_competitive(plant, *req.gamma, req.causality, req.horizon)
                 : synth_hinf(plant, *req.gamma, req.causality, req.horizon);
  } else {
    GammaSearchOptions opts;
    opts.tol = req.tol;
    const GammaOptimum opt =
        competitive ? optimize_competitive(plant, req.causality, req.horizon, opts)
                    : optimize_hinf(plant, req.causality, req.horizon, opts);
    r["search"] = search_to_json(opt.search);
    if (!opt.search.found) {
      r["status"] = "infeasible";
      r["verdict"] = {{"feasible", false},
                      {"reason", "unbounded-gamma"},
                      {"detail", "no feasible level up to the search cap"}};
      throw Infeasible{r};
    }
    result = opt.synthesis;
  }
  if (!result.feasible()) {
    r["status"] = "infeasible";
    r["verdict"] = verdict_to_json(result.verdict);
    if (req.gamma) r["gamma"] = *req.gamma;
    r["diagnostics"] = diagnostics_json(result.diagnostics);
    throw Infeasible{r};
  }
  out.controller = *result.controller;
  const double g = *out.controller.gamma;
  r["status"] = "ok";
  r["gamma"] = g;
  r["gamma_squared"] = g * g;
  r["verdict"] = verdict_to_json(result.verdict);
  r["diagnostics"] = diagnostics_json(out.controller.diagnostics);
  return out;
}

std::vector<ControllerKind> parse_kinds(const std::vector<std::string>& names) {
  std::vector<ControllerKind> kinds;
  for (const auto& name : names) {
    if (name == "all") {
      for (auto k : {ControllerKind::kH2, ControllerKind::kHinf,
                     ControllerKind::kCompetitive, ControllerKind::kOffline}) {
        if (std::find(kinds.begin(), kinds.end(), k) == kinds.end()) kinds.push_back(k);
      }
      continue;
    }
    const ControllerKind k = parse_controller_kind(name);
    if (std::find(kinds.begin(), kinds.end(), k) == kinds.end()) kinds.push_back(k);
  }
  if (kinds.empty()) throw std::invalid_argument("no controllers selected");
  return kinds;
}

// ---------------------------------------------------------------------------

struct SynthArgs {
  std::string plant;
  std::string mode = "competitive";
  std::string causality = "causal";
  std::string horizon = "infinite";
  std::optional<double> gamma;
  bool optimize = false;
  double tol = 1e-3;
  std::string out;
  std::string report;
};

int cmd_synth(const SynthArgs& a, std::ostream& out) {
  const PlantFile pf = plant_from_json(read_json(a.plant));
  SynthRequest req;
  req.kind = parse_controller_kind(a.mode);
  if (req.kind == ControllerKind::kOffline || req.kind == ControllerKind::kZero) {
    throw std::invalid_argument("synth mode must be h2, hinf or competitive");
  }
  req.causality = parse_causality(a.causality);
  req.horizon = a.horizon == "infinite" && pf.horizon ? std::nullopt
                                                      : parse_horizon(a.horizon);
  req.tol = a.tol;
  const bool needs_gamma = req.kind != ControllerKind::kH2;
  if (needs_gamma && !a.gamma && !a.optimize) {
    throw std::invalid_argument("hinf and competitive need --gamma or --optimize-gamma");
  }
  if (a.gamma && a.optimize) {
    throw std::invalid_argument("--gamma and --optimize-gamma are exclusive");
  }
  if (!needs_gamma && (a.gamma || a.optimize)) {
    throw std::invalid_argument("h2 synthesis takes no gamma");
  }
  if (a.gamma && !(*a.gamma > 0)) throw std::invalid_argument("gamma must be positive");
  req.gamma = a.gamma;

  SynthOutcome s = synthesize(pf.plant, req);
  if (!a.out.empty()) {
    write_json_file(a.out, controller_to_json(s.controller));
    s.report["controller_path"] = a.out;
  }
  if (!a.report.empty()) write_json_file(a.report, s.report);
  out << s.report.dump(2) << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct SimulateArgs {
  std::string plant;
  std::vector<std::string> controllers{"all"};
  std::string causality = "causal";
  std::string horizon = "infinite";
  std::string disturbance_file;
  std::string kind = "white-gaussian";
  double sigma = 1.0;
  double omega = 0.0;
  double amplitude = 1.0;
  std::vector<double> direction;
  std::string direction_from;
  std::string direction_key = "worst";
  int steps = 1000;
  std::optional<std::uint64_t> seed;
  double tol = 1e-3;
  std::optional<double> gamma_competitive;
  std::optional<double> gamma_hinf;
  std::string out = "out";
};

int cmd_simulate(const SimulateArgs& a, std::ostream& out) {
  const PlantFile pf = plant_from_json(read_json(a.plant));
  const LtiPlant& plant = pf.plant;
  if (a.steps < 1) throw std::invalid_argument("steps must be >= 1");
  const std::uint64_t seed = a.seed ? *a.seed : default_seed();
  const int p = plant.disturbance_dim();

  DisturbanceSpec spec;
  if (!a.disturbance_file.empty()) {
    spec = disturbance_from_json(read_json(a.disturbance_file), a.steps, p);
    if (a.seed) spec.seed = *a.seed;
  } else {
    spec.kind = parse_disturbance_kind(a.kind);
    spec.length = a.steps;
    spec.dim = p;
    spec.seed = seed;
    spec.sigma = a.sigma;
    spec.omega = a.omega;
    spec.amplitude = a.amplitude;
    if (!a.direction.empty()) {
      spec.direction = Eigen::Map<const Vector>(a.direction.data(),
                                                static_cast<Eigen::Index>(a.direction.size()));
    }
  }
  if (!a.direction_from.empty()) {
    const Json ext = read_json(a.direction_from);
    if (!ext.contains(a.direction_key)) {
      throw std::invalid_argument("extremal file has no \"" + a.direction_key + "\" entry");
    }
    spec.direction = vector_from_json(ext.at(a.direction_key));
  }
  if (spec.dim != p) throw std::invalid_argument("disturbance dim does not match the plant");
  const std::vector<Vector> w = generate_disturbance(spec);

  const std::optional<int> horizon = parse_horizon(a.horizon);
  SynthRequest base;
  base.causality = parse_causality(a.causality);
  base.horizon = horizon ? std::optional<int>(static_cast<int>(w.size())) : std::nullopt;
  base.tol = a.tol;

  Json synth_reports = Json::object();
  std::vector<NamedController> controllers;
  for (ControllerKind kind : parse_kinds(a.controllers)) {
    if (kind == ControllerKind::kOffline) continue;  // always included
    SynthRequest req = base;
    req.kind = kind;
    if (kind == ControllerKind::kCompetitive) req.gamma = a.gamma_competitive;
    if (kind == ControllerKind::kHinf) req.gamma = a.gamma_hinf;
    SynthOutcome s = synthesize(plant, req);
    synth_reports[std::string(to_string(kind))] = s.report;
    controllers.push_back({std::string(to_string(kind)), std::move(s.controller)});
  }

  const LtvPlant ltv = promote(plant, static_cast<int>(w.size()));
  const Comparison cmp = compare(ltv, controllers, w);

  const fs::path dir = ensure_dir(a.out);
  for (const Trace& t : cmp.traces) {
    write_file_atomic(dir / (t.name + ".csv"), trace_csv(t));
  }
  Json j = comparison_to_json(cmp);
  j["steps"] = static_cast<int>(w.size());
  j["disturbance"] = disturbance_to_json(spec);
  j["synthesis"] = synth_reports;
  write_json_file(dir / "comparison.json", j);
  out << j.dump(2) << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct FreqArgs {
  std::string plant;
  std::vector<std::string> controllers{"all"};
  int grid = 512;
  double tol = 1e-3;
  std::optional<double> gamma_competitive;
  std::optional<double> gamma_hinf;
  bool extremal = false;
  std::string extremal_controller = "competitive";
  std::string out;
};

int cmd_freq(const FreqArgs& a, std::ostream& out) {
  const LtiPlant plant = plant_from_json(read_json(a.plant)).plant;
  if (a.grid < 2) throw std::invalid_argument("grid needs at least 2 points");
  if (a.out.empty()) throw std::invalid_argument("--out is required");

  auto build = [&](ControllerKind kind) {
    SynthRequest req;
    req.kind = kind;
    req.tol = a.tol;
    if (kind == ControllerKind::kCompetitive) req.gamma = a.gamma_competitive;
    if (kind == ControllerKind::kHinf) req.gamma = a.gamma_hinf;
    return synthesize(plant, req);
  };

  if (a.extremal) {
    const ControllerKind kind = parse_controller_kind(a.extremal_controller);
    if (kind == ControllerKind::kOffline) {
      throw std::invalid_argument("extremal directions need an online controller");
    }
    const SynthOutcome s = build(kind);
    const ExtremalDc e = extremal_dc(plant, s.controller);
    Json j{{"schema_version", kSchemaVersion},
           {"controller", std::string(to_string(kind))},
           {"best", vector_to_json(e.best)},
           {"worst", vector_to_json(e.worst)},
           {"eigenvalues", vector_to_json(e.eigenvalues)}};
    if (s.controller.gamma) j["gamma"] = *s.controller.gamma;
    write_json_file(a.out, j);
    out << j.dump(2) << "\n";
    return kExitOk;
  }

  const std::vector<double> grid = uniform_grid(a.grid);
  std::ostringstream csv;
  csv << "controller,omega,sigma_max_TK,per_freq_cr\n";
  Json summary = Json::object();
  for (ControllerKind kind : parse_kinds(a.controllers)) {
    const std::string name(to_string(kind));
    std::vector<FreqPoint> points;
    Json info;
    if (kind == ControllerKind::kOffline) {
      for (double omega : grid) points.push_back(offline_freq_point(plant, omega));
    } else {
      const SynthOutcome s = build(kind);
      if (s.controller.gamma) info["gamma"] = *s.controller.gamma;
      points = sweep(plant, closed_loop(plant, s.controller), grid);
    }
    double cr_max = 0.0;
    double cr_min = std::numeric_limits<double>::infinity();
    int degenerate = 0;
    for (const FreqPoint& pt : points) {
      csv << name << ',' << format_double(pt.omega) << ','
          << format_double(pt.sigma_max) << ',';
      if (pt.degenerate) {
        csv << "nan\n";
        ++degenerate;
        continue;
      }
      csv << format_double(pt.cr) << '\n';
      cr_max = std::max(cr_max, pt.cr);
      cr_min = std::min(cr_min, pt.cr);
    }
    info["cr_max"] = cr_max;
    info["cr_min"] = cr_min;
    info["degenerate_frequencies"] = degenerate;
    summary[name] = info;
  }
  write_file_atomic(a.out, csv.str());
  const Json j{{"schema_version", kSchemaVersion}, {"csv", a.out}, {"controllers", summary}};
  out << j.dump(2) << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct MpcArgs {
  std::string scenario;
  std::string causality = "causal";
  std::optional<std::uint64_t> seed;
  std::string out = "out";
};

int cmd_mpc(const MpcArgs& a, std::ostream& out) {
  MpcScenario sc = scenario_from_json(read_json(a.scenario));
  if (a.seed) {
    sc.disturbance.seed = *a.seed;
  } else if (std::getenv("COMPCTL_SEED") != nullptr) {
    sc.disturbance.seed = default_seed();
  }
  const std::vector<Vector> wv = generate_disturbance(sc.disturbance);
  std::vector<double> w(wv.size());
  for (std::size_t t = 0; t < wv.size(); ++t) w[t] = wv[t](0);

  const fs::path dir = ensure_dir(a.out);
  Json rows = Json::array();
  std::optional<double> offline_total;
  std::vector<std::pair<std::string, double>> totals;
  for (ControllerKind kind : sc.controllers) {
    MpcOptions opts;
    opts.kind = kind;
    opts.causality = parse_causality(a.causality);
    opts.gamma = sc.gamma;
    opts.gamma_factor = sc.gamma_factor;
    opts.initial = sc.initial;
    const MpcResult r = mpc_rollout(opts, w, sc.params);
    write_file_atomic(dir / (r.trace.name + ".csv"), trace_csv(r.trace));
    Json row{{"name", r.trace.name},
             {"total_cost", r.trace.total_cost},
             {"status", r.status},
             {"steps_completed", static_cast<int>(r.trace.steps.size())}};
    if (r.gamma) row["gamma"] = *r.gamma;
    rows.push_back(row);
    if (kind == ControllerKind::kOffline && !r.failed) offline_total = r.trace.total_cost;
  }
  for (auto& row : rows) {
    const auto ratio = offline_total
                           ? cost_ratio(row["total_cost"].get<double>(), *offline_total)
                           : std::nullopt;
    row["ratio_to_offline"] = ratio ? Json(*ratio) : Json(nullptr);
  }
  Json j{{"schema_version", kSchemaVersion},
         {"steps", static_cast<int>(w.size())},
         {"disturbance", disturbance_to_json(sc.disturbance)},
         {"controllers", rows}};
  write_json_file(dir / "comparison.json", j);
  out << j.dump(2) << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct VerifyArgs {
  std::string plant;
  bool random = false;
  std::optional<std::uint64_t> seed;
  int n = 3;
  int m = 2;
  int p = 2;
  int horizon = 12;
};

int cmd_verify(const VerifyArgs& a, std::ostream& out) {
  const std::uint64_t seed = a.seed ? *a.seed : default_seed();
  if (a.horizon < 2) throw std::invalid_argument("horizon must be >= 2");
  LtiPlant plant;
  if (a.random) {
    if (a.n < 1 || a.m < 1 || a.p < 1) throw std::invalid_argument("dimensions must be positive");
    plant = random_plant(seed, a.n, a.m, a.p);
  } else if (!a.plant.empty()) {
    plant = plant_from_json(read_json(a.plant)).plant;
  } else {
    throw std::invalid_argument("verify needs --plant or --random");
  }
  bool all = true;
  for (const PropertyResult& r : verify_plant(plant, a.horizon, seed)) {
    const char* tag = r.skipped ? "SKIP" : (r.passed ? "PASS" : "FAIL");
    out << tag << ' ' << r.name << ": " << r.detail << '\n';
    all = all && r.passed;
  }
  return all ? kExitOk : kExitError;
}

Json error_json(const std::string& message) {
  return Json{{"schema_version", kSchemaVersion}, {"status", "error"}, {"error", message}};
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"Competitive, H2 and H-infinity controller synthesis and analysis"};
  app.require_subcommand(1);

  SynthArgs synth;
  auto* s = app.add_subcommand("synth", "Synthesize a controller");
  s->add_option("--plant", synth.plant, "Plant JSON")->required();
  s->add_option("--mode", synth.mode, "h2 | hinf | competitive");
  s->add_option("--causality", synth.causality, "causal | strictly-causal");
  s->add_option("--horizon", synth.horizon, "infinite or a positive integer");
  s->add_option("--gamma", synth.gamma, "Fixed gamma level");
  s->add_flag("--optimize-gamma", synth.optimize, "Bisect for the minimal gamma");
  s->add_option("--tol", synth.tol, "Bisection tolerance");
  s->add_option("--out", synth.out, "Controller JSON output");
  s->add_option("--report", synth.report, "Also write the report here");

  SimulateArgs sim;
  auto* m = app.add_subcommand("simulate", "Closed-loop rollouts against the offline optimum");
  m->add_option("--plant", sim.plant, "Plant JSON")->required();
  m->add_option("--controllers", sim.controllers, "h2 hinf competitive zero | all")
      ->delimiter(',');
  m->add_option("--causality", sim.causality);
  m->add_option("--horizon", sim.horizon, "infinite or finite (finite uses --steps)");
  m->add_option("--disturbance", sim.disturbance_file, "Disturbance spec JSON");
  m->add_option("--kind", sim.kind, "Disturbance kind when no spec file is given");
  m->add_option("--sigma", sim.sigma);
  m->add_option("--omega", sim.omega);
  m->add_option("--amplitude", sim.amplitude);
  m->add_option("--direction", sim.direction, "Disturbance direction")->delimiter(',');
  m->add_option("--direction-from", sim.direction_from, "Extremal JSON from freq --extremal");
  m->add_option("--direction-key", sim.direction_key, "best | worst");
  m->add_option("--steps", sim.steps);
  m->add_option("--seed", sim.seed, "Defaults to $COMPCTL_SEED or 0");
  m->add_option("--tol", sim.tol);
  m->add_option("--gamma-competitive", sim.gamma_competitive);
  m->add_option("--gamma-hinf", sim.gamma_hinf);
  m->add_option("--out", sim.out, "Output directory");

  FreqArgs freq;
  auto* f = app.add_subcommand("freq", "Frequency response and per-frequency competitive ratio");
  f->add_option("--plant", freq.plant, "Plant JSON")->required();
  f->add_option("--controllers", freq.controllers)->delimiter(',');
  f->add_option("--grid", freq.grid, "Number of uniform points on [0, pi]");
  f->add_option("--tol", freq.tol);
  f->add_option("--gamma-competitive", freq.gamma_competitive);
  f->add_option("--gamma-hinf", freq.gamma_hinf);
  f->add_flag("--extremal", freq.extremal, "Write best and worst DC directions instead");
  f->add_option("--extremal-controller", freq.extremal_controller);
  f->add_option("--out", freq.out, "CSV (or JSON with --extremal)")->required();

  MpcArgs mpc;
  auto* p = app.add_subcommand("mpc", "Inverted pendulum with iterative linearization");
  p->add_option("--scenario", mpc.scenario, "Scenario JSON")->required();
  p->add_option("--causality", mpc.causality);
  p->add_option("--seed", mpc.seed, "Overrides the scenario seed");
  p->add_option("--out", mpc.out, "Output directory");

  VerifyArgs ver;
  auto* v = app.add_subcommand("verify", "Factorization and offline-oracle property suite");
  v->add_option("--plant", ver.plant, "Plant JSON");
  v->add_flag("--random", ver.random, "Use a random plant");
  v->add_option("--seed", ver.seed);
  v->add_option("--n", ver.n);
  v->add_option("--m", ver.m);
  v->add_option("--p", ver.p);
  v->add_option("--horizon", ver.horizon);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitError;
  }

  try {
    if (*s) return cmd_synth(synth, out);
    if (*m) return cmd_simulate(sim, out);
    if (*f) return cmd_freq(freq, out);
    if (*p) return cmd_mpc(mpc, out);
    if (*v) return cmd_verify(ver, out);
  } catch (const Infeasible& inf) {
    out << inf.payload.dump(2) << "\n";
    return kExitInfeasible;
  } catch (const std::exception& e) {
    out << error_json(e.what()).dump(2) << "\n";
    err << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}

}  // namespace compctl::tools
