#include "compctl/io.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace compctl {

Json matrix_to_json(const Matrix& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const Json& j) {
  if (!j.is_array()) throw std::invalid_argument("matrix must be an array of rows");
  if (j.empty()) return Matrix();
  // A flat array is read as a column vector.
  if (!j[0].is_array()) {
    Matrix m(static_cast<Eigen::Index>(j.size()), 1);
    for (std::size_t i = 0; i < j.size(); ++i) m(i, 0) = j[i].get<double>();
    return m;
  }
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = static_cast<Eigen::Index>(j[0].size());
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const Json& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      throw std::invalid_argument("matrix rows have inconsistent lengths");
    }
    for (Eigen::Index c = 0; c < cols; ++c) {
      m(i, c) = row[static_cast<std::size_t>(c)].get<double>();
    }
  }
  return m;
}

Json vector_to_json(const Vector& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Vector vector_from_json(const Json& j) {
  if (!j.is_array()) throw std::invalid_argument("vector must be an array");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(i) = j[i].get<double>();
  return v;
}

PlantFile plant_from_json(const Json& j) {
  for (const char* key : {"A", "Bu", "Bw", "Q"}) {
    if (!j.contains(key)) {
      throw std::invalid_argument(std::string("plant is missing \"") + key + "\"");
    }
  }
  PlantFile f;
  if (j.contains("R")) f.R = matrix_from_json(j.at("R"));
  f.plant = normalize_control_weight(
      matrix_from_json(j.at("A")), matrix_from_json(j.at("Bu")),
      matrix_from_json(j.at("Bw")), matrix_from_json(j.at("Q")), f.R);
  if (j.contains("x0")) {
    f.plant.x0 = vector_from_json(j.at("x0"));
    if (f.plant.x0.size() != f.plant.state_dim()) {
      throw std::invalid_argument("x0 has inconsistent length");
    }
  }
  if (j.contains("horizon") && !j.at("horizon").is_null()) {
    const int T = j.at("horizon").get<int>();
    if (T < 1) throw std::invalid_argument("horizon must be positive");
    f.horizon = T;
  }
  return f;
}

Json plant_to_json(const LtiPlant& plant, const Matrix& R,
                   std::optional<int> horizon) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["A"] = matrix_to_json(plant.A);
  j["Bu"] = matrix_to_json(R.size() == 0 ? plant.Bu
                                         : Matrix(plant.Bu * psd_sqrt(R)));
  j["Bw"] = matrix_to_json(plant.Bw);
  j["Q"] = matrix_to_json(plant.Q);
  if (R.size() != 0) j["R"] = matrix_to_json(R);
  if (plant.x0.size() != 0) j["x0"] = vector_to_json(plant.x0);
  if (horizon) j["horizon"] = *horizon;
  return j;
}

namespace {

Json matrices_to_json(const std::vector<Matrix>& ms) {
  Json out = Json::array();
  for (const auto& m : ms) out.push_back(matrix_to_json(m));
  return out;
}

std::vector<Matrix> matrices_from_json(const Json& j) {
  std::vector<Matrix> out;
  for (const auto& m : j) out.push_back(matrix_from_json(m));
  return out;
}

Json diagnostics_to_json(const SynthesisDiagnostics& d) {
  return Json{{"residual", d.residual},
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

SynthesisDiagnostics diagnostics_from_json(const Json& j) {
  SynthesisDiagnostics d;
  d.residual = j.value("residual", 0.0);
  d.iterations = j.value("iterations", 0LL);
  d.closed_loop_radius = j.value("closed_loop_radius", 0.0);
  d.inertia_match = j.value("inertia_match", true);
  d.psd = j.value("psd", true);
  d.min_eigenvalue = j.value("min_eigenvalue", 0.0);
  d.causal_lhs = j.value("causal_lhs", 0.0);
  d.strict_w_lhs = j.value("strict_w_lhs", 0.0);
  d.strict_u_lhs = j.value("strict_u_lhs", 0.0);
  d.strict_u_channel_ok = j.value("strict_u_channel_ok", true);
  d.extra_condition = j.value("extra_condition", std::string());
  d.factor_residual = j.value("factor_residual", 0.0);
  d.whitening_radius = j.value("whitening_radius", 0.0);
  return d;
}

}  // namespace

Json controller_to_json(const Controller& c) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["kind"] = std::string(to_string(c.kind));
  j["causality"] = std::string(to_string(c.causality));
  if (c.horizon) {
    j["horizon"] = *c.horizon;
  } else {
    j["horizon"] = "infinite";
  }
  if (c.gamma) j["gamma"] = *c.gamma;
  j["dims"] = {{"n", c.n}, {"m", c.m}, {"p", c.p}};
  Json gains = Json::object();
  if (!c.Kx.empty()) {
    gains["Kx"] = matrices_to_json(c.Kx);
    gains["Kw"] = matrices_to_json(c.Kw);
  }
  if (!c.L.empty()) gains["L"] = matrices_to_json(c.L);
  j["gains"] = gains;
  if (c.kind == ControllerKind::kCompetitive) {
    std::vector<Matrix> transition, input, output;
    for (int t = 0; t < c.filter.stages(); ++t) {
      transition.push_back(c.filter.transition(t));
      input.push_back(c.filter.input(t));
      output.push_back(c.filter.output(t));
    }
    j["synthetic"] = {{"Ahat", matrices_to_json(c.Ahat)},
                      {"Buhat", matrices_to_json(c.Buhat)},
                      {"filter",
                       {{"finite", c.filter.finite()},
                        {"transition", matrices_to_json(transition)},
                        {"input", matrices_to_json(input)},
                        {"output", matrices_to_json(output)}}}};
  }
  j["diagnostics"] = diagnostics_to_json(c.diagnostics);
  return j;
}

Controller controller_from_json(const Json& j) {
  if (j.value("schema_version", 0) != kSchemaVersion) {
    throw std::invalid_argument("unsupported controller schema_version");
  }
  Controller c;
  c.kind = parse_controller_kind(j.at("kind").get<std::string>());
  c.causality = parse_causality(j.at("causality").get<std::string>());
  const Json& h = j.at("horizon");
  if (h.is_number_integer()) c.horizon = h.get<int>();
  if (j.contains("gamma")) c.gamma = j.at("gamma").get<double>();
  c.n = j.at("dims").at("n").get<int>();
  c.m = j.at("dims").at("m").get<int>();
  c.p = j.at("dims").at("p").get<int>();
  const Json& gains = j.at("gains");
  if (gains.contains("Kx")) {
    c.Kx = matrices_from_json(gains.at("Kx"));
    c.Kw = matrices_from_json(gains.at("Kw"));
  }
  if (gains.contains("L")) c.L = matrices_from_json(gains.at("L"));
  if (j.contains("synthetic")) {
    const Json& s = j.at("synthetic");
    c.Ahat = matrices_from_json(s.at("Ahat"));
    c.Buhat = matrices_from_json(s.at("Buhat"));
    const Json& f = s.at("filter");
    c.filter = WPrimeFilter(matrices_from_json(f.at("transition")),
                            matrices_from_json(f.at("input")),
                            matrices_from_json(f.at("output")),
                            f.at("finite").get<bool>());
  }
  if (j.contains("diagnostics")) {
    c.diagnostics = diagnostics_from_json(j.at("diagnostics"));
  }
  return c;
}

DisturbanceSpec disturbance_from_json(const Json& j, int length, int dim) {
  DisturbanceSpec s;
  s.kind = parse_disturbance_kind(j.at("kind").get<std::string>());
  s.length = j.value("length", length);
  s.dim = j.value("dim", dim);
  s.seed = j.value("seed", std::uint64_t{0});
  s.stream = j.value("stream", std::uint32_t{0});
  s.sigma = j.value("sigma", 1.0);
  s.omega = j.value("omega", 0.0);
  s.amplitude = j.value("amplitude", 1.0);
  s.phase = j.value("phase", 0.0);
  if (j.contains("direction")) s.direction = vector_from_json(j.at("direction"));
  s.normalize_direction = j.value("normalize_direction", true);
  if (j.contains("levels")) s.levels = j.at("levels").get<std::vector<double>>();
  if (j.contains("switch_times")) {
    s.switch_times = j.at("switch_times").get<std::vector<int>>();
  }
  s.mean_amplitude = j.value("mean_amplitude", 1.0);
  s.mean_omega = j.value("mean_omega", 1.0);
  if (j.contains("components")) {
    for (const auto& c : j.at("components")) {
      s.components.push_back(disturbance_from_json(c, s.length, s.dim));
    }
  }
  if (j.contains("weights")) s.weights = j.at("weights").get<std::vector<double>>();
  return s;
}

Json disturbance_to_json(const DisturbanceSpec& s) {
  Json j;
  j["kind"] = std::string(to_string(s.kind));
  j["length"] = s.length;
  j["dim"] = s.dim;
  j["seed"] = s.seed;
  j["stream"] = s.stream;
  j["sigma"] = s.sigma;
  j["omega"] = s.omega;
  j["amplitude"] = s.amplitude;
  j["phase"] = s.phase;
  if (s.direction.size() != 0) j["direction"] = vector_to_json(s.direction);
  j["normalize_direction"] = s.normalize_direction;
  if (!s.levels.empty()) j["levels"] = s.levels;
  if (!s.switch_times.empty()) j["switch_times"] = s.switch_times;
  j["mean_amplitude"] = s.mean_amplitude;
  j["mean_omega"] = s.mean_omega;
  if (!s.components.empty()) {
    Json comps = Json::array();
    for (const auto& c : s.components) comps.push_back(disturbance_to_json(c));
    j["components"] = comps;
    j["weights"] = s.weights;
  }
  return j;
}

Json comparison_to_json(const Comparison& c) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["opt_cost"] = c.opt_cost;
  Json rows = Json::array();
  for (const auto& r : c.rows) {
    Json row{{"name", r.name}, {"total_cost", r.total_cost}, {"status", r.status}};
    row["ratio_to_opt"] = r.ratio_to_opt ? Json(*r.ratio_to_opt) : Json(nullptr);
    rows.push_back(std::move(row));
  }
  j["controllers"] = rows;
  return j;
}

Json verdict_to_json(const Verdict& v) {
  Json j{{"feasible", v.feasible},
         {"reason", std::string(to_string(v.reason))},
         {"detail", v.detail}};
  if (v.timestep >= 0) j["timestep"] = v.timestep;
  return j;
}

MpcScenario scenario_from_json(const Json& j) {
  MpcScenario s;
  if (j.contains("params")) {
    const Json& p = j.at("params");
    s.params.m = p.value("m", 1.0);
    s.params.l = p.value("l", 1.0);
    s.params.g = p.value("g", 1.0);
    s.params.J = p.value("J", 1.0);
    s.params.dt = p.value("dt", 0.001);
  }
  s.params.validate();
  s.steps = j.value("steps", 1001);
  if (s.steps < 1) throw std::invalid_argument("steps must be >= 1");
  s.disturbance = disturbance_from_json(j.at("disturbance"), s.steps, 1);
  if (s.disturbance.dim != 1) {
    throw std::invalid_argument("the pendulum takes a scalar disturbance");
  }
  if (j.contains("initial")) {
    s.initial.theta = j.at("initial").value("theta", 0.0);
    s.initial.theta_dot = j.at("initial").value("theta_dot", 0.0);
  }
  const Json ctrl = j.value("controller", Json::object());
  const std::string kind = ctrl.value("kind", std::string("all"));
  if (kind == "all") {
    s.controllers = {ControllerKind::kH2, ControllerKind::kHinf,
                     ControllerKind::kCompetitive, ControllerKind::kOffline};
  } else {
    s.controllers = {parse_controller_kind(kind)};
  }
  if (ctrl.contains("gamma_policy")) {
    const Json& g = ctrl.at("gamma_policy");
    if (g.is_number()) {
      s.gamma = g.get<double>();
    } else if (g.is_object()) {
      s.gamma_factor = g.value("factor", 1.01);
      if (g.contains("gamma")) s.gamma = g.at("gamma").get<double>();
    }
  }
  return s;
}

Json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw std::runtime_error("cannot parse " + path.string() + ": " + e.what());
  }
}

void write_file_atomic(const std::filesystem::path& path,
                       const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace compctl
