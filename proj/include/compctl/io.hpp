#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "compctl/controllers.hpp"
#include "compctl/model.hpp"
#include "compctl/mpc.hpp"
#include "compctl/sim.hpp"

namespace compctl {

using Json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

Json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const Json& j);
Json vector_to_json(const Vector& v);
Vector vector_from_json(const Json& j);

/// Parsed plant file. `R` is empty when the file omits it.
struct PlantFile {
  LtiPlant plant;
  Matrix R;
  std::optional<int> horizon;
};

PlantFile plant_from_json(const Json& j);
Json plant_to_json(const LtiPlant& plant, const Matrix& R = Matrix(),
                   std::optional<int> horizon = std::nullopt);

Json controller_to_json(const Controller& c);
Controller controller_from_json(const Json& j);

/// `length` and `dim` fill in fields the JSON omits.
DisturbanceSpec disturbance_from_json(const Json& j, int length, int dim);
Json disturbance_to_json(const DisturbanceSpec& spec);

Json comparison_to_json(const Comparison& c);
Json verdict_to_json(const Verdict& v);

struct MpcScenario {
  PendulumParams params;
  int steps = 1001;
  DisturbanceSpec disturbance;
  std::vector<ControllerKind> controllers;
  double gamma_factor = 1.01;
  std::optional<double> gamma;
  PendulumState initial;
};

MpcScenario scenario_from_json(const Json& j);

Json read_json(const std::filesystem::path& path);
/// Writes to a temporary sibling and renames it over `path`. Missing parent
/// directories are created.
void write_file_atomic(const std::filesystem::path& path,
                       const std::string& content);

}  // namespace compctl
