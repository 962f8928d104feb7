#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "compctl/model.hpp"

namespace compctl::tools {

struct PropertyResult {
  std::string name;
  bool passed = false;
  bool skipped = false;
  std::string detail;
};

/// Factorization and offline-oracle property suite on one plant, using a
/// finite horizon `T` and random inputs drawn from `seed`.
std::vector<PropertyResult> verify_plant(const LtiPlant& plant, int T,
                                         std::uint64_t seed);

}  // namespace compctl::tools
