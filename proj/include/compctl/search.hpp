#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "compctl/controllers.hpp"
#include "compctl/riccati.hpp"

namespace compctl {

struct GammaSearchOptions {
  double lower = 0.0;       // known lower bound; treated as infeasible
  double initial_hi = 2.0;  // first upper guess, doubled until feasible
  double tol = 1e-3;        // absolute bracket width
  double cap = 1048576.0;   // 2^20
  int audit_points = 8;
};

struct GammaSearchResult {
  bool found = false;  // false means "unbounded-gamma"
  double gamma = 0.0;  // = hi
  double lo = 0.0;
  double hi = 0.0;
  int iterations = 0;  // feasibility evaluations during doubling + bisection
  double achieved_tol = 0.0;
  bool lo_at_bound = false;
  std::vector<std::string> warnings;  // monotonicity audit findings
  Verdict hi_verdict;
  Verdict lo_verdict;
};

using FeasibilityFn = std::function<Verdict(double)>;

/// Doubling followed by bisection on a monotone feasibility predicate, then
/// a small audit around the final bracket.
GammaSearchResult min_gamma(const FeasibilityFn& feasible,
                            const GammaSearchOptions& options = {});

struct GammaOptimum {
  GammaSearchResult search;
  SynthesisResult synthesis;  // controller at search.hi
};

/// Minimal-gamma competitive controller (infinite horizon when `horizon` is
/// empty). The lower bound defaults to 1.
GammaOptimum optimize_competitive(const LtiPlant& plant, Causality causality,
                                  std::optional<int> horizon,
                                  GammaSearchOptions options = {},
                                  const DareOptions& dare = {});

/// Minimal-gamma H-infinity controller. The lower bound defaults to 0.
GammaOptimum optimize_hinf(const LtiPlant& plant, Causality causality,
                           std::optional<int> horizon,
                           GammaSearchOptions options = {},
                           const DareOptions& dare = {});

}  // namespace compctl
