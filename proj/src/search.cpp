#include "compctl/search.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace compctl {

GammaSearchResult min_gamma(const FeasibilityFn& feasible,
                            const GammaSearchOptions& options) {
  if (!(options.tol > 0.0)) throw std::invalid_argument("tol must be positive");
  GammaSearchResult r;
  double lo = options.lower;
  double hi = std::max(options.initial_hi, lo + options.tol);
  r.lo_at_bound = true;

  Verdict v = feasible(hi);
  ++r.iterations;
  while (!v.feasible) {
    lo = hi;
    r.lo_at_bound = false;
    r.lo_verdict = v;
    if (hi >= options.cap) {
      r.lo = lo;
      r.hi = hi;
      r.hi_verdict = v;
      r.warnings.push_back("unbounded-gamma: no feasible level below the cap");
      return r;
    }
    hi = std::min(2.0 * hi, options.cap);
    v = feasible(hi);
    ++r.iterations;
  }
  r.hi_verdict = v;

  while (hi - lo > options.tol) {
    const double mid = 0.5 * (lo + hi);
    Verdict vm = feasible(mid);
    ++r.iterations;
    if (vm.feasible) {
      hi = mid;
      r.hi_verdict = std::move(vm);
    } else {
      lo = mid;
      r.lo_at_bound = false;
      r.lo_verdict = std::move(vm);
    }
  }
  r.found = true;
  r.lo = lo;
  r.hi = hi;
  r.gamma = hi;
  r.achieved_tol = hi - lo;

  if (options.audit_points >= 2) {
    const double width = std::max(hi - lo, options.tol);
    const double start = std::max(options.lower, lo - 2.0 * width);
    const double stop = hi + 2.0 * width;
    bool seen_feasible = false;
    double first_feasible = 0.0;
    for (int i = 0; i < options.audit_points; ++i) {
      const double g =
          start + (stop - start) * i / (options.audit_points - 1);
      if (g <= 0.0) continue;
      const bool ok = feasible(g).feasible;
      if (ok && !seen_feasible) {
        seen_feasible = true;
        first_feasible = g;
      } else if (!ok && seen_feasible) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "non-monotone feasibility: feasible at " << first_feasible
            << " but infeasible at " << g;
        r.warnings.push_back(msg.str());
      }
      if (ok && g < lo && !r.lo_at_bound) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "non-monotone feasibility: feasible at " << g
            << " below the infeasible bracket end " << lo;
        r.warnings.push_back(msg.str());
      }
    }
  }
  return r;
}

GammaOptimum optimize_competitive(const LtiPlant& plant, Causality causality,
                                  std::optional<int> horizon,
                                  GammaSearchOptions options,
                                  const DareOptions& dare) {
  if (options.lower <= 0.0) options.lower = 1.0;
  GammaOptimum out;
  if (horizon) {
    const LtvPlant ltv = promote(plant, *horizon);
    out.search = min_gamma(
        [&](double g) { return synth_competitive(ltv, g, causality).verdict; },
        options);
    if (out.search.found) {
      out.synthesis = synth_competitive(ltv, out.search.hi, causality);
    }
  } else {
    const CompetitivePrep prep = prepare_competitive(plant, dare);
    if (!prep.factor.verdict.feasible) {
      out.synthesis.verdict = prep.factor.verdict;
      return out;
    }
    out.search = min_gamma(
        [&](double g) {
          return synth_competitive(prep, g, causality, dare).verdict;
        },
        options);
    if (out.search.found) {
      out.synthesis = synth_competitive(prep, out.search.hi, causality, dare);
    }
  }
  if (!out.search.found) {
    out.synthesis.verdict = Verdict::fail(Reason::kNoStabilizingSolution,
                                          "unbounded-gamma");
  }
  return out;
}

GammaOptimum optimize_hinf(const LtiPlant& plant, Causality causality,
                           std::optional<int> horizon,
                           GammaSearchOptions options,
                           const DareOptions& dare) {
  GammaOptimum out;
  if (horizon) {
    const LtvPlant ltv = promote(plant, *horizon);
    out.search = min_gamma(
        [&](double g) { return synth_hinf(ltv, g, causality).verdict; },
        options);
    if (out.search.found) {
      out.synthesis = synth_hinf(ltv, out.search.hi, causality);
    }
  } else {
    out.search = min_gamma(
        [&](double g) {
          return synth_hinf(plant, g, causality, std::nullopt, dare).verdict;
        },
        options);
    if (out.search.found) {
      out.synthesis =
          synth_hinf(plant, out.search.hi, causality, std::nullopt, dare);
    }
  }
  if (!out.search.found) {
    out.synthesis.verdict = Verdict::fail(Reason::kNoStabilizingSolution,
                                          "unbounded-gamma");
  }
  return out;
}

}  // namespace compctl
