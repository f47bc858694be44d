#pragma once

#include <algorithm>
#include <vector>

#include "persuasion/classic_lp.hpp"
#include "persuasion/model.hpp"
#include "persuasion/response.hpp"
#include "persuasion/robustify.hpp"
#include "persuasion/sampling.hpp"

namespace persuasion {

/// Tolerance on both sides of OPT -/+ (gamma / (mu_min Delta) + delta).
inline constexpr double kBoundsTolerance = 1e-8;

/// Every quantity in the sandwich
///   OPT - g/(mu_min D) - d <= worst-case <= best-case <= OPT + g/(mu_min D) + d
/// for one instance: a constructive certificate on the left, and an audit of
/// sampled schemes on the right.
struct BoundsReport {
  double opt = 0.0;
  double mu_min = 0.0;
  double gap = 0.0;
  double gamma = 0.0;
  double delta = 0.0;
  double ratio = 0.0;  // gamma / (mu_min * gap)
  double slack = 0.0;  // ratio + delta

  double alpha = 0.0;
  double lower_certificate = 0.0;
  double lower_bound = 0.0;
  double lower_bound_at_alpha = 0.0;  // OPT - alpha - delta, includes the strictness margin
  bool obedience_unique = false;
  bool lower_ok = false;

  std::size_t sampled_schemes = 0;
  double max_best_value = -kInfinity;
  double upper_bound = 0.0;
  std::size_t upper_violations = 0;
  bool upper_ok = true;

  std::size_t knife_edges = 0;

  bool holds() const { return lower_ok && upper_ok; }
};

inline BoundsReport check_robustness_bounds(const PersuasionInstance& inst, double gamma, double delta,
                                            const std::vector<SignalingScheme>& audit_schemes,
                                            const Tolerances& tol = {}) {
  require(delta >= 0.0 && delta < 1.0, ErrorCode::kInvalidArgument, "delta must lie in [0,1)");
  const InstanceProfile profile = profile_instance(inst);
  BoundsReport r;
  r.gamma = gamma;
  r.delta = delta;
  r.alpha = choose_alpha_lower(inst, gamma);  // validates the assumption and the hypothesis
  r.mu_min = profile.mu_min;
  r.gap = profile.gap;
  r.ratio = choose_alpha_upper(inst, gamma);
  r.slack = r.ratio + delta;

  const ClassicSolution classic = solve_classic(inst);
  r.opt = classic.opt;

  const SignalingScheme robust = robustify(inst, classic.scheme, r.alpha);
  const ObjectiveEstimate worst = eval_objective_fixed_scheme(inst, robust, gamma, delta, ObjectiveMode::kWorst, tol);
  r.lower_certificate = worst.value;
  r.lower_bound = r.opt - r.slack;
  r.lower_bound_at_alpha = r.opt - r.alpha - delta;
  r.lower_ok = r.lower_certificate >= r.lower_bound - kBoundsTolerance;
  if (worst.knife_edge) ++r.knife_edges;

  const ApproxResponseSet set = approx_set(inst, robust, gamma, tol);
  r.obedience_unique = true;
  for (SignalIndex s = 0; s < robust.signal_count(); ++s)
    if (set.marginal[s] > 0.0 && !(set.members[s].size() == 1 && set.members[s].front() == s))
      r.obedience_unique = false;

  r.upper_bound = r.opt + r.slack;
  for (const SignalingScheme& scheme : audit_schemes) {
    const ObjectiveEstimate best = eval_objective_fixed_scheme(inst, scheme, gamma, delta, ObjectiveMode::kBest, tol);
    ++r.sampled_schemes;
    r.max_best_value = std::max(r.max_best_value, best.value);
    if (best.value > r.upper_bound + kBoundsTolerance) ++r.upper_violations;
    if (best.knife_edge) ++r.knife_edges;
  }
  r.upper_ok = r.upper_violations == 0;
  return r;
}

/// Random audit schemes with between 1 and |A| + 2 signals.
inline std::vector<SignalingScheme> sample_audit_schemes(const PersuasionInstance& inst, std::size_t count, Rng& rng) {
  std::vector<SignalingScheme> out;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t signals = 1 + rng.index(inst.action_count() + 2);
    out.push_back(sampling::random_scheme(inst.state_count(), signals, rng));
  }
  return out;
}

inline BoundsReport check_robustness_bounds(const PersuasionInstance& inst, double gamma, double delta,
                                            std::size_t samples, Rng& rng, const Tolerances& tol = {}) {
  return check_robustness_bounds(inst, gamma, delta, sample_audit_schemes(inst, samples, rng), tol);
}

struct SandwichSweepReport {
  std::size_t instances = 0;
  std::size_t rejected = 0;  // drawn instances with gamma / (mu_min Delta) >= 1 for some gamma
  std::size_t cases = 0;
  std::size_t schemes_per_instance = 0;
  std::size_t lower_violations = 0;
  std::size_t upper_violations = 0;
  std::size_t knife_edges = 0;
  double min_lower_margin = kInfinity;  // certificate - lower bound
  double min_upper_margin = kInfinity;  // upper bound - max best-case value

  bool holds() const { return lower_violations == 0 && upper_violations == 0; }
};

/// Draws satisfied instances until `instances` of them meet the hypothesis for
/// every gamma, then checks both sides of the sandwich for every (gamma, delta)
/// against one shared set of audit schemes per instance.
inline SandwichSweepReport sandwich_sweep(std::size_t instances, const Vector& gammas, const Vector& deltas,
                                          std::size_t schemes, std::uint64_t seed,
                                          const sampling::SatisfiedInstanceOptions& shape = {}) {
  Rng rng = make_stream(seed, Stream::kSampling);
  const double gamma_max = gammas.empty() ? 0.0 : *std::max_element(gammas.begin(), gammas.end());
  SandwichSweepReport out;
  out.schemes_per_instance = schemes;
  while (out.instances < instances) {
    const PersuasionInstance inst = sampling::random_satisfied_instance(rng, shape);
    const InstanceProfile p = profile_instance(inst);
    if (!(gamma_max / (p.mu_min * p.gap) < 1.0)) {
      ++out.rejected;
      continue;
    }
    ++out.instances;
    const auto audit = sample_audit_schemes(inst, schemes, rng);
    for (double gamma : gammas) {
      for (double delta : deltas) {
        const BoundsReport r = check_robustness_bounds(inst, gamma, delta, audit);
        ++out.cases;
        if (!r.lower_ok) ++out.lower_violations;
        out.upper_violations += r.upper_violations;
        out.knife_edges += r.knife_edges;
        out.min_lower_margin = std::min(out.min_lower_margin, r.lower_certificate - r.lower_bound);
        out.min_upper_margin = std::min(out.min_upper_margin, r.upper_bound - r.max_best_value);
      }
    }
  }
  return out;
}

}  // namespace persuasion
