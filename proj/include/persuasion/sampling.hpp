#pragma once

#include <algorithm>
#include <numeric>
#include <string>
#include <vector>

#include "persuasion/model.hpp"
#include "persuasion/random.hpp"
#include "persuasion/response.hpp"

namespace persuasion::sampling {

/// Uniform draw from the probability simplex (flat Dirichlet).
inline Vector random_distribution(std::size_t dim, Rng& rng) {
  Vector p(dim);
  double total = 0.0;
  for (double& x : p) total += x = rng.exponential();
  for (double& x : p) x /= total;
  return p;
}

/// Like random_distribution, but some entries are zeroed so schemes exercise
/// unused signals.
inline Vector random_sparse_distribution(std::size_t dim, Rng& rng, double zero_probability) {
  Vector p = random_distribution(dim, rng);
  const std::size_t keep = rng.index(dim);
  double total = 0.0;
  for (std::size_t i = 0; i < dim; ++i) {
    if (i != keep && rng.bernoulli(zero_probability)) p[i] = 0.0;
    total += p[i];
  }
  for (double& x : p) x /= total;
  return p;
}

inline std::vector<std::string> labels(const char* prefix, std::size_t n) {
  std::vector<std::string> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = prefix + std::to_string(i);
  return out;
}

inline Matrix random_utility(std::size_t actions, std::size_t states, Rng& rng) {
  Matrix m(actions, states);
  for (std::size_t a = 0; a < actions; ++a)
    for (std::size_t w = 0; w < states; ++w) m(a, w) = rng.uniform();
  return m;
}

/// Unconstrained instance with uniform utilities and a flat-Dirichlet prior.
inline PersuasionInstance random_instance(std::size_t states, std::size_t actions, Rng& rng) {
  return PersuasionInstance(labels("w", states), labels("a", actions), random_distribution(states, rng),
                            random_utility(actions, states, rng), random_utility(actions, states, rng));
}

struct SatisfiedInstanceOptions {
  std::size_t max_states = 6;
  std::size_t max_actions = 5;
  double min_gap = 0.25;
  double max_gap = 0.6;
};

/// Instance satisfying the unique-optimal-action condition: every action owns
/// at least one state, each state's optimum beats the rest by at least
/// `min_gap`, and the prior keeps at least half its mass uniform.
inline PersuasionInstance random_satisfied_instance(Rng& rng, const SatisfiedInstanceOptions& opt = {}) {
  const std::size_t states = 2 + rng.index(opt.max_states - 1);
  const std::size_t actions = 2 + rng.index(std::min(opt.max_actions, states) - 1);

  std::vector<ActionIndex> owner(states);
  for (StateIndex w = 0; w < states; ++w) owner[w] = w < actions ? w : rng.index(actions);
  for (StateIndex w = states; w-- > 1;) std::swap(owner[w], owner[rng.index(w + 1)]);

  Matrix v(actions, states);
  for (StateIndex w = 0; w < states; ++w) {
    const double gap = rng.uniform(opt.min_gap, opt.max_gap);
    double top = 0.0;
    for (ActionIndex a = 0; a < actions; ++a)
      if (a != owner[w]) top = std::max(top, v(a, w) = rng.uniform(0.0, 1.0 - gap));
    v(owner[w], w) = top + gap + rng.uniform(0.0, 1.0 - gap - top);
  }

  Vector prior = random_distribution(states, rng);
  for (double& x : prior) x = 0.5 * x + 0.5 / static_cast<double>(states);
  const double total = std::accumulate(prior.begin(), prior.end(), 0.0);
  for (double& x : prior) x /= total;

  return PersuasionInstance(labels("w", states), labels("a", actions), std::move(prior),
                            random_utility(actions, states, rng), std::move(v));
}

/// Scheme with `signals` signals and independently drawn, partly sparse rows;
/// some signals may go unused.
inline SignalingScheme random_scheme(std::size_t states, std::size_t signals, Rng& rng) {
  Matrix cond(states, signals);
  for (StateIndex w = 0; w < states; ++w) {
    const Vector row = rng.bernoulli(0.3) ? random_sparse_distribution(signals, rng, 0.5)
                                          : random_distribution(signals, rng);
    std::copy(row.begin(), row.end(), cond.row(w).begin());
  }
  return SignalingScheme(labels("s", signals), std::move(cond));
}

inline SignalingScheme random_direct_scheme(const PersuasionInstance& inst, Rng& rng) {
  Matrix cond(inst.state_count(), inst.action_count());
  for (StateIndex w = 0; w < inst.state_count(); ++w) {
    const Vector row = random_distribution(inst.action_count(), rng);
    std::copy(row.begin(), row.end(), cond.row(w).begin());
  }
  return SignalingScheme(inst.actions(), std::move(cond));
}

inline ReceiverStrategy random_strategy(std::size_t signals, std::size_t actions, Rng& rng) {
  Matrix rho(signals, actions);
  for (SignalIndex s = 0; s < signals; ++s) {
    const Vector row = random_distribution(actions, rng);
    std::copy(row.begin(), row.end(), rho.row(s).begin());
  }
  return ReceiverStrategy(std::move(rho));
}

/// Random strategy with mass at least 1 - delta on A^gamma(s) at every
/// positive-probability signal.
inline ReceiverStrategy random_approx_strategy(const PersuasionInstance& inst, const SignalingScheme& scheme,
                                               double gamma, double delta, Rng& rng, const Tolerances& tol = {}) {
  const ApproxResponseSet set = approx_set(inst, scheme, gamma, tol);
  const std::size_t n = inst.action_count();
  Matrix rho(scheme.signal_count(), n);
  for (SignalIndex s = 0; s < scheme.signal_count(); ++s) {
    if (set.marginal[s] <= 0.0) {
      const Vector row = random_distribution(n, rng);
      std::copy(row.begin(), row.end(), rho.row(s).begin());
      continue;
    }
    std::vector<ActionIndex> outside;
    for (ActionIndex a = 0; a < n; ++a)
      if (!set.contains(s, a)) outside.push_back(a);
    const double inside_mass = outside.empty() ? 1.0 : rng.uniform(1.0 - delta, 1.0);
    const Vector in = random_distribution(set.members[s].size(), rng);
    for (std::size_t k = 0; k < in.size(); ++k) rho(s, set.members[s][k]) = inside_mass * in[k];
    if (!outside.empty()) {
      const Vector out = random_distribution(outside.size(), rng);
      for (std::size_t k = 0; k < out.size(); ++k) rho(s, outside[k]) = (1.0 - inside_mass) * out[k];
    }
  }
  return ReceiverStrategy(std::move(rho));
}

/// Deterministic strategy choosing a uniformly random gamma-best action.
inline ReceiverStrategy random_deterministic_approx_strategy(const PersuasionInstance& inst,
                                                             const SignalingScheme& scheme, double gamma, Rng& rng,
                                                             const Tolerances& tol = {}) {
  const ApproxResponseSet set = approx_set(inst, scheme, gamma, tol);
  std::vector<ActionIndex> choice(scheme.signal_count());
  for (SignalIndex s = 0; s < scheme.signal_count(); ++s)
    choice[s] = set.members[s].empty() ? rng.index(inst.action_count())
                                       : set.members[s][rng.index(set.members[s].size())];
  return ReceiverStrategy::deterministic(choice, inst.action_count());
}

}  // namespace persuasion::sampling
