#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "persuasion/classic_lp.hpp"
#include "persuasion/learning.hpp"
#include "persuasion/parallel.hpp"
#include "persuasion/robustify.hpp"

namespace persuasion {

/// Closed-form (gamma_t, delta_t) sequence of an empirical best-responding
/// learner, as a function of the round t and the signal's visit count T_s.
struct Schedule {
  std::string name;
  std::function<double(Round)> eta;
  std::function<double(Round, double)> gamma;
  std::function<double(Round, double)> delta;
};

/// Exponential weights: gamma_t = log(|A| eta_t T_s) / (eta_t T_s), delta_t = 1 / (eta_t T_s).
inline Schedule exp_weights_schedule(std::size_t actions) {
  Schedule s;
  s.name = "exp-weights";
  s.eta = [actions](Round t) { return exp_weights_rate(actions, t); };
  s.gamma = [actions](Round t, double visits) {
    const double scale = exp_weights_rate(actions, t) * visits;
    if (!(scale > 0.0)) return kInfinity;
    return std::max(0.0, std::log(static_cast<double>(actions) * scale) / scale);
  };
  s.delta = [actions](Round t, double visits) {
    const double scale = exp_weights_rate(actions, t) * visits;
    return scale > 0.0 ? std::min(1.0, 1.0 / scale) : 1.0;
  };
  return s;
}

inline Schedule empirical_br_schedule() {
  Schedule s;
  s.name = "empirical-br";
  s.eta = [](Round) { return kInfinity; };
  s.gamma = [](Round, double) { return 0.0; };
  s.delta = [](Round, double) { return 0.0; };
  return s;
}

enum class ReceiverKind { kEmpiricalBr, kExpWeights, kExp3 };

inline std::string to_string(ReceiverKind kind) {
  switch (kind) {
    case ReceiverKind::kEmpiricalBr: return "empirical-br";
    case ReceiverKind::kExpWeights: return "exp-weights";
    case ReceiverKind::kExp3: return "exp3";
  }
  return "unknown";
}

inline ReceiverKind parse_receiver_kind(const std::string& name) {
  if (name == "empirical-br") return ReceiverKind::kEmpiricalBr;
  if (name == "exp-weights") return ReceiverKind::kExpWeights;
  if (name == "exp3") return ReceiverKind::kExp3;
  fail(ErrorCode::kInvalidArgument, "unknown receiver '" + name + "'");
}

inline std::unique_ptr<ReceiverAlgorithm> make_receiver(ReceiverKind kind, const PersuasionInstance& inst,
                                                        std::size_t signals, Round horizon) {
  switch (kind) {
    case ReceiverKind::kEmpiricalBr:
      return std::make_unique<EmpiricalBestResponse>(inst.receiver_utility(), signals);
    case ReceiverKind::kExpWeights:
      return std::make_unique<ExponentialWeights>(inst.receiver_utility(), signals);
    case ReceiverKind::kExp3:
      return std::make_unique<Exp3>(inst.action_count(), signals, Exp3Config::for_horizon(horizon, inst.action_count()));
  }
  fail(ErrorCode::kInvalidArgument, "unknown receiver kind");
}

/// No closed-form schedule is tracked for EXP3.
inline std::optional<Schedule> schedule_for(ReceiverKind kind, std::size_t actions) {
  if (kind == ReceiverKind::kExpWeights) return exp_weights_schedule(actions);
  if (kind == ReceiverKind::kEmpiricalBr) return empirical_br_schedule();
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Concentration coverage

struct CoverageReport {
  Round t = 0;
  std::size_t runs = 0;
  std::size_t covered = 0;
  Vector radius;          // per signal, NaN for zero-probability signals
  double worst_ratio = 0.0;  // max over runs, signals, actions of deviation / radius
  double rate() const { return runs ? static_cast<double>(covered) / static_cast<double>(runs) : 0.0; }
  double guarantee() const { return 1.0 - 2.0 / static_cast<double>(t); }
};

/// Draws t rounds of (state, signal) under a fixed scheme per run and checks
/// |v(a, empirical posterior) - v(a, posterior)| <= radius for every used
/// signal and action. Run k uses seed base_seed + k.
inline CoverageReport coverage_trial(const PersuasionInstance& inst, const SignalingScheme& scheme, Round t,
                                     std::size_t runs, std::uint64_t base_seed) {
  check_compatible(inst, scheme);
  const Vector marginal = signal_marginals(inst, scheme);
  const std::size_t signals = scheme.signal_count();
  const std::size_t m = inst.state_count();
  const std::size_t n = inst.action_count();

  CoverageReport out;
  out.t = t;
  out.runs = runs;
  out.radius.assign(signals, std::numeric_limits<double>::quiet_NaN());
  std::vector<Vector> truth(signals);
  for (SignalIndex s = 0; s < signals; ++s) {
    if (marginal[s] <= 0.0) continue;
    out.radius[s] = confidence_radius(marginal[s], signals, n, static_cast<double>(t));
    truth[s] = action_values(inst.receiver_utility(), posterior(inst, scheme, s));
  }

  struct Outcome {
    bool covered = false;
    double ratio = 0.0;
  };
  const auto outcomes = replicate(runs, [&](std::size_t k) {
    Rng state_rng = make_stream(base_seed + k, Stream::kStates);
    Rng signal_rng = make_stream(base_seed + k, Stream::kSignals);
    std::vector<std::vector<std::int64_t>> counts(signals, std::vector<std::int64_t>(m, 0));
    for (Round r = 0; r < t; ++r) {
      const StateIndex w = state_rng.categorical(inst.prior());
      ++counts[signal_rng.categorical(scheme.conditional().row(w))][w];
    }
    Outcome o{true, 0.0};
    for (SignalIndex s = 0; s < signals; ++s) {
      if (marginal[s] <= 0.0) continue;
      std::int64_t total = 0;
      for (auto c : counts[s]) total += c;
      if (total == 0) {
        o.covered = false;
        o.ratio = kInfinity;
        continue;
      }
      Vector belief(m);
      for (StateIndex w = 0; w < m; ++w) belief[w] = static_cast<double>(counts[s][w]) / static_cast<double>(total);
      const Vector values = action_values(inst.receiver_utility(), belief);
      for (ActionIndex a = 0; a < n; ++a) {
        const double dev = std::abs(values[a] - truth[s][a]);
        o.ratio = std::max(o.ratio, dev / out.radius[s]);
        if (dev > out.radius[s]) o.covered = false;
      }
    }
    return o;
  });
  for (const Outcome& o : outcomes) {
    if (o.covered) ++out.covered;
    out.worst_ratio = std::max(out.worst_ratio, o.ratio);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Fixed robustified scheme against a learning receiver

/// The two large-t conditions under which the learner is obedient with
/// probability at least 1 - delta_t - 2/(t-1), evaluated with the expected
/// visit counts T_s = pi(s)(t-1):
///   adv floor  alpha mu(Omega_s) Delta / pi(s)  >  gamma_t + 2c   for every used s
///   alpha + delta_t + 2/(t-1) < C.
struct ThresholdCheck {
  Round t = 0;
  Vector advantage_floor;
  Vector required;  // gamma_t + 2c, +inf where the radius is undefined
  double delta = 1.0;  // max over signals
  bool advantage_ok = false;
  bool budget_ok = false;
  bool holds() const { return advantage_ok && budget_ok; }
};

inline ThresholdCheck check_learning_threshold(const PersuasionInstance& inst, const SignalingScheme& scheme,
                                               double alpha, double C, const Schedule& schedule, Round t) {
  const InstanceProfile profile = profile_instance(inst);
  const Vector marginal = signal_marginals(inst, scheme);
  const std::size_t signals = scheme.signal_count();
  ThresholdCheck out;
  out.t = t;
  out.advantage_floor.assign(signals, kInfinity);
  out.required.assign(signals, 0.0);
  out.delta = 0.0;
  out.advantage_ok = t >= 2;
  const double past = static_cast<double>(t - 1);
  for (SignalIndex s = 0; s < signals; ++s) {
    if (marginal[s] <= 0.0) continue;
    out.advantage_floor[s] = alpha * profile.region_mass[s] * profile.gap / marginal[s];
    const double visits = marginal[s] * past;
    double radius = kInfinity;
    if (t >= 2) {
      try {
        radius = confidence_radius(marginal[s], signals, inst.action_count(), past);
      } catch (const Error&) {
      }
    }
    out.required[s] = schedule.gamma(t, visits) + 2.0 * radius;
    out.delta = std::max(out.delta, schedule.delta(t, visits));
    if (!(out.advantage_floor[s] > out.required[s])) out.advantage_ok = false;
  }
  out.budget_ok = t >= 2 && alpha + out.delta + 2.0 / past < C;
  return out;
}

/// Smallest t at which both threshold conditions hold, searched by doubling
/// then bisection (both sides are monotone in t for the built-in schedules).
inline std::optional<Round> first_threshold_round(const PersuasionInstance& inst, const SignalingScheme& scheme,
                                                  double alpha, double C, const Schedule& schedule,
                                                  Round limit = Round{1} << 50) {
  Round hi = 2;
  while (!check_learning_threshold(inst, scheme, alpha, C, schedule, hi).holds()) {
    if (hi >= limit) return std::nullopt;
    hi *= 2;
  }
  Round lo = hi / 2;
  while (hi - lo > 1) {
    const Round mid = lo + (hi - lo) / 2;
    (check_learning_threshold(inst, scheme, alpha, C, schedule, mid).holds() ? hi : lo) = mid;
  }
  return hi;
}

struct LearningRunConfig {
  double C = 0.2;
  Round rounds = 500000;
  std::size_t seeds = 10;
  std::uint64_t base_seed = 0;
  Round checkpoint_every = 0;
  FeedbackMode feedback = FeedbackMode::kFull;
  ReceiverKind receiver = ReceiverKind::kExpWeights;
  double tail_fraction = 0.1;
};

struct LearningReport {
  LearningRunConfig config;
  double opt = 0.0;
  double alpha = 0.0;
  double target = 0.0;  // OPT - C
  bool trivially_satisfied = false;
  std::optional<SignalingScheme> scheme;
  double obedient_utility = 0.0;  // U(scheme, obedient)
  std::vector<SimulationSummary> summaries;
  std::vector<CheckpointDiagnostics> diagnostics;  // first seed
  std::vector<ThresholdCheck> thresholds;
  std::optional<Round> threshold_round;
  double mean_final_average = 0.0;
  double mean_tail_obedience = 0.0;

  bool meets_target() const { return trivially_satisfied || mean_final_average >= target; }
};

/// Robustifies the classic optimum with alpha = C/2 and plays it in every
/// round against the chosen learner, once per seed.
inline LearningReport run_robustified_learning(const PersuasionInstance& inst, const LearningRunConfig& cfg) {
  require(cfg.C > 0.0, ErrorCode::kInvalidArgument, "C must be positive");
  require(cfg.seeds >= 1, ErrorCode::kInvalidArgument, "seeds must be at least 1");
  require(cfg.tail_fraction > 0.0 && cfg.tail_fraction <= 1.0, ErrorCode::kInvalidArgument,
          "tail fraction must lie in (0,1]");
  const InstanceProfile profile = profile_instance(inst);
  require(profile.assumption_satisfied, ErrorCode::kHypothesisViolated,
          "learning guarantee needs a unique optimal action per state and mu_min > 0");

  LearningReport rep;
  rep.config = cfg;
  const ClassicSolution classic = solve_classic(inst);
  rep.opt = classic.opt;
  rep.target = rep.opt - cfg.C;
  rep.alpha = std::min(1.0, cfg.C / 2.0);
  if (cfg.C >= rep.opt) {
    rep.trivially_satisfied = true;
    return rep;
  }
  rep.scheme = robustify(inst, classic.scheme, rep.alpha);
  rep.obedient_utility = expected_utility(inst, *rep.scheme, ReceiverStrategy::obedient(inst.action_count()));

  const Round tail_start = std::max<Round>(1, cfg.rounds - static_cast<Round>(std::floor(cfg.tail_fraction * cfg.rounds)) + 1);
  auto traces = replicate(cfg.seeds, [&](std::size_t k) {
    FixedSender sender(*rep.scheme);
    auto receiver = make_receiver(cfg.receiver, inst, rep.scheme->signal_count(), cfg.rounds);
    SimulationOptions opt;
    opt.rounds = cfg.rounds;
    opt.seed = cfg.base_seed + k;
    opt.feedback = cfg.feedback;
    opt.checkpoint_every = k == 0 ? cfg.checkpoint_every : 0;
    opt.tail_start = tail_start;
    return simulate(inst, sender, *receiver, opt);
  });
  for (auto& tr : traces) {
    rep.mean_final_average += tr.summary.final_average;
    rep.mean_tail_obedience += tr.summary.tail_obedience();
    rep.summaries.push_back(tr.summary);
  }
  rep.mean_final_average /= static_cast<double>(cfg.seeds);
  rep.mean_tail_obedience /= static_cast<double>(cfg.seeds);
  rep.diagnostics = std::move(traces.front().diagnostics);

  if (const auto schedule = schedule_for(cfg.receiver, inst.action_count())) {
    for (const auto& d : rep.diagnostics)
      rep.thresholds.push_back(check_learning_threshold(inst, *rep.scheme, rep.alpha, cfg.C, *schedule, d.t));
    rep.threshold_round = first_threshold_round(inst, *rep.scheme, rep.alpha, cfg.C, *schedule);
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Alternating sender against the empirical best-response learner

struct AlternatingReport {
  Round rounds = 0;
  std::size_t seeds = 0;
  std::vector<SimulationSummary> summaries;
  double mean_average = 0.0;
  double mean_flip_fraction = 0.0;     // rounds with signal s1
  double mean_flip_utility = 0.0;      // sender utility on s1 rounds
  double mean_wait_utility = 0.0;      // sender utility on s2 rounds
  bool alternation_holds = true;       // states on s1 rounds go 0,1,0,1,...
  double classic_opt = 0.0;
};

inline AlternatingReport run_alternating(const PersuasionInstance& inst, Round rounds, std::size_t seeds,
                                         std::uint64_t base_seed) {
  require(seeds >= 1, ErrorCode::kInvalidArgument, "seeds must be at least 1");
  AlternatingReport rep;
  rep.rounds = rounds;
  rep.seeds = seeds;
  rep.classic_opt = solve_classic(inst).opt;

  struct Outcome {
    SimulationSummary summary;
    bool alternates = true;
  };
  const auto outcomes = replicate(seeds, [&](std::size_t k) {
    AlternatingSender sender(inst);
    EmpiricalBestResponse receiver(inst.receiver_utility(), 2);
    SimulationOptions opt;
    opt.rounds = rounds;
    opt.seed = base_seed + k;
    Outcome o;
    StateIndex expected = 0;
    auto trace = simulate(inst, sender, receiver, opt, [&](const RoundRecord& r) {
      if (r.signal != AlternatingSender::kFlipSignal) return;
      if (r.state != expected) o.alternates = false;
      expected = 1 - expected;
    });
    o.summary = std::move(trace.summary);
    return o;
  });
  for (const Outcome& o : outcomes) {
    rep.summaries.push_back(o.summary);
    rep.alternation_holds = rep.alternation_holds && o.alternates;
    rep.mean_average += o.summary.final_average;
    rep.mean_flip_fraction += o.summary.signal_fraction(0);
    rep.mean_flip_utility += o.summary.signal_mean_utility(0);
    rep.mean_wait_utility += o.summary.signal_mean_utility(1);
  }
  const double k = static_cast<double>(seeds);
  rep.mean_average /= k;
  rep.mean_flip_fraction /= k;
  rep.mean_flip_utility /= k;
  rep.mean_wait_utility /= k;
  return rep;
}

}  // namespace persuasion
