// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>

#include "oracles.hpp"
#include "persuasion/persuasion.hpp"

using namespace persuasion;

namespace {

constexpr std::uint64_t kSeed = 20240601;

struct Outcome {
  bool pass = false;
  std::string detail;
};

template <class... Args>
std::string format(const char* fmt, Args... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, fmt, args...);
  return buf;
}

bool run(int id, double limit_seconds, const std::function<Outcome()>& body) {
  const auto start = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("threw ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const bool in_time = secs < limit_seconds;
  const bool pass = o.pass && in_time;
  std::printf("%s criterion %d: %s [%.2fs, limit %.0fs%s]\n", pass ? "PASS" : "FAIL", id, o.detail.c_str(), secs,
              limit_seconds, in_time ? "" : ", TOO SLOW");
  std::fflush(stdout);
  return pass;
}

Outcome judge_classic() {
  const auto inst = judge_instance();
  const auto sol = solve_classic(inst);
  const double post = oracle::bayes(inst, sol.scheme, 0)[0];
  const double obedient = oracle::utility(inst, sol.scheme, ReceiverStrategy::obedient(2));
  const bool pass = std::abs(sol.opt - 0.6) <= 1e-8 && std::abs(post - 0.5) <= 1e-9 && std::abs(obedient - 0.6) <= 1e-8;
  return {pass, format("judge OPT=%.12f, Pr[guilty | convict]=%.12f, pi*(convict|innocent)=%.9f", sol.opt, post,
                       sol.scheme(1, 0))};
}

Outcome example_one() {
  const auto inst = weakly_dominated_instance();
  const auto sol = solve_classic(inst);
  const double full = eval_objective_fixed_scheme(inst, full_revelation_scheme(inst), 0, 0, ObjectiveMode::kWorst).value;
  const double opt_worst = eval_objective_fixed_scheme(inst, sol.scheme, 0, 0, ObjectiveMode::kWorst).value;
  const bool pass = std::abs(sol.opt - 0.5) <= 1e-8 && std::abs(full) <= 1e-12 && std::abs(opt_worst) <= 1e-12;
  return {pass, format("OPT=%.12f, worst(full revelation)=%.3g, worst(pi*)=%.3g", sol.opt, full, opt_worst)};
}

Outcome robustification_suite() {
  Rng rng = make_stream(kSeed, Stream::kSampling);
  double residual = 0, slack = kInfinity, tv_excess = -kInfinity, gap_excess = -kInfinity;
  std::size_t failures = 0;
  for (int k = 0; k < 1000; ++k) {
    const auto inst = sampling::random_satisfied_instance(rng);
    const auto scheme = sampling::random_direct_scheme(inst, rng);
    for (double alpha : {0.01, 0.1, 0.5}) {
      const auto r = verify_robustification(inst, scheme, alpha);
      residual = std::max(residual, r.marginal_identity_residual);
      slack = std::min(slack, r.advantage_bound_slack);
      tv_excess = std::max(tv_excess, r.tv_distance - alpha);
      gap_excess = std::max(gap_excess, r.utility_gap - alpha);
      if (!(r.marginal_identity_residual <= 1e-12 && r.advantage_bound_slack >= -1e-10 &&
            r.tv_distance <= alpha + 1e-12 && r.utility_gap <= alpha + 1e-12))
        ++failures;
    }
  }
  return {failures == 0, format("3000 cases, %zu failures; max residual %.2e, min slack %.2e, max tv-alpha %.3f, "
                                "max gap-alpha %.3f",
                                failures, residual, slack, tv_excess, gap_excess)};
}

Outcome sandwich() {
  const auto r = sandwich_sweep(500, {0.01, 0.05}, {0.0, 0.02}, 50, kSeed);
  return {r.holds() && r.instances == 500,
          format("%zu instances (%zu redrawn), %zu cases, lower violations %zu, upper violations %zu, "
                 "min lower margin %.3g, min upper margin %.3g",
                 r.instances, r.rejected, r.cases, r.lower_violations, r.upper_violations, r.min_lower_margin,
                 r.min_upper_margin)};
}

Outcome direct_equivalence() {
  Rng rng = make_stream(kSeed + 5, Stream::kSampling);
  double worst = 0.0;
  std::size_t audit_failures = 0;
  for (int k = 0; k < 500; ++k) {
    const auto inst = sampling::random_instance(2 + rng.index(4), 2 + rng.index(4), rng);
    const auto scheme = sampling::random_scheme(inst.state_count(), 1 + rng.index(6), rng);
    const double gamma = rng.uniform(0.0, 0.3);
    const auto rho = sampling::random_deterministic_approx_strategy(inst, scheme, gamma, rng);
    const auto direct = to_direct_revelation(inst, scheme, rho);
    const auto obedient = ReceiverStrategy::obedient(inst.action_count());
    worst = std::max(worst, std::abs(oracle::utility(inst, scheme, rho) - oracle::utility(inst, direct, obedient)));
    if (!oracle::best_responding(inst, direct, obedient, gamma, 0.0)) ++audit_failures;
  }
  return {worst <= 1e-12 && audit_failures == 0,
          format("500 triples, max |dU| %.2e, membership failures %zu", worst, audit_failures)};
}

Outcome quantal() {
  Rng rng = make_stream(kSeed + 6, Stream::kSampling);
  std::size_t violations = 0, signals = 0;
  double min_slack = kInfinity;
  for (double lambda : {2.0, 10.0, 100.0}) {
    for (int k = 0; k < 200; ++k) {
      const auto inst = sampling::random_instance(2 + rng.index(5), 2 + rng.index(4), rng);
      const auto scheme = sampling::random_scheme(inst.state_count(), 1 + rng.index(5), rng);
      const auto rho = quantal_strategy(inst, scheme, lambda);
      const double gamma = std::log(inst.action_count() * lambda) / lambda;
      for (std::size_t s = 0; s < scheme.signal_count(); ++s) {
        if (oracle::marginal(inst, scheme, s) <= 0.0) continue;
        const auto in = oracle::gamma_best(inst, scheme, s, gamma, 0.0);
        double mass = 0.0;
        for (std::size_t a = 0; a < in.size(); ++a)
          if (in[a]) mass += rho(s, a);
        ++signals;
        min_slack = std::min(min_slack, mass - (1.0 - 1.0 / lambda));
        if (mass < 1.0 - 1.0 / lambda) ++violations;
      }
    }
  }
  return {violations == 0, format("600 instances, %zu signals, violations %zu, min slack %.3g", signals, violations,
                                  min_slack)};
}

Outcome projection() {
  Rng rng = make_stream(kSeed + 7, Stream::kSampling);
  std::size_t failures = 0;
  double worst_excess = -kInfinity;
  for (int k = 0; k < 1000; ++k) {
    const auto inst = sampling::random_instance(2 + rng.index(4), 2 + rng.index(4), rng);
    const auto scheme = sampling::random_scheme(inst.state_count(), 1 + rng.index(5), rng);
    const double gamma = rng.uniform(0.0, 0.3), delta = rng.uniform(0.0, 0.5);
    const auto rho = sampling::random_approx_strategy(inst, scheme, gamma, delta, rng);
    const auto projected = project_strategy(inst, scheme, rho, gamma);
    const double du = std::abs(oracle::utility(inst, scheme, rho) - oracle::utility(inst, scheme, projected));
    worst_excess = std::max(worst_excess, du - delta);
    if (!oracle::best_responding(inst, scheme, projected, gamma, 0.0) || du > delta + 1e-10) ++failures;
  }
  return {failures == 0, format("1000 strategies, failures %zu, max |dU| - delta %.3g", failures, worst_excess)};
}

Outcome alternating() {
  const auto r = run_alternating(mismatch_instance(), 2000000, 20, kSeed);
  auto in = [](double x, double lo, double hi) { return x >= lo && x <= hi; };
  const bool pass = in(r.mean_average, 0.615, 0.635) && in(r.mean_flip_fraction, 0.49, 0.51) &&
                    in(r.mean_flip_utility, 0.74, 0.76) && in(r.mean_wait_utility, 0.485, 0.515) &&
                    r.alternation_holds && std::abs(r.classic_opt - 0.5) <= 1e-8;
  return {pass, format("average %.5f, s1 fraction %.5f, s1 utility %.5f, s2 utility %.5f, alternation %s, "
                       "classic OPT %.10f",
                       r.mean_average, r.mean_flip_fraction, r.mean_flip_utility, r.mean_wait_utility,
                       r.alternation_holds ? "exact" : "BROKEN", r.classic_opt)};
}

Outcome learning() {
  LearningRunConfig cfg;
  cfg.C = 0.2;
  cfg.rounds = 500000;
  cfg.seeds = 10;
  cfg.base_seed = kSeed;
  cfg.receiver = ReceiverKind::kExpWeights;
  cfg.feedback = FeedbackMode::kFull;
  const auto r = run_robustified_learning(judge_instance(), cfg);
  const bool pass = std::abs(r.alpha - 0.1) <= 1e-15 && r.mean_final_average >= 0.4 && r.mean_tail_obedience >= 0.95;
  return {pass, format("alpha %.3f, mean final average %.5f (target >= 0.4), tail obedience %.5f (target >= 0.95)",
                       r.alpha, r.mean_final_average, r.mean_tail_obedience)};
}

Outcome coverage() {
  const auto inst = judge_instance();
  const auto scheme = robustify(inst, solve_classic(inst).scheme, 0.1);
  const auto r = coverage_trial(inst, scheme, 100000, 1000, kSeed);
  return {r.rate() >= 0.99, format("coverage %.4f over %zu runs (needs >= 0.99), radii %.4f/%.4f, worst ratio %.3f",
                                   r.rate(), r.runs, r.radius[0], r.radius[1], r.worst_ratio)};
}

}  // namespace

int main() {
  bool all = true;
  all &= run(1, 1, judge_classic);
  all &= run(2, 1, example_one);
  all &= run(3, 30, robustification_suite);
  all &= run(4, 300, sandwich);
  all &= run(5, 30, direct_equivalence);
  all &= run(6, 30, quantal);
  all &= run(7, 30, projection);
  all &= run(8, 300, alternating);
  all &= run(9, 180, learning);
  all &= run(10, 120, coverage);
  std::printf("%s\n", all ? "ALL CRITERIA PASS" : "SOME CRITERIA FAIL");
  return all ? 0 : 1;
}
