#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "persuasion/io.hpp"
#include "persuasion/persuasion.hpp"

using namespace persuasion;
using io::Json;

namespace {

struct Globals {
  std::string output_dir;
  std::uint64_t seed = 0;
  double eps_num = 1e-9;

  Tolerances tol() const { return {eps_num}; }
};

Json number(double x) {
  if (std::isnan(x)) return nullptr;
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return x;
}

Json numbers(const Vector& v) {
  Json out = Json::array();
  for (double x : v) out.push_back(number(x));
  return out;
}

PersuasionInstance load_instance_arg(const std::string& arg) {
  if (arg == "builtin:judge") return judge_instance();
  if (arg == "builtin:example-1") return weakly_dominated_instance();
  if (arg == "builtin:example-4-3") return mismatch_instance();
  require(arg.rfind("builtin:", 0) != 0, ErrorCode::kInvalidArgument, "unknown built-in instance '" + arg + "'");
  return io::load_instance(arg);
}

/// A scheme file, or one of: classic, full-revelation, uninformative.
SignalingScheme load_scheme_arg(const std::string& arg, const PersuasionInstance& inst) {
  if (arg == "classic") return solve_classic(inst).scheme;
  if (arg == "full-revelation") return full_revelation_scheme(inst);
  if (arg == "uninformative") return uninformative_scheme(inst);
  auto scheme = io::load_scheme(arg);
  check_compatible(inst, scheme);
  return scheme;
}

Json profile_json(const PersuasionInstance& inst, const InstanceProfile& p) {
  Json j;
  j["assumption_satisfied"] = p.assumption_satisfied;
  j["gap"] = number(p.gap);
  j["mu_min"] = number(p.mu_min);
  Json optimal = Json::array();
  for (const auto& a : p.per_state_optimal) optimal.push_back(a ? Json(inst.actions()[*a]) : Json(nullptr));
  j["optimal_action"] = optimal;
  j["region_mass"] = numbers(p.region_mass);
  Json issues = Json::array();
  for (const auto& i : p.issues) {
    const bool about_state = i.kind != ProfileIssueKind::kActionNeverOptimal;
    issues.push_back({{"kind", to_string(i.kind)},
                      {about_state ? "state" : "action", about_state ? inst.states()[i.index] : inst.actions()[i.index]}});
  }
  j["issues"] = issues;
  return j;
}

Json bounds_json(const BoundsReport& r) {
  return {{"opt", r.opt},
          {"mu_min", r.mu_min},
          {"gap", number(r.gap)},
          {"gamma", r.gamma},
          {"delta", r.delta},
          {"ratio", r.ratio},
          {"slack", r.slack},
          {"alpha", r.alpha},
          {"lower_certificate", r.lower_certificate},
          {"lower_bound", r.lower_bound},
          {"lower_bound_at_alpha", r.lower_bound_at_alpha},
          {"obedience_unique", r.obedience_unique},
          {"lower_ok", r.lower_ok},
          {"sampled_schemes", r.sampled_schemes},
          {"max_best_value", number(r.max_best_value)},
          {"upper_bound", r.upper_bound},
          {"upper_violations", r.upper_violations},
          {"upper_ok", r.upper_ok},
          {"knife_edges", r.knife_edges},
          {"holds", r.holds()}};
}

Json summary_json(const SimulationSummary& s, const SignalingScheme& scheme) {
  Json per_signal = Json::object();
  for (SignalIndex k = 0; k < s.signal_rounds.size(); ++k)
    per_signal[scheme.signals()[k]] = {{"rounds", s.signal_rounds[k]},
                                       {"fraction", s.signal_fraction(k)},
                                       {"mean_sender_utility", s.signal_mean_utility(k)}};
  Json j{{"rounds", s.rounds}, {"final_average", s.final_average}, {"signals", per_signal}};
  if (s.direct_rounds > 0)
    j["obedience"] = static_cast<double>(s.obedient_rounds) / static_cast<double>(s.direct_rounds);
  if (s.tail_rounds > 0) {
    j["tail_start"] = s.tail_start;
    j["tail_obedience"] = s.tail_obedience();
  }
  return j;
}

Json diagnostics_json(const CheckpointDiagnostics& d) {
  return {{"t", d.t},
          {"running_average", d.running_average},
          {"signal_counts", d.signal_counts},
          {"radius", numbers(d.radius)},
          {"window_obedience", number(d.window_obedience)},
          {"cumulative_obedience", number(d.cumulative_obedience)}};
}

std::string csv_number(double x) {
  std::ostringstream ss;
  ss.precision(17);
  ss << x;
  return ss.str();
}

void write_diagnostics_csv(const std::string& path, const std::vector<CheckpointDiagnostics>& diags,
                           const SignalingScheme& scheme) {
  std::ofstream out(path);
  require(out.good(), ErrorCode::kInvalidArgument, "cannot write '" + path + "'");
  out << "t,running_avg,window_obedience,cumulative_obedience";
  for (const auto& s : scheme.signals()) out << ",count_" << s << ",radius_" << s;
  out << "\n";
  for (const auto& d : diags) {
    out << d.t << "," << csv_number(d.running_average) << "," << csv_number(d.window_obedience) << ","
        << csv_number(d.cumulative_obedience);
    for (std::size_t k = 0; k < d.signal_counts.size(); ++k) out << "," << d.signal_counts[k] << "," << csv_number(d.radius[k]);
    out << "\n";
  }
}

/// Prints the report and, with --output-dir, writes it as <name>.json.
void emit(const Globals& g, const std::string& name, const Json& report) {
  std::cout << report.dump(2) << "\n";
  if (!g.output_dir.empty()) io::write_json((std::filesystem::path(g.output_dir) / (name + ".json")).string(), report);
}

Json base_config(const Globals& g, const std::string& command) {
  return {{"command", command}, {"seed", g.seed}, {"eps_num", g.eps_num}, {"output_dir", g.output_dir}};
}

// ---------------------------------------------------------------------------

int cmd_check(const Globals& g, const std::string& instance_arg) {
  const auto inst = load_instance_arg(instance_arg);
  const auto p = profile_instance(inst);
  Json config = base_config(g, "check-assumptions");
  config["instance"] = instance_arg;
  emit(g, "check-assumptions", {{"config", config}, {"instance", io::to_json(inst)}, {"profile", profile_json(inst, p)}});
  std::cerr << "assumption " << (p.assumption_satisfied ? "satisfied" : "violated") << ": gap=" << p.gap
            << " mu_min=" << p.mu_min << "\n";
  return p.assumption_satisfied ? 0 : 2;
}

int cmd_solve(const Globals& g, const std::string& instance_arg, std::size_t max_iterations) {
  const auto inst = load_instance_arg(instance_arg);
  lp::SimplexOptions options;
  options.max_iterations = max_iterations;
  const auto sol = solve_classic(inst, options);
  Json config = base_config(g, "solve-classic");
  config["instance"] = instance_arg;
  config["max_iterations"] = max_iterations;
  Json posteriors = Json::object();
  const Vector marginal = signal_marginals(inst, sol.scheme);
  for (SignalIndex s = 0; s < sol.scheme.signal_count(); ++s)
    if (marginal[s] > 0.0) posteriors[sol.scheme.signals()[s]] = posterior(inst, sol.scheme, s);
  Json report{{"config", config},
              {"opt", sol.opt},
              {"scheme", io::to_json(sol.scheme)},
              {"signal_marginals", marginal},
              {"posteriors", posteriors},
              {"lp",
               {{"iterations", sol.lp.iterations},
                {"duality_gap", sol.lp.duality_gap},
                {"primal_residual", sol.lp.primal_residual},
                {"dual_residual", sol.lp.dual_residual}}}};
  emit(g, "solve-classic", report);
  if (!g.output_dir.empty())
    io::write_json((std::filesystem::path(g.output_dir) / "optimal_scheme.json").string(), io::to_json(sol.scheme));
  std::cerr << "OPT = " << sol.opt << "\n";
  return 0;
}

struct RobustifyArgs {
  std::string instance, scheme = "classic", rule = "lower";
  std::optional<double> alpha, gamma;
};

int cmd_robustify(const Globals& g, const RobustifyArgs& a) {
  const auto inst = load_instance_arg(a.instance);
  const auto scheme = load_scheme_arg(a.scheme, inst);
  require(a.alpha.has_value() != a.gamma.has_value(), ErrorCode::kInvalidArgument, "give exactly one of --alpha, --gamma");
  double alpha = 0.0;
  if (a.alpha) {
    alpha = *a.alpha;
  } else {
    require(a.rule == "lower" || a.rule == "upper", ErrorCode::kInvalidArgument, "--rule must be lower or upper");
    alpha = a.rule == "lower" ? choose_alpha_lower(inst, *a.gamma) : choose_alpha_upper(inst, *a.gamma);
  }
  const auto rep = verify_robustification(inst, scheme, alpha);
  Json config = base_config(g, "robustify");
  config["instance"] = a.instance;
  config["scheme"] = a.scheme;
  if (a.alpha) config["alpha"] = *a.alpha;
  if (a.gamma) {
    config["gamma"] = *a.gamma;
    config["rule"] = a.rule;
  }
  Json report{{"config", config},
              {"alpha", alpha},
              {"scheme", io::to_json(rep.robustified)},
              {"marginal_identity_residual", rep.marginal_identity_residual},
              {"advantage_bound_slack", number(rep.advantage_bound_slack)},
              {"tv_distance", rep.tv_distance},
              {"utility_gap", rep.utility_gap},
              {"scheme_advantage", number(scheme_advantage(inst, rep.robustified))},
              {"holds", rep.holds()}};
  emit(g, "robustify", report);
  if (!g.output_dir.empty())
    io::write_json((std::filesystem::path(g.output_dir) / "robustified_scheme.json").string(), io::to_json(rep.robustified));
  std::cerr << "alpha = " << alpha << ", guarantees " << (rep.holds() ? "hold" : "FAIL") << "\n";
  return 0;
}

struct EvaluateArgs {
  std::string instance, scheme = "classic", mode = "worst";
  double gamma = 0.0, delta = 0.0;
};

int cmd_evaluate(const Globals& g, const EvaluateArgs& a) {
  const auto inst = load_instance_arg(a.instance);
  const auto scheme = load_scheme_arg(a.scheme, inst);
  require(a.gamma >= 0.0, ErrorCode::kInvalidArgument, "--gamma must be non-negative");
  require(a.delta >= 0.0 && a.delta < 1.0, ErrorCode::kInvalidArgument, "--delta must lie in [0,1)");
  Json config = base_config(g, "evaluate");
  config["instance"] = a.instance;
  config["scheme"] = a.scheme;
  config["gamma"] = a.gamma;
  config["delta"] = a.delta;
  config["mode"] = a.mode;

  Json result;
  std::optional<ReceiverStrategy> strategy;
  bool knife_edge = false;
  if (a.mode == "worst" || a.mode == "best") {
    const auto est = eval_objective_fixed_scheme(inst, scheme, a.gamma, a.delta,
                                                 a.mode == "worst" ? ObjectiveMode::kWorst : ObjectiveMode::kBest, g.tol());
    result["value"] = est.value;
    knife_edge = est.knife_edge;
    strategy = est.witness;
  } else if (a.mode == "obedient") {
    check_direct(inst, scheme);
    strategy = ReceiverStrategy::obedient(inst.action_count());
  } else if (a.mode.rfind("quantal:", 0) == 0) {
    const double lambda = std::stod(a.mode.substr(8));
    strategy = quantal_strategy(inst, scheme, lambda);
    if (lambda > 0.0) {
      const auto [cg, cd] = quantal_certificate(inst.action_count(), lambda);
      result["certificate"] = {{"gamma", cg}, {"delta", cd},
                               {"holds", is_best_responding(inst, scheme, *strategy, cg, cd, g.tol())}};
    }
  } else if (a.mode.rfind("perturbed:", 0) == 0) {
    const double eps = std::stod(a.mode.substr(10));
    Rng rng = make_stream(g.seed, Stream::kReceiver);
    strategy = perturbed_posterior_strategy(inst, scheme, eps, rng);
    result["certificate"] = {{"gamma", 2.0 * eps}, {"delta", 0.0},
                             {"holds", is_best_responding(inst, scheme, *strategy, 2.0 * eps, 0.0, g.tol())}};
  } else {
    fail(ErrorCode::kInvalidArgument, "unknown --mode '" + a.mode + "'");
  }
  const double u = expected_utility(inst, scheme, *strategy);
  if (!result.contains("value")) result["value"] = u;
  result["strategy"] = io::to_json(*strategy);
  result["receiver_utility"] = expected_utility(inst, scheme, *strategy, Party::kReceiver);
  result["best_responding"] = is_best_responding(inst, scheme, *strategy, a.gamma, a.delta, g.tol());
  const auto set = approx_set(inst, scheme, a.gamma, g.tol());
  Json sets = Json::object();
  for (SignalIndex s = 0; s < scheme.signal_count(); ++s) {
    if (set.marginal[s] <= 0.0) continue;
    Json members = Json::array();
    for (ActionIndex x : set.members[s]) members.push_back(inst.actions()[x]);
    sets[scheme.signals()[s]] = members;
  }
  result["approx_sets"] = sets;
  result["knife_edge"] = knife_edge || set.knife_edge;
  emit(g, "evaluate", {{"config", config}, {"result", result}});
  std::cerr << a.mode << " value = " << result["value"].get<double>() << "\n";
  return 0;
}

int cmd_bounds(const Globals& g, const std::string& instance_arg, double gamma, double delta, std::size_t samples) {
  const auto inst = load_instance_arg(instance_arg);
  Rng rng = make_stream(g.seed, Stream::kSampling);
  const auto r = check_robustness_bounds(inst, gamma, delta, samples, rng, g.tol());
  Json config = base_config(g, "bounds");
  config["instance"] = instance_arg;
  config["gamma"] = gamma;
  config["delta"] = delta;
  config["samples"] = samples;
  emit(g, "bounds", {{"config", config}, {"bounds", bounds_json(r)}});
  std::cerr << "L = " << r.lower_certificate << " (bound " << r.lower_bound << "), max B = " << r.max_best_value
            << " (bound " << r.upper_bound << "): " << (r.holds() ? "holds" : "VIOLATED") << "\n";
  return 0;
}

struct SimulateArgs {
  std::string instance, sender = "robustified:0.2", receiver = "exp-weights", feedback = "full";
  Round rounds = 10000;
  std::size_t seeds = 1;
  Round checkpoint_every = 0;
};

int cmd_simulate(const Globals& g, const SimulateArgs& a) {
  const auto inst = load_instance_arg(a.instance);
  require(a.rounds >= 1, ErrorCode::kInvalidArgument, "--rounds must be at least 1");
  require(a.seeds >= 1, ErrorCode::kInvalidArgument, "--seeds must be at least 1");
  require(a.feedback == "full" || a.feedback == "partial", ErrorCode::kInvalidArgument, "--feedback must be full or partial");
  const FeedbackMode mode = a.feedback == "full" ? FeedbackMode::kFull : FeedbackMode::kPartial;
  const ReceiverKind kind = parse_receiver_kind(a.receiver);

  std::optional<SignalingScheme> fixed;
  std::optional<double> alpha;
  bool alternating = false;
  if (a.sender == "alternating") {
    alternating = true;
    AlternatingSender probe(inst);
  } else if (a.sender.rfind("fixed:", 0) == 0) {
    fixed = load_scheme_arg(a.sender.substr(6), inst);
  } else if (a.sender.rfind("robustified:", 0) == 0) {
    const double C = std::stod(a.sender.substr(12));
    require(C > 0.0, ErrorCode::kInvalidArgument, "robustified:C needs C > 0");
    require(profile_instance(inst).assumption_satisfied, ErrorCode::kHypothesisViolated,
            "robustified sender needs a unique optimal action per state and mu_min > 0");
    alpha = std::min(1.0, C / 2.0);
    fixed = robustify(inst, solve_classic(inst).scheme, *alpha);
  } else {
    fail(ErrorCode::kInvalidArgument, "unknown --sender '" + a.sender + "'");
  }
  const SignalingScheme shown = fixed ? *fixed : SignalingScheme({"s1", "s2"}, Matrix(2, 2, 0.5));
  const std::size_t signals = shown.signal_count();
  const std::filesystem::path dir = g.output_dir;

  struct Outcome {
    SimulationSummary summary;
    std::vector<CheckpointDiagnostics> diagnostics;
  };
  const Round tail_start = std::max<Round>(1, a.rounds - a.rounds / 10 + 1);
  const auto outcomes = replicate(a.seeds, [&](std::size_t k) {
    const std::uint64_t seed = g.seed + k;
    std::unique_ptr<SenderPolicy> sender;
    if (alternating)
      sender = std::make_unique<AlternatingSender>(inst);
    else
      sender = std::make_unique<FixedSender>(*fixed);
    auto receiver = make_receiver(kind, inst, signals, a.rounds);
    SimulationOptions opt;
    opt.rounds = a.rounds;
    opt.seed = seed;
    opt.feedback = mode;
    opt.checkpoint_every = a.checkpoint_every;
    opt.tail_start = tail_start;
    std::ofstream trace;
    RoundObserver write_row;
    if (!dir.empty()) {
      const auto path = dir / ("trace_seed" + std::to_string(seed) + ".csv");
      trace.open(path);
      require(trace.good(), ErrorCode::kInvalidArgument, "cannot write '" + path.string() + "'");
      trace << "t,state,signal,action,u,v,running_avg\n";
      write_row = [&](const RoundRecord& r) {
        trace << r.t << "," << inst.states()[r.state] << "," << shown.signals()[r.signal] << ","
              << inst.actions()[r.action] << "," << csv_number(r.sender_utility) << ","
              << csv_number(r.receiver_utility) << "," << csv_number(r.running_average) << "\n";
      };
    }
    auto result = simulate(inst, *sender, *receiver, opt, write_row);
    if (!dir.empty() && a.checkpoint_every > 0)
      write_diagnostics_csv((dir / ("diagnostics_seed" + std::to_string(seed) + ".csv")).string(), result.diagnostics,
                            shown);
    return Outcome{std::move(result.summary), std::move(result.diagnostics)};
  });

  Json config = base_config(g, "simulate");
  config["instance"] = a.instance;
  config["sender"] = a.sender;
  config["receiver"] = a.receiver;
  config["feedback"] = a.feedback;
  config["rounds"] = a.rounds;
  config["seeds"] = a.seeds;
  config["checkpoint_every"] = a.checkpoint_every;
  Json runs = Json::array();
  double mean = 0.0;
  for (std::size_t k = 0; k < outcomes.size(); ++k) {
    Json run = summary_json(outcomes[k].summary, shown);
    run["seed"] = g.seed + k;
    if (!outcomes[k].diagnostics.empty()) {
      Json diags = Json::array();
      for (const auto& d : outcomes[k].diagnostics) diags.push_back(diagnostics_json(d));
      run["diagnostics"] = diags;
    }
    runs.push_back(run);
    mean += outcomes[k].summary.final_average;
  }
  mean /= static_cast<double>(outcomes.size());
  Json report{{"config", config}, {"mean_final_average", mean}, {"runs", runs}};
  if (fixed) report["scheme"] = io::to_json(*fixed);
  if (alpha) report["alpha"] = *alpha;
  emit(g, "simulate", report);
  std::cerr << "mean final average over " << a.seeds << " seed(s): " << mean << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// reproduce

struct Check {
  std::string name;
  bool pass;
  Json value;
};

Json checks_json(const std::vector<Check>& checks, bool& all) {
  Json out = Json::array();
  all = true;
  for (const auto& c : checks) {
    out.push_back({{"check", c.name}, {"pass", c.pass}, {"value", c.value}});
    all = all && c.pass;
  }
  return out;
}

Json reproduce_example_1(const Globals& g) {
  const auto inst = weakly_dominated_instance();
  const auto sol = solve_classic(inst);
  const double full = eval_objective_fixed_scheme(inst, full_revelation_scheme(inst), 0, 0, ObjectiveMode::kWorst, g.tol()).value;
  const double opt_worst = eval_objective_fixed_scheme(inst, sol.scheme, 0, 0, ObjectiveMode::kWorst, g.tol()).value;
  bool all = false;
  Json checks = checks_json({{"opt == 0.5", std::abs(sol.opt - 0.5) <= 1e-8, sol.opt},
                             {"worst(full revelation) == 0", std::abs(full) <= 1e-12, full},
                             {"worst(optimal scheme) == 0", std::abs(opt_worst) <= 1e-12, opt_worst}},
                            all);
  return {{"checks", checks}, {"passed", all}, {"scheme", io::to_json(sol.scheme)}};
}

Json reproduce_judge(const Globals& g) {
  const auto inst = judge_instance();
  const auto sol = solve_classic(inst);
  const double worst = eval_objective_fixed_scheme(inst, sol.scheme, 0, 0, ObjectiveMode::kWorst, g.tol()).value;
  const double best = eval_objective_fixed_scheme(inst, sol.scheme, 0, 0, ObjectiveMode::kBest, g.tol()).value;
  const double alpha = choose_alpha_lower(inst, 0.03);
  const auto robust = robustify(inst, sol.scheme, alpha);
  const double robust_worst = eval_objective_fixed_scheme(inst, robust, 0.03, 0, ObjectiveMode::kWorst, g.tol()).value;
  const double post = posterior(inst, sol.scheme, 0)[0];
  bool all = false;
  Json checks = checks_json({{"opt == 0.6", std::abs(sol.opt - 0.6) <= 1e-8, sol.opt},
                             {"posterior of guilty at convict == 0.5", std::abs(post - 0.5) <= 1e-9, post},
                             {"best(optimal scheme) == 0.6", std::abs(best - 0.6) <= 1e-8, best},
                             {"worst(optimal scheme) at gamma 0 == 0", std::abs(worst) <= 1e-12, worst},
                             {"worst(robustified, gamma 0.03) >= 0.5", robust_worst >= 0.5, robust_worst}},
                            all);
  return {{"checks", checks}, {"passed", all}, {"alpha", alpha}, {"robustified_scheme", io::to_json(robust)}};
}

Json reproduce_example_4_3(const Globals& g, Round rounds, std::size_t seeds) {
  const auto rep = run_alternating(mismatch_instance(), rounds, seeds, g.seed);
  auto within = [](double x, double lo, double hi) { return x >= lo && x <= hi; };
  bool all = false;
  Json checks = checks_json(
      {{"average in [0.615, 0.635]", within(rep.mean_average, 0.615, 0.635), rep.mean_average},
       {"s1 fraction in [0.49, 0.51]", within(rep.mean_flip_fraction, 0.49, 0.51), rep.mean_flip_fraction},
       {"s1 mean utility in [0.74, 0.76]", within(rep.mean_flip_utility, 0.74, 0.76), rep.mean_flip_utility},
       {"s2 mean utility in [0.485, 0.515]", within(rep.mean_wait_utility, 0.485, 0.515), rep.mean_wait_utility},
       {"states alternate on s1 rounds", rep.alternation_holds, rep.alternation_holds},
       {"classic opt == 0.5", std::abs(rep.classic_opt - 0.5) <= 1e-8, rep.classic_opt}},
      all);
  Json per_seed = Json::array();
  for (const auto& s : rep.summaries) per_seed.push_back(s.final_average);
  return {{"checks", checks}, {"passed", all}, {"rounds", rounds}, {"seeds", seeds}, {"final_averages", per_seed}};
}

Json reproduce_sweep(const Globals& g, std::size_t instances) {
  const auto r = sandwich_sweep(instances, {0.01, 0.05}, {0.0, 0.02}, 50, g.seed);
  bool all = false;
  Json checks = checks_json({{"zero lower-bound violations", r.lower_violations == 0, r.lower_violations},
                             {"zero upper-bound violations", r.upper_violations == 0, r.upper_violations}},
                            all);
  return {{"checks", checks},
          {"passed", all},
          {"instances", r.instances},
          {"rejected_instances", r.rejected},
          {"cases", r.cases},
          {"schemes_per_instance", r.schemes_per_instance},
          {"min_lower_margin", r.min_lower_margin},
          {"min_upper_margin", r.min_upper_margin},
          {"knife_edges", r.knife_edges}};
}

Json reproduce_learning(const Globals& g, Round rounds, std::size_t seeds) {
  LearningRunConfig cfg;
  cfg.rounds = rounds;
  cfg.seeds = seeds;
  cfg.base_seed = g.seed;
  cfg.checkpoint_every = std::max<Round>(1, rounds / 20);
  const auto rep = run_robustified_learning(judge_instance(), cfg);
  bool all = false;
  Json checks = checks_json({{"mean final average >= OPT - C", rep.meets_target(), rep.mean_final_average},
                             {"tail obedience >= 0.95", rep.mean_tail_obedience >= 0.95, rep.mean_tail_obedience}},
                            all);
  Json thresholds = Json::array();
  for (const auto& t : rep.thresholds)
    thresholds.push_back({{"t", t.t}, {"advantage_ok", t.advantage_ok}, {"budget_ok", t.budget_ok},
                          {"advantage_floor", numbers(t.advantage_floor)}, {"required", numbers(t.required)},
                          {"delta", t.delta}});
  Json diags = Json::array();
  for (const auto& d : rep.diagnostics) diags.push_back(diagnostics_json(d));
  return {{"checks", checks},
          {"passed", all},
          {"opt", rep.opt},
          {"C", cfg.C},
          {"alpha", rep.alpha},
          {"target", rep.target},
          {"obedient_utility", rep.obedient_utility},
          {"rounds", rounds},
          {"seeds", seeds},
          {"threshold_round", rep.threshold_round ? Json(*rep.threshold_round) : Json(nullptr)},
          {"thresholds", thresholds},
          {"diagnostics_first_seed", diags}};
}

int cmd_reproduce(const Globals& g, const std::string& target, std::optional<Round> rounds,
                  std::optional<std::size_t> seeds, std::optional<std::size_t> instances) {
  Json config = base_config(g, "reproduce");
  config["target"] = target;
  Json result;
  if (target == "example-1") {
    result = reproduce_example_1(g);
  } else if (target == "judge") {
    result = reproduce_judge(g);
  } else if (target == "example-4-3") {
    result = reproduce_example_4_3(g, rounds.value_or(2000000), seeds.value_or(20));
  } else if (target == "theorem-3-1-sweep") {
    result = reproduce_sweep(g, instances.value_or(500));
  } else if (target == "theorem-4-1") {
    result = reproduce_learning(g, rounds.value_or(500000), seeds.value_or(10));
  } else {
    fail(ErrorCode::kUnknownTarget, "unknown reproduction target '" + target + "'");
  }
  if (rounds) config["rounds"] = *rounds;
  if (seeds) config["seeds"] = *seeds;
  if (instances) config["instances"] = *instances;
  emit(g, "reproduce-" + target, {{"config", config}, {"result", result}});
  for (const auto& c : result["checks"])
    std::cerr << (c["pass"].get<bool>() ? "PASS " : "FAIL ") << c["check"].get<std::string>() << "\n";
  return 0;
}

int exit_status(ErrorCode code) {
  switch (classify(code)) {
    case ErrorClass::kValidation: return 1;
    case ErrorClass::kHypothesis: return 2;
    case ErrorClass::kNumerical: return 3;
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robust Bayesian persuasion toolkit"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--output-dir", g.output_dir, "Directory for reports and traces")->check(CLI::ExistingDirectory);
  app.add_option("--seed", g.seed, "Base random seed");
  app.add_option("--eps-num", g.eps_num, "Inclusive tolerance for approximate best-response sets")
      ->check(CLI::NonNegativeNumber);
  app.fallthrough();

  std::string instance;
  auto* check = app.add_subcommand("check-assumptions", "Profile the receiver's per-state optima");
  check->add_option("--instance", instance, "Instance JSON or builtin:<name>")->required();

  auto* solve = app.add_subcommand("solve-classic", "Optimal scheme against an exactly best-responding receiver");
  solve->add_option("--instance", instance)->required();
  std::size_t max_iterations = lp::SimplexOptions{}.max_iterations;
  solve->add_option("--max-iterations", max_iterations, "Simplex pivot limit");

  RobustifyArgs rob;
  double alpha = 0.0, gamma_for_rule = 0.0;
  auto* robust = app.add_subcommand("robustify", "Mix a direct scheme with receiver-optimal recommendations");
  robust->add_option("--instance", rob.instance)->required();
  robust->add_option("--scheme", rob.scheme, "Scheme JSON, classic, full-revelation or uninformative");
  auto* alpha_opt = robust->add_option("--alpha", alpha);
  auto* gamma_opt = robust->add_option("--gamma", gamma_for_rule);
  robust->add_option("--rule", rob.rule, "lower or upper");

  EvaluateArgs ev;
  auto* evaluate = app.add_subcommand("evaluate", "Sender utility against a receiver behaviour model");
  evaluate->add_option("--instance", ev.instance)->required();
  evaluate->add_option("--scheme", ev.scheme);
  evaluate->add_option("--gamma", ev.gamma);
  evaluate->add_option("--delta", ev.delta);
  evaluate->add_option("--mode", ev.mode, "worst, best, obedient, quantal:<lambda> or perturbed:<eps>");

  std::string bounds_instance;
  double bounds_gamma = 0.0, bounds_delta = 0.0;
  std::size_t samples = 200;
  auto* bounds = app.add_subcommand("bounds", "Check the robust-utility sandwich around OPT");
  bounds->add_option("--instance", bounds_instance)->required();
  bounds->add_option("--gamma", bounds_gamma);
  bounds->add_option("--delta", bounds_delta);
  bounds->add_option("--samples", samples);

  SimulateArgs sim;
  auto* simulate_cmd = app.add_subcommand("simulate", "Repeated game against a learning receiver");
  simulate_cmd->add_option("--instance", sim.instance)->required();
  simulate_cmd->add_option("--sender", sim.sender, "fixed:<scheme>, robustified:<C> or alternating");
  simulate_cmd->add_option("--receiver", sim.receiver, "empirical-br, exp-weights or exp3");
  simulate_cmd->add_option("--feedback", sim.feedback, "full or partial");
  simulate_cmd->add_option("--rounds", sim.rounds);
  simulate_cmd->add_option("--seeds", sim.seeds);
  simulate_cmd->add_option("--checkpoint-every", sim.checkpoint_every);

  std::string target;
  std::optional<Round> rep_rounds;
  std::optional<std::size_t> rep_seeds, rep_instances;
  auto* reproduce = app.add_subcommand("reproduce", "Run a bundled worked example end to end");
  reproduce->add_option("target", target, "example-1, judge, example-4-3, theorem-3-1-sweep or theorem-4-1")->required();
  reproduce->add_option("--rounds", rep_rounds, "Override the pinned horizon");
  reproduce->add_option("--seeds", rep_seeds, "Override the pinned number of seeds");
  reproduce->add_option("--instances", rep_instances, "Override the pinned sweep size");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (check->parsed()) return cmd_check(g, instance);
    if (solve->parsed()) return cmd_solve(g, instance, max_iterations);
    if (robust->parsed()) {
      if (alpha_opt->count()) rob.alpha = alpha;
      if (gamma_opt->count()) rob.gamma = gamma_for_rule;
      return cmd_robustify(g, rob);
    }
    if (evaluate->parsed()) return cmd_evaluate(g, ev);
    if (bounds->parsed()) return cmd_bounds(g, bounds_instance, bounds_gamma, bounds_delta, samples);
    if (simulate_cmd->parsed()) return cmd_simulate(g, sim);
    if (reproduce->parsed()) return cmd_reproduce(g, target, rep_rounds, rep_seeds, rep_instances);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_status(e.code());
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: INVALID_ARGUMENT: malformed number\n";
    return 1;
  }
  return 1;
}
