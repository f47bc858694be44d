#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <type_traits>

#include "oracles.hpp"
#include "persuasion/persuasion.hpp"

using namespace persuasion;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::kInvalidArgument;
}

SignalingScheme robust_judge(double alpha = 0.1) {
  const auto inst = judge_instance();
  return robustify(inst, solve_classic(inst).scheme, alpha);
}

LearnerState with_history(std::int64_t good, std::int64_t bad) {
  LearnerState st(1, 2, 2, FeedbackMode::kFull);
  for (std::int64_t k = 0; k < good; ++k) st.record({0, 0, 1.0, StateIndex{0}});
  for (std::int64_t k = 0; k < bad; ++k) st.record({0, 0, 0.0, StateIndex{1}});
  return st;
}

/// Records everything the simulator hands to the receiver.
class SpyReceiver final : public ReceiverAlgorithm {
 public:
  std::string name() const override { return "spy"; }
  bool supports(FeedbackMode) const override { return true; }
  ActionIndex act(SignalIndex s, Round t, Rng& rng) override {
    EXPECT_EQ(t, static_cast<Round>(feedback.size()) + 1);
    signals.push_back(s);
    return rng.index(2);
  }
  void observe(const RoundFeedback& fb) override {
    EXPECT_EQ(feedback.size() + 1, signals.size());
    feedback.push_back(fb);
  }
  Vector action_distribution(SignalIndex, Round) const override { return {0.5, 0.5}; }

  std::vector<SignalIndex> signals;
  std::vector<RoundFeedback> feedback;
};

}  // namespace

TEST(Simulate, IdenticalSeedsGiveIdenticalTraces) {
  const auto inst = judge_instance();
  for (auto kind : {ReceiverKind::kEmpiricalBr, ReceiverKind::kExpWeights, ReceiverKind::kExp3}) {
    std::vector<RoundRecord> runs[2];
    for (auto& run : runs) {
      FixedSender sender(robust_judge());
      auto receiver = make_receiver(kind, inst, 2, 5000);
      SimulationOptions opt;
      opt.rounds = 5000;
      opt.seed = 42;
      opt.keep_rounds = true;
      run = simulate(inst, sender, *receiver, opt).rounds;
    }
    ASSERT_EQ(runs[0].size(), runs[1].size());
    for (std::size_t k = 0; k < runs[0].size(); ++k) {
      EXPECT_EQ(runs[0][k].state, runs[1][k].state);
      EXPECT_EQ(runs[0][k].signal, runs[1][k].signal);
      EXPECT_EQ(runs[0][k].action, runs[1][k].action);
      EXPECT_EQ(runs[0][k].running_average, runs[1][k].running_average);
    }
  }
}

TEST(Simulate, ReceiverChoiceDoesNotPerturbStates) {
  const auto inst = judge_instance();
  std::vector<StateIndex> states[2];
  const ReceiverKind kinds[2] = {ReceiverKind::kEmpiricalBr, ReceiverKind::kExp3};
  for (int k = 0; k < 2; ++k) {
    FixedSender sender(robust_judge());
    auto receiver = make_receiver(kinds[k], inst, 2, 2000);
    SimulationOptions opt;
    opt.rounds = 2000;
    opt.seed = 7;
    simulate(inst, sender, *receiver, opt, [&](const RoundRecord& r) { states[k].push_back(r.state); });
  }
  EXPECT_EQ(states[0], states[1]);
}

TEST(Simulate, RunningAverageIsPrefixMean) {
  const auto inst = judge_instance();
  FixedSender sender(robust_judge());
  ExponentialWeights receiver(inst.receiver_utility(), 2);
  SimulationOptions opt;
  opt.rounds = 100000;
  opt.seed = 3;
  opt.keep_rounds = true;
  const auto trace = simulate(inst, sender, receiver, opt);
  long double total = 0.0L;
  for (std::size_t k = 0; k < trace.rounds.size(); ++k) {
    total += inst.u(trace.rounds[k].action, trace.rounds[k].state);
    EXPECT_NEAR(trace.running_average[k], static_cast<double>(total / (k + 1)), 1e-12);
  }
  EXPECT_EQ(trace.summary.final_average, trace.running_average.back());
}

TEST(Simulate, ReceiverSeesOnlySignalAndFeedback) {
  static_assert(std::is_same_v<decltype(&ReceiverAlgorithm::act), ActionIndex (ReceiverAlgorithm::*)(SignalIndex, Round, Rng&)>);
  static_assert(std::is_same_v<decltype(&ReceiverAlgorithm::observe), void (ReceiverAlgorithm::*)(const RoundFeedback&)>);
  const auto inst = judge_instance();
  for (auto mode : {FeedbackMode::kFull, FeedbackMode::kPartial}) {
    FixedSender sender(robust_judge());
    SpyReceiver spy;
    SimulationOptions opt;
    opt.rounds = 1000;
    opt.seed = 5;
    opt.feedback = mode;
    opt.keep_rounds = true;
    const auto trace = simulate(inst, sender, spy, opt);
    ASSERT_EQ(spy.feedback.size(), 1000u);
    for (std::size_t k = 0; k < 1000; ++k) {
      const auto& r = trace.rounds[k];
      EXPECT_EQ(spy.signals[k], r.signal);
      EXPECT_EQ(spy.feedback[k].action, r.action);
      EXPECT_EQ(spy.feedback[k].receiver_utility, inst.v(r.action, r.state));
      EXPECT_EQ(spy.feedback[k].state.has_value(), mode == FeedbackMode::kFull);
      if (mode == FeedbackMode::kFull) {
        EXPECT_EQ(*spy.feedback[k].state, r.state);
      }
    }
  }
}

TEST(Simulate, FullFeedbackLearnersRejectPartialMode) {
  const auto inst = judge_instance();
  FixedSender sender(robust_judge());
  ExponentialWeights receiver(inst.receiver_utility(), 2);
  SimulationOptions opt;
  opt.feedback = FeedbackMode::kPartial;
  EXPECT_EQ(code_of([&] { simulate(inst, sender, receiver, opt); }), ErrorCode::kInvalidArgument);
}

TEST(EmpiricalBr, ColdStartIsUniform) {
  LearnerState st(2, 2, 2, FeedbackMode::kFull);
  const auto v = mismatch_instance().receiver_utility();
  EXPECT_EQ(empirical_br_distribution(st, v, 1), (Vector{0.5, 0.5}));
  Rng rng(1);
  int first = 0;
  for (int k = 0; k < 10000; ++k) first += receiver_empirical_br(st, v, 1, rng) == 0;
  EXPECT_NEAR(first / 10000.0, 0.5, 0.02);
}

TEST(EmpiricalBr, MajorityGoodPicksA) {
  const auto v = mismatch_instance().receiver_utility();
  const auto st = with_history(3, 2);
  EXPECT_EQ(empirical_br_distribution(st, v, 0), (Vector{1.0, 0.0}));
  Rng rng(2);
  for (int k = 0; k < 1000; ++k) EXPECT_EQ(receiver_empirical_br(st, v, 0, rng), 0u);
}

TEST(EmpiricalBr, ExactTieIsUniform) {
  const auto v = mismatch_instance().receiver_utility();
  const auto st = with_history(500000, 500000);
  EXPECT_EQ(empirical_br_distribution(st, v, 0), (Vector{0.5, 0.5}));
  Rng rng(3);
  int first = 0;
  for (int k = 0; k < 10000; ++k) first += receiver_empirical_br(st, v, 0, rng) == 0;
  EXPECT_NEAR(first / 10000.0, 0.5, 0.02);
}

TEST(EmpiricalBr, FirstRoundActionIsUniform) {
  const auto inst = mismatch_instance();
  int first = 0;
  for (std::uint64_t seed = 0; seed < 4000; ++seed) {
    FixedSender sender(full_revelation_scheme(inst));
    EmpiricalBestResponse receiver(inst.receiver_utility(), 2);
    SimulationOptions opt;
    opt.seed = seed;
    opt.keep_rounds = true;
    first += simulate(inst, sender, receiver, opt).rounds[0].action == 0;
  }
  EXPECT_NEAR(first / 4000.0, 0.5, 0.03);
}

TEST(ExpWeights, SoftmaxArithmetic) {
  const auto p = exp_weights_distribution(Vector{10.0, 0.0}, 0.5);
  EXPECT_NEAR(p[0], std::exp(5.0) / (std::exp(5.0) + 1.0), 1e-15);
  EXPECT_NEAR(p[1], 1.0 / (std::exp(5.0) + 1.0), 1e-15);
}

TEST(ExpWeights, RateAndStateDistribution) {
  EXPECT_NEAR(exp_weights_rate(2, 100), std::sqrt(std::log(2.0) / 100.0), 1e-16);
  const auto v = mismatch_instance().receiver_utility();
  const auto st = with_history(10, 0);
  const auto p = exp_weights_distribution(st, v, 0, 9);
  const double eta = std::sqrt(std::log(2.0) / 9.0);
  EXPECT_NEAR(p[0], std::exp(10 * eta) / (std::exp(10 * eta) + 1.0), 1e-15);
  LearnerState fresh(1, 2, 2, FeedbackMode::kFull);
  EXPECT_EQ(exp_weights_distribution(fresh, v, 0, 1), (Vector{0.5, 0.5}));
}

TEST(ExpWeights, EmpiricallyApproxBestRespondingOnSchedule) {
  const auto inst = judge_instance();
  const auto scheme = robust_judge();
  const auto schedule = exp_weights_schedule(2);
  FixedSender sender(scheme);
  ExponentialWeights receiver(inst.receiver_utility(), 2);
  std::vector<std::vector<std::int64_t>> counts(2, std::vector<std::int64_t>(2, 0));
  int audited = 0;
  SimulationOptions opt;
  opt.rounds = 200000;
  opt.seed = 11;
  simulate(inst, sender, receiver, opt, [&](const RoundRecord& r) {
    ++counts[r.signal][r.state];
    const Round next = r.t + 1;
    if (next % 997 != 0) return;
    for (std::size_t s = 0; s < 2; ++s) {
      const double visits = static_cast<double>(counts[s][0] + counts[s][1]);
      if (visits == 0.0) continue;
      const std::vector<double> belief{counts[s][0] / visits, counts[s][1] / visits};
      const double gamma = schedule.gamma(next, visits), delta = schedule.delta(next, visits);
      const double eta = std::sqrt(std::log(2.0) / static_cast<double>(next));
      EXPECT_NEAR(delta, std::min(1.0, 1.0 / (eta * visits)), 1e-12);
      const Vector values{oracle::value(inst.receiver_utility(), 0, belief),
                          oracle::value(inst.receiver_utility(), 1, belief)};
      const double best = std::max(values[0], values[1]);
      const auto p = receiver.action_distribution(s, next);
      double mass = 0.0;
      for (std::size_t a = 0; a < 2; ++a)
        if (values[a] >= best - gamma) mass += p[a];
      EXPECT_GE(mass, 1.0 - delta - 1e-12);
      ++audited;
    }
  });
  EXPECT_GT(audited, 300);
}

TEST(Exp3, SingleActionAlwaysPlayed) {
  const PersuasionInstance inst({"w1", "w2"}, {"only"}, {0.4, 0.6}, Matrix::from_rows({{0.3, 0.9}}),
                                Matrix::from_rows({{0.5, 0.1}}));
  FixedSender sender(uninformative_scheme(inst));
  Exp3 receiver(1, 1, Exp3Config::for_horizon(1000, 1));
  SimulationOptions opt;
  opt.rounds = 1000;
  opt.feedback = FeedbackMode::kPartial;
  opt.keep_rounds = true;
  for (const auto& r : simulate(inst, sender, receiver, opt).rounds) EXPECT_EQ(r.action, 0u);
}

TEST(Exp3, StartsUniformAndUsesStandardTuning) {
  const auto cfg = Exp3Config::for_horizon(1000000, 2);
  const double g = std::sqrt(2.0 * std::log(2.0) / ((std::exp(1.0) - 1.0) * 1e6));
  EXPECT_NEAR(cfg.exploration, g, 1e-15);
  EXPECT_NEAR(cfg.learning_rate, g / 2.0, 1e-15);
  Exp3 receiver(3, 2, Exp3Config::for_horizon(100, 3));
  for (double p : receiver.action_distribution(1, 1)) EXPECT_NEAR(p, 1.0 / 3.0, 1e-15);
}

TEST(Exp3, LearnsObedienceOnRobustifiedJudge) {
  const auto inst = judge_instance();
  const Round horizon = 1000000;
  FixedSender sender(robust_judge());
  Exp3 receiver(2, 2, Exp3Config::for_horizon(horizon, 2));
  SimulationOptions opt;
  opt.rounds = horizon;
  opt.seed = 1;
  opt.feedback = FeedbackMode::kPartial;
  opt.tail_start = horizon / 2;
  const auto trace = simulate(inst, sender, receiver, opt);
  EXPECT_GT(trace.summary.tail_obedience(), 0.9);
}

TEST(Alternating, BadGoodGoodGoodBadSequence) {
  const auto inst = mismatch_instance();  // state 0 = G, state 1 = B
  AlternatingSender sender(inst);
  const std::vector<StateIndex> states{1, 0, 0, 0, 1};
  std::vector<SignalIndex> sent;
  for (std::size_t k = 0; k < states.size(); ++k) {
    const auto& scheme = sender.scheme_for_round(static_cast<Round>(k + 1));
    const SignalIndex s = scheme(states[k], 0) == 1.0 ? 0 : 1;
    sent.push_back(s);
    RoundRecord r;
    r.state = states[k];
    r.signal = s;
    sender.observe(r);
  }
  EXPECT_EQ(sent, (std::vector<SignalIndex>{1, 0, 1, 1, 0}));
}

TEST(Alternating, FirstGoodStateSendsFlipSignal) {
  AlternatingSender sender(mismatch_instance());
  EXPECT_EQ(sender.scheme_for_round(1)(0, 0), 1.0);
  EXPECT_EQ(sender.scheme_for_round(1)(1, 1), 1.0);
}

TEST(Alternating, RejectsThreeStateInstance) {
  const PersuasionInstance inst({"x", "y", "z"}, {"a", "b"}, {0.3, 0.3, 0.4}, Matrix(2, 3, 0.5), Matrix(2, 3, 0.5));
  EXPECT_EQ(code_of([&] { AlternatingSender s(inst); }), ErrorCode::kWrongInstance);
}

TEST(Alternating, HalfTheRoundsFlipAndStatesAlternate) {
  const auto rep = run_alternating(mismatch_instance(), 1000000, 1, 0);
  EXPECT_NEAR(rep.mean_flip_fraction, 0.5, 0.01);
  EXPECT_TRUE(rep.alternation_holds);
}

TEST(ConfidenceRadius, Arithmetic) {
  const double t = 1e6;
  const double expected =
      2.0 * std::sqrt(3.0 * std::log(4.0 * t) / (0.5 * t)) + 4.0 * std::sqrt(std::log(8.0 * t) / (2.0 * t));
  EXPECT_NEAR(confidence_radius(0.5, 2, 2, t), expected, 1e-15);
}

TEST(ConfidenceRadius, DecreasingInT) {
  double prev = kInfinity;
  for (double t = 200.0; t < 1e9; t *= 1.3) {
    const double c = confidence_radius(0.5, 2, 2, t);
    EXPECT_LT(c, prev);
    prev = c;
  }
}

TEST(ConfidenceRadius, PreconditionEnforced) {
  EXPECT_EQ(code_of([] { confidence_radius(0.5, 2, 2, 10.0); }), ErrorCode::kRadiusPrecondition);
  EXPECT_EQ(code_of([] { confidence_radius(0.0, 2, 2, 1e6); }), ErrorCode::kZeroProbabilitySignal);
}

TEST(ConfidenceRadius, CoverageOnSmallTrial) {
  const auto rep = coverage_trial(judge_instance(), robust_judge(), 20000, 200, 1);
  EXPECT_GE(rep.rate(), 0.99);
}

TEST(LearningPipeline, TriviallySatisfiedWhenBudgetExceedsOpt) {
  LearningRunConfig cfg;
  cfg.C = 0.7;
  const auto rep = run_robustified_learning(judge_instance(), cfg);
  EXPECT_TRUE(rep.trivially_satisfied);
  EXPECT_TRUE(rep.meets_target());
}

TEST(LearningPipeline, RejectsInstanceWithoutUniqueOptima) {
  LearningRunConfig cfg;
  EXPECT_EQ(code_of([&] { run_robustified_learning(weakly_dominated_instance(), cfg); }),
            ErrorCode::kHypothesisViolated);
}

TEST(LearningPipeline, ThresholdEventuallyHolds) {
  const auto inst = judge_instance();
  const auto scheme = robust_judge();
  const auto schedule = exp_weights_schedule(2);
  const auto t = first_threshold_round(inst, scheme, 0.1, 0.2, schedule);
  ASSERT_TRUE(t.has_value());
  EXPECT_TRUE(check_learning_threshold(inst, scheme, 0.1, 0.2, schedule, *t).holds());
  EXPECT_FALSE(check_learning_threshold(inst, scheme, 0.1, 0.2, schedule, *t - 1).holds());
  EXPECT_TRUE(check_learning_threshold(inst, scheme, 0.1, 0.2, schedule, *t * 4).holds());
}

TEST(LearningPipeline, ShortRunReportsAreConsistent) {
  LearningRunConfig cfg;
  cfg.rounds = 20000;
  cfg.seeds = 2;
  cfg.checkpoint_every = 5000;
  const auto rep = run_robustified_learning(judge_instance(), cfg);
  EXPECT_NEAR(rep.alpha, 0.1, 1e-15);
  EXPECT_NEAR(rep.opt, 0.6, 1e-8);
  EXPECT_NEAR(rep.obedient_utility, 0.57, 1e-8);
  EXPECT_EQ(rep.summaries.size(), 2u);
  EXPECT_EQ(rep.diagnostics.size(), 4u);
  EXPECT_EQ(rep.thresholds.size(), 4u);
}
