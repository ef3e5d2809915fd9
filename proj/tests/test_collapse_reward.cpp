#include <gtest/gtest.h>

#include "heurevo/collapse.hpp"
#include "heurevo/response_parser.hpp"
#include "heurevo/reward.hpp"
#include "helpers.hpp"

using namespace heurevo;
using heurevo::testing::make_h;

TEST(Collapse, ObserveRoundExamples) {
  CollapseState s;
  observe_round(s, true, false);
  EXPECT_EQ(s.t_c, -1);
  observe_round(s, false, false);
  EXPECT_EQ(s.t_c, -1);
  observe_round(s, false, true);
  EXPECT_EQ(s.t_c, 1);
  s.t_c = 7;
  observe_round(s, true, true);
  EXPECT_EQ(s.t_c, 0);
  observe_round(s, false, true);
  EXPECT_EQ(s.t_c, 1);
}

TEST(Collapse, NoHazardWithoutStagnation) {
  Pcg32 rng(1);
  for (std::int64_t t : {-1, 0}) {
    const Pcg32 before = rng;
    EXPECT_FALSE(should_collapse(CollapseState{t, 0.9, 25}, rng));
    EXPECT_EQ(rng, before);
  }
}

TEST(Collapse, CapForcesCollapseAndStillDraws) {
  Pcg32 rng(1);
  const Pcg32 before = rng;
  EXPECT_TRUE(should_collapse(CollapseState{25, 1e-9, 25}, rng));
  EXPECT_NE(rng, before);
}

TEST(Collapse, HazardProbabilityAtTen) {
  Pcg32 rng(123);
  const CollapseState s{10, 0.0005, std::nullopt};
  int hits = 0;
  const int n = 400000;
  for (int i = 0; i < n; ++i) hits += should_collapse(s, rng) ? 1 : 0;
  EXPECT_NEAR(hits / double(n), 0.005, 0.0005);
}

TEST(Collapse, PerformCollapseExamples) {
  HeuristicPool pool(3);
  pool.insert_seed(make_h("s", -10));
  pool.insert(make_h("x", -12));
  pool.insert(make_h("b", -5));
  CollapseState st{9, 0.0005, 25};
  EXPECT_EQ(perform_collapse(pool, st), (std::vector<std::string>{"s", "b"}));
  EXPECT_EQ(pool.size(), 2u);
  EXPECT_EQ(pool.best()->id, "b");
  EXPECT_EQ(st.t_c, -1);

  HeuristicPool only_seed(3);
  only_seed.insert_seed(make_h("s", -10));
  only_seed.insert(make_h("w", -11));
  EXPECT_EQ(perform_collapse(only_seed, st), std::vector<std::string>{"s"});

  HeuristicPool no_seeds(3);
  no_seeds.insert(make_h("a", -3));
  no_seeds.insert(make_h("b", -2));
  EXPECT_EQ(perform_collapse(no_seeds, st), std::vector<std::string>{"b"});

  HeuristicPool empty(3);
  EXPECT_THROW(perform_collapse(empty, st), InternalError);
}

TEST(Collapse, ClosedForm) {
  EXPECT_NEAR(expected_stagnation_rounds(0.0005), 56.049912163979286, 1e-9);
  EXPECT_NEAR(expected_stagnation_rounds(0.005), 17.72453850905516, 1e-9);
  EXPECT_NEAR(expected_stagnation_rounds(std::numbers::pi / 2), 1.0, 1e-15);
  EXPECT_THROW(expected_stagnation_rounds(0.0), std::invalid_argument);
}

TEST(Collapse, SurvivalIsProductOfComplements) {
  EXPECT_EQ(survival_probability(0, 0.1), 1.0);
  EXPECT_NEAR(survival_probability(3, 0.1), 0.9 * 0.8 * 0.7, 1e-15);
  EXPECT_EQ(survival_probability(10, 0.1), 0.0);
  EXPECT_NEAR(exact_stagnation_mean(0.0005), 55.718899478179424, 1e-9);
  EXPECT_NEAR(exact_stagnation_mean(0.005), 17.39844385537914, 1e-9);
}

TEST(Collapse, MonteCarloNearClosedForm) {
  for (double d0 : {0.0005, 0.005}) {
    Pcg32 rng(2024);
    const auto st = simulate_stagnation(d0, std::nullopt, 100000, rng);
    EXPECT_NEAR(st.mean / expected_stagnation_rounds(d0), 1.0, 0.02) << d0;
  }
}

TEST(Collapse, CapBoundsEveryTrial) {
  Pcg32 rng(5);
  const auto st = simulate_stagnation(0.0005, 25, 20000, rng);
  EXPECT_LE(st.max_length, 25);
  EXPECT_EQ(st.max_length, 25);
}

TEST(Collapse, Validation) {
  EXPECT_THROW(validate(CollapseState{-1, 0.0, 25}), ConfigError);
  EXPECT_THROW(validate(CollapseState{-1, 1.0, 25}), ConfigError);
  EXPECT_THROW(validate(CollapseState{-1, 0.1, 0}), ConfigError);
  EXPECT_NO_THROW(validate(CollapseState{-1, 0.1, std::nullopt}));
}

TEST(Reward, Ladder) {
  EXPECT_EQ(ladder_reward(Diagnosis::MissingIdea), -1.0);
  EXPECT_EQ(ladder_reward(Diagnosis::MissingCodeBlock), -0.95);
  EXPECT_EQ(ladder_reward(Diagnosis::MalformedFunction), -0.9);
  EXPECT_EQ(ladder_reward(Diagnosis::RuntimeOrTimeout), -0.85);
  EXPECT_EQ(ladder_reward(Diagnosis::RandomnessDetected), -0.75);
  EXPECT_THROW(ladder_reward(Diagnosis::Feasible), InternalError);
}

TEST(Reward, RelativeDeltaExamples) {
  EXPECT_EQ(relative_delta(-10, -8), 0.25);
  EXPECT_EQ(relative_delta(-8, -8), 0.0);
  EXPECT_EQ(relative_delta(-3, -12), 1.0);
  EXPECT_EQ(relative_delta(0, 0), 0.0);
  EXPECT_EQ(relative_delta(0, -1), 1.0);
}

TEST(Reward, RelativeDeltaSymmetricAndBounded) {
  Pcg32 rng(6);
  for (int i = 0; i < 100000; ++i) {
    const double a = -100.0 * rng.uniform01();
    const double b = -100.0 * rng.uniform01();
    const double d = relative_delta(a, b);
    ASSERT_GE(d, 0.0);
    ASSERT_LE(d, 1.0);
    ASSERT_EQ(d, relative_delta(b, a));
  }
}

TEST(Reward, AssignRewardExamples) {
  const std::vector<Heuristic> bases = {make_h("a", -10), make_h("b", -12)};
  EXPECT_EQ(assign_reward(Diagnosis::Feasible, OperatorKind::Crossover, -8.0, bases), 1.25);
  EXPECT_EQ(assign_reward(Diagnosis::Feasible, OperatorKind::Crossover, -12.0, bases), -0.6);
  EXPECT_EQ(assign_reward(Diagnosis::Feasible, OperatorKind::Injection, -10.0, {bases.begin(), 1}), -0.6);
  const std::vector<Heuristic> b8 = {make_h("c", -8)};
  EXPECT_EQ(assign_reward(Diagnosis::Feasible, OperatorKind::Simplification, -10.0, b8), -0.09375);
  EXPECT_EQ(assign_reward(Diagnosis::Feasible, OperatorKind::Initialization, -10.0, {}), 0.0);
  EXPECT_EQ(assign_reward(Diagnosis::MissingIdea, OperatorKind::Injection, std::nullopt, b8), -1.0);
  EXPECT_THROW(assign_reward(Diagnosis::Feasible, OperatorKind::Injection, -1.0, {}), InternalError);
  EXPECT_THROW(assign_reward(Diagnosis::Feasible, OperatorKind::Injection, std::nullopt, b8), InternalError);
}

TEST(Reward, BranchRangesUnderRandomScores) {
  Pcg32 rng(77);
  for (int i = 0; i < 50000; ++i) {
    const double base = -1.0 - 99.0 * rng.uniform01();
    const double g = -1.0 - 99.0 * rng.uniform01();
    const double s[] = {base};
    const auto out = score_response(Diagnosis::Feasible, OperatorKind::Replacement, g, s);
    if (g > base) {
      ASSERT_EQ(out.branch, RewardBranch::Improvement);
      ASSERT_GT(out.reward, 1.0);
      ASSERT_LE(out.reward, 2.0);
    } else if (g < base) {
      ASSERT_EQ(out.branch, RewardBranch::Degradation);
      ASSERT_LT(out.reward, 0.0);
      ASSERT_GE(out.reward, -0.375);
    }
  }
}

namespace {
const SignatureSpec kStep{"step", 2};

std::string fenced(const std::string& code) { return "```python\n" + code + "```\n"; }
}  // namespace

TEST(Parser, DocstringIdeaWins) {
  const auto r = parse_heuristic(
      "Some prose first.\n" + fenced("def step(item_size, remaining_capacity):\n"
                                     "    \"\"\"Pick the tightest bin.\"\"\"\n"
                                     "    return -remaining_capacity\n"),
      kStep);
  ASSERT_TRUE(r.idea && r.code);
  EXPECT_EQ(*r.idea, "Pick the tightest bin.");
  EXPECT_TRUE(r.signature_ok);
  EXPECT_EQ(r.function_name, "step");
}

TEST(Parser, ProseIdeaWhenNoDocstring) {
  const auto r = parse_heuristic("Prefer nearly full bins.\n" + fenced("def step(a, b):\n    return b\n"), kStep);
  EXPECT_EQ(r.idea, "Prefer nearly full bins.");
  EXPECT_TRUE(r.signature_ok);
}

TEST(Parser, ProseOnlyHasNoCode) {
  const auto r = parse_heuristic("I would use best fit.", kStep);
  EXPECT_FALSE(r.code.has_value());
  EXPECT_EQ(static_diagnosis(r, default_randomness_denylist()), Diagnosis::MissingCodeBlock);
}

TEST(Parser, WrongArityOrName) {
  const auto arity = parse_heuristic("Idea.\n" + fenced("def step(a, b, c):\n    return a\n"), kStep);
  EXPECT_FALSE(arity.signature_ok);
  EXPECT_EQ(static_diagnosis(arity, default_randomness_denylist()), Diagnosis::MalformedFunction);
  const auto name = parse_heuristic("Idea.\n" + fenced("def priority(a, b):\n    return a\n"), kStep);
  EXPECT_FALSE(name.signature_ok);
  EXPECT_EQ(name.function_name, "priority");
  const auto defaults = parse_heuristic("Idea.\n" + fenced("def step(a, b, c=1):\n    return a\n"), kStep);
  EXPECT_TRUE(defaults.signature_ok);
}

TEST(Parser, CodeWithoutIdea) {
  const auto r = parse_heuristic(fenced("def step(a, b):\n    return a\n"), kStep);
  EXPECT_EQ(diagnose_response(r, nullptr), Diagnosis::MissingIdea);
}

TEST(Parser, FuzzNeverThrows) {
  const std::string alphabet = "def step():\n\"'`#abc ,.=*()[]{}\t";
  Pcg32 rng(99);
  for (int i = 0; i < 20000; ++i) {
    std::string s;
    const auto len = rng.bounded(200);
    for (std::uint32_t k = 0; k < len; ++k) s.push_back(alphabet[rng.bounded(alphabet.size())]);
    if (rng.bounded(2)) s = "```python\n" + s;
    if (rng.bounded(2)) s += "\n```";
    ASSERT_NO_THROW({
      const auto r = parse_heuristic(s, kStep);
      (void)diagnose_response(r, nullptr);
    });
  }
}

TEST(Randomness, Detection) {
  EXPECT_TRUE(detect_randomness("import random\nx = random.random()\n"));
  EXPECT_TRUE(detect_randomness("return np.random.rand(3)\n"));
  EXPECT_TRUE(detect_randomness("from numpy.random import default_rng\n"));
  EXPECT_FALSE(detect_randomness("def randomish_score(x):\n    return x\n"));
  EXPECT_FALSE(detect_randomness("return self.random_state * 2\n"));
  EXPECT_FALSE(detect_randomness("return (a + b) / 2\n"));
  EXPECT_FALSE(detect_randomness("# random is not used\ns = 'random.random()'\n"));
  EXPECT_TRUE(detect_randomness("t = time.time()\n"));
  EXPECT_FALSE(detect_randomness("t = time.perf_counter\n"));
  EXPECT_TRUE(detect_randomness("x = foo.bar()\n", {"foo.bar"}));
}

TEST(Diagnosis, LadderOrder) {
  auto parsed = parse_heuristic("Idea.\n" + fenced("import random\ndef step(a, b):\n    return random.random()\n"), kStep);
  EXPECT_EQ(diagnose_response(parsed, nullptr), Diagnosis::RandomnessDetected);
  parsed = parse_heuristic("Idea.\n" + fenced("def step(a, b):\n    return a\n"), kStep);
  EvalResult err;
  err.status = EvalStatus::RuntimeError;
  EXPECT_EQ(diagnose_response(parsed, &err), Diagnosis::RuntimeOrTimeout);
  EvalResult timeout;
  timeout.status = EvalStatus::Timeout;
  EXPECT_EQ(diagnose_response(parsed, &timeout), Diagnosis::RuntimeOrTimeout);
  EvalResult ok;
  ok.status = EvalStatus::Ok;
  ok.objectives = {1};
  EXPECT_EQ(diagnose_response(parsed, &ok), Diagnosis::Feasible);
  EXPECT_EQ(to_string(Diagnosis::RandomnessDetected), "randomness_detected");
}
