#include <gtest/gtest.h>

#include <cmath>

#include "heurevo/bundled.hpp"
#include "heurevo/problems.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

using namespace heurevo;

TEST(Obp, WeibullMean) {
  const auto inst = generate_obp(100000, 100, 42);
  double sum = 0.0;
  for (double s : inst.items) sum += s;
  EXPECT_NEAR(sum / inst.items.size() / 40.18407802061623, 1.0, 0.05);
}

TEST(Obp, ItemsFitAndAreIntegral) {
  const auto inst = generate_obp(20000, 100, 3);
  for (double s : inst.items) {
    ASSERT_GE(s, 1.0);
    ASSERT_LE(s, 100.0);
    ASSERT_EQ(s, std::round(s));
  }
}

TEST(Obp, Deterministic) {
  EXPECT_EQ(generate_obp(1000, 100, 9).items, generate_obp(1000, 100, 9).items);
  EXPECT_NE(generate_obp(1000, 100, 9).items, generate_obp(1000, 100, 10).items);
  EXPECT_THROW(generate_obp(10, 100, 1, ObpGenerator{0.0, 45.0}), ConfigError);
}

TEST(LowerBound, Examples) {
  EXPECT_EQ(l2_lower_bound(ObpInstance{{60, 60, 60}, 100}), 3);
  EXPECT_EQ(l1_lower_bound(ObpInstance{{60, 60, 60}, 100}), 2);
  EXPECT_EQ(l2_lower_bound(ObpInstance{{50, 50}, 100}), 1);
  EXPECT_EQ(l2_lower_bound(ObpInstance{{}, 100}), 0);
}

TEST(LowerBound, BetweenContinuousBoundAndOptimum) {
  Pcg32 rng(31);
  for (int t = 0; t < 300; ++t) {
    ObpInstance inst;
    inst.capacity = 100;
    const auto n = rng.bounded(13);
    for (std::uint32_t i = 0; i < n; ++i) inst.items.push_back(static_cast<double>(rng.uniform_int(1, 100)));
    const auto l1 = l1_lower_bound(inst);
    const auto l2 = l2_lower_bound(inst);
    const auto opt = static_cast<std::int64_t>(heurevo::testing::optimal_bins(inst));
    ASSERT_LE(l1, l2);
    ASSERT_LE(l2, opt);
  }
}

TEST(Simulate, SmallExamples) {
  EXPECT_EQ(simulate_obp(ObpInstance{{60, 60, 60}, 100}, best_fit_scores), 3u);
  EXPECT_EQ(simulate_obp(ObpInstance{{50, 50}, 100}, best_fit_scores), 1u);
  EXPECT_EQ(simulate_obp(ObpInstance{{}, 100}, best_fit_scores), 0u);
  // 30 goes to the fuller bin under best fit, to the first bin under first fit.
  const ObpInstance order{{50, 65, 30, 50}, 100};
  EXPECT_EQ(simulate_obp(order, best_fit_scores), 2u);
  EXPECT_EQ(simulate_obp(order, first_fit_scores), 3u);
}

TEST(Simulate, NonFiniteScoreFails) {
  const ObpInstance inst{{10, 10}, 100};
  EXPECT_THROW(simulate_obp(inst, [](double, const std::vector<double>& r) {
                 return std::vector<double>(r.size(), NAN);
               }),
               std::runtime_error);
}

TEST(Simulate, NeverBelowLowerBound) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto inst = generate_obp(300, 100, seed);
    const auto lb = l2_lower_bound(inst);
    ASSERT_GE(static_cast<std::int64_t>(simulate_obp(inst, best_fit_scores)), lb);
    ASSERT_GE(static_cast<std::int64_t>(simulate_obp(inst, first_fit_scores)), lb);
  }
}

TEST(Routing, Generation) {
  const auto a = generate_routing(ProblemKind::Cvrp, 50, 4);
  const auto b = generate_routing(ProblemKind::Cvrp, 50, 4);
  EXPECT_EQ(a.distance, b.distance);
  EXPECT_EQ(a.demands, b.demands);
  EXPECT_EQ(a.demands[0], 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a.distance[i][i], 0.0);
    for (std::size_t j = 0; j < a.size(); ++j) EXPECT_EQ(a.distance[i][j], a.distance[j][i]);
  }
  double demand = 0.0;
  int count = 0;
  for (std::uint64_t s = 0; s < 200; ++s) {
    for (double d : generate_routing(ProblemKind::Cvrp, 50, s).demands) demand += d;
    ++count;
  }
  EXPECT_NEAR(demand / count, 245.0, 5.0);

  const auto op = generate_routing(ProblemKind::Op, 50, 1);
  EXPECT_EQ(op.maxlen, 3.0);
  EXPECT_EQ(op.prizes[0], 0.0);
  for (std::size_t i = 1; i < op.size(); ++i) {
    EXPECT_GT(op.prizes[i], 0.0);
    EXPECT_LE(op.prizes[i], 1.0);
  }
  EXPECT_THROW(generate_routing(ProblemKind::Obp, 5, 1), ConfigError);
  EXPECT_THROW(generate_routing(ProblemKind::Tsp, 1, 1), ConfigError);
}

TEST(Routing, NearestNeighborLine) {
  RoutingInstance inst;
  inst.coordinates = {{0, 0}, {1, 0}, {2, 0}, {0.5, 0}};
  inst.distance = euclidean_matrix(inst.coordinates);
  EXPECT_DOUBLE_EQ(nearest_neighbor_tour(inst), 4.0);
}

TEST(Routing, NearestNeighborNotBelowOptimum) {
  for (std::uint64_t s = 0; s < 30; ++s) {
    const auto inst = generate_routing(ProblemKind::Tsp, 7, s);
    ASSERT_GE(nearest_neighbor_tour(inst), heurevo::testing::optimal_tour(inst) - 1e-12);
  }
}

TEST(Aggregate, Examples) {
  const std::vector<double> bins = {10, 12};
  EXPECT_EQ(aggregate_performance(bins, Direction::Minimize), -11.0);
  const std::vector<double> prizes = {3, 5};
  EXPECT_EQ(aggregate_performance(prizes, Direction::Maximize), 4.0);
  EXPECT_THROW(aggregate_performance({}, Direction::Minimize), std::invalid_argument);
  EXPECT_NEAR(optimality_gap(105, 100, Direction::Minimize), 5.0, 1e-12);
  EXPECT_NEAR(optimality_gap(90, 100, Direction::Maximize), 10.0, 1e-12);
  EXPECT_THROW(optimality_gap(1, 0, Direction::Minimize), std::invalid_argument);
}

TEST(Finalize, DemotesIncompleteResults) {
  EvalResult r;
  r.status = EvalStatus::Ok;
  r.objectives = {10};
  auto bad = finalize(r, ProblemKind::Obp, 2);
  EXPECT_EQ(bad.status, EvalStatus::ProtocolError);
  EXPECT_FALSE(bad.performance);
  r.objectives = {10, INFINITY};
  EXPECT_EQ(finalize(r, ProblemKind::Obp, 2).status, EvalStatus::RuntimeError);
  r.objectives = {10, 12};
  EXPECT_EQ(finalize(r, ProblemKind::Obp, 2).performance, -11.0);
}

TEST(InstanceFile, RoundTrip) {
  heurevo::testing::TempDir dir("inst");
  for (ProblemKind k : {ProblemKind::Obp, ProblemKind::Tsp, ProblemKind::Cvrp, ProblemKind::Op}) {
    GenerationParams p;
    p.kind = k;
    p.count = 3;
    p.size = k == ProblemKind::Obp ? 50 : 10;
    const auto set = generate_instances(p);
    const auto path = (dir.path / (std::string(to_string(k)) + ".json")).string();
    save_instance_file(set, path);
    const auto back = load_instance_file(path);
    EXPECT_EQ(back.kind, k);
    EXPECT_EQ(back.size(), 3u);
    EXPECT_EQ(to_json(back).dump(), to_json(set).dump());
  }
}

TEST(InstanceFile, Errors) {
  heurevo::testing::TempDir dir("instbad");
  const auto path = (dir.path / "x.json").string();
  std::ofstream(path) << R"({"problem":"obp","instances":[]})";
  EXPECT_THROW(load_instance_file(path), ConfigError);
  std::ofstream(path) << R"({"version":1,"problem":"obp","instances":[{"capacity":10,"items":[11]}]})";
  EXPECT_THROW(load_instance_file(path), ConfigError);
  std::ofstream(path) << "{not json";
  EXPECT_THROW(load_instance_file(path), ConfigError);
  EXPECT_THROW(load_instance_file((dir.path / "missing.json").string()), ConfigError);
}

TEST(Native, BundledTwinsAndUnknownCode) {
  GenerationParams p;
  p.count = 2;
  p.size = 200;
  const auto set = generate_instances(p);
  NativeEvaluator ev;
  EvalTask task;
  task.instances = &set;
  task.code = "\n" + find_bundled("best_fit").code + "\n\n";
  const auto r = ev.evaluate(task);
  ASSERT_TRUE(r.ok());
  EXPECT_EQ(r.objectives[0], static_cast<double>(simulate_obp(set.obp[0], best_fit_scores)));
  task.code = "def step(a, b):\n    return b\n";
  const auto miss = ev.evaluate(task);
  EXPECT_EQ(miss.status, EvalStatus::RuntimeError);
  EXPECT_EQ(miss.error_class, "NoNativeTwin");
}
