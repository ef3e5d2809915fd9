#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <sstream>

#include "heurevo/pool.hpp"
#include "heurevo/rng.hpp"
#include "helpers.hpp"

#include <cmath>
#include <set>

using namespace heurevo;
using heurevo::testing::make_h;

TEST(Rng, ReferenceSequence) {
  // First outputs of the reference pcg32 demo (seed 42, stream 54).
  Pcg32 rng(42u, 54u);
  const std::uint32_t expected[] = {0xa15c02b7, 0x7b47f409, 0xba1d3330, 0x83d2f293, 0xbfa4784b, 0xcbed606e};
  for (auto e : expected) EXPECT_EQ(rng(), e);
}

TEST(Rng, RestoresFromRawState) {
  Pcg32 a(99);
  for (int i = 0; i < 10; ++i) a();
  Pcg32 b = Pcg32::from_raw(a.state(), a.increment());
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a(), b());
}

TEST(Rng, BoundedStaysInRange) {
  Pcg32 rng(5);
  for (int i = 0; i < 10000; ++i) {
    const auto v = rng.uniform_int(1, 9);
    ASSERT_GE(v, 1);
    ASSERT_LE(v, 9);
  }
}

TEST(IdeaTokens, Examples) {
  EXPECT_EQ(idea_tokens("Greedy nearest neighbor"), (std::set<std::string>{"greedy", "nearest", "neighbor"}));
  EXPECT_EQ(idea_tokens("A, a; A."), (std::set<std::string>{"a"}));
  EXPECT_EQ(idea_tokens("savings-based merge rule"), (std::set<std::string>{"savings", "based", "merge", "rule"}));
  EXPECT_TRUE(idea_tokens("").empty());
  EXPECT_TRUE(idea_tokens("--- ;;").empty());
}

TEST(Diversity, Examples) {
  EXPECT_EQ(diversity(make_h("a", 0, "greedy nearest"), make_h("b", 0, "greedy nearest")), 0.0);
  EXPECT_EQ(diversity(make_h("a", 0, "alpha beta"), make_h("b", 0, "gamma delta")), 1.0);
  EXPECT_EQ(diversity(make_h("a", 0, "greedy nearest neighbor"), make_h("b", 0, "greedy savings merge nearest")), 0.5);
  EXPECT_EQ(diversity(make_h("a", 0, "x"), make_h("b", 0, "...")), 0.0);
}

TEST(Diversity, BoundedAndZeroOnSelf) {
  Pcg32 rng(3);
  const char* words[] = {"greedy", "bin", "fit", "best", "tight", "slack", "ratio", "penalty"};
  for (int t = 0; t < 2000; ++t) {
    std::string a, b;
    for (int i = 0; i < 4; ++i) {
      a += std::string(words[rng.bounded(8)]) + " ";
      b += std::string(words[rng.bounded(8)]) + " ";
    }
    const double d = diversity(make_h("a", 0, a), make_h("b", 0, b));
    ASSERT_GE(d, 0.0);
    ASSERT_LE(d, 1.0);
    ASSERT_EQ(diversity(make_h("a", 0, a), make_h("a2", 0, a)), 0.0);
  }
}

TEST(Pool, InsertTracksStrictBest) {
  HeuristicPool pool(5);
  EXPECT_TRUE(pool.insert(make_h("a", -10)));
  EXPECT_FALSE(pool.insert(make_h("b", -10)));
  EXPECT_EQ(pool.best()->id, "a");
  EXPECT_TRUE(pool.insert(make_h("c", -8)));
  EXPECT_EQ(pool.best()->id, "c");
}

TEST(Pool, RejectsBadEntries) {
  HeuristicPool pool(5);
  pool.insert(make_h("a", 1));
  EXPECT_THROW(pool.insert(make_h("a", 2)), InternalError);
  EXPECT_THROW(pool.insert(make_h("n", NAN)), InternalError);
  EXPECT_THROW(pool.insert(make_h("i", INFINITY)), InternalError);
  EXPECT_THROW(pool.insert(make_h("e", 1, "")), InternalError);
  EXPECT_THROW(HeuristicPool(0), ConfigError);
}

TEST(Pool, BestMatchesLinearScanUnderRandomInserts) {
  Pcg32 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    HeuristicPool pool(4);
    std::vector<Heuristic> all;
    for (int i = 0; i < 30; ++i) {
      auto h = make_h("h" + std::to_string(i), static_cast<double>(rng.uniform_int(-20, -1)));
      all.push_back(h);
      pool.insert(h);
      const Heuristic* oracle = &all.front();
      for (const auto& x : all) {
        if (x.performance > oracle->performance) oracle = &x;
      }
      ASSERT_EQ(pool.best()->id, oracle->id);
    }
  }
}

TEST(Pool, RankDistributionExamples) {
  HeuristicPool pool(3);
  pool.insert(make_h("low", -3));
  pool.insert(make_h("high", -1));
  pool.insert(make_h("mid", -2));
  const auto d = pool.rank_distribution();
  ASSERT_EQ(d.size(), 3u);
  EXPECT_EQ(pool.entries()[d[0].index].id, "high");
  EXPECT_NEAR(d[0].probability, 6.0 / 11.0, 1e-15);
  EXPECT_NEAR(d[1].probability, 3.0 / 11.0, 1e-15);
  EXPECT_NEAR(d[2].probability, 2.0 / 11.0, 1e-15);

  HeuristicPool single(3);
  single.insert(make_h("only", 0));
  Pcg32 rng(1);
  for (int i = 0; i < 10; ++i) EXPECT_EQ(single.rank_sample(rng).id, "only");
}

TEST(Pool, TiesRankEarlierInsertionFirst) {
  HeuristicPool pool(5);
  pool.insert(make_h("first", -1));
  pool.insert(make_h("second", -1));
  EXPECT_EQ(pool.performance_order(), (std::vector<std::size_t>{0, 1}));
}

TEST(Pool, EntriesBelowPopulationAreNeverSampled) {
  for (std::size_t n = 1; n <= 7; ++n) {
    for (std::size_t lp = 1; lp <= n; ++lp) {
      HeuristicPool pool(lp);
      for (std::size_t i = 0; i < n; ++i) pool.insert(make_h("h" + std::to_string(i), -static_cast<double>(i)));
      Pcg32 rng(n * 31 + lp);
      for (int t = 0; t < 3000; ++t) {
        const auto& h = pool.rank_sample(rng);
        ASSERT_LT(std::stoul(h.id.substr(1)), lp) << "n=" << n << " lp=" << lp;
      }
    }
  }
}

TEST(Pool, FivePoolFrequenciesWithRankThreshold) {
  HeuristicPool pool(3);
  for (int i = 0; i < 5; ++i) pool.insert(make_h("h" + std::to_string(i), -static_cast<double>(i)));
  ASSERT_EQ(pool.rank_distribution().size(), 3u);
  Pcg32 rng(2);
  std::map<std::string, int> counts;
  for (int t = 0; t < 100000; ++t) ++counts[pool.rank_sample(rng).id];
  EXPECT_EQ(counts["h3"], 0);
  EXPECT_EQ(counts["h4"], 0);
}

TEST(Pool, MillionDrawsMatchInverseRank) {
  HeuristicPool pool(5);
  for (int i = 0; i < 5; ++i) pool.insert(make_h("h" + std::to_string(i), -static_cast<double>(i)));
  const double h5 = 1.0 + 1.0 / 2 + 1.0 / 3 + 1.0 / 4 + 1.0 / 5;
  Pcg32 rng(17);
  std::vector<int> counts(5, 0);
  const int n = 1000000;
  for (int t = 0; t < n; ++t) ++counts[std::stoi(pool.rank_sample(rng).id.substr(1))];
  for (int r = 0; r < 5; ++r) {
    EXPECT_NEAR(static_cast<double>(counts[r]) / n, (1.0 / (r + 1)) / h5, 0.01) << "rank " << r + 1;
  }
}

TEST(Pool, DiversityDistribution) {
  HeuristicPool pool(5);
  pool.insert(make_h("ref", -1, "greedy best fit"));
  pool.insert(make_h("same", -2, "greedy best fit"));
  pool.insert(make_h("new", -3, "harmonic classes"));
  const auto& ref = *pool.find("ref");
  const auto d = pool.diversity_distribution(ref);
  ASSERT_EQ(d.size(), 2u);
  EXPECT_EQ(pool.entries()[d[0].index].id, "new");
  EXPECT_NEAR(d[0].probability, 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(d[1].probability, 1.0 / 3.0, 1e-15);
}

TEST(Pool, DiversityTiesPreferPerformanceThenInsertion) {
  HeuristicPool pool(5);
  pool.insert(make_h("ref", -1, "alpha"));
  pool.insert(make_h("weak", -9, "beta"));
  pool.insert(make_h("strong", -2, "gamma"));
  pool.insert(make_h("strong2", -2, "delta"));
  const auto d = pool.diversity_distribution(*pool.find("ref"));
  std::vector<std::string> ids;
  for (const auto& w : d) ids.push_back(pool.entries()[w.index].id);
  EXPECT_EQ(ids, (std::vector<std::string>{"strong", "strong2", "weak"}));
}

TEST(Pool, DiversitySampleSingleOtherEntry) {
  HeuristicPool pool(5);
  pool.insert(make_h("ref", -1, "alpha"));
  pool.insert(make_h("other", -2, "alpha"));
  Pcg32 rng(4);
  for (int i = 0; i < 20; ++i) EXPECT_EQ(pool.diversity_rank_sample(*pool.find("ref"), rng).id, "other");
  HeuristicPool lone(5);
  lone.insert(make_h("ref", -1));
  EXPECT_THROW(lone.diversity_rank_sample(*lone.find("ref"), rng), InternalError);
}

TEST(Pool, SnapshotRoundTripWithFixedFieldOrder) {
  HeuristicPool pool(3);
  auto h = make_h("r1-s0", -4.5, "an idea");
  h.origin = {OperatorKind::Crossover, {"a", "b"}};
  h.created_round = 1;
  pool.insert(make_h("seed-0", -5));
  pool.insert(h);
  std::stringstream ss;
  pool.write_snapshot(ss);
  const auto text = ss.str();
  const auto second = text.substr(text.find('\n') + 1);
  EXPECT_EQ(second.find("{\"id\":"), 0u);
  EXPECT_LT(second.find("\"idea\""), second.find("\"code\""));
  EXPECT_LT(second.find("\"performance\""), second.find("\"origin\""));
  EXPECT_LT(second.find("\"origin\""), second.find("\"round\""));
  const auto back = HeuristicPool::read_snapshot(ss);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[1], h);
  EXPECT_FALSE(back[0].origin.op.has_value());
}
