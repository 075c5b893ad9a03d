#include <algorithm>
#include <chrono>
#include <random>

#include <gtest/gtest.h>

#include "cma/analysis.hpp"
#include "oracles.hpp"

using namespace cma;

namespace {

Automaton golden() { return wheel(2, {0}); }

oracle::Graph graph_of(const Automaton& a) {
  oracle::Graph g(a.size());
  for (StateId q = 0; q < a.size(); ++q)
    for (StateId r : a.successors(q, 0)) g[q].push_back(static_cast<int>(r));
  return g;
}

Automaton from_delta(const std::vector<std::vector<int>>& delta) {
  Automaton::Builder b("C");
  b.input("a");
  b.input("b");
  for (std::size_t q = 0; q < delta.size(); ++q) b.state("c" + std::to_string(q));
  for (std::size_t q = 0; q < delta.size(); ++q)
    for (std::size_t s = 0; s < 2; ++s) b.edge(q, s, static_cast<StateId>(delta[q][s]));
  return b.build();
}

} // namespace

TEST(PathCount, GoldenRatioExact) {
  for (unsigned n = 1; n <= 60; ++n) {
    auto v = path_count_occupancy(golden(), n);
    EXPECT_EQ(v.exact_at("q0"), Rational(oracle::fibonacci(n + 1), oracle::fibonacci(n + 2))) << n;
    EXPECT_EQ(v.exact_at("q0") + v.exact_at("q1"), 1);
  }
  EXPECT_NEAR(path_count_occupancy(golden(), 40).at("q0"), 0.61803, 1e-3);
}

TEST(PathCount, SmallHorizons) {
  auto v = path_count_occupancy(golden(), 3);
  EXPECT_EQ(v.exact_at("q0"), Rational(3, 5));
  EXPECT_EQ(v.exact_at("q1"), Rational(2, 5));
  auto w = path_count_occupancy(wheel(4), 7);
  EXPECT_EQ(w.exact_at("q3"), 1);
  EXPECT_EQ(w.exact_at("q0"), 0);
}

TEST(PathCount, MatchesEnumerationOnRandomMachines) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 40; ++trial) {
    std::size_t k = 2 + rng() % 5;
    std::vector<std::size_t> loops;
    for (std::size_t i = 0; i < k; ++i)
      if (rng() % 2) loops.push_back(i);
    auto a = wheel(k, loops);
    int n = static_cast<int>(rng() % 12);
    auto counts = oracle::enumerate_paths(graph_of(a), 0, n);
    std::uint64_t total = 0;
    for (auto c : counts) total += c;
    auto v = path_count_occupancy(a, static_cast<std::size_t>(n));
    for (StateId q = 0; q < k; ++q)
      EXPECT_EQ(v.exact_at(a.state_name(q)), Rational(counts[q], total)) << a.name() << " n=" << n;
  }
}

TEST(PathCount, LongHorizonFallsBackToDoubles) {
  auto v = path_count_occupancy(golden(), 1000);
  EXPECT_FALSE(v.exact.has_value());
  EXPECT_NEAR(v.at("q0"), (std::sqrt(5.0) - 1) / 2, 1e-12);
}

TEST(PathCount, HaltedChain) { EXPECT_THROW(path_count_occupancy(chain(3), 5), HaltError); }

TEST(Stationary, TwoThirdsOneThird) {
  auto v = stationary_distribution(golden());
  EXPECT_NEAR(v.at("q0"), 2.0 / 3.0, 1e-9);
  EXPECT_NEAR(v.at("q1"), 1.0 / 3.0, 1e-9);
}

TEST(Stationary, IsFixedPoint) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    std::size_t k = 2 + rng() % 6;
    std::vector<std::size_t> loops;
    for (std::size_t i = 0; i < k; ++i)
      if (rng() % 3 == 0) loops.push_back(i);
    auto a = wheel(k, loops);
    auto v = stationary_distribution(a);
    std::vector<double> next(k, 0.0);
    for (StateId p = 0; p < k; ++p) {
      auto succ = a.successors(p, 0);
      for (StateId q : succ) next[q] += v.fractions[p] / static_cast<double>(succ.size());
    }
    for (StateId q = 0; q < k; ++q) EXPECT_NEAR(next[q], v.fractions[q], 1e-9);
  }
}

TEST(Stationary, WheelIsUniformAndExact) {
  auto v = stationary_distribution(wheel(5));
  ASSERT_TRUE(v.exact.has_value());
  for (const auto& x : *v.exact) EXPECT_EQ(x, Rational(1, 5));
}

TEST(Stationary, Rejections) {
  EXPECT_THROW(stationary_distribution(chain(3)), DomainError);
  // Two closed classes: two absorbing loops reachable from a hub.
  Automaton::Builder b("fork");
  auto e = b.input("e");
  auto hub = b.state("hub"), x = b.state("x"), y = b.state("y");
  b.edge(hub, e, x).edge(hub, e, y).edge(x, e, x).edge(y, e, y);
  EXPECT_THROW(stationary_distribution(b.build()), AmbiguityError);
}

TEST(MonteCarlo, ConvergesAndRepeats) {
  auto start = std::chrono::steady_clock::now();
  auto v = monte_carlo_occupancy(golden(), 1'000'000, 42);
  EXPECT_LT(std::chrono::steady_clock::now() - start, std::chrono::seconds(5));
  EXPECT_NEAR(v.at("q0"), 2.0 / 3.0, 3e-3);
  auto w = monte_carlo_occupancy(golden(), 1'000'000, 42);
  EXPECT_EQ(v.fractions, w.fractions);
  EXPECT_THROW(monte_carlo_occupancy(chain(3), 10, 1), HaltError);
}

TEST(CycleOccupancy, LabeledTenWheel) {
  auto a = annotate_outputs(wheel(10), {{"q0", "x"}, {"q1", "x"}, {"q2", "x"}, {"q3", "x"}, {"q4", "x"},
                                        {"q5", "y"}, {"q6", "y"}, {"q7", "y"}, {"q8", "z"}, {"q9", "z"}});
  auto v = by_signal(a, cycle_occupancy(a));
  EXPECT_EQ(v.exact_at("x"), Rational(1, 2));
  EXPECT_EQ(v.exact_at("y"), Rational(3, 10));
  EXPECT_EQ(v.exact_at("z"), Rational(1, 5));
}

TEST(CycleOccupancy, LeadInIsIgnored) {
  Automaton::Builder b("lasso");
  auto e = b.input("e");
  auto p = b.state("p"), q = b.state("q"), r = b.state("r", "1");
  b.edge(p, e, q).edge(q, e, r).edge(r, e, q);
  auto v = cycle_occupancy(b.build());
  EXPECT_EQ(v.exact_at("p"), 0);
  EXPECT_EQ(v.exact_at("q"), Rational(1, 2));
}

TEST(Approximate, ExactWhenRepresentable) {
  auto w = approximate_distribution({{"x", "y", "z"}, {0.5, 0.3, 0.2}}, 1e-9);
  EXPECT_EQ(w.k, 10u);
  EXPECT_EQ(w.counts, (std::vector<std::size_t>{5, 3, 2}));
  auto v = by_signal(w.wheel, cycle_occupancy(w.wheel));
  EXPECT_EQ(v.exact_at("x"), Rational(1, 2));
  EXPECT_EQ(v.exact_at("y"), Rational(3, 10));
}

TEST(Approximate, WithinEpsilonProperty) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 30; ++trial) {
    std::size_t n = 2 + rng() % 4;
    std::vector<double> p(n);
    double s = 0;
    for (auto& x : p) s += (x = 1.0 + static_cast<double>(rng() % 100));
    for (auto& x : p) x /= s;
    std::vector<std::string> labels;
    for (std::size_t i = 0; i < n; ++i) labels.push_back("o" + std::to_string(i));
    double eps = 0.01;
    auto w = approximate_distribution({labels, p}, eps);
    auto v = by_signal(w.wheel, cycle_occupancy(w.wheel));
    // An outcome rarer than epsilon may get no state at all.
    auto share = [&](const std::string& l) {
      auto it = std::find(v.labels.begin(), v.labels.end(), l);
      return it == v.labels.end() ? 0.0 : v.fractions[static_cast<std::size_t>(it - v.labels.begin())];
    };
    for (std::size_t i = 0; i < n; ++i) EXPECT_LE(std::abs(share(labels[i]) - p[i]), eps);
  }
}

TEST(Approximate, InfeasibleReportsBest) {
  double d = 1e-7;
  try {
    approximate_distribution({{"x", "y", "z"}, {0.5, 0.25 + d, 0.25 - d}}, 1e-9);
    FAIL() << "expected infeasible";
  } catch (const InfeasibleError& e) {
    EXPECT_GT(e.best_epsilon(), 1e-9);
    EXPECT_LE(e.best_epsilon(), d + 1e-12);
  }
  EXPECT_THROW(approximate_distribution({{"x"}, {0.5}}, 0.1), DomainError);
  EXPECT_THROW(approximate_distribution({{"x", "x"}, {0.5, 0.5}}, 0.1), DomainError);
}

TEST(Sync, CernyLengthsMatchSubsetSearch) {
  for (int n = 2; n <= 5; ++n) {
    auto delta = oracle::cerny(n);
    auto a = from_delta(delta);
    auto r = synchronizing_word(a);
    ASSERT_TRUE(r.has_value());
    EXPECT_TRUE(r->shortest);
    EXPECT_EQ(static_cast<int>(r->word.size()), oracle::shortest_sync_length(delta));
    EXPECT_EQ(static_cast<int>(r->word.size()), (n - 1) * (n - 1));
    // The word really synchronizes.
    std::vector<SymbolId> w;
    for (const auto& s : r->word) w.push_back(a.symbol_id(s));
    for (StateId q = 0; q < a.size(); ++q) {
      StateId x = q;
      for (auto s : w) x = a.successors(x, s)[0];
      EXPECT_EQ(x, r->sink);
    }
  }
}

TEST(Sync, WireAndWheel) {
  auto r = synchronizing_word(wire({"x", "y"}));
  ASSERT_TRUE(r.has_value());
  EXPECT_EQ(r->word, (std::vector<std::string>{"x"}));
  EXPECT_FALSE(synchronizing_word(wheel(3)).has_value());
  EXPECT_THROW(synchronizing_word(golden()), DomainError);
}

TEST(Sync, PairHeuristicOnLargerMachine) {
  auto delta = oracle::cerny(30);
  auto r = synchronizing_word(from_delta(delta));
  ASSERT_TRUE(r.has_value());
  EXPECT_FALSE(r->shortest);
  EXPECT_GE(r->word.size(), 29u * 29u);
}
