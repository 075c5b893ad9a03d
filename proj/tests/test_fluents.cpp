#include <random>

#include <gtest/gtest.h>

#include "cma/fluents.hpp"
#include "oracles.hpp"

using namespace cma;

namespace {

FluentStore day_store(std::int64_t start, std::int64_t end) {
  FluentStore s(ScaleSystem::naive(), 1);
  s.cyclic("Day", 96, start, end);
  s.complement("Night", "Day");
  return s;
}

} // namespace

TEST(TimePoint, Parse) {
  EXPECT_EQ(TimePoint::parse("2.3"), (TimePoint{2, 3}));
  EXPECT_EQ(TimePoint::parse("0.-5"), (TimePoint{0, -5}));
  EXPECT_EQ(TimePoint::parse("-1.7"), (TimePoint{-1, 7}));
  EXPECT_EQ(TimePoint::parse("-3.-4").str(), "-3.-4");
  EXPECT_THROW(TimePoint::parse("3"), DomainError);
  EXPECT_THROW(TimePoint::parse("a.b"), DomainError);
  EXPECT_THROW(TimePoint::parse("1.2.3"), DomainError);
}

TEST(Contains, DecimalExamples) {
  auto s = ScaleSystem::modern();
  EXPECT_TRUE(contains({1, 0}, {0, 7}, s));
  EXPECT_FALSE(contains({1, 0}, {0, 10}, s));
  EXPECT_TRUE(contains({2, 3}, {0, 305}, s));
  EXPECT_TRUE(contains({1, -1}, {0, -1}, s));
  EXPECT_FALSE(contains({1, 0}, {0, -1}, s));
  EXPECT_THROW(contains({0, 0}, {0, 0}, s), DomainError);
  EXPECT_THROW(contains({0, 0}, {1, 0}, s), DomainError);
  EXPECT_THROW(contains({19, 0}, {0, 0}, s), ScaleError);
}

TEST(Contains, MatchesWindowOracle) {
  auto s = ScaleSystem::modern();
  std::mt19937_64 rng(4);
  for (int i = 0; i < 2000; ++i) {
    int levels = 1 + static_cast<int>(rng() % 4);
    std::int64_t k = static_cast<std::int64_t>(rng() % 41) - 20;
    std::int64_t j = static_cast<std::int64_t>(rng() % 400001) - 200000;
    EXPECT_EQ(contains({levels, k}, {0, j}, s), oracle::decimal_window_contains(k, levels, j));
  }
}

TEST(Contains, EveryIndexInExactlyOneUnit) {
  auto s = ScaleSystem::naive();
  for (std::int64_t j = -2000; j < 2000; ++j) {
    for (int up = 1; up <= 2; ++up) {
      int hits = 0;
      for (std::int64_t k = -3; k <= 3; ++k) hits += contains({up, k}, {0, j}, s);
      EXPECT_EQ(hits, 1) << up << " " << j;
    }
  }
}

TEST(Theta, ParseAndBounds) {
  EXPECT_EQ(parse_theta("2/3"), Theta(2, 3));
  EXPECT_EQ(parse_theta("0.75"), Theta(3, 4));
  EXPECT_EQ(parse_theta("1"), Theta(1));
  EXPECT_THROW(parse_theta("1/2"), DomainError);
  EXPECT_THROW(parse_theta("1.5"), DomainError);
  EXPECT_THROW(parse_theta("x"), DomainError);
}

TEST(Eval, AllTrueWindow) {
  FluentStore s;
  s.define("p", 0, 10, {{0, 10}});
  for (auto m : {FluentMode::forall, FluentMode::exists, FluentMode::preponderant})
    EXPECT_EQ(s.eval("p", {1, 0}, m), Truth::True);
}

TEST(Eval, BreathingIsUndefined) {
  FluentStore s(ScaleSystem::uniform(0, 1, 96), 0);
  std::vector<bool> v;
  for (int i = 0; i < 96; ++i) v.push_back(i % 2 == 0);
  s.define_values("in", 0, v);
  EXPECT_EQ(s.eval("in", {1, 0}, FluentMode::preponderant), Truth::Undefined);
  EXPECT_EQ(s.eval("in", {1, 0}, FluentMode::forall), Truth::False);
  EXPECT_EQ(s.eval("in", {1, 0}, FluentMode::exists), Truth::True);
}

TEST(Eval, SlimMajorityIsUndefined) {
  FluentStore s(ScaleSystem::modern(), 0);
  s.define("p", 0, 1000, {{0, 501}});
  EXPECT_EQ(s.eval("p", {3, 0}, FluentMode::preponderant), Truth::Undefined);
  EXPECT_EQ(s.eval("p", {3, 0}, FluentMode::preponderant, Theta(1, 2) + Theta(1, 1000)), Truth::True);
  EXPECT_THROW(s.eval("p", {3, 0}, FluentMode::preponderant, Theta(1, 2)), DomainError);
}

TEST(Eval, ContiguousVersusTotal) {
  FluentStore s(ScaleSystem::uniform(0, 1, 9), 0);
  s.define("p", 0, 9, {{0, 3}, {4, 7}, {8, 9}});
  EXPECT_EQ(s.eval("p", {1, 0}, FluentMode::preponderant), Truth::Undefined);
  EXPECT_EQ(s.eval("p", {1, 0}, FluentMode::preponderant, default_theta(), RunRule::total), Truth::True);
}

TEST(Eval, BaseScaleModesAgree) {
  FluentStore s;
  s.define("p", -5, 5, {{-2, 1}});
  for (std::int64_t j = -5; j < 5; ++j) {
    auto f = s.eval("p", {0, j}, FluentMode::forall);
    EXPECT_EQ(s.eval("p", {0, j}, FluentMode::exists), f);
    EXPECT_EQ(s.eval("p", {0, j}, FluentMode::preponderant), f);
    EXPECT_EQ(f == Truth::True, s.value("p", j));
  }
}

TEST(Eval, Errors) {
  FluentStore s(ScaleSystem::modern(), 1);
  s.define("p", 0, 100, {});
  EXPECT_THROW(s.eval("q", {2, 0}, FluentMode::exists), DomainError);
  EXPECT_THROW(s.eval("p", {0, 0}, FluentMode::exists), DomainError);
  EXPECT_THROW(s.eval("p", {4, 0}, FluentMode::exists), DomainError);
  EXPECT_THROW(s.define("p", 0, 1, {}), DomainError);
  EXPECT_THROW(s.define("r", 0, 10, {{5, 11}}), DomainError);
  EXPECT_THROW(FluentStore(ScaleSystem::modern(), 40), ScaleError);
}

TEST(Cyclic, EvenIndices) {
  FluentStore s;
  s.cyclic("Day", 2, 0, 1);
  for (std::int64_t j = -6; j < 6; ++j) EXPECT_EQ(s.value("Day", j), j % 2 == 0) << j;
  EXPECT_THROW(s.cyclic("X", 1, 0, 1), DomainError);
  EXPECT_THROW(s.cyclic("X", 4, 0, 4), DomainError);
  EXPECT_THROW(s.cyclic("Day", 4, 0, 1), DomainError);
}

TEST(Cyclic, HalfDutyDayIsUndefined) {
  auto s = day_store(24, 72);
  for (std::int64_t d = -3; d <= 3; ++d) {
    EXPECT_EQ(s.eval("Day", {2, d}, FluentMode::preponderant), Truth::Undefined);
    EXPECT_EQ(s.eval("Night", {2, d}, FluentMode::preponderant), Truth::Undefined);
  }
}

TEST(Cyclic, LongDayIsPreponderant) {
  auto s = day_store(12, 84);
  EXPECT_EQ(s.eval("Day", {2, 0}, FluentMode::preponderant), Truth::True);
  EXPECT_EQ(s.eval("Night", {2, 0}, FluentMode::preponderant), Truth::False);
  EXPECT_EQ(s.eval("Day", {2, 0}, FluentMode::forall), Truth::False);
}

TEST(Cyclic, WindowsAboveTheDayUseTheAnalyticSummary) {
  auto s = day_store(12, 84);
  // A season holds 96 days: every day contributes one 72-unit run.
  EXPECT_EQ(s.eval("Day", {3, 0}, FluentMode::preponderant), Truth::Undefined);
  EXPECT_EQ(s.eval("Day", {3, 0}, FluentMode::preponderant, default_theta(), RunRule::total), Truth::True);
  auto sum = s.summarize("Day", 0, 96 * 96);
  EXPECT_EQ(sum.total_true, 72 * 96);
  EXPECT_EQ(sum.longest_true, 72);
  // Compare against an explicit unrolled copy.
  FluentStore e(ScaleSystem::naive(), 1);
  std::vector<bool> v;
  for (int i = 0; i < 96 * 20 + 17; ++i) v.push_back(i % 96 >= 12 && i % 96 < 84);
  e.define_values("Day", 5, std::vector<bool>(v.begin() + 5, v.end()));
  for (std::int64_t lo = 5; lo < 300; lo += 37)
    for (std::int64_t hi = lo + 1; hi <= 96 * 20 + 17; hi += 211) {
      auto a = s.summarize("Day", lo, hi), b = e.summarize("Day", lo, hi);
      EXPECT_EQ(a.total_true, b.total_true) << lo << " " << hi;
      EXPECT_EQ(a.longest_true, b.longest_true) << lo << " " << hi;
      EXPECT_EQ(a.longest_false, b.longest_false) << lo << " " << hi;
    }
}

TEST(Properties, MonotonicityAndExclusion) {
  std::mt19937_64 rng(99);
  const Theta thetas[] = {Theta(2, 3), Theta(3, 4), Theta(51, 100), Theta(1)};
  for (int i = 0; i < 10000; ++i) {
    int w = 1 + static_cast<int>(rng() % 40);
    std::vector<bool> v;
    int bias = static_cast<int>(rng() % 11);
    for (int j = 0; j < w; ++j) v.push_back(static_cast<int>(rng() % 10) < bias);
    FluentStore s(ScaleSystem::uniform(0, 1, static_cast<std::uint64_t>(std::max(w, 2))), 0);
    if (w == 1) v.push_back(v[0]);
    s.define_values("p", 0, v);
    s.complement("not-p", "p");
    auto theta = thetas[rng() % 4];
    auto rule = rng() % 2 ? RunRule::contiguous : RunRule::total;
    auto all = s.eval("p", {1, 0}, FluentMode::forall);
    auto prep = s.eval("p", {1, 0}, FluentMode::preponderant, theta, rule);
    auto some = s.eval("p", {1, 0}, FluentMode::exists);
    if (all == Truth::True) EXPECT_EQ(prep, Truth::True);
    if (prep == Truth::True) EXPECT_EQ(some, Truth::True);
    auto neg = s.eval("not-p", {1, 0}, FluentMode::preponderant, theta, rule);
    EXPECT_FALSE(prep == Truth::True && neg == Truth::True);
    if (prep == Truth::True) EXPECT_EQ(neg, Truth::False);
  }
}

TEST(Schema, ExchangeAndGravity) {
  auto x = schema_eval(Schema::exchange);
  ASSERT_EQ(x.size(), 3u);
  EXPECT_EQ(x[0].state, "b");
  EXPECT_EQ(x[0].fluents.at("has(seller,goods)"), Truth::True);
  EXPECT_EQ(x[0].fluents.at("has(buyer,goods)"), Truth::False);
  for (const auto& [f, t] : x[1].fluents) EXPECT_EQ(t, Truth::Undefined) << f;
  EXPECT_EQ(x[1].fluents.size(), 4u);
  EXPECT_EQ(x[2].fluents.at("has(buyer,goods)"), Truth::True);
  auto g = schema_eval(Schema::gravity);
  EXPECT_EQ(g[0].fluents.at("supported"), Truth::True);
  EXPECT_EQ(g[1].fluents.at("falling"), Truth::True);
}
