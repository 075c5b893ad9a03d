#include <algorithm>
#include <numeric>
#include <sstream>

#include <gtest/gtest.h>

#include "cma/automaton.hpp"
#include "cma/json_io.hpp"
#include "cma/menagerie.hpp"

using namespace cma;

namespace {

std::size_t count_rule(const std::vector<Violation>& report, const std::string& rule) {
  return static_cast<std::size_t>(
      std::count_if(report.begin(), report.end(), [&](const Violation& v) { return v.rule == rule; }));
}

Automaton looped_two_wheel() { return wheel(2, {0}); }

std::size_t dot_edges(const std::string& dot) {
  std::size_t n = 0;
  for (std::size_t p = dot.find("->"); p != std::string::npos; p = dot.find("->", p + 2)) ++n;
  return n;
}

std::size_t dot_nodes(const std::string& dot) {
  std::size_t n = 0;
  std::istringstream in(dot);
  for (std::string line; std::getline(in, line);)
    if (line.find("[label=") != std::string::npos && line.find("->") == std::string::npos) ++n;
  return n;
}

} // namespace

TEST(Validate, LoopedTwoWheelIsClean) { EXPECT_TRUE(validate(looped_two_wheel()).empty()); }

TEST(Validate, TooManyStates) {
  auto report = validate(chain(10001, {}, Constraints{20000, 256, 8, 20000}));
  EXPECT_EQ(count_rule(report, "ss"), 1u);
  EXPECT_EQ(report.size(), 1u);
}

TEST(Validate, OutDegreeEightIsFlagged) {
  Automaton::Builder b("fan");
  auto e = b.input("e");
  auto hub = b.state("hub");
  for (int i = 0; i < 8; ++i) b.edge(hub, e, b.state("s" + std::to_string(i)));
  auto report = validate(b.build());
  ASSERT_EQ(count_rule(report, "od"), 1u);
  EXPECT_EQ(report[0].subject, "hub");
}

TEST(Validate, OutDegreeSevenIsLegal) {
  Automaton::Builder b("fan");
  auto e = b.input("e");
  auto hub = b.state("hub");
  for (int i = 0; i < 7; ++i) b.edge(hub, e, b.state("s" + std::to_string(i)));
  EXPECT_TRUE(validate(b.build()).empty());
}

TEST(Validate, AlphabetAndInDegree) {
  Automaton::Builder b("wide");
  b.state("q");
  for (int i = 0; i < 257; ++i) b.input("x" + std::to_string(i));
  EXPECT_EQ(count_rule(validate(b.build()), "io"), 1u);

  Automaton::Builder s("star");
  auto e = s.input("e");
  auto sink = s.state("sink");
  for (int i = 0; i < 10000; ++i) s.edge(s.state("p" + std::to_string(i)), e, sink);
  auto report = validate(s.build(), Constraints{20000, 256, 8, 10000});
  ASSERT_EQ(count_rule(report, "id"), 1u);
  EXPECT_EQ(report[0].subject, "sink");
}

TEST(Constraints, ParseAndReject) {
  auto c = Constraints::parse("m=50,o=3");
  EXPECT_EQ(c.max_states, 50u);
  EXPECT_EQ(c.max_out_degree, 3u);
  EXPECT_EQ(c.max_alphabet, 256u);
  EXPECT_THROW(Constraints::parse("m=0"), DomainError);
  EXPECT_THROW(Constraints::parse("z=4"), DomainError);
  EXPECT_THROW(Constraints::parse("m"), DomainError);
}

TEST(Step, LoopedTwoWheel) {
  auto a = looped_two_wheel();
  // The signaling state is the second one, so entering it emits "1".
  EXPECT_EQ(step(a, "q0", "e"), (std::vector<Move>{{0, ""}, {1, "1"}}));
  EXPECT_EQ(step(a, "q1", "e"), (std::vector<Move>{{0, ""}}));
}

TEST(Step, WireGoesToTheSymbolState) {
  auto d = wire({"x", "y"});
  for (const auto& from : d.states()) {
    auto moves = step(d, from, "x");
    ASSERT_EQ(moves.size(), 1u);
    EXPECT_EQ(d.state_name(moves[0].next), "x");
    EXPECT_EQ(moves[0].output, "x");
  }
}

TEST(Step, UnknownStateOrSymbol) {
  auto a = wheel(3);
  EXPECT_THROW(step(a, "nope", "e"), DomainError);
  EXPECT_THROW(step(a, "q0", "x"), DomainError);
  EXPECT_THROW(step(a, StateId{7}, SymbolId{0}), DomainError);
}

TEST(Run, FourWheelTwoLaps) {
  auto a = wheel(4);
  auto t = run(a, ticks(8));
  std::vector<std::string> names;
  for (auto q : t.visited) names.push_back(a.state_name(q));
  EXPECT_EQ(names, (std::vector<std::string>{"q0", "q1", "q2", "q3", "q0", "q1", "q2", "q3", "q0"}));
  EXPECT_EQ(std::count(t.emitted.begin(), t.emitted.end(), "1"), 2);
  EXPECT_EQ(t.steps, 8u);
  EXPECT_EQ(t.emitted.size(), t.steps + 1);
  EXPECT_FALSE(t.halted);
}

TEST(Run, ChainHalts) {
  auto t = run(chain(3), ticks(5));
  EXPECT_EQ(t.steps, 2u);
  EXPECT_TRUE(t.halted);
  EXPECT_EQ(t.visited.size(), 3u);
}

TEST(Run, SeededRunsRepeat) {
  auto a = looped_two_wheel();
  auto x = run(a, ticks(3), Chooser::seeded(0));
  auto y = run(a, ticks(3), Chooser::seeded(0));
  EXPECT_EQ(x.visited, y.visited);
  EXPECT_EQ(x.emitted, y.emitted);
}

TEST(Run, NondeterministicNeedsChooser) { EXPECT_THROW(run(looped_two_wheel(), ticks(3)), DomainError); }

TEST(Run, DeterministicPathIgnoresChooser) {
  for (auto a : {wheel(5), wire({"x", "y", "z"}), synapse()}) {
    std::vector<SymbolId> word;
    for (std::size_t i = 0; i < 40; ++i) word.push_back(i * 7 % a.inputs().size());
    auto base = run(a, word);
    for (std::uint64_t seed : {1u, 2u, 99u}) EXPECT_EQ(run(a, word, Chooser::seeded(seed)).visited, base.visited);
  }
}

TEST(TransitionMatrix, Examples) {
  EXPECT_EQ(transition_matrix(looped_two_wheel(), "e"), (CountMatrix{{1, 1}, {1, 0}}));
  EXPECT_EQ(transition_matrix(wheel(3), "e"), (CountMatrix{{0, 1, 0}, {0, 0, 1}, {1, 0, 0}}));
  EXPECT_EQ(transition_matrix(chain(2), "e"), (CountMatrix{{0, 1}, {0, 0}}));
  EXPECT_THROW(transition_matrix(wheel(3), "x"), DomainError);
}

TEST(TransitionMatrix, RowSumsAreOutDegrees) {
  for (auto a : {looped_two_wheel(), synapse({true, true, true}), wire({"0", "1", "2"}), chain(4, {1, 3})}) {
    std::vector<std::size_t> total(a.size(), 0);
    for (SymbolId s = 0; s < a.inputs().size(); ++s) {
      auto m = transition_matrix(a, s);
      for (StateId p = 0; p < a.size(); ++p) {
        auto row = std::accumulate(m[p].begin(), m[p].end(), 0u);
        EXPECT_EQ(row, a.successors(p, s).size());
        total[p] += row;
      }
    }
    for (StateId p = 0; p < a.size(); ++p) EXPECT_EQ(total[p], a.out_degree(p));
  }
}

TEST(Dot, NodeAndEdgeCounts) {
  auto s1 = to_dot(wheel(1));
  EXPECT_EQ(dot_nodes(s1), 1u);
  EXPECT_EQ(dot_edges(s1), 1u);
  auto s21 = to_dot(looped_two_wheel());
  EXPECT_EQ(dot_nodes(s21), 2u);
  EXPECT_EQ(dot_edges(s21), 3u);
  auto r = to_dot(synapse({true, true, true}));
  EXPECT_EQ(dot_nodes(r), 4u);
  EXPECT_EQ(dot_edges(r), 7u);
  EXPECT_NE(s21.find("q1 / 1"), std::string::npos);
}

TEST(Builder, RejectsBadEdges) {
  Automaton::Builder b("x");
  b.input("e");
  b.state("a");
  EXPECT_THROW(b.edge("a", "e", "zz"), DomainError);
  EXPECT_THROW(b.edge("a", "f", "a"), DomainError);
  EXPECT_THROW(b.state("a"), DomainError);
  EXPECT_THROW(Automaton::Builder("empty").build(), DomainError);
}

TEST(RoundTrip, MenagerieSerializesIdentically) {
  std::vector<Automaton> machines{wheel(1),          wheel(4),        looped_two_wheel(),
                                  wheel(3, {0, 1, 2}), chain(5),        chain(3, {2}),
                                  synapse(),         synapse({true, true, true, true}),
                                  wire({"0", "1", "μ", "ν"}),
                                  aktionsart(Aktionsart::state), aktionsart(Aktionsart::activity),
                                  schema(Schema::exchange), schema(Schema::gravity)};
  for (const auto& a : machines) {
    auto text = serialize(a);
    auto back = parse_automaton(text);
    EXPECT_EQ(back, a) << a.name();
    EXPECT_EQ(serialize(back), text) << a.name();
  }
}
