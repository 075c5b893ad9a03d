#include <gtest/gtest.h>

#include "cma/automaton.hpp"
#include "cma/menagerie.hpp"

using namespace cma;

TEST(Wheel, ShapeAndSignal) {
  for (std::size_t k : {1u, 2u, 7u, 100u}) {
    auto a = wheel(k);
    EXPECT_EQ(a.size(), k);
    EXPECT_EQ(a.edge_count(), k);
    EXPECT_TRUE(a.is_deterministic());
    EXPECT_TRUE(a.is_complete());
    std::size_t signaling = 0;
    for (StateId q = 0; q < k; ++q) signaling += a.output(q) == "1";
    EXPECT_EQ(signaling, 1u);
    EXPECT_EQ(a.output(k - 1), "1");
  }
  EXPECT_THROW(wheel(0), DomainError);
  EXPECT_THROW(wheel(10001), DomainError);
  EXPECT_NO_THROW(wheel(10000));
}

TEST(Wheel, LoopsAddEdgesAndNondeterminism) {
  auto a = wheel(3, {0, 2});
  EXPECT_EQ(a.name(), "S_3^2");
  EXPECT_EQ(a.edge_count(), 5u);
  EXPECT_FALSE(a.is_deterministic());
  EXPECT_THROW(wheel(3, {3}), DomainError);
}

TEST(Chain, OpenEnd) {
  auto a = chain(4);
  EXPECT_EQ(a.edge_count(), 3u);
  EXPECT_FALSE(a.is_complete());
  EXPECT_TRUE(a.successors(3, 0).empty());
}

TEST(Synapse, EdgesAndThreshold) {
  auto r = synapse();
  EXPECT_EQ(r.edge_count(), 4u);
  EXPECT_EQ(synapse({true, true, true}).edge_count(), 7u);
  EXPECT_EQ(synapse({false, false, false, true}).edge_count(), 5u);
  // Two impulses reach t; one does not.
  EXPECT_EQ(r.state_name(run(r, {"1"}).visited.back()), "a");
  auto t = run(r, {"1", "1"});
  EXPECT_EQ(r.state_name(t.visited.back()), "t");
  EXPECT_EQ(t.emitted.back(), "1");
  // Refractory: an impulse while blocked is ignored (halts the run).
  auto refr = run(r, {"1", "1", "e", "1"});
  EXPECT_TRUE(refr.halted);
  EXPECT_EQ(r.state_name(refr.visited.back()), "b");
}

TEST(Wire, RelaysInput) {
  auto d = wire({"0", "1"});
  auto t = run(d, {"1", "0", "0", "1"});
  EXPECT_EQ(t.emitted, (std::vector<std::string>{"", "1", "0", "0", "1"}));
  EXPECT_THROW(wire({}), DomainError);
  EXPECT_THROW(wire({"rest"}), DomainError);
}

TEST(Specs, BuildFromText) {
  EXPECT_EQ(build("wheel:4"), wheel(4));
  EXPECT_EQ(build("wheel:2,loops=a"), wheel(2, {0}));
  EXPECT_EQ(build("wheel:3,loops=q0+q2"), wheel(3, {0, 2}));
  EXPECT_EQ(build("chain:3,loops=all"), chain(3, {0, 1, 2}));
  EXPECT_EQ(build("synapse:rab"), synapse({true, true, true}));
  EXPECT_EQ(build("wire:01"), wire({"0", "1"}));
  EXPECT_EQ(build("wire:μν"), wire({"μ", "ν"}));
  EXPECT_EQ(build("wire:ab+cd"), wire({"ab", "cd"}));
  EXPECT_EQ(build("akt:state"), aktionsart(Aktionsart::state));
  EXPECT_THROW(build("synapse:t"), DomainError);
  EXPECT_THROW(build("wheel:x"), DomainError);
  EXPECT_THROW(build("wheel:3,colour=red"), DomainError);
  EXPECT_THROW(build("gear:3"), DomainError);
  EXPECT_THROW(build("wheel:20", Constraints::parse("m=10")), DomainError);
}

TEST(Aktionsart, Shapes) {
  EXPECT_EQ(aktionsart(Aktionsart::state).size(), 1u);
  EXPECT_EQ(aktionsart(Aktionsart::semelfactive).edge_count(), 0u);
  EXPECT_EQ(aktionsart(Aktionsart::achievement).edge_count(), 1u);
  EXPECT_FALSE(aktionsart(Aktionsart::accomplishment).is_deterministic());
  EXPECT_THROW(parse_aktionsart("habitual"), DomainError);
}

TEST(Schema, Annotations) {
  auto x = schema(Schema::exchange);
  EXPECT_TRUE(x.annotations(x.state_id("b")).at("has(seller,goods)"));
  EXPECT_FALSE(x.annotations(x.state_id("a")).at("has(seller,goods)"));
  EXPECT_TRUE(x.annotations(x.state_id("mid")).empty());
  auto g = schema(Schema::gravity);
  EXPECT_TRUE(g.is_complete());
  EXPECT_TRUE(g.annotations(g.initial()).at("supported"));
}
