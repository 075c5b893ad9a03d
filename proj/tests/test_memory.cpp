#include <bit>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "cma/memory.hpp"
#include "oracles.hpp"

using namespace cma;

namespace {

constexpr char kLetters[] = {'e', 'm', 'n', 'a', 'w'};
constexpr Command kCommands[] = {Command::e, Command::mu, Command::nu, Command::alpha, Command::omega};

void expect_same(const Tape& t, const oracle::ArrayTape& o) {
  ASSERT_EQ(t.head(), o.head);
  for (std::size_t i = 0; i < o.bits.size(); ++i) ASSERT_EQ(t.read(i), o.bits[i]) << "bit " << i;
}

} // namespace

TEST(Command, Parse) {
  EXPECT_EQ(parse_command("e"), Command::e);
  EXPECT_EQ(parse_command("mu"), Command::mu);
  EXPECT_EQ(parse_command("μ"), Command::mu);
  EXPECT_EQ(parse_command("ν"), Command::nu);
  EXPECT_EQ(parse_command("alpha"), Command::alpha);
  EXPECT_EQ(parse_command("ω"), Command::omega);
  EXPECT_THROW(parse_command("beta"), DomainError);
  for (auto c : kCommands) EXPECT_EQ(parse_command(to_string(c)), c);
}

TEST(ByteCell, WriteAndMove) {
  ByteCell c;
  auto [c1, em] = apply(c, Command::alpha);
  EXPECT_TRUE(em.bit);
  EXPECT_EQ(c1.bits_string(), "00000001");
  auto [c2, em2] = apply(c1, Command::nu);
  EXPECT_FALSE(em2.bit);
  EXPECT_EQ(c2.head(), 1u);
  auto [c3, em3] = apply(c2, Command::mu);
  EXPECT_TRUE(em3.bit);
  EXPECT_EQ(c3.head(), 0u);
  auto [c4, em4] = apply(c3, Command::mu);
  EXPECT_TRUE(em4.boundary);
  EXPECT_EQ(c.bits_string(), "00000000");
}

TEST(ByteCell, NuSaturatesAtTheTop) {
  ByteCell c;
  for (int i = 0; i < 7; ++i) EXPECT_FALSE(c.step(Command::nu).boundary);
  EXPECT_TRUE(c.step(Command::nu).boundary);
  EXPECT_EQ(c.head(), 7u);
}

TEST(ByteCell, HeadDecaysUnderTicks) {
  ByteCell c;
  c.seek(7);
  c.step(Command::alpha);
  for (int i = 0; i < 7; ++i) c.step(Command::e);
  EXPECT_TRUE(c.at_rest());
  EXPECT_EQ(c.value(), 0x80);
}

TEST(ByteCell, StoreRoundTrips) {
  for (unsigned v = 0; v < 256; ++v) {
    ByteCell c;
    c.store(static_cast<std::uint8_t>(255 - v));
    c.store(static_cast<std::uint8_t>(v));
    EXPECT_EQ(c.value(), v);
  }
}

TEST(TableSize, Examples) {
  EXPECT_EQ(transition_table_size(256, 8, 5), 10240u);
  EXPECT_THROW(transition_table_size(0, 8, 5), DomainError);
  EXPECT_THROW(transition_table_size(1ull << 40, 1ull << 30, 5), DomainError);
}

TEST(Tape, Construction) {
  EXPECT_THROW(Tape(12), DomainError);
  EXPECT_THROW(Tape(512), DomainError);
  EXPECT_THROW(Tape(64, 2), DomainError);
  auto t = build_t1();
  EXPECT_EQ(t.length(), 256u);
  EXPECT_EQ(t.replicas(), 3u);
  EXPECT_EQ(t.counter().scale(), t.scale() - 1);
  EXPECT_TRUE(t.at_rest());
}

TEST(Tape, MatchesArrayOracle) {
  std::mt19937_64 rng(1234);
  for (int trial = 0; trial < 1000; ++trial) {
    Tape t = build_t1(trial % 2 ? 3 : 1);
    oracle::ArrayTape o;
    std::size_t len = 1 + rng() % 10000;
    for (std::size_t i = 0; i < len; ++i) {
      // Bias towards nu so the head reaches high positions.
      std::size_t pick = rng() % 8;
      std::size_t k = pick >= 5 ? 2 : pick;
      auto em = t.step(kCommands[k]);
      o.apply(kLetters[k]);
      ASSERT_EQ(t.head(), o.head) << "trial " << trial << " step " << i;
      ASSERT_EQ(em.bit, static_cast<bool>(o.bits[o.head])) << "trial " << trial << " step " << i;
    }
    expect_same(t, o);
  }
}

TEST(Tape, ContentSurvivesAMyriadIdleTicks) {
  auto t = build_t1();
  std::mt19937_64 rng(8);
  oracle::ArrayTape o;
  for (int i = 0; i < 4000; ++i) {
    std::size_t k = 1 + rng() % 4;
    t.step(kCommands[k]);
    o.apply(kLetters[k]);
  }
  auto before = t.hex();
  for (int i = 0; i < 10000; ++i) t.step(Command::e);
  EXPECT_EQ(t.hex(), before);
  o.head = 0;
  expect_same(t, o);
}

TEST(Tape, HeadDecaysWithinEightTicks) {
  for (std::size_t target = 0; target < 256; ++target) {
    auto t = build_t1();
    for (std::size_t i = 0; i < target; ++i) t.step(Command::nu);
    ASSERT_EQ(t.head(), target);
    std::size_t ticks = 0;
    while (t.head() != 0) {
      t.step(Command::e);
      ++ticks;
    }
    EXPECT_LE(ticks, 8u);
    EXPECT_EQ(ticks, static_cast<std::size_t>(std::popcount(target)));
  }
}

TEST(Tape, IdleReachesRest) {
  auto t = build_t1();
  for (int i = 0; i < 200; ++i) t.step(Command::nu);
  t.step(Command::alpha);
  t.idle(16);
  EXPECT_TRUE(t.at_rest());
  EXPECT_TRUE(t.read(200));
}

TEST(Tape, EverySingleFaultIsCorrected) {
  auto t = build_t1();
  std::mt19937_64 rng(77);
  for (int i = 0; i < 3000; ++i) t.step(kCommands[1 + rng() % 4]);
  std::vector<bool> truth;
  for (std::size_t p = 0; p < 256; ++p) truth.push_back(t.majority_read(p));
  for (std::size_t r = 0; r < 3; ++r) {
    for (std::size_t p = 0; p < 256; ++p) {
      auto copy = t;
      copy.corrupt(r, p);
      EXPECT_NE(copy.raw(r, p), t.raw(r, p));
      for (std::size_t q = 0; q < 256; ++q) ASSERT_EQ(copy.majority_read(q), truth[q]) << r << ":" << p;
    }
  }
  auto single = build_t1(1);
  EXPECT_THROW(single.majority_read(0), UnsupportedError);
  EXPECT_THROW(t.corrupt(3, 0), DomainError);
  EXPECT_THROW(t.read(256), DomainError);
}

TEST(Tape, DoubleFaultCanWin) {
  auto t = build_t1();
  t.corrupt(0, 5);
  t.corrupt(1, 5);
  EXPECT_TRUE(t.majority_read(5));
}

TEST(Tape, HexLayout) {
  auto t = build_t1();
  t.step(Command::alpha); // bit 0
  for (int i = 0; i < 9; ++i) t.step(Command::nu);
  t.step(Command::alpha); // bit 9
  EXPECT_EQ(t.hex().substr(0, 4), "0102");
}

TEST(Script, ParsesCommentsAndBlankLines) {
  std::istringstream in("# write a one\n\nnu\n alpha \nμ\n");
  auto cmds = parse_script(in);
  EXPECT_EQ(cmds, (std::vector<Command>{Command::nu, Command::alpha, Command::mu}));
  std::istringstream bad("nu\nzap\n");
  EXPECT_THROW(parse_script(bad), DomainError);
}
