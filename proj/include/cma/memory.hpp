#pragma once

// Byte cell and hierarchical tape built from decaying head chains.

#include <bitset>
#include <istream>
#include <cstdint>
#include <limits>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cma/error.hpp"

namespace cma {

enum class Command { e, mu, nu, alpha, omega };

inline Command parse_command(std::string_view s) {
  if (s == "e") return Command::e;
  if (s == "mu" || s == "μ") return Command::mu;
  if (s == "nu" || s == "ν") return Command::nu;
  if (s == "alpha" || s == "α") return Command::alpha;
  if (s == "omega" || s == "ω") return Command::omega;
  throw DomainError("unknown tape command '" + std::string(s) + "'");
}

inline std::string to_string(Command c) {
  switch (c) {
  case Command::e: return "e";
  case Command::mu: return "mu";
  case Command::nu: return "nu";
  case Command::alpha: return "alpha";
  case Command::omega: return "omega";
  }
  return "e";
}

struct Emission {
  bool bit = false;
  bool boundary = false; // a head move was clipped at an end
};

// 8 bits on a hypercube plus a head on an E_8 decay chain.
class ByteCell {
public:
  static constexpr unsigned width = 8;

  explicit ByteCell(int scale = 0) : scale_(scale) {}

  Emission step(Command c) {
    Emission em;
    switch (c) {
    case Command::e:
      if (head_ > 0) --head_;
      break;
    case Command::mu:
      if (head_ == 0) em.boundary = true;
      else --head_;
      break;
    case Command::nu:
      if (head_ + 1 == width) em.boundary = true;
      else ++head_;
      break;
    case Command::alpha: bits_.set(head_); break;
    case Command::omega: bits_.reset(head_); break;
    }
    em.bit = bits_.test(head_);
    return em;
  }

  bool bit(unsigned i) const { return bits_.test(i); }
  unsigned head() const noexcept { return head_; }
  int scale() const noexcept { return scale_; }
  std::uint8_t value() const noexcept { return static_cast<std::uint8_t>(bits_.to_ulong()); }
  bool at_rest() const noexcept { return head_ == 0; }

  /// Most significant bit first.
  std::string bits_string() const { return bits_.to_string(); }

  /// Drives the head with mu/nu to `target`.
  void seek(unsigned target) {
    while (head_ < target) step(Command::nu);
    while (head_ > target) step(Command::mu);
  }

  /// Rewrites the content through head moves and alpha/omega writes.
  void store(std::uint8_t v) {
    for (unsigned i = 0; i < width; ++i) {
      bool want = (v >> i) & 1u;
      if (bits_.test(i) == want) continue;
      seek(i);
      step(want ? Command::alpha : Command::omega);
    }
  }

  void flip(unsigned i) { bits_.flip(i); }

  bool operator==(const ByteCell&) const = default;

private:
  std::bitset<width> bits_;
  unsigned head_ = 0;
  int scale_ = 0;
};

inline std::pair<ByteCell, Emission> apply(ByteCell cell, Command c) {
  auto em = cell.step(c);
  return {cell, em};
}

/// Cells a full transition table would need: content states x head
/// positions x command symbols. Throws on zero arguments or overflow.
inline std::uint64_t transition_table_size(std::uint64_t alphabet, std::uint64_t positions, std::uint64_t symbols) {
  if (alphabet == 0 || positions == 0 || symbols == 0) throw DomainError("transition table dimensions must be positive");
  constexpr auto max = std::numeric_limits<std::uint64_t>::max();
  if (alphabet > max / positions || alphabet * positions > max / symbols)
    throw DomainError("transition table size overflows 64 bits");
  return alphabet * positions * symbols;
}

// A bit tape of byte cells, optionally tripled for majority-vote error
// correction. The head position lives in a counter byte cell one scale
// below the content; idle ticks clear the counter's highest set bit, so the
// head rests at 0 within 8 ticks.
class Tape {
public:
  Tape(std::size_t length_bits, std::size_t replicas = 3, int scale = 0) : scale_(scale), counter_(scale - 1) {
    if (length_bits == 0 || length_bits % ByteCell::width != 0 || length_bits > 256)
      throw DomainError("tape length must be a positive multiple of 8 up to 256");
    if (replicas != 1 && replicas != 3) throw DomainError("tape replicas must be 1 or 3");
    length_ = length_bits;
    cells_.assign(replicas, std::vector<ByteCell>(length_bits / ByteCell::width, ByteCell(scale)));
  }

  std::size_t length() const noexcept { return length_; }
  std::size_t replicas() const noexcept { return cells_.size(); }
  int scale() const noexcept { return scale_; }
  const ByteCell& counter() const noexcept { return counter_; }
  std::size_t head() const noexcept { return counter_.value(); }
  const std::vector<ByteCell>& cells(std::size_t replica = 0) const { return cells_.at(replica); }

  Emission step(Command c) {
    Emission em;
    std::size_t pos = head();
    switch (c) {
    case Command::e:
      idle_tick();
      break;
    case Command::mu:
      if (pos == 0) em.boundary = true;
      else set_head(pos - 1);
      break;
    case Command::nu:
      if (pos + 1 == length_) em.boundary = true;
      else set_head(pos + 1);
      break;
    case Command::alpha:
    case Command::omega:
      for (auto& replica : cells_) {
        auto& cell = replica[pos / ByteCell::width];
        cell.seek(pos % ByteCell::width);
        cell.step(c);
      }
      break;
    }
    em.bit = read(head());
    return em;
  }

  /// Majority value with three replicas, the single copy otherwise.
  bool read(std::size_t pos) const {
    return replicas() == 3 ? majority_read(pos) : raw(0, pos);
  }

  bool raw(std::size_t replica, std::size_t pos) const {
    check(pos);
    return cells_.at(replica)[pos / ByteCell::width].bit(pos % ByteCell::width);
  }

  bool majority_read(std::size_t pos) const {
    if (replicas() != 3) throw UnsupportedError("majority read needs three replicas");
    int votes = raw(0, pos) + raw(1, pos) + raw(2, pos);
    return votes >= 2;
  }

  /// Flips one stored bit of one replica, bypassing the head.
  void corrupt(std::size_t replica, std::size_t pos) {
    check(pos);
    if (replica >= replicas()) throw DomainError("no replica " + std::to_string(replica));
    cells_[replica][pos / ByteCell::width].flip(pos % ByteCell::width);
  }

  void idle(std::size_t ticks) {
    for (std::size_t t = 0; t < ticks && !at_rest(); ++t) idle_tick();
  }

  bool at_rest() const {
    if (counter_.value() != 0 || !counter_.at_rest()) return false;
    for (const auto& replica : cells_)
      for (const auto& cell : replica)
        if (!cell.at_rest()) return false;
    return true;
  }

  std::vector<std::uint8_t> bytes(std::size_t replica = 0) const {
    std::vector<std::uint8_t> out;
    for (const auto& cell : cells_.at(replica)) out.push_back(cell.value());
    return out;
  }

  /// Byte k holds bits 8k..8k+7, least significant bit first.
  std::string hex(std::size_t replica = 0) const {
    static const char* digits = "0123456789abcdef";
    std::string s;
    for (auto b : bytes(replica)) {
      s += digits[b >> 4];
      s += digits[b & 15];
    }
    return s;
  }

  bool content_equals(const Tape& other) const { return cells_content() == other.cells_content(); }

  bool operator==(const Tape&) const = default;

private:
  void check(std::size_t pos) const {
    if (pos >= length_) throw DomainError("tape position " + std::to_string(pos) + " out of range");
  }

  void set_head(std::size_t pos) { counter_.store(static_cast<std::uint8_t>(pos)); }

  void idle_tick() {
    auto v = counter_.value();
    if (v != 0) {
      unsigned top = 7;
      while (!((v >> top) & 1u)) --top;
      counter_.seek(top);
      counter_.step(Command::omega);
    } else {
      counter_.step(Command::e);
    }
    for (auto& replica : cells_)
      for (auto& cell : replica) cell.step(Command::e);
  }

  std::vector<std::vector<std::uint8_t>> cells_content() const {
    std::vector<std::vector<std::uint8_t>> out;
    for (std::size_t r = 0; r < replicas(); ++r) out.push_back(bytes(r));
    return out;
  }

  std::size_t length_ = 0;
  int scale_ = 0;
  std::vector<std::vector<ByteCell>> cells_;
  ByteCell counter_;
};

/// The two-level hierarchical tape: 2^8 bits addressed by a byte-cell counter.
inline Tape build_t1(std::size_t replicas = 3, int scale = 0) { return Tape(256, replicas, scale); }

inline std::pair<Tape, Emission> apply(Tape tape, Command c) {
  auto em = tape.step(c);
  return {tape, em};
}

inline std::vector<Command> parse_script(std::istream& in) {
  std::vector<Command> out;
  std::string line;
  while (std::getline(in, line)) {
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    auto last = line.find_last_not_of(" \t\r");
    out.push_back(parse_command(std::string_view(line).substr(first, last - first + 1)));
  }
  return out;
}

} // namespace cma
