#pragma once

// Moore automata: the value type every other module is built on, the
// per-layer structural limits, and elementary execution.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "cma/error.hpp"

namespace cma {

using StateId = std::size_t;
using SymbolId = std::size_t;

/// The silent output is stored as the empty string and printed as "0".
inline std::string display_output(const std::string& out) { return out.empty() ? "0" : out; }

/// Per-layer limits. A value is legal when it is strictly below the
/// out/in-degree bounds and at most the state/alphabet bounds.
struct Constraints {
  std::size_t max_states = 10000;    // m, a myriad
  std::size_t max_alphabet = 256;    // s = 2^8
  std::size_t max_out_degree = 8;    // o, exclusive
  std::size_t max_in_degree = 10000; // i, exclusive

  bool operator==(const Constraints&) const = default;

  /// Parses "m=10000,s=256,o=8,i=10000"; keys may be omitted.
  static Constraints parse(std::string_view text) {
    Constraints c;
    std::string item;
    std::istringstream in{std::string(text)};
    while (std::getline(in, item, ',')) {
      if (item.empty()) continue;
      auto eq = item.find('=');
      if (eq == std::string::npos) throw DomainError("constraint '" + item + "' is not key=value");
      std::string key = item.substr(0, eq);
      std::size_t value = 0;
      try {
        std::size_t used = 0;
        long long v = std::stoll(item.substr(eq + 1), &used);
        if (used != item.size() - eq - 1 || v <= 0) throw std::invalid_argument("bad");
        value = static_cast<std::size_t>(v);
      } catch (const std::logic_error&) {
        throw DomainError("constraint '" + item + "' needs a positive integer");
      }
      if (key == "m") c.max_states = value;
      else if (key == "s") c.max_alphabet = value;
      else if (key == "o") c.max_out_degree = value;
      else if (key == "i") c.max_in_degree = value;
      else throw DomainError("unknown constraint key '" + key + "'");
    }
    return c;
  }
};

/// Per-state fluent annotations carried as metadata (schema machines).
using FluentAnnotations = std::map<std::string, bool>;

class Automaton {
public:
  class Builder;

  const std::string& name() const noexcept { return name_; }
  std::size_t size() const noexcept { return states_.size(); }
  const std::vector<std::string>& states() const noexcept { return states_; }
  const std::vector<std::string>& inputs() const noexcept { return inputs_; }
  const std::string& state_name(StateId q) const { return states_.at(q); }
  const std::string& output(StateId q) const { return outputs_.at(q); }
  StateId initial() const noexcept { return initial_; }
  const FluentAnnotations& annotations(StateId q) const { return annotations_.at(q); }

  bool has_annotations() const {
    return std::any_of(annotations_.begin(), annotations_.end(),
                       [](const auto& a) { return !a.empty(); });
  }

  std::span<const StateId> successors(StateId q, SymbolId sym) const {
    return delta_.at(q).at(sym);
  }

  std::optional<StateId> find_state(std::string_view name) const {
    auto it = state_index_.find(std::string(name));
    if (it == state_index_.end()) return std::nullopt;
    return it->second;
  }

  StateId state_id(std::string_view name) const {
    if (auto q = find_state(name)) return *q;
    throw DomainError("unknown state '" + std::string(name) + "' in " + name_);
  }

  std::optional<SymbolId> find_symbol(std::string_view sym) const {
    for (SymbolId s = 0; s < inputs_.size(); ++s)
      if (inputs_[s] == sym) return s;
    return std::nullopt;
  }

  SymbolId symbol_id(std::string_view sym) const {
    if (auto s = find_symbol(sym)) return *s;
    throw DomainError("unknown input symbol '" + std::string(sym) + "' in " + name_);
  }

  bool is_unary() const noexcept { return inputs_.size() == 1; }

  bool is_deterministic() const {
    for (const auto& row : delta_)
      for (const auto& succ : row)
        if (succ.size() > 1) return false;
    return true;
  }

  bool is_complete() const {
    for (const auto& row : delta_)
      for (const auto& succ : row)
        if (succ.empty()) return false;
    return true;
  }

  /// Number of (symbol, successor) edges leaving q.
  std::size_t out_degree(StateId q) const {
    std::size_t n = 0;
    for (const auto& succ : delta_.at(q)) n += succ.size();
    return n;
  }

  std::vector<std::size_t> in_degrees() const {
    std::vector<std::size_t> deg(size(), 0);
    for (const auto& row : delta_)
      for (const auto& succ : row)
        for (StateId r : succ) ++deg[r];
    return deg;
  }

  /// Distinct outputs, the silent output counted as the blank symbol "0".
  std::set<std::string> output_alphabet() const {
    std::set<std::string> out;
    for (const auto& o : outputs_) out.insert(display_output(o));
    return out;
  }

  std::size_t edge_count() const {
    std::size_t n = 0;
    for (StateId q = 0; q < size(); ++q) n += out_degree(q);
    return n;
  }

  bool operator==(const Automaton& other) const {
    return name_ == other.name_ && states_ == other.states_ && inputs_ == other.inputs_ &&
           outputs_ == other.outputs_ && delta_ == other.delta_ && initial_ == other.initial_ &&
           annotations_ == other.annotations_;
  }

private:
  Automaton() = default;

  std::string name_;
  std::vector<std::string> states_;
  std::vector<std::string> inputs_;
  std::vector<std::string> outputs_;
  std::vector<std::vector<std::vector<StateId>>> delta_; // [state][symbol] -> sorted successors
  StateId initial_ = 0;
  std::vector<FluentAnnotations> annotations_;
  std::unordered_map<std::string, StateId> state_index_;
};

/// Incremental construction; build() checks the structural invariants.
class Automaton::Builder {
public:
  explicit Builder(std::string name = "M") { a_.name_ = std::move(name); }

  /// Starts from an existing machine (for relabeling or extension).
  explicit Builder(const Automaton& from) : a_(from) {}

  Builder& name(std::string n) {
    a_.name_ = std::move(n);
    return *this;
  }

  StateId state(const std::string& name, std::string output = "") {
    if (a_.state_index_.count(name)) throw DomainError("duplicate state '" + name + "'");
    StateId id = a_.states_.size();
    a_.states_.push_back(name);
    a_.outputs_.push_back(std::move(output));
    a_.delta_.emplace_back(a_.inputs_.size());
    a_.annotations_.emplace_back();
    a_.state_index_.emplace(name, id);
    return id;
  }

  SymbolId input(const std::string& sym) {
    if (auto s = a_.find_symbol(sym)) return *s;
    a_.inputs_.push_back(sym);
    for (auto& row : a_.delta_) row.emplace_back();
    return a_.inputs_.size() - 1;
  }

  Builder& edge(StateId from, SymbolId sym, StateId to) {
    check_state(from);
    check_state(to);
    if (sym >= a_.inputs_.size()) throw DomainError("edge symbol out of range");
    auto& succ = a_.delta_[from][sym];
    auto it = std::lower_bound(succ.begin(), succ.end(), to);
    if (it == succ.end() || *it != to) succ.insert(it, to);
    return *this;
  }

  Builder& edge(const std::string& from, const std::string& sym, const std::string& to) {
    return edge(a_.state_id(from), a_.symbol_id(sym), a_.state_id(to));
  }

  Builder& remove_edge(StateId from, SymbolId sym, StateId to) {
    check_state(from);
    auto& succ = a_.delta_[from].at(sym);
    succ.erase(std::remove(succ.begin(), succ.end(), to), succ.end());
    return *this;
  }

  Builder& output(StateId q, std::string out) {
    check_state(q);
    a_.outputs_[q] = std::move(out);
    return *this;
  }

  Builder& annotate(StateId q, const std::string& fluent, bool value) {
    check_state(q);
    a_.annotations_[q][fluent] = value;
    return *this;
  }

  Builder& initial(StateId q) {
    check_state(q);
    a_.initial_ = q;
    return *this;
  }

  Builder& initial(const std::string& name) { return initial(a_.state_id(name)); }

  const Automaton& peek() const noexcept { return a_; }

  Automaton build() const {
    if (a_.states_.empty()) throw DomainError(a_.name_ + ": an automaton needs at least one state");
    if (a_.inputs_.empty()) throw DomainError(a_.name_ + ": the input alphabet must not be empty");
    return a_;
  }

private:
  void check_state(StateId q) const {
    if (q >= a_.states_.size()) throw DomainError("state id out of range");
  }

  Automaton a_;
};

// ---------------------------------------------------------------------------
// Validation

struct Violation {
  std::string rule;    // ss, io, od, id
  std::string subject; // offending state or alphabet
  std::string detail;

  bool operator==(const Violation&) const = default;
};

inline std::vector<Violation> validate(const Automaton& a, const Constraints& c = {}) {
  std::vector<Violation> report;
  if (a.size() > c.max_states)
    report.push_back({"ss", "states",
                      std::to_string(a.size()) + " states exceed the limit of " +
                          std::to_string(c.max_states)});
  if (a.inputs().size() > c.max_alphabet)
    report.push_back({"io", "input",
                      std::to_string(a.inputs().size()) + " input symbols exceed the limit of " +
                          std::to_string(c.max_alphabet)});
  auto outs = a.output_alphabet().size();
  if (outs > c.max_alphabet)
    report.push_back({"io", "output",
                      std::to_string(outs) + " output symbols exceed the limit of " +
                          std::to_string(c.max_alphabet)});
  for (StateId q = 0; q < a.size(); ++q) {
    auto od = a.out_degree(q);
    if (od >= c.max_out_degree)
      report.push_back({"od", a.state_name(q),
                        "out-degree " + std::to_string(od) + " reaches the bound " +
                            std::to_string(c.max_out_degree)});
  }
  auto in = a.in_degrees();
  for (StateId q = 0; q < a.size(); ++q) {
    if (in[q] >= c.max_in_degree)
      report.push_back({"id", a.state_name(q),
                        "in-degree " + std::to_string(in[q]) + " reaches the bound " +
                            std::to_string(c.max_in_degree)});
  }
  return report;
}

// ---------------------------------------------------------------------------
// Execution

struct Move {
  StateId next;
  std::string output;

  bool operator==(const Move&) const = default;
};

inline std::vector<Move> step(const Automaton& a, StateId current, SymbolId symbol) {
  if (current >= a.size()) throw DomainError("unknown state id " + std::to_string(current));
  if (symbol >= a.inputs().size()) throw DomainError("unknown symbol id " + std::to_string(symbol));
  std::vector<Move> moves;
  for (StateId q : a.successors(current, symbol)) moves.push_back({q, a.output(q)});
  return moves;
}

inline std::vector<Move> step(const Automaton& a, std::string_view current, std::string_view symbol) {
  return step(a, a.state_id(current), a.symbol_id(symbol));
}

/// Resolves nondeterministic choices: either always the first successor, or
/// uniformly at random from a 64-bit seed. The bounded draw is done by
/// rejection on mt19937_64 output so traces are identical across standard
/// library implementations.
class Chooser {
public:
  static Chooser first() { return Chooser{}; }
  static Chooser seeded(std::uint64_t seed) {
    Chooser c;
    c.rng_.emplace(seed);
    return c;
  }

  bool is_random() const noexcept { return rng_.has_value(); }

  std::size_t pick(std::size_t n) {
    if (n <= 1 || !rng_) return 0;
    const std::uint64_t bound = n;
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t x;
    do {
      x = (*rng_)();
    } while (x >= limit);
    return static_cast<std::size_t>(x % bound);
  }

private:
  Chooser() = default;
  std::optional<std::mt19937_64> rng_;
};

struct RunTrace {
  std::vector<StateId> visited; // steps + 1 entries, starting with the initial state
  std::vector<std::string> emitted;
  std::size_t steps = 0;
  bool halted = false;
};

inline RunTrace run(const Automaton& a, std::span<const SymbolId> input,
                    std::optional<Chooser> chooser = std::nullopt) {
  if (!chooser) {
    if (!a.is_deterministic())
      throw DomainError(a.name() + " is nondeterministic; supply a chooser");
    chooser = Chooser::first();
  }
  RunTrace trace;
  StateId q = a.initial();
  trace.visited.push_back(q);
  trace.emitted.push_back(a.output(q));
  for (SymbolId sym : input) {
    if (sym >= a.inputs().size()) throw DomainError("unknown symbol id " + std::to_string(sym));
    auto succ = a.successors(q, sym);
    if (succ.empty()) {
      trace.halted = true;
      break;
    }
    q = succ[chooser->pick(succ.size())];
    trace.visited.push_back(q);
    trace.emitted.push_back(a.output(q));
    ++trace.steps;
  }
  return trace;
}

inline RunTrace run(const Automaton& a, const std::vector<std::string>& input,
                    std::optional<Chooser> chooser = std::nullopt) {
  std::vector<SymbolId> ids;
  ids.reserve(input.size());
  for (const auto& s : input) ids.push_back(a.symbol_id(s));
  return run(a, std::span<const SymbolId>(ids), std::move(chooser));
}

/// n repetitions of the first input symbol (the elementary tick on unary machines).
inline std::vector<SymbolId> ticks(std::size_t n) { return std::vector<SymbolId>(n, 0); }

using CountMatrix = std::vector<std::vector<unsigned>>;

inline CountMatrix transition_matrix(const Automaton& a, SymbolId symbol) {
  if (symbol >= a.inputs().size()) throw DomainError("unknown symbol id " + std::to_string(symbol));
  CountMatrix m(a.size(), std::vector<unsigned>(a.size(), 0));
  for (StateId p = 0; p < a.size(); ++p)
    for (StateId q : a.successors(p, symbol)) m[p][q] += 1;
  return m;
}

inline CountMatrix transition_matrix(const Automaton& a, std::string_view symbol) {
  return transition_matrix(a, a.symbol_id(symbol));
}

namespace detail {
inline std::string dot_quote(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}
} // namespace detail

/// DOT digraph. One edge per (source, target) pair; parallel symbols are
/// merged into a comma-separated label. Signaling states carry their output.
inline std::string to_dot(const Automaton& a) {
  std::ostringstream out;
  out << "digraph " << detail::dot_quote(a.name()) << " {\n";
  out << "  rankdir=LR;\n";
  for (StateId q = 0; q < a.size(); ++q) {
    const auto& name = a.state_name(q);
    out << "  " << detail::dot_quote(name) << " [label=";
    if (a.output(q).empty()) {
      out << detail::dot_quote(name) << ", shape=circle";
    } else {
      out << detail::dot_quote(name + " / " + a.output(q)) << ", shape=doublecircle";
    }
    if (q == a.initial()) out << ", penwidth=2";
    out << "];\n";
  }
  for (StateId p = 0; p < a.size(); ++p) {
    std::map<StateId, std::vector<std::string>> targets;
    for (SymbolId s = 0; s < a.inputs().size(); ++s)
      for (StateId q : a.successors(p, s)) targets[q].push_back(a.inputs()[s]);
    for (const auto& [q, syms] : targets) {
      std::string label;
      for (const auto& s : syms) label += (label.empty() ? "" : ",") + s;
      out << "  " << detail::dot_quote(a.state_name(p)) << " -> " << detail::dot_quote(a.state_name(q))
          << " [label=" << detail::dot_quote(label) << "];\n";
    }
  }
  out << "}\n";
  return out.str();
}

} // namespace cma
