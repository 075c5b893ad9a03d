#pragma once

// Clustered Moore automata: machines whose states hold faster inner
// machines. Covers the timescale system, the multi-timescale scheduler,
// analytic cycle lengths of wheel clusters, bisimulation, and the
// classification of timescales into the C / L / Z / N / P families.

#include <algorithm>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "cma/analysis.hpp"
#include "cma/automaton.hpp"
#include "cma/menagerie.hpp"
#include "cma/scales.hpp"

namespace cma {

// ---------------------------------------------------------------------------
// Cluster structure

enum class TickPolicy { external, union_of_inner, current_state };

inline std::string to_string(TickPolicy p) {
  switch (p) {
  case TickPolicy::external: return "external";
  case TickPolicy::union_of_inner: return "union";
  case TickPolicy::current_state: return "current-state";
  }
  return "external";
}

inline TickPolicy parse_tick_policy(std::string_view s) {
  if (s == "external") return TickPolicy::external;
  if (s == "union") return TickPolicy::union_of_inner;
  if (s == "current" || s == "current-state") return TickPolicy::current_state;
  throw DomainError("unknown tick policy '" + std::string(s) + "'");
}

struct ClusterNode {
  Automaton machine;
  int scale = 0;
  /// Indexed by state of `machine`; nullptr marks a state with no inner machine.
  std::vector<std::shared_ptr<const ClusterNode>> inner;
  TickPolicy policy = TickPolicy::external;

  explicit ClusterNode(Automaton m, int s = 0, TickPolicy p = TickPolicy::external)
      : machine(std::move(m)), scale(s), inner(machine.size()), policy(p) {}

  const ClusterNode* inner_at(StateId q) const { return q < inner.size() ? inner[q].get() : nullptr; }

  bool has_inner() const {
    return std::any_of(inner.begin(), inner.end(), [](const auto& p) { return p != nullptr; });
  }

  ClusterNode& place(StateId q, ClusterNode child) {
    if (q >= machine.size()) throw DomainError("no state " + std::to_string(q) + " in " + machine.name());
    inner[q] = std::make_shared<const ClusterNode>(std::move(child));
    return *this;
  }

  ClusterNode& place(const std::string& state, ClusterNode child) {
    return place(machine.state_id(state), std::move(child));
  }

  std::size_t depth() const {
    std::size_t d = 0;
    for (const auto& c : inner)
      if (c) d = std::max(d, c->depth());
    return d + 1;
  }
};

/// Outer machine with inner machines placed in its states (in state order,
/// nullopt for empty states). Inner leaves sit one scale below the outer.
inline ClusterNode nest(Automaton outer, const std::vector<std::optional<Automaton>>& inner,
                        TickPolicy policy = TickPolicy::union_of_inner, int outer_scale = 1) {
  ClusterNode node(std::move(outer), outer_scale, policy);
  if (inner.size() > node.machine.size()) throw DomainError("more inner machines than outer states");
  for (std::size_t i = 0; i < inner.size(); ++i)
    if (inner[i]) node.place(i, ClusterNode(*inner[i], outer_scale - 1));
  return node;
}

inline std::vector<Violation> validate_cluster(const ClusterNode& node, const ScaleSystem& scales,
                                               const Constraints& c = {}, const std::string& path = "") {
  std::vector<Violation> report;
  const std::string here = path.empty() ? node.machine.name() : path;
  for (auto v : validate(node.machine, c)) {
    v.subject = here + ":" + v.subject;
    report.push_back(std::move(v));
  }
  if (!scales.in_bounds(node.scale))
    report.push_back({"scale-bound", here,
                      "scale " + std::to_string(node.scale) + " outside [" + std::to_string(scales.min_scale) + ", " +
                          std::to_string(scales.max_scale) + "]"});
  if (node.inner.size() != node.machine.size())
    report.push_back({"shape", here, "inner table does not match the state count"});
  if (node.policy != TickPolicy::external && !node.has_inner())
    report.push_back({"policy", here, to_string(node.policy) + " driving needs at least one inner machine"});
  if (node.depth() > static_cast<std::size_t>(scales.max_scale - scales.min_scale + 1))
    report.push_back({"depth", here, "nesting deeper than the number of timescales"});
  for (StateId q = 0; q < node.inner.size(); ++q) {
    const auto* child = node.inner_at(q);
    if (!child) continue;
    std::string child_path = here + "/" + (q < node.machine.size() ? node.machine.state_name(q) : std::to_string(q));
    if (child->scale >= node.scale)
      report.push_back({"scale-strict", child_path,
                        "inner scale " + std::to_string(child->scale) + " is not below outer scale " +
                            std::to_string(node.scale)});
    auto sub = validate_cluster(*child, scales, c, child_path);
    report.insert(report.end(), sub.begin(), sub.end());
  }
  return report;
}

// ---------------------------------------------------------------------------
// Scheduler

struct NodeState {
  StateId current = 0;
  bool halted = false;
  std::vector<NodeState> inner; // parallel to ClusterNode::inner

  bool operator==(const NodeState&) const = default;
};

struct ClusterState {
  NodeState root;
  std::uint64_t base_ticks = 0;
  std::uint64_t rng = 0; // splitmix64 state for nondeterministic choices

  bool operator==(const ClusterState&) const = default;
};

inline NodeState initial_node_state(const ClusterNode& node) {
  NodeState s;
  s.current = node.machine.initial();
  s.inner.resize(node.inner.size());
  for (StateId q = 0; q < node.inner.size(); ++q)
    if (const auto* c = node.inner_at(q)) s.inner[q] = initial_node_state(*c);
  return s;
}

inline ClusterState initial_state(const ClusterNode& node, std::uint64_t seed = 0) {
  return ClusterState{initial_node_state(node), 0, seed};
}

struct TickResult {
  ClusterState next;
  bool advanced = false;      // the outermost machine moved on this tick
  std::string emission;       // output of the state it entered
  bool halted = false;        // some component had no successor when driven
};

namespace detail {

inline std::uint64_t splitmix(std::uint64_t& s) {
  std::uint64_t z = (s += 0x9E3779B97F4A7C15ull);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

inline std::size_t pick(std::uint64_t& s, std::size_t n) {
  if (n <= 1) return 0;
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t x;
  do {
    x = splitmix(s);
  } while (x >= limit);
  return static_cast<std::size_t>(x % n);
}

struct Pulse {
  bool advanced = false;
  std::string output;
  bool halted = false;
};

/// Moves one node on the symbol matching `driver` (the tick for unary machines).
inline Pulse advance(const ClusterNode& node, NodeState& st, const std::string& driver, std::uint64_t& rng) {
  const auto& m = node.machine;
  std::optional<SymbolId> sym;
  if (m.is_unary()) sym = 0;
  else sym = m.find_symbol(driver);
  if (!sym) return {};
  auto succ = m.successors(st.current, *sym);
  if (succ.empty()) {
    st.halted = true;
    return {false, "", true};
  }
  st.halted = false;
  st.current = succ[pick(rng, succ.size())];
  return {true, m.output(st.current), false};
}

inline Pulse pulse(const ClusterNode& node, NodeState& st, std::uint64_t& rng) {
  switch (node.policy) {
  case TickPolicy::external:
    return advance(node, st, "", rng);
  case TickPolicy::union_of_inner: {
    bool halted = false;
    std::optional<std::string> driver;
    for (StateId q = 0; q < node.inner.size(); ++q) {
      const auto* child = node.inner_at(q);
      if (!child) continue;
      auto p = pulse(*child, st.inner[q], rng);
      halted = halted || p.halted;
      if (p.advanced && !p.output.empty() && !driver) driver = p.output;
    }
    if (!driver) return {false, "", halted};
    auto r = advance(node, st, *driver, rng);
    r.halted = r.halted || halted;
    return r;
  }
  case TickPolicy::current_state: {
    const auto* child = node.inner_at(st.current);
    if (!child) return {};
    auto p = pulse(*child, st.inner[st.current], rng);
    if (!p.advanced || p.output.empty()) return {false, "", p.halted};
    auto r = advance(node, st, p.output, rng);
    r.halted = r.halted || p.halted;
    return r;
  }
  }
  return {};
}

} // namespace detail

/// One elementary tick at the fastest driven scale, propagated upward.
/// Simultaneous inner emissions coalesce into a single outer tick; inner
/// machines keep their state across outer transitions.
inline TickResult tick(const ClusterState& state, const ClusterNode& node) {
  TickResult r;
  r.next = state;
  auto p = detail::pulse(node, r.next.root, r.next.rng);
  r.next.base_ticks += 1;
  r.advanced = p.advanced;
  r.emission = p.output;
  r.halted = p.halted;
  return r;
}

struct SimulationReport {
  OccupancyVector outer_occupancy; // share of base ticks spent in each outer state
  std::size_t outer_advances = 0;
  std::size_t halt_events = 0;
  ClusterState final_state;
};

inline SimulationReport simulate(const ClusterNode& node, std::size_t ticks, std::uint64_t seed = 0) {
  SimulationReport rep;
  auto st = initial_state(node, seed);
  std::vector<std::size_t> visits(node.machine.size(), 0);
  for (std::size_t t = 0; t < ticks; ++t) {
    auto r = tick(st, node);
    st = std::move(r.next);
    rep.outer_advances += r.advanced ? 1 : 0;
    rep.halt_events += r.halted ? 1 : 0;
    ++visits[st.root.current];
  }
  rep.outer_occupancy.labels = node.machine.states();
  rep.outer_occupancy.horizon = ticks;
  for (auto v : visits)
    rep.outer_occupancy.fractions.push_back(ticks ? static_cast<double>(v) / static_cast<double>(ticks) : 0.0);
  rep.final_state = std::move(st);
  return rep;
}

// ---------------------------------------------------------------------------
// Cycle lengths of wheel clusters

/// A deterministic inner wheel: its length and the ticks (mod length) on
/// which it emits a non-silent output.
struct WheelSignal {
  std::uint64_t length = 1;
  std::vector<std::uint64_t> residues;
};

struct CycleLength {
  BigInt value;
  std::size_t digits = 0;
  bool simulated = false; // confirmed by brute-force first return
};

namespace detail {

inline std::size_t decimal_digits(const BigInt& v) { return v.str().size(); }

/// Pure wheel: unary, deterministic, complete, one cycle through every
/// state starting at the initial state.
inline bool is_pure_wheel(const Automaton& a) {
  if (!a.is_unary() || !a.is_deterministic() || !a.is_complete()) return false;
  std::vector<bool> seen(a.size(), false);
  StateId q = a.initial();
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (seen[q]) return false;
    seen[q] = true;
    q = a.successors(q, 0)[0];
  }
  return q == a.initial();
}

inline WheelSignal wheel_signal(const Automaton& a) {
  WheelSignal w;
  w.length = a.size();
  StateId q = a.initial();
  for (std::uint64_t t = 1; t <= w.length; ++t) {
    q = a.successors(q, 0)[0];
    if (!a.output(q).empty()) w.residues.push_back(t % w.length);
  }
  std::sort(w.residues.begin(), w.residues.end());
  return w;
}

/// Generalized CRT: intersection of t = r1 (mod m1) and t = r2 (mod m2).
inline std::optional<std::pair<BigInt, BigInt>> crt(const BigInt& m1, const BigInt& r1, const BigInt& m2,
                                                    const BigInt& r2) {
  BigInt g = boost::multiprecision::gcd(m1, m2);
  BigInt diff = r2 - r1;
  if (diff % g != 0) return std::nullopt;
  BigInt l = m1 / g * m2;
  // Solve m1 * x = diff (mod m2) by brute stepping on the reduced modulus.
  BigInt m2g = m2 / g;
  BigInt target = ((diff / g) % m2g + m2g) % m2g;
  BigInt step = (m1 / g) % m2g;
  // modular inverse of step mod m2g via extended Euclid
  BigInt a = step, b = m2g, x0 = 1, x1 = 0;
  while (b != 0) {
    BigInt qt = a / b;
    BigInt t = a - qt * b;
    a = b;
    b = t;
    t = x0 - qt * x1;
    x0 = x1;
    x1 = t;
  }
  BigInt inv = m2g == 1 ? BigInt(0) : ((x0 % m2g) + m2g) % m2g;
  BigInt k = (target * inv) % m2g;
  BigInt r = ((r1 + m1 * k) % l + l) % l;
  return std::make_pair(l, r);
}

/// Number of t in [1, period] hit by some wheel's emission residues. period
/// must be a common multiple of every length.
inline BigInt count_hits(const std::vector<WheelSignal>& wheels, const BigInt& period, std::size_t budget) {
  std::vector<WheelSignal> active;
  for (const auto& w : wheels)
    if (!w.residues.empty()) active.push_back(w);
  if (active.empty()) return 0;

  bool coprime = true;
  for (std::size_t i = 0; i < active.size() && coprime; ++i)
    for (std::size_t j = i + 1; j < active.size() && coprime; ++j)
      coprime = std::gcd(active[i].length, active[j].length) == 1;
  if (coprime) {
    // By CRT the residues are independent: misses = prod (l - e) * period / prod l.
    BigInt misses = 1, prod = 1;
    for (const auto& w : active) {
      misses *= (w.length - w.residues.size());
      prod *= w.length;
    }
    return period - misses * (period / prod);
  }

  if (period <= 10'000'000) {
    std::uint64_t n = period.convert_to<std::uint64_t>();
    std::vector<std::vector<bool>> hit;
    for (const auto& w : active) {
      std::vector<bool> h(w.length, false);
      for (auto r : w.residues) h[r] = true;
      hit.push_back(std::move(h));
    }
    std::uint64_t count = 0;
    for (std::uint64_t t = 1; t <= n; ++t) {
      for (std::size_t i = 0; i < active.size(); ++i)
        if (hit[i][t % active[i].length]) {
          ++count;
          break;
        }
    }
    return count;
  }

  // Inclusion-exclusion over intersections of congruence classes.
  std::map<std::pair<BigInt, BigInt>, BigInt> terms{{{BigInt(1), BigInt(0)}, BigInt(1)}};
  for (const auto& w : active) {
    for (auto r : w.residues) {
      std::map<std::pair<BigInt, BigInt>, BigInt> next = terms;
      for (const auto& [cls, coef] : terms) {
        auto meet = crt(cls.first, cls.second, BigInt(w.length), BigInt(r));
        if (!meet) continue;
        next[*meet] -= coef;
        if (next.size() > budget) throw BudgetError("inclusion-exclusion over wheel residues exceeded its budget");
      }
      terms = std::move(next);
    }
  }
  BigInt misses = 0;
  for (const auto& [cls, coef] : terms) misses += coef * (period / cls.first);
  return period - misses;
}

} // namespace detail

/// Base ticks until an outer wheel of `outer_length` states, driven by the
/// union of the given inner wheels, returns to its initial configuration.
/// The inner configuration repeats every L = lcm(lengths); within one such
/// period the outer advances A times, so the first return is
/// L * outer / gcd(A, outer).
inline CycleLength wheel_cluster_cycle(std::uint64_t outer_length, const std::vector<WheelSignal>& wheels,
                                       std::size_t budget = 1'000'000) {
  if (outer_length == 0) throw DomainError("outer wheel needs at least one state");
  if (wheels.empty()) throw UnsupportedError("a wheel cluster needs at least one inner wheel");
  BigInt period = 1;
  for (const auto& w : wheels) {
    if (w.length == 0) throw DomainError("inner wheel of length 0");
    period = boost::multiprecision::lcm(period, BigInt(w.length));
  }
  BigInt advances = detail::count_hits(wheels, period, budget);
  BigInt g = boost::multiprecision::gcd(advances, BigInt(outer_length));
  CycleLength c;
  c.value = period * (BigInt(outer_length) / g);
  c.digits = detail::decimal_digits(c.value);
  return c;
}

inline CycleLength wheel_cluster_cycle(std::uint64_t outer_length, const std::vector<std::uint64_t>& lengths,
                                       std::size_t budget = 1'000'000) {
  std::vector<WheelSignal> wheels;
  for (auto l : lengths) wheels.push_back({l, {l - 1}});
  return wheel_cluster_cycle(outer_length, wheels, budget);
}

/// First return of the full configuration to its initial value, by
/// repeated ticking. nullopt when not found within `limit` ticks.
inline std::optional<std::uint64_t> first_return(const ClusterNode& node, std::uint64_t limit) {
  auto start = initial_state(node);
  auto st = start;
  for (std::uint64_t t = 1; t <= limit; ++t) {
    st = tick(st, node).next;
    if (st.root == start.root) return t;
  }
  return std::nullopt;
}

inline CycleLength cycle_length(const ClusterNode& node, std::uint64_t simulate_up_to = 1'000'000) {
  if (node.policy != TickPolicy::union_of_inner)
    throw UnsupportedError("cycle_length needs a union-driven cluster");
  if (!detail::is_pure_wheel(node.machine))
    throw UnsupportedError(node.machine.name() + " is not a pure wheel");
  std::vector<WheelSignal> wheels;
  for (StateId q = 0; q < node.inner.size(); ++q) {
    const auto* c = node.inner_at(q);
    if (!c) continue;
    if (c->has_inner() || c->policy != TickPolicy::external)
      throw UnsupportedError("cycle_length supports one level of inner wheels");
    if (!detail::is_pure_wheel(c->machine))
      throw UnsupportedError(c->machine.name() + " is not a pure wheel");
    wheels.push_back(detail::wheel_signal(c->machine));
  }
  auto result = wheel_cluster_cycle(node.machine.size(), wheels);
  if (result.value <= simulate_up_to) {
    auto simulated = first_return(node, simulate_up_to);
    if (!simulated || BigInt(*simulated) != result.value)
      throw std::logic_error("analytic cycle length disagrees with simulation");
    result.simulated = true;
  }
  return result;
}

inline std::vector<std::uint64_t> primes_below(std::uint64_t limit) {
  std::vector<bool> composite(limit, false);
  std::vector<std::uint64_t> primes;
  for (std::uint64_t i = 2; i < limit; ++i) {
    if (composite[i]) continue;
    primes.push_back(i);
    for (std::uint64_t j = i * i; j < limit; j += i) composite[j] = true;
  }
  return primes;
}

/// For every prime p below `limit`, the largest power of p below `limit`.
inline std::vector<std::uint64_t> prime_power_lengths(std::uint64_t limit = 10000) {
  std::vector<std::uint64_t> out;
  for (auto p : primes_below(limit)) {
    std::uint64_t q = p;
    while (q * p < limit) q *= p;
    out.push_back(q);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Bisimulation

struct BisimResult {
  bool equivalent = false;
  /// Coarsest partition of the disjoint union; entries are (machine 0/1, state).
  std::vector<std::vector<std::pair<int, std::string>>> partition;
};

namespace detail {

/// Coarsest output-respecting bisimulation on one machine; returns block ids.
inline std::vector<std::size_t> bisim_blocks(const Automaton& a) {
  const std::size_t n = a.size();
  std::vector<std::size_t> block(n);
  {
    std::map<std::string, std::size_t> ids;
    for (StateId q = 0; q < n; ++q) block[q] = ids.emplace(a.output(q), ids.size()).first->second;
  }
  std::size_t count = 0;
  for (;;) {
    std::map<std::pair<std::size_t, std::vector<std::vector<std::size_t>>>, std::size_t> sig_ids;
    std::vector<std::size_t> next(n);
    for (StateId q = 0; q < n; ++q) {
      std::vector<std::vector<std::size_t>> sig(a.inputs().size());
      for (SymbolId s = 0; s < a.inputs().size(); ++s) {
        for (StateId r : a.successors(q, s)) sig[s].push_back(block[r]);
        std::sort(sig[s].begin(), sig[s].end());
        sig[s].erase(std::unique(sig[s].begin(), sig[s].end()), sig[s].end());
      }
      next[q] = sig_ids.emplace(std::make_pair(block[q], std::move(sig)), sig_ids.size()).first->second;
    }
    std::size_t c = sig_ids.size();
    block.swap(next);
    if (c == count) break;
    count = c;
  }
  return block;
}

/// Disjoint union of two machines over the same alphabet (matched by
/// position for unary machines, by name otherwise).
inline Automaton disjoint_union(const Automaton& a, const Automaton& b) {
  if (a.inputs().size() != b.inputs().size())
    throw DomainError("bisimulation needs machines over the same input alphabet");
  std::vector<SymbolId> map_b(b.inputs().size());
  for (SymbolId s = 0; s < b.inputs().size(); ++s) {
    if (a.is_unary()) {
      map_b[s] = 0;
    } else {
      auto id = a.find_symbol(b.inputs()[s]);
      if (!id) throw DomainError("bisimulation needs machines over the same input alphabet");
      map_b[s] = *id;
    }
  }
  Automaton::Builder u("union");
  for (const auto& sym : a.inputs()) u.input(sym);
  for (StateId q = 0; q < a.size(); ++q) u.state("0:" + a.state_name(q), a.output(q));
  for (StateId q = 0; q < b.size(); ++q) u.state("1:" + b.state_name(q), b.output(q));
  for (StateId q = 0; q < a.size(); ++q)
    for (SymbolId s = 0; s < a.inputs().size(); ++s)
      for (StateId r : a.successors(q, s)) u.edge(q, s, r);
  for (StateId q = 0; q < b.size(); ++q)
    for (SymbolId s = 0; s < b.inputs().size(); ++s)
      for (StateId r : b.successors(q, s)) u.edge(a.size() + q, map_b[s], a.size() + r);
  u.initial(a.initial());
  return u.build();
}

} // namespace detail

inline BisimResult bisimilar(const Automaton& a, const Automaton& b) {
  auto u = detail::disjoint_union(a, b);
  auto block = detail::bisim_blocks(u);
  BisimResult r;
  r.equivalent = block[a.initial()] == block[a.size() + b.initial()];
  std::size_t nblocks = *std::max_element(block.begin(), block.end()) + 1;
  r.partition.resize(nblocks);
  for (StateId q = 0; q < u.size(); ++q) {
    int side = q < a.size() ? 0 : 1;
    const auto& name = side == 0 ? a.state_name(q) : b.state_name(q - a.size());
    r.partition[block[q]].push_back({side, name});
  }
  return r;
}

/// Quotient by the coarsest bisimulation, restricted to states reachable
/// from the initial state.
inline Automaton bisimulation_quotient(const Automaton& a) {
  auto block = detail::bisim_blocks(a);
  std::map<std::size_t, StateId> rep; // block -> representative state
  for (StateId q = 0; q < a.size(); ++q) rep.emplace(block[q], q);
  // reachable blocks from the initial block
  std::vector<std::size_t> order;
  std::map<std::size_t, StateId> new_id;
  std::deque<std::size_t> queue{block[a.initial()]};
  new_id[block[a.initial()]] = 0;
  while (!queue.empty()) {
    auto blk = queue.front();
    queue.pop_front();
    order.push_back(blk);
    StateId q = rep[blk];
    for (SymbolId s = 0; s < a.inputs().size(); ++s)
      for (StateId r : a.successors(q, s))
        if (new_id.emplace(block[r], new_id.size()).second) queue.push_back(block[r]);
  }
  Automaton::Builder b(a.name() + "/~");
  for (const auto& sym : a.inputs()) b.input(sym);
  for (auto blk : order) b.state(a.state_name(rep[blk]), a.output(rep[blk]));
  for (auto blk : order) {
    StateId q = rep[blk];
    for (SymbolId s = 0; s < a.inputs().size(); ++s)
      for (StateId r : a.successors(q, s)) b.edge(new_id[blk], s, new_id[block[r]]);
  }
  b.initial(0);
  return b.build();
}

// ---------------------------------------------------------------------------
// Temporal classification

enum class Family { Z, N, P, L, C };

inline char family_letter(Family f) { return "ZNPLC"[static_cast<int>(f)]; }

struct TemporalClass {
  Family family = Family::C;
  std::optional<BigInt> size; // present iff family is C or L
  bool effective = false;     // a finite C/L beyond the horizon, reported as Z/N
  bool absorbing = false;     // L whose last state loops on itself
  std::size_t lead_in = 0;    // transient states before a cycle

  std::string str() const {
    std::string s(1, family_letter(family));
    if (size) s += "(" + size->str() + ")";
    if (absorbing) s += "[absorbing]";
    if (lead_in) s += "[lead-in " + std::to_string(lead_in) + "]";
    if (effective) s += "[effective]";
    return s;
  }
};

/// Openness declarations for structures whose ends are semantic rather
/// than enumerable.
struct DeclaredEndpoints {
  bool open_start = false;
  bool open_end = false;
};

/// 2^64: a cycle this long is effectively indistinguishable from Z.
inline BigInt default_horizon() { return BigInt(1) << 64; }

namespace detail {

inline TemporalClass apply_horizon(TemporalClass c, const BigInt& horizon, const std::optional<DeclaredEndpoints>& decl) {
  if (c.family == Family::C && c.size && *c.size > horizon) {
    c.family = Family::Z;
    c.size.reset();
    c.effective = true;
    c.lead_in = 0;
  } else if (c.family == Family::L && c.size && *c.size > horizon) {
    c.family = Family::N;
    c.size.reset();
    c.effective = true;
  }
  if (decl && c.family == Family::L) {
    if (decl->open_start && decl->open_end) c.family = Family::Z;
    else if (decl->open_end) c.family = Family::N;
    else if (decl->open_start) c.family = Family::P;
    if (c.family != Family::L) {
      c.size.reset();
      c.absorbing = false;
    }
  }
  return c;
}

} // namespace detail

/// Classifies the timescale of a unary machine up to bisimulation: the
/// quotient's run is a chain that halts (L), returns to its start (C), ends
/// in a self-loop (absorbing L), or settles into a longer cycle (C with a
/// lead-in).
inline TemporalClass classify(const Automaton& a, const BigInt& horizon = default_horizon(),
                              std::optional<DeclaredEndpoints> declared = std::nullopt) {
  if (!a.is_unary()) throw UnsupportedError("classify needs a unary machine; " + a.name() + " is not");
  auto q = bisimulation_quotient(a);
  if (!q.is_deterministic())
    throw UnsupportedError(a.name() + " has a branching time structure even after bisimulation reduction");
  std::vector<std::size_t> seen(q.size(), SIZE_MAX);
  StateId cur = q.initial();
  std::size_t t = 0;
  TemporalClass c;
  for (;;) {
    if (seen[cur] != SIZE_MAX) {
      std::size_t start = seen[cur];
      std::size_t len = t - start;
      if (start == 0) {
        c.family = Family::C;
        c.size = BigInt(len);
      } else if (len == 1) {
        c.family = Family::L;
        c.size = BigInt(t);
        c.absorbing = true;
      } else {
        c.family = Family::C;
        c.size = BigInt(len);
        c.lead_in = start;
      }
      break;
    }
    seen[cur] = t++;
    auto succ = q.successors(cur, 0);
    if (succ.empty()) {
      c.family = Family::L;
      c.size = BigInt(t);
      break;
    }
    cur = succ[0];
  }
  return detail::apply_horizon(c, horizon, declared);
}

/// Canonical machine for a finite class: S_c for C(c), E_k for L(k), E_k
/// with a final self-loop for absorbing L(k), and a silent lead-in chain
/// before the wheel when there is one.
/// Outputs, when given, label the states in run order from the initial
/// state; without them only the last state of the chain or cycle emits.
inline Automaton canonical_representative(const TemporalClass& c, const std::vector<std::string>& outputs = {}) {
  auto relabel = [&](Automaton r) {
    if (outputs.empty()) return r;
    if (outputs.size() != r.size())
      throw DomainError("class " + c.str() + " has " + std::to_string(r.size()) + " states, got " +
                        std::to_string(outputs.size()) + " outputs");
    Automaton::Builder b(r);
    for (StateId q = 0; q < r.size(); ++q) b.output(q, outputs[q]);
    return b.build();
  };
  if (!c.size) throw UnsupportedError("class " + c.str() + " has no finite representative");
  if (*c.size > 10000) throw UnsupportedError("class " + c.str() + " is too large to materialize");
  auto k = c.size->convert_to<std::size_t>();
  if (c.family == Family::L) return relabel(c.absorbing ? chain(k, {k - 1}) : chain(k));
  if (c.lead_in == 0) return relabel(wheel(k));
  Automaton::Builder b("lead-in+S_" + std::to_string(k));
  auto e = b.input("e");
  for (std::size_t i = 0; i < c.lead_in; ++i) b.state("p" + std::to_string(i));
  for (std::size_t i = 0; i < k; ++i) b.state("q" + std::to_string(i), i + 1 == k ? "1" : "");
  for (std::size_t i = 0; i + 1 < c.lead_in; ++i) b.edge(i, e, i + 1);
  b.edge(c.lead_in - 1, e, c.lead_in);
  for (std::size_t i = 0; i < k; ++i) b.edge(c.lead_in + i, e, c.lead_in + (i + 1) % k);
  return relabel(b.build());
}

/// The representative of a unary machine's class, carrying the outputs the
/// machine emits along its run.
inline Automaton canonical_representative(const Automaton& a) {
  auto c = classify(a);
  if (!c.size) return canonical_representative(c);
  std::size_t n = c.size->convert_to<std::size_t>() + c.lead_in;
  std::vector<std::string> outputs;
  StateId q = a.initial();
  for (std::size_t i = 0; i < n; ++i) {
    outputs.push_back(a.output(q));
    auto next = a.successors(q, 0);
    if (next.empty()) break;
    q = next[0];
  }
  return canonical_representative(c, outputs);
}

/// The configuration graph of a deterministic cluster under base ticks, as
/// a unary machine whose outputs are the outermost machine's outputs.
inline Automaton unfold(const ClusterNode& node, std::size_t max_configs = 1'000'000) {
  std::function<bool(const ClusterNode&)> det = [&](const ClusterNode& n) {
    if (!n.machine.is_deterministic()) return false;
    for (const auto& c : n.inner)
      if (c && !det(*c)) return false;
    return true;
  };
  if (!det(node)) throw UnsupportedError("unfold needs deterministic components");

  std::function<void(const ClusterNode&, const NodeState&, std::string&)> describe =
      [&](const ClusterNode& n, const NodeState& s, std::string& out) {
        out += n.machine.state_name(s.current);
        if (!n.has_inner()) return;
        out += "{";
        bool first = true;
        for (StateId q = 0; q < n.inner.size(); ++q) {
          if (!n.inner_at(q)) continue;
          if (!first) out += "|";
          first = false;
          describe(*n.inner_at(q), s.inner[q], out);
        }
        out += "}";
      };

  // Halting is a transient event, not part of a configuration.
  std::function<void(NodeState&)> clear_halted = [&](NodeState& s) {
    s.halted = false;
    for (auto& c : s.inner) clear_halted(c);
  };

  std::map<std::string, StateId> ids;
  std::vector<NodeState> configs;
  std::vector<std::optional<StateId>> next;
  auto intern = [&](const NodeState& s) {
    std::string key;
    describe(node, s, key);
    auto [it, fresh] = ids.emplace(key, configs.size());
    if (fresh) {
      if (configs.size() >= max_configs) throw BudgetError("cluster unfolding exceeded " + std::to_string(max_configs) + " configurations");
      configs.push_back(s);
      next.emplace_back();
    }
    return std::make_pair(it->second, fresh);
  };

  auto start = initial_state(node);
  intern(start.root);
  for (std::size_t i = 0; i < configs.size(); ++i) {
    ClusterState st{configs[i], 0, 0};
    auto r = tick(st, node);
    clear_halted(r.next.root);
    if (r.next.root == configs[i]) {
      // Nothing can move: a dead configuration is a chain end unless the
      // outer machine is genuinely idling on a self-loop.
      if (!r.advanced) continue;
    }
    next[i] = intern(r.next.root).first;
  }

  Automaton::Builder b("unfold(" + node.machine.name() + ")");
  auto e = b.input("e");
  std::vector<std::string> names(configs.size());
  for (const auto& [key, id] : ids) names[id] = key;
  for (std::size_t i = 0; i < configs.size(); ++i) b.state(names[i], node.machine.output(configs[i].current));
  for (std::size_t i = 0; i < configs.size(); ++i)
    if (next[i]) b.edge(i, e, *next[i]);
  b.initial(0);
  return b.build();
}

/// Two machines embedded in the two states of an outer S_2 one scale up;
/// each runs only while the outer machine occupies its state.
inline ClusterNode product(const Automaton& a, const Automaton& b, const ScaleSystem& scales = ScaleSystem::modern(),
                           int inner_scale = 0) {
  if (!a.is_unary() || !b.is_unary()) throw DomainError("product needs unary machines");
  scales.require_in_bounds(inner_scale);
  scales.require_in_bounds(inner_scale + 1);
  ClusterNode node(Automaton::Builder(wheel(2)).name("S_2[" + a.name() + "x" + b.name() + "]").build(),
                   inner_scale + 1, TickPolicy::current_state);
  node.place(0, ClusterNode(a, inner_scale));
  node.place(1, ClusterNode(b, inner_scale));
  return node;
}

/// Clusters of pure wheels are classified from their analytic cycle
/// length; anything else by unfolding its configuration graph.
inline TemporalClass classify(const ClusterNode& node, const BigInt& horizon = default_horizon(),
                              std::optional<DeclaredEndpoints> declared = std::nullopt,
                              std::size_t max_configs = 1'000'000) {
  if (!node.has_inner()) return classify(node.machine, horizon, declared);
  bool wheels = node.policy == TickPolicy::union_of_inner && detail::is_pure_wheel(node.machine);
  for (const auto& c : node.inner)
    wheels = wheels && (!c || (!c->has_inner() && detail::is_pure_wheel(c->machine)));
  if (wheels) {
    std::vector<WheelSignal> sig;
    for (const auto& c : node.inner)
      if (c) sig.push_back(detail::wheel_signal(c->machine));
    TemporalClass tc;
    tc.family = Family::C;
    tc.size = wheel_cluster_cycle(node.machine.size(), sig).value;
    return detail::apply_horizon(tc, horizon, declared);
  }
  return classify(unfold(node, max_configs), horizon, declared);
}

} // namespace cma
