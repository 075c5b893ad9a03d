#pragma once

// Occupancy statistics: path-count fractions (nondeterministic reading),
// stationary distributions (uniform-choice probabilistic reading), exact
// cycle occupancy, Monte Carlo estimates, wheel approximation of finite
// distributions, and synchronizing-word search.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <numeric>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "cma/automaton.hpp"
#include "cma/menagerie.hpp"

namespace cma {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

struct OccupancyVector {
  std::vector<std::string> labels; // state names, or output signals
  std::vector<double> fractions;
  std::optional<std::vector<Rational>> exact;
  std::size_t horizon = 0;

  std::size_t size() const noexcept { return labels.size(); }

  double at(std::string_view label) const {
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (labels[i] == label) return fractions[i];
    throw DomainError("no occupancy entry for '" + std::string(label) + "'");
  }

  const Rational& exact_at(std::string_view label) const {
    if (!exact) throw DomainError("occupancy vector carries no exact values");
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (labels[i] == label) return (*exact)[i];
    throw DomainError("no occupancy entry for '" + std::string(label) + "'");
  }
};

/// Raised when a sampled run halts early; carries what was observed so far.
class OccupancyHaltError : public HaltError {
public:
  OccupancyHaltError(const std::string& what, OccupancyVector partial)
      : HaltError(what), partial_(std::move(partial)) {}
  const OccupancyVector& partial() const noexcept { return partial_; }

private:
  OccupancyVector partial_;
};

namespace detail {

inline void require_unary(const Automaton& a, const char* op) {
  if (!a.is_unary())
    throw DomainError(std::string(op) + " needs a unary machine; " + a.name() + " has " +
                      std::to_string(a.inputs().size()) + " input symbols");
}

inline OccupancyVector from_exact(const Automaton& a, std::vector<Rational> exact, std::size_t horizon) {
  OccupancyVector v;
  v.labels = a.states();
  v.horizon = horizon;
  for (const auto& r : exact) v.fractions.push_back(r.convert_to<double>());
  v.exact = std::move(exact);
  return v;
}

} // namespace detail

/// Number of length-n paths from the initial state ending in each state.
inline std::vector<BigInt> path_counts(const Automaton& a, std::size_t n) {
  detail::require_unary(a, "path_counts");
  std::vector<BigInt> cur(a.size(), 0), next(a.size(), 0);
  cur[a.initial()] = 1;
  for (std::size_t t = 0; t < n; ++t) {
    std::fill(next.begin(), next.end(), BigInt(0));
    for (StateId p = 0; p < a.size(); ++p) {
      if (cur[p] == 0) continue;
      for (StateId q : a.successors(p, 0)) next[q] += cur[p];
    }
    cur.swap(next);
  }
  return cur;
}

/// Above this horizon path counts are tracked as renormalized doubles.
inline constexpr std::size_t kExactPathHorizon = 200;

/// Fraction of length-n paths from q0 that end in each state.
inline OccupancyVector path_count_occupancy(const Automaton& a, std::size_t n) {
  detail::require_unary(a, "path_count_occupancy");
  if (n <= kExactPathHorizon) {
    auto counts = path_counts(a, n);
    BigInt total = std::accumulate(counts.begin(), counts.end(), BigInt(0));
    if (total == 0) throw HaltError(a.name() + " has no path of length " + std::to_string(n));
    std::vector<Rational> exact;
    for (const auto& c : counts) exact.emplace_back(c, total);
    return detail::from_exact(a, std::move(exact), n);
  }
  std::vector<double> cur(a.size(), 0.0), next(a.size(), 0.0);
  cur[a.initial()] = 1.0;
  for (std::size_t t = 0; t < n; ++t) {
    std::fill(next.begin(), next.end(), 0.0);
    for (StateId p = 0; p < a.size(); ++p)
      for (StateId q : a.successors(p, 0)) next[q] += cur[p];
    double total = std::accumulate(next.begin(), next.end(), 0.0);
    if (total == 0.0) throw HaltError(a.name() + " has no path of length " + std::to_string(n));
    for (auto& x : next) x /= total;
    cur.swap(next);
  }
  OccupancyVector v;
  v.labels = a.states();
  v.fractions = cur;
  v.horizon = n;
  return v;
}

/// Strongly connected components that no edge leaves.
inline std::vector<std::vector<StateId>> closed_classes(const Automaton& a) {
  const std::size_t n = a.size();
  std::vector<std::size_t> index(n, SIZE_MAX), low(n, 0), comp(n, SIZE_MAX);
  std::vector<bool> on_stack(n, false);
  std::vector<StateId> stack;
  std::vector<std::vector<StateId>> comps;
  std::size_t counter = 0;

  auto succ_of = [&](StateId q) {
    std::vector<StateId> out;
    for (SymbolId s = 0; s < a.inputs().size(); ++s)
      for (StateId r : a.successors(q, s)) out.push_back(r);
    return out;
  };

  // Iterative Tarjan.
  for (StateId root = 0; root < n; ++root) {
    if (index[root] != SIZE_MAX) continue;
    std::vector<std::pair<StateId, std::size_t>> work{{root, 0}};
    std::vector<std::vector<StateId>> succs{succ_of(root)};
    index[root] = low[root] = counter++;
    stack.push_back(root);
    on_stack[root] = true;
    while (!work.empty()) {
      auto& [v, i] = work.back();
      auto& sv = succs.back();
      if (i < sv.size()) {
        StateId w = sv[i++];
        if (index[w] == SIZE_MAX) {
          index[w] = low[w] = counter++;
          stack.push_back(w);
          on_stack[w] = true;
          work.push_back({w, 0});
          succs.push_back(succ_of(w));
        } else if (on_stack[w]) {
          low[v] = std::min(low[v], index[w]);
        }
        continue;
      }
      if (low[v] == index[v]) {
        std::vector<StateId> c;
        StateId w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = false;
          comp[w] = comps.size();
          c.push_back(w);
        } while (w != v);
        std::sort(c.begin(), c.end());
        comps.push_back(std::move(c));
      }
      StateId done = v;
      work.pop_back();
      succs.pop_back();
      if (!work.empty()) low[work.back().first] = std::min(low[work.back().first], low[done]);
    }
  }

  std::vector<std::vector<StateId>> closed;
  for (std::size_t ci = 0; ci < comps.size(); ++ci) {
    bool leaves = false;
    for (StateId q : comps[ci])
      for (StateId r : succ_of(q)) leaves = leaves || comp[r] != ci;
    if (!leaves) closed.push_back(comps[ci]);
  }
  return closed;
}

struct StationaryOptions {
  double tolerance = 1e-12;
  std::size_t max_iterations = 20'000'000;
};

/// Stationary distribution of the uniform-choice Markov chain. Power
/// iteration runs on the lazy chain (P + I) / 2, whose fixed point equals
/// the Cesaro limit of P, so periodic chains such as wheels converge too.
inline OccupancyVector stationary_distribution(const Automaton& a, const StationaryOptions& opt = {}) {
  detail::require_unary(a, "stationary_distribution");
  if (!a.is_complete()) throw DomainError(a.name() + " is partial; the stationary distribution needs a complete machine");
  auto closed = closed_classes(a);
  if (closed.size() > 1) {
    std::string msg = a.name() + " has " + std::to_string(closed.size()) + " closed classes:";
    for (const auto& c : closed) {
      msg += " {";
      for (std::size_t i = 0; i < c.size(); ++i) msg += (i ? "," : "") + a.state_name(c[i]);
      msg += "}";
    }
    throw AmbiguityError(msg);
  }
  const auto& cls = closed.front();
  OccupancyVector v;
  v.labels = a.states();
  v.fractions.assign(a.size(), 0.0);

  bool cycle = std::all_of(cls.begin(), cls.end(), [&](StateId q) { return a.out_degree(q) == 1; });
  if (cycle) {
    std::vector<Rational> exact(a.size(), Rational(0));
    for (StateId q : cls) exact[q] = Rational(1, static_cast<long long>(cls.size()));
    return detail::from_exact(a, std::move(exact), 0);
  }

  std::vector<double> pi(a.size(), 1.0 / static_cast<double>(a.size())), next(a.size());
  for (std::size_t it = 0; it < opt.max_iterations; ++it) {
    std::fill(next.begin(), next.end(), 0.0);
    for (StateId p = 0; p < a.size(); ++p) {
      auto succ = a.successors(p, 0);
      double share = pi[p] / static_cast<double>(succ.size());
      for (StateId q : succ) next[q] += share;
    }
    double residual = 0.0;
    for (StateId q = 0; q < a.size(); ++q) residual += std::abs(next[q] - pi[q]);
    if (residual < opt.tolerance) {
      double total = std::accumulate(next.begin(), next.end(), 0.0);
      for (StateId q = 0; q < a.size(); ++q) v.fractions[q] = next[q] / total;
      return v;
    }
    for (StateId q = 0; q < a.size(); ++q) pi[q] = 0.5 * (pi[q] + next[q]);
  }
  throw BudgetError(a.name() + ": power iteration did not reach residual " + std::to_string(opt.tolerance));
}

/// Exact long-run occupancy of a deterministic unary machine: the share of
/// each state on the cycle its run eventually enters.
inline OccupancyVector cycle_occupancy(const Automaton& a) {
  detail::require_unary(a, "cycle_occupancy");
  if (!a.is_deterministic()) throw DomainError(a.name() + " is nondeterministic; cycle occupancy needs a deterministic machine");
  std::vector<std::size_t> seen(a.size(), SIZE_MAX);
  StateId q = a.initial();
  std::size_t t = 0;
  while (seen[q] == SIZE_MAX) {
    seen[q] = t++;
    auto succ = a.successors(q, 0);
    if (succ.empty()) throw HaltError(a.name() + " halts; it has no cycle");
    q = succ[0];
  }
  std::vector<StateId> cyc;
  StateId start = q;
  do {
    cyc.push_back(q);
    q = a.successors(q, 0)[0];
  } while (q != start);
  std::vector<Rational> exact(a.size(), Rational(0));
  for (StateId c : cyc) exact[c] += Rational(1, static_cast<long long>(cyc.size()));
  return detail::from_exact(a, std::move(exact), cyc.size());
}

/// Aggregates a per-state vector by output signal (silent shown as "0"),
/// in order of first appearance.
inline OccupancyVector by_signal(const Automaton& a, const OccupancyVector& per_state) {
  OccupancyVector v;
  v.horizon = per_state.horizon;
  std::vector<Rational> exact;
  for (StateId q = 0; q < a.size(); ++q) {
    auto sig = display_output(a.output(q));
    auto it = std::find(v.labels.begin(), v.labels.end(), sig);
    std::size_t i = static_cast<std::size_t>(it - v.labels.begin());
    if (it == v.labels.end()) {
      v.labels.push_back(sig);
      v.fractions.push_back(0.0);
      exact.emplace_back(0);
    }
    v.fractions[i] += per_state.fractions[q];
    if (per_state.exact) exact[i] += (*per_state.exact)[q];
  }
  if (per_state.exact) v.exact = std::move(exact);
  return v;
}

/// Visit fractions of one seeded uniform-random run of `steps` ticks
/// (the initial state is not counted; each entered state is).
inline OccupancyVector monte_carlo_occupancy(const Automaton& a, std::size_t steps, std::uint64_t seed) {
  detail::require_unary(a, "monte_carlo_occupancy");
  if (steps == 0) throw DomainError("monte_carlo_occupancy needs at least one step");
  auto chooser = Chooser::seeded(seed);
  std::vector<std::size_t> visits(a.size(), 0);
  StateId q = a.initial();
  std::size_t done = 0;
  for (; done < steps; ++done) {
    auto succ = a.successors(q, 0);
    if (succ.empty()) break;
    q = succ[chooser.pick(succ.size())];
    ++visits[q];
  }
  OccupancyVector v;
  v.labels = a.states();
  v.horizon = done;
  for (auto c : visits) v.fractions.push_back(done ? static_cast<double>(c) / static_cast<double>(done) : 0.0);
  if (done < steps)
    throw OccupancyHaltError(a.name() + " halted after " + std::to_string(done) + " of " + std::to_string(steps) + " steps",
                             std::move(v));
  return v;
}

// ---------------------------------------------------------------------------
// Wheel approximation of finite distributions

struct FiniteDistribution {
  std::vector<std::string> outcomes;
  std::vector<double> probabilities;
};

struct WheelApproximation {
  Automaton wheel;
  std::vector<std::size_t> counts; // states per outcome
  std::size_t k = 0;
  double epsilon = 0.0; // achieved max deviation
};

namespace detail {

/// Largest-remainder rounding of p * k; ties go to the earlier outcome.
inline std::vector<std::size_t> apportion(const std::vector<double>& p, std::size_t k) {
  std::vector<std::size_t> n(p.size());
  std::vector<std::pair<double, std::size_t>> rem;
  std::size_t used = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    double exact = p[i] * static_cast<double>(k);
    double fl = std::floor(exact);
    n[i] = static_cast<std::size_t>(fl);
    used += n[i];
    rem.push_back({exact - fl, i});
  }
  std::stable_sort(rem.begin(), rem.end(), [](const auto& x, const auto& y) { return x.first > y.first; });
  for (std::size_t j = 0; used < k && j < rem.size(); ++j, ++used) ++n[rem[j].second];
  return n;
}

inline double max_deviation(const std::vector<double>& p, const std::vector<std::size_t>& n, std::size_t k) {
  double worst = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i)
    worst = std::max(worst, std::abs(static_cast<double>(n[i]) / static_cast<double>(k) - p[i]));
  return worst;
}

} // namespace detail

/// Smallest labeled wheel whose per-cycle signal occupancy is within epsilon
/// of the distribution, scanning k from the number of outcomes up to m.
inline WheelApproximation approximate_distribution(const FiniteDistribution& d, double epsilon,
                                                   const Constraints& c = {}) {
  if (!(epsilon > 0.0)) throw DomainError("epsilon must be positive");
  if (d.outcomes.empty() || d.outcomes.size() != d.probabilities.size())
    throw DomainError("distribution needs one probability per outcome");
  double sum = 0.0;
  for (double p : d.probabilities) {
    if (!(p >= 0.0)) throw DomainError("probabilities must be nonnegative");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw DomainError("probabilities must sum to 1");
  for (std::size_t i = 0; i < d.outcomes.size(); ++i) {
    if (d.outcomes[i].empty()) throw DomainError("outcome labels must be nonempty");
    for (std::size_t j = 0; j < i; ++j)
      if (d.outcomes[i] == d.outcomes[j]) throw DomainError("duplicate outcome '" + d.outcomes[i] + "'");
  }

  double best = std::numeric_limits<double>::infinity();
  for (std::size_t k = d.outcomes.size(); k <= c.max_states; ++k) {
    auto n = detail::apportion(d.probabilities, k);
    double dev = detail::max_deviation(d.probabilities, n, k);
    best = std::min(best, dev);
    if (dev > epsilon) continue;
    std::map<std::string, std::string> labels;
    std::size_t q = 0;
    for (std::size_t i = 0; i < n.size(); ++i)
      for (std::size_t j = 0; j < n[i]; ++j) labels[detail::wheel_state(q++)] = d.outcomes[i];
    auto w = annotate_outputs(wheel(k, {}, c), labels);
    return {Automaton::Builder(w).name("S_" + std::to_string(k) + "[approx]").build(), n, k, dev};
  }
  throw InfeasibleError("no wheel with at most " + std::to_string(c.max_states) + " states reaches epsilon " +
                            std::to_string(epsilon) + "; best achievable is " + std::to_string(best),
                        best);
}

// ---------------------------------------------------------------------------
// Synchronizing words

struct SyncOptions {
  std::size_t exact_state_limit = 20; // subset BFS up to this many states
  std::size_t budget = 1u << 24;      // explored subsets / pair-table entries
};

struct SyncResult {
  std::vector<std::string> word;
  StateId sink = 0;
  bool reaches_initial = false;
  bool shortest = false;
};

namespace detail {

inline void require_dfa(const Automaton& a, const char* op) {
  if (!a.is_deterministic() || !a.is_complete())
    throw DomainError(std::string(op) + " needs a deterministic complete machine; " + a.name() + " is not");
}

inline StateId apply_word(const Automaton& a, StateId q, const std::vector<SymbolId>& w) {
  for (auto s : w) q = a.successors(q, s)[0];
  return q;
}

inline SyncResult finish_sync(const Automaton& a, const std::vector<SymbolId>& w, bool shortest) {
  SyncResult r;
  for (auto s : w) r.word.push_back(a.inputs()[s]);
  r.sink = apply_word(a, 0, w);
  r.reaches_initial = r.sink == a.initial();
  r.shortest = shortest;
  return r;
}

} // namespace detail

/// Shortest synchronizing word by breadth-first search over state subsets
/// for small machines; otherwise a greedy pair-merging word (not
/// necessarily shortest, flagged). Returns nullopt if none exists.
inline std::optional<SyncResult> synchronizing_word(const Automaton& a, const SyncOptions& opt = {}) {
  detail::require_dfa(a, "synchronizing_word");
  const std::size_t n = a.size();
  const std::size_t syms = a.inputs().size();
  if (n == 1) return detail::finish_sync(a, {}, true);

  if (n <= opt.exact_state_limit && n < 32) {
    using Mask = std::uint32_t;
    const Mask full = n == 32 ? ~Mask{0} : ((Mask{1} << n) - 1);
    std::unordered_map<Mask, std::pair<Mask, SymbolId>> parent;
    std::deque<Mask> queue{full};
    parent.emplace(full, std::make_pair(full, SymbolId{0}));
    while (!queue.empty()) {
      Mask cur = queue.front();
      queue.pop_front();
      if ((cur & (cur - 1)) == 0) {
        std::vector<SymbolId> w;
        for (Mask m = cur; m != full; m = parent[m].first) w.push_back(parent[m].second);
        std::reverse(w.begin(), w.end());
        return detail::finish_sync(a, w, true);
      }
      for (SymbolId s = 0; s < syms; ++s) {
        Mask img = 0;
        for (StateId q = 0; q < n; ++q)
          if (cur & (Mask{1} << q)) img |= Mask{1} << a.successors(q, s)[0];
        if (parent.emplace(img, std::make_pair(cur, s)).second) {
          if (parent.size() > opt.budget) throw BudgetError("subset search exceeded its budget");
          queue.push_back(img);
        }
      }
    }
    return std::nullopt;
  }

  // Greedy: reverse BFS over unordered pairs from the diagonal gives, for
  // every pair, the first symbol of a shortest word merging it.
  if (n * n > opt.budget) throw BudgetError("pair table for " + std::to_string(n) + " states exceeds the budget");
  auto pid = [n](StateId p, StateId q) { return p < q ? p * n + q : q * n + p; };
  std::vector<std::vector<std::vector<StateId>>> inv(syms, std::vector<std::vector<StateId>>(n));
  for (StateId q = 0; q < n; ++q)
    for (SymbolId s = 0; s < syms; ++s) inv[s][a.successors(q, s)[0]].push_back(q);
  constexpr std::size_t kUnset = SIZE_MAX;
  std::vector<std::size_t> dist(n * n, kUnset);
  std::vector<SymbolId> first(n * n, 0);
  std::deque<std::pair<StateId, StateId>> queue;
  for (StateId q = 0; q < n; ++q) {
    dist[pid(q, q)] = 0;
    queue.push_back({q, q});
  }
  while (!queue.empty()) {
    auto [p, q] = queue.front();
    queue.pop_front();
    for (SymbolId s = 0; s < syms; ++s)
      for (StateId pp : inv[s][p])
        for (StateId qq : inv[s][q]) {
          if (pp == qq) continue;
          auto id = pid(pp, qq);
          if (dist[id] != kUnset) continue;
          dist[id] = dist[pid(p, q)] + 1;
          first[id] = s;
          queue.push_back({pp, qq});
        }
  }
  std::vector<StateId> current(n);
  std::iota(current.begin(), current.end(), StateId{0});
  std::vector<SymbolId> word;
  while (current.size() > 1) {
    std::size_t best = kUnset;
    std::pair<StateId, StateId> pick{0, 0};
    for (std::size_t i = 0; i < current.size(); ++i)
      for (std::size_t j = i + 1; j < current.size(); ++j) {
        auto d = dist[pid(current[i], current[j])];
        if (d < best) {
          best = d;
          pick = {current[i], current[j]};
        }
      }
    if (best == kUnset) return std::nullopt;
    std::vector<SymbolId> piece;
    auto [p, q] = pick;
    while (p != q) {
      auto s = first[pid(p, q)];
      piece.push_back(s);
      p = a.successors(p, s)[0];
      q = a.successors(q, s)[0];
    }
    for (auto& c : current) c = detail::apply_word(a, c, piece);
    std::sort(current.begin(), current.end());
    current.erase(std::unique(current.begin(), current.end()), current.end());
    word.insert(word.end(), piece.begin(), piece.end());
  }
  return detail::finish_sync(a, word, false);
}

} // namespace cma
