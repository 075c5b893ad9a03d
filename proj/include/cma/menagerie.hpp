#pragma once

// Constructors for the named machines: wheels, chains, the synapse, the wire,
// the Aktionsart shapes and the Exchange/Gravity schemas.

#include <cctype>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "cma/automaton.hpp"

namespace cma {

namespace detail {

inline std::string wheel_state(std::size_t i) { return "q" + std::to_string(i); }

inline void require_within(std::size_t k, const Constraints& c, const char* what) {
  if (k < 1) throw DomainError(std::string(what) + " size must be at least 1");
  if (k > c.max_states)
    throw DomainError(std::string(what) + " size " + std::to_string(k) + " exceeds the state limit " +
                      std::to_string(c.max_states));
}

inline Automaton checked(Automaton a, const Constraints& c) {
  auto report = validate(a, c);
  if (!report.empty()) {
    std::string msg = a.name() + " violates constraints:";
    for (const auto& v : report) msg += " [" + v.rule + " " + v.subject + ": " + v.detail + "]";
    throw DomainError(msg);
  }
  return a;
}

/// Splits a UTF-8 string into code points.
inline std::vector<std::string> utf8_chars(std::string_view s) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < s.size();) {
    auto c = static_cast<unsigned char>(s[i]);
    std::size_t len = c < 0x80 ? 1 : (c >> 5) == 0x6 ? 2 : (c >> 4) == 0xE ? 3 : (c >> 3) == 0x1E ? 4 : 0;
    if (len == 0 || i + len > s.size()) throw DomainError("invalid UTF-8 in '" + std::string(s) + "'");
    out.emplace_back(s.substr(i, len));
    i += len;
  }
  return out;
}

} // namespace detail

/// k-wheel on the unary tick alphabet {e}. States q0..q(k-1) with q0 initial
/// and q(k-1) the single signaling state emitting "1". `loops` lists state
/// indices that carry a self-loop.
inline Automaton wheel(std::size_t k, const std::vector<std::size_t>& loops = {},
                       const Constraints& c = {}) {
  detail::require_within(k, c, "wheel");
  std::string name = "S_" + std::to_string(k);
  if (!loops.empty()) name += "^" + std::to_string(loops.size());
  Automaton::Builder b(name);
  auto e = b.input("e");
  for (std::size_t i = 0; i < k; ++i) b.state(detail::wheel_state(i), i + 1 == k ? "1" : "");
  for (std::size_t i = 0; i < k; ++i) b.edge(i, e, (i + 1) % k);
  for (auto i : loops) {
    if (i >= k) throw DomainError("loop position " + std::to_string(i) + " outside wheel of size " + std::to_string(k));
    b.edge(i, e, i);
  }
  return detail::checked(b.build(), c);
}

/// The chain E_k: the k-wheel without the transition that closes the cycle.
inline Automaton chain(std::size_t k, const std::vector<std::size_t>& loops = {},
                       const Constraints& c = {}) {
  detail::require_within(k, c, "chain");
  Automaton::Builder b("E_" + std::to_string(k) + (loops.empty() ? "" : "^" + std::to_string(loops.size())));
  auto e = b.input("e");
  for (std::size_t i = 0; i < k; ++i) b.state(detail::wheel_state(i), i + 1 == k ? "1" : "");
  for (std::size_t i = 0; i + 1 < k; ++i) b.edge(i, e, i + 1);
  for (auto i : loops) {
    if (i >= k) throw DomainError("loop position " + std::to_string(i) + " outside chain of size " + std::to_string(k));
    b.edge(i, e, i);
  }
  return detail::checked(b.build(), c);
}

struct SynapseOptions {
  bool loop_rest = false;
  bool loop_aroused = false;
  bool loop_blocked = false;
  /// Adds a tick-driven r -> a edge. Off by default; no probability is implied.
  bool spontaneous_arousal = false;
};

/// Abstract synapse R over inputs {1, e}. Impulses ("1") drive r -> a -> t;
/// the tick e drives t -> b -> r and takes the configured self-loops.
/// Entering t emits "1". The transmitting state never carries a loop.
inline Automaton synapse(const SynapseOptions& opt = {}) {
  Automaton::Builder b("R");
  auto imp = b.input("1");
  auto e = b.input("e");
  auto r = b.state("r");
  auto a = b.state("a");
  auto t = b.state("t", "1");
  auto bl = b.state("b");
  b.edge(r, imp, a).edge(a, imp, t).edge(t, e, bl).edge(bl, e, r);
  if (opt.loop_rest) b.edge(r, e, r);
  if (opt.loop_aroused) b.edge(a, e, a);
  if (opt.loop_blocked) b.edge(bl, e, bl);
  if (opt.spontaneous_arousal) b.edge(r, e, a);
  b.initial(r);
  return b.build();
}

/// Wire D: a rest state plus one state per symbol; on input s from any state
/// go to the state named s, which emits s.
inline Automaton wire(const std::vector<std::string>& symbols, const Constraints& c = {}) {
  if (symbols.empty()) throw DomainError("wire needs at least one symbol");
  if (symbols.size() + 1 > c.max_states) throw DomainError("wire alphabet exceeds the state limit");
  Automaton::Builder b("D");
  b.state("rest");
  for (const auto& s : symbols) {
    if (s.empty()) throw DomainError("wire symbols must be nonempty");
    if (s == "rest") throw DomainError("'rest' is reserved for the wire's rest state");
    b.input(s);
    b.state(s, s);
  }
  const auto& a = b.peek();
  for (StateId from = 0; from < a.size(); ++from)
    for (const auto& s : symbols) b.edge(a.state_name(from), s, s);
  return detail::checked(b.build(), c);
}

enum class Aktionsart { state, semelfactive, achievement, accomplishment, activity };

inline Aktionsart parse_aktionsart(std::string_view s) {
  if (s == "state") return Aktionsart::state;
  if (s == "semelfactive") return Aktionsart::semelfactive;
  if (s == "achievement") return Aktionsart::achievement;
  if (s == "accomplishment") return Aktionsart::accomplishment;
  if (s == "activity") return Aktionsart::activity;
  throw DomainError("unknown Aktionsart class '" + std::string(s) + "'");
}

inline Automaton aktionsart(Aktionsart cls) {
  switch (cls) {
  case Aktionsart::state: return Automaton::Builder(wheel(1)).name("akt:state").build();
  case Aktionsart::semelfactive: return Automaton::Builder(chain(1)).name("akt:semelfactive").build();
  case Aktionsart::achievement: return Automaton::Builder(chain(2)).name("akt:achievement").build();
  case Aktionsart::accomplishment: return Automaton::Builder(chain(2, {0})).name("akt:accomplishment").build();
  case Aktionsart::activity: return Automaton::Builder(chain(2, {0, 1})).name("akt:activity").build();
  }
  throw DomainError("unknown Aktionsart class");
}

enum class Schema { exchange, gravity };

inline Schema parse_schema(std::string_view s) {
  if (s == "exchange") return Schema::exchange;
  if (s == "gravity") return Schema::gravity;
  throw DomainError("unknown schema '" + std::string(s) + "'");
}

/// Schema machines. Possession/support fluents are attached as annotations;
/// a fluent absent from a state's annotations is unspecified there.
inline Automaton schema(Schema which) {
  if (which == Schema::exchange) {
    Automaton::Builder b("Exchange");
    auto e = b.input("e");
    auto before = b.state("b");
    auto mid = b.state("mid");
    auto after = b.state("a", "1");
    b.edge(before, e, mid).edge(mid, e, after);
    b.annotate(before, "has(seller,goods)", true).annotate(before, "has(buyer,money)", true);
    b.annotate(before, "has(seller,money)", false).annotate(before, "has(buyer,goods)", false);
    b.annotate(after, "has(seller,money)", true).annotate(after, "has(buyer,goods)", true);
    b.annotate(after, "has(seller,goods)", false).annotate(after, "has(buyer,money)", false);
    return b.build();
  }
  // Gravity: the resting state is both start and end of the cycle.
  Automaton::Builder b("Gravity");
  auto e = b.input("e");
  auto rest = b.state("rest");
  auto falling = b.state("falling", "1");
  b.edge(rest, e, falling).edge(falling, e, rest);
  b.annotate(rest, "supported", true).annotate(rest, "falling", false);
  b.annotate(falling, "supported", false).annotate(falling, "falling", true);
  return b.build();
}

/// Returns a copy with the given states' outputs replaced.
inline Automaton annotate_outputs(const Automaton& a, const std::map<std::string, std::string>& labels) {
  Automaton::Builder b(a);
  for (const auto& [state, out] : labels) b.output(a.state_id(state), out);
  return b.build();
}

// ---------------------------------------------------------------------------
// Compact textual specs: wheel:4, wheel:2,loops=a, chain:3, synapse:rab,
// wire:01, akt:activity, schema:exchange.

struct MachineSpec {
  std::string kind;
  std::string arg;                           // text after "kind:" up to the first comma
  std::map<std::string, std::string> params; // key=value (or bare flag -> "")
};

inline const std::vector<std::string>& spec_kinds() {
  static const std::vector<std::string> kinds{"wheel", "chain", "synapse", "wire", "akt", "aktionsart", "schema"};
  return kinds;
}

inline bool looks_like_spec(std::string_view text) {
  auto colon = text.find(':');
  auto head = std::string(text.substr(0, colon));
  for (const auto& k : spec_kinds())
    if (head == k) return true;
  return false;
}

inline MachineSpec parse_spec(std::string_view text) {
  MachineSpec spec;
  auto colon = text.find(':');
  spec.kind = std::string(text.substr(0, colon));
  if (!looks_like_spec(text)) throw DomainError("unknown machine kind '" + spec.kind + "'");
  if (colon == std::string_view::npos) return spec;
  std::string rest(text.substr(colon + 1));
  std::vector<std::string> parts;
  std::string cur;
  for (char ch : rest) {
    if (ch == ',') {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  parts.push_back(cur);
  spec.arg = parts.front();
  for (std::size_t i = 1; i < parts.size(); ++i) {
    auto eq = parts[i].find('=');
    if (eq == std::string::npos) spec.params[parts[i]] = "";
    else spec.params[parts[i].substr(0, eq)] = parts[i].substr(eq + 1);
  }
  return spec;
}

namespace detail {

inline std::size_t parse_count(const std::string& s, const char* what) {
  if (s.empty() || !std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); }))
    throw DomainError(std::string(what) + " needs a positive integer, got '" + s + "'");
  if (s.size() > 9) throw DomainError(std::string(what) + " value '" + s + "' is too large");
  return static_cast<std::size_t>(std::stoul(s));
}

/// Loop positions: letters (a = q0, b = q1, ...), "q<n>" tokens joined by
/// '+', or "all".
inline std::vector<std::size_t> parse_loops(const std::string& s, std::size_t k) {
  std::vector<std::size_t> out;
  if (s == "all") {
    for (std::size_t i = 0; i < k; ++i) out.push_back(i);
    return out;
  }
  if (s.find('q') != std::string::npos) {
    std::string tok;
    std::istringstream in(s);
    while (std::getline(in, tok, '+')) {
      if (tok.size() < 2 || tok[0] != 'q') throw DomainError("bad loop position '" + tok + "'");
      out.push_back(parse_count(tok.substr(1), "loop position"));
    }
    return out;
  }
  for (char ch : s) {
    if (ch < 'a' || ch > 'z') throw DomainError(std::string("bad loop letter '") + ch + "'");
    out.push_back(static_cast<std::size_t>(ch - 'a'));
  }
  return out;
}

inline void reject_unknown(const MachineSpec& spec, std::initializer_list<const char*> allowed) {
  for (const auto& [key, _] : spec.params) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw DomainError("unknown parameter '" + key + "' for " + spec.kind);
  }
}

} // namespace detail

inline Automaton build(const MachineSpec& spec, const Constraints& c = {}) {
  if (spec.kind == "wheel" || spec.kind == "chain") {
    detail::reject_unknown(spec, {"loops"});
    auto k = detail::parse_count(spec.arg, spec.kind.c_str());
    std::vector<std::size_t> loops;
    if (auto it = spec.params.find("loops"); it != spec.params.end()) loops = detail::parse_loops(it->second, k);
    return spec.kind == "wheel" ? wheel(k, loops, c) : chain(k, loops, c);
  }
  if (spec.kind == "synapse") {
    detail::reject_unknown(spec, {"spont"});
    SynapseOptions opt;
    for (char ch : spec.arg) {
      if (ch == 'r') opt.loop_rest = true;
      else if (ch == 'a') opt.loop_aroused = true;
      else if (ch == 'b') opt.loop_blocked = true;
      else if (ch == 't') throw DomainError("the transmitting state t cannot carry a self-loop");
      else throw DomainError(std::string("unknown synapse state '") + ch + "'");
    }
    opt.spontaneous_arousal = spec.params.count("spont") > 0;
    return detail::checked(synapse(opt), c);
  }
  if (spec.kind == "wire") {
    detail::reject_unknown(spec, {});
    std::vector<std::string> symbols;
    if (spec.arg.find('+') != std::string::npos) {
      std::string tok;
      std::istringstream in(spec.arg);
      while (std::getline(in, tok, '+')) symbols.push_back(tok);
    } else {
      symbols = detail::utf8_chars(spec.arg);
    }
    return wire(symbols, c);
  }
  if (spec.kind == "akt" || spec.kind == "aktionsart") {
    detail::reject_unknown(spec, {});
    return detail::checked(aktionsart(parse_aktionsart(spec.arg)), c);
  }
  if (spec.kind == "schema") {
    detail::reject_unknown(spec, {});
    return detail::checked(schema(parse_schema(spec.arg)), c);
  }
  throw DomainError("unknown machine kind '" + spec.kind + "'");
}

inline Automaton build(std::string_view text, const Constraints& c = {}) { return build(parse_spec(text), c); }

} // namespace cma
