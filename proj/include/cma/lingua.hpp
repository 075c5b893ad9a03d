#pragma once

// Tense-to-scale mapping, spreading activation over threshold-2 synapses,
// and a chart-based island parser whose patterns are chain automata.

#include <algorithm>
#include <cctype>
#include <deque>
#include <functional>
#include <iterator>
#include <numeric>
#include <tuple>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "cma/automaton.hpp"
#include "cma/fluents.hpp"
#include "cma/menagerie.hpp"
#include "cma/scales.hpp"

namespace cma {

// ---------------------------------------------------------------------------
// Tense

struct TenseMap {
  std::string name;
  /// label -> (scale, sign of the instant index)
  std::map<std::string, std::pair<int, int>> entries;

  static TenseMap tamil_past() {
    return {"tamil-past", {{"immediate", {0, -1}}, {"recent", {1, -1}}, {"remote", {2, -1}}, {"historical", {4, -1}}}};
  }

  static TenseMap future() {
    return {"future", {{"immediate", {0, 1}}, {"near", {1, 1}}, {"distant", {2, 1}}, {"hypothetical", {4, 1}}}};
  }

  std::vector<std::string> check(const ScaleSystem& s) const {
    std::vector<std::string> out;
    for (const auto& [label, e] : entries)
      if (!s.in_bounds(e.first)) out.push_back(label + " maps to scale " + std::to_string(e.first) + " out of bounds");
    return out;
  }
};

/// The instant a tense label points to, k units away from now.
inline TimePoint tense_locate(const std::string& label, const TenseMap& map, std::int64_t k = 1) {
  auto it = map.entries.find(label);
  if (it == map.entries.end()) throw DomainError("tense '" + label + "' is not in the " + map.name + " map");
  if (k < 1) throw DomainError("tense distance must be at least 1");
  return {it->second.first, it->second.second * k};
}

// ---------------------------------------------------------------------------
// Spreading activation

// Each node is a synapse machine with persistent rest and aroused states:
// impulses ("1") move r -> a -> t, the tick ("e") moves t -> b -> r.
class ActivationNetwork {
public:
  ActivationNetwork() : machine_(synapse(SynapseOptions{true, true, false, false})) {}

  const Automaton& machine() const noexcept { return machine_; }

  void add_node(const std::string& name, const std::string& state = "r") {
    if (name.empty()) throw DomainError("activation nodes need a name");
    nodes_[name] = machine_.state_id(state);
  }

  bool has_node(const std::string& name) const { return nodes_.count(name) != 0; }

  void add_edge(const std::string& from, const std::string& to) {
    if (!has_node(from)) add_node(from);
    if (!has_node(to)) add_node(to);
    edges_.insert({from, to});
  }

  const std::set<std::pair<std::string, std::string>>& edges() const noexcept { return edges_; }

  std::string state(const std::string& name) const { return machine_.state_name(node(name)); }

  std::map<std::string, std::string> states() const {
    std::map<std::string, std::string> out;
    for (const auto& [n, q] : nodes_) out[n] = machine_.state_name(q);
    return out;
  }

  /// One impulse; refractory nodes (t, b) ignore it.
  void inject(const std::string& name) { nodes_[name] = impulse(node(name)); }

  /// Nodes at t fire along their outgoing edges and move to b, nodes at b
  /// recover to r. All impulses are computed from the configuration before
  /// the step. Returns the nodes that fired.
  std::vector<std::string> step() {
    const auto snapshot = nodes_;
    const auto t = machine_.state_id("t");
    const auto b = machine_.state_id("b");
    const auto tick = machine_.symbol_id("e");
    std::vector<std::string> fired;
    std::map<std::string, int> incoming;
    for (const auto& [n, q] : snapshot) {
      if (q != t) continue;
      fired.push_back(n);
      for (auto it = edges_.lower_bound({n, ""}); it != edges_.end() && it->first == n; ++it) ++incoming[it->second];
    }
    for (auto& [n, q] : nodes_) {
      const StateId before = snapshot.at(n);
      if (before == t || before == b) {
        q = machine_.successors(before, tick)[0];
        continue;
      }
      for (int i = 0; i < incoming[n]; ++i) q = impulse(q);
    }
    return fired;
  }

  bool operator==(const ActivationNetwork& o) const { return nodes_ == o.nodes_ && edges_ == o.edges_; }

private:
  StateId node(const std::string& name) const {
    auto it = nodes_.find(name);
    if (it == nodes_.end()) throw DomainError("unknown activation node '" + name + "'");
    return it->second;
  }

  StateId impulse(StateId q) const {
    auto succ = machine_.successors(q, machine_.symbol_id("1"));
    return succ.empty() ? q : succ[0];
  }

  Automaton machine_;
  std::map<std::string, StateId> nodes_;
  std::set<std::pair<std::string, std::string>> edges_;
};

using Fact = std::vector<std::string>; // relation followed by its arguments

/// Turns every fact of relation `relation` into an edge; "$1", "$2", ...
/// in the templates stand for the fact's arguments.
struct LinkRule {
  std::string relation;
  std::string source;
  std::string target;
};

inline std::string instantiate(const std::string& tmpl, const Fact& fact) {
  std::string out;
  for (std::size_t i = 0; i < tmpl.size(); ++i) {
    if (tmpl[i] == '$' && i + 1 < tmpl.size() && std::isdigit(static_cast<unsigned char>(tmpl[i + 1]))) {
      std::size_t k = static_cast<std::size_t>(tmpl[i + 1] - '0');
      if (k == 0 || k >= fact.size()) throw DomainError("rule placeholder $" + std::to_string(k) + " has no argument");
      out += fact[k];
      ++i;
    } else {
      out += tmpl[i];
    }
  }
  return out;
}

inline void materialize(ActivationNetwork& net, const std::vector<Fact>& facts, const std::vector<LinkRule>& rules) {
  for (const auto& f : facts) {
    if (f.empty()) throw DomainError("empty fact");
    for (const auto& r : rules)
      if (r.relation == f[0]) net.add_edge(instantiate(r.source, f), instantiate(r.target, f));
  }
}

/// parentOf(x, y): y activates x's grief; knows(x, die(y)): the death does.
inline std::vector<LinkRule> parental_grief_law() {
  return {{"parentOf", "$2", "grief($1)"}, {"knows", "$2", "grief($1)"}};
}

/// Parses {"nodes": {name: state}, "edges": [[a, b]], "facts": [[rel, args...]],
/// "rules": [{"relation", "source", "target"}], "law": "parental-grief"}.
inline ActivationNetwork network_from_json(const nlohmann::json& j) {
  ActivationNetwork net;
  try {
    if (j.contains("nodes"))
      for (const auto& [name, st] : j.at("nodes").items()) net.add_node(name, st.get<std::string>());
    if (j.contains("edges"))
      for (const auto& e : j.at("edges")) net.add_edge(e.at(0).get<std::string>(), e.at(1).get<std::string>());
    std::vector<LinkRule> rules;
    if (j.contains("law")) {
      if (j.at("law") != "parental-grief") throw DomainError("unknown law " + j.at("law").dump());
      rules = parental_grief_law();
    }
    if (j.contains("rules"))
      for (const auto& r : j.at("rules"))
        rules.push_back({r.at("relation").get<std::string>(), r.at("source").get<std::string>(),
                         r.at("target").get<std::string>()});
    std::vector<Fact> facts;
    if (j.contains("facts"))
      for (const auto& f : j.at("facts")) facts.push_back(f.get<Fact>());
    materialize(net, facts, rules);
  } catch (const nlohmann::json::exception& e) {
    throw DomainError(std::string("malformed activation network: ") + e.what());
  }
  return net;
}

/// x's child y dies. Both the death and y are already aroused; x knows of
/// the death unless `knows` is false.
inline ActivationNetwork grief_demo(bool knows = true) {
  nlohmann::json j = {{"nodes", {{"die(y)", "a"}, {"y", "a"}, {"grief(x)", "r"}}},
                      {"law", "parental-grief"},
                      {"facts", nlohmann::json::array({{"parentOf", "x", "y"}})}};
  if (knows) j["facts"].push_back({"knows", "x", "die(y)"});
  return network_from_json(j);
}

struct ActivationStep {
  std::size_t step = 0;
  std::vector<std::string> fired;
  std::map<std::string, std::string> states;
};

inline std::vector<ActivationStep> activate(ActivationNetwork& net, const std::vector<std::string>& inject,
                                            std::size_t steps) {
  for (const auto& n : inject) net.inject(n);
  std::vector<ActivationStep> trace;
  for (std::size_t s = 1; s <= steps; ++s) {
    auto fired = net.step();
    trace.push_back({s, std::move(fired), net.states()});
  }
  return trace;
}

// ---------------------------------------------------------------------------
// Island parsing

struct LexEntry {
  std::string category;
  std::vector<std::string> senses; // empty: the lemma itself
};

/// A pattern is a chain automaton over category signals; its last state
/// emits the result category.
struct Pattern {
  std::vector<std::string> sequence;
  std::string result;
  Automaton chain;

  Pattern(std::vector<std::string> seq, std::string res)
      : sequence(std::move(seq)), result(std::move(res)), chain(make_chain(sequence, result)) {}

  std::string name() const {
    std::string s;
    for (const auto& c : sequence) s += (s.empty() ? "" : ".") + c;
    return s + "->" + result;
  }

private:
  static Automaton make_chain(const std::vector<std::string>& seq, const std::string& result) {
    if (seq.empty() || seq.size() > 3) throw DomainError("patterns consume between 1 and 3 categories");
    if (result.empty()) throw DomainError("patterns need a result category");
    Automaton::Builder b("E_" + std::to_string(seq.size() + 1));
    for (const auto& c : seq) b.input(c);
    for (std::size_t i = 0; i <= seq.size(); ++i) b.state("q" + std::to_string(i), i == seq.size() ? result : "");
    for (std::size_t i = 0; i < seq.size(); ++i) b.edge(i, b.peek().symbol_id(seq[i]), i + 1);
    return b.build();
  }
};

struct ContextRule {
  std::string property;
  std::string lemma;
  std::set<std::string> senses;
};

struct Grammar {
  std::map<std::string, std::vector<LexEntry>> lexicon;
  std::vector<Pattern> patterns;
  std::map<std::string, std::pair<std::string, std::string>> morphology; // form -> (lemma, features)
  std::vector<ContextRule> context_rules;

  std::pair<std::string, std::string> analyze(const std::string& word) const {
    auto it = morphology.find(word);
    if (it != morphology.end()) return it->second;
    return {word, ""};
  }
};

inline Grammar grammar_from_json(const nlohmann::json& j) {
  Grammar g;
  try {
    for (const auto& [word, entries] : j.at("lexicon").items())
      for (const auto& e : entries)
        g.lexicon[word].push_back({e.at("cat").get<std::string>(),
                                   e.value("senses", std::vector<std::string>{})});
    for (const auto& p : j.at("patterns"))
      g.patterns.emplace_back(p.at("sequence").get<std::vector<std::string>>(), p.at("result").get<std::string>());
    if (j.contains("morphology"))
      for (const auto& [form, a] : j.at("morphology").items())
        g.morphology[form] = {a.at(0).get<std::string>(), a.at(1).get<std::string>()};
    if (j.contains("context_rules"))
      for (const auto& r : j.at("context_rules"))
        g.context_rules.push_back({r.at("property").get<std::string>(), r.at("lemma").get<std::string>(),
                                   r.at("senses").get<std::set<std::string>>()});
  } catch (const nlohmann::json::exception& e) {
    throw DomainError(std::string("malformed grammar: ") + e.what());
  }
  return g;
}

inline const char* demo_grammar_json() {
  return R"({
  "lexicon": {
    "Eleanor": [{"cat": "NP"}],
    "break": [{"cat": "Vt"}, {"cat": "N", "senses": ["intermission"]}],
    "the": [{"cat": "Art"}],
    "record": [{"cat": "N", "senses": ["record1", "record2", "record3"]}, {"cat": "Vt"}, {"cat": "A"}]
  },
  "patterns": [
    {"sequence": ["Art", "N"], "result": "NP"},
    {"sequence": ["Vt", "NP"], "result": "VP"},
    {"sequence": ["NP", "VP"], "result": "S"}
  ],
  "morphology": {"broke": ["break", "PAST"]},
  "context_rules": [
    {"property": "athlete", "lemma": "record", "senses": ["record3"]},
    {"property": "hacker", "lemma": "record", "senses": ["record2"]},
    {"property": "clumsy", "lemma": "record", "senses": ["record1"]}
  ]
})";
}

inline Grammar demo_grammar() { return grammar_from_json(nlohmann::json::parse(demo_grammar_json())); }

struct ParseTree {
  std::string category;
  std::size_t start = 0, end = 0;
  std::string word;     // leaves only
  std::string lemma;    // leaves only
  std::string features; // leaves only
  std::set<std::string> senses;
  std::vector<ParseTree> children;

  bool leaf() const noexcept { return children.empty(); }

  /// (S (NP Eleanor) (VP (Vt break.PAST) ...)); ambiguous senses in braces.
  std::string bracketed() const {
    if (leaf()) {
      std::string s = "(" + category + " " + lemma + (features.empty() ? "" : "." + features);
      if (senses.size() > 1 || (senses.size() == 1 && *senses.begin() != lemma)) {
        s += " {";
        bool first = true;
        for (const auto& x : senses) {
          s += (first ? "" : ",") + x;
          first = false;
        }
        s += "}";
      }
      return s + ")";
    }
    std::string s = "(" + category;
    for (const auto& c : children) s += " " + c.bracketed();
    return s + ")";
  }

  std::vector<std::string> words() const {
    if (leaf()) return {word};
    std::vector<std::string> out;
    for (const auto& c : children) {
      auto w = c.words();
      out.insert(out.end(), w.begin(), w.end());
    }
    return out;
  }

  /// Children tile the parent span left to right.
  bool well_formed() const {
    if (leaf()) return end == start + 1 && !senses.empty();
    std::size_t at = start;
    for (const auto& c : children) {
      if (c.start != at || !c.well_formed()) return false;
      at = c.end;
    }
    return at == end;
  }

  bool operator==(const ParseTree&) const = default;
};

struct ParseResult {
  std::vector<std::string> words;
  std::vector<ParseTree> full;    // items spanning the whole sentence
  std::vector<ParseTree> islands; // maximal items not consumed by a larger one
  std::vector<ParseTree> chart;   // every completed item, leaves included
};

namespace detail {

struct ChartItem {
  std::string category;
  std::size_t start, end;
  std::vector<std::size_t> children;
  std::set<std::string> senses;
  std::string word, lemma, features;
};

struct ActiveItem {
  std::size_t pattern;
  StateId state;
  std::size_t start, end;
  std::vector<std::size_t> children;
};

inline ParseTree tree_of(const std::vector<ChartItem>& chart, std::size_t id) {
  const auto& it = chart[id];
  ParseTree t{it.category, it.start, it.end, it.word, it.lemma, it.features, it.senses, {}};
  for (auto c : it.children) t.children.push_back(tree_of(chart, c));
  return t;
}

} // namespace detail

/// Bottom-up island parsing. Every completed item starts a fresh instance
/// of each pattern whose chain accepts its category; active instances
/// advance over adjacent completed items until their chain emits.
/// `shuffle_seed` randomizes agenda order; the resulting item set does not
/// depend on it.
inline ParseResult parse(const std::vector<std::string>& words, const Grammar& g,
                         std::optional<std::uint64_t> shuffle_seed = std::nullopt) {
  using detail::ActiveItem;
  using detail::ChartItem;
  ParseResult res;
  res.words = words;
  std::vector<ChartItem> chart;
  std::map<std::tuple<std::string, std::size_t, std::size_t, std::vector<std::size_t>>, std::size_t> seen;
  std::vector<ActiveItem> active;
  std::deque<std::size_t> agenda;

  for (std::size_t i = 0; i < words.size(); ++i) {
    auto [lemma, features] = g.analyze(words[i]);
    auto it = g.lexicon.find(lemma);
    if (it == g.lexicon.end()) throw DomainError("unknown word '" + words[i] + "'");
    std::map<std::string, std::set<std::string>> by_cat;
    for (const auto& e : it->second) {
      auto& s = by_cat[e.category];
      if (e.senses.empty()) s.insert(lemma);
      else s.insert(e.senses.begin(), e.senses.end());
    }
    for (auto& [cat, senses] : by_cat) {
      seen[{cat, i, i + 1, {}}] = chart.size();
      chart.push_back({cat, i, i + 1, {}, std::move(senses), words[i], lemma, features});
      agenda.push_back(chart.size() - 1);
    }
  }

  std::mt19937_64 rng(shuffle_seed.value_or(0));
  auto shuffle = [&] {
    if (shuffle_seed) std::shuffle(agenda.begin(), agenda.end(), rng);
  };
  shuffle();

  auto complete = [&](const ActiveItem& a) {
    const auto& p = g.patterns[a.pattern];
    auto key = std::make_tuple(p.result, a.start, a.end, a.children);
    if (seen.count(key)) return;
    seen[key] = chart.size();
    chart.push_back({p.result, a.start, a.end, a.children, {p.result}, "", "", ""});
    agenda.push_back(chart.size() - 1);
  };

  // Advances `a` over item `id` if its chain accepts the category; finished
  // chains complete, unfinished ones become active and look right.
  std::function<void(const ActiveItem&, std::size_t)> advance = [&](const ActiveItem& a, std::size_t id) {
    const auto& p = g.patterns[a.pattern];
    const auto& item = chart[id];
    auto sym = p.chain.find_symbol(item.category);
    if (!sym) return;
    auto succ = p.chain.successors(a.state, *sym);
    if (succ.empty()) return;
    ActiveItem next{a.pattern, succ[0], a.start, item.end, a.children};
    next.children.push_back(id);
    if (!p.chain.output(next.state).empty()) {
      complete(next);
      return;
    }
    active.push_back(next);
    for (std::size_t j = 0; j < chart.size(); ++j)
      if (chart[j].start == next.end) advance(next, j);
  };

  while (!agenda.empty()) {
    std::size_t id = agenda.front();
    agenda.pop_front();
    const std::size_t start = chart[id].start;
    for (std::size_t p = 0; p < g.patterns.size(); ++p)
      advance(ActiveItem{p, g.patterns[p].chain.initial(), start, start, {}}, id);
    const std::size_t n_active = active.size();
    for (std::size_t k = 0; k < n_active; ++k)
      if (active[k].end == start) advance(ActiveItem(active[k]), id);
    shuffle();
  }

  // Items consumed by some larger item; leaves no pattern consumed die out.
  std::vector<bool> consumed(chart.size(), false);
  for (const auto& it : chart)
    for (auto c : it.children) consumed[c] = true;
  std::set<std::string> results;
  for (const auto& p : g.patterns) results.insert(p.result);

  std::vector<std::size_t> order(chart.size());
  std::iota(order.begin(), order.end(), 0);
  auto key_of = [&](std::size_t i) { return detail::tree_of(chart, i).bracketed(); };
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (chart[a].start != chart[b].start) return chart[a].start < chart[b].start;
    if (chart[a].end != chart[b].end) return chart[a].end > chart[b].end;
    return key_of(a) < key_of(b);
  });
  for (auto i : order) {
    const auto& it = chart[i];
    auto tree = detail::tree_of(chart, i);
    bool leaf = it.children.empty();
    bool live = !leaf || consumed[i] || results.count(it.category);
    if (!live) continue;
    res.chart.push_back(tree);
    if (it.start == 0 && it.end == words.size()) res.full.push_back(tree);
    if (!consumed[i]) res.islands.push_back(tree);
  }
  return res;
}

inline std::vector<std::string> split_words(const std::string& sentence) {
  std::vector<std::string> out;
  std::string w;
  for (char c : sentence) {
    if (std::isspace(static_cast<unsigned char>(c)) || c == '.' || c == ',' || c == '!' || c == '?') {
      if (!w.empty()) out.push_back(std::move(w));
      w.clear();
    } else {
      w += c;
    }
  }
  if (!w.empty()) out.push_back(std::move(w));
  return out;
}

inline ParseResult parse(const std::string& sentence, const Grammar& g,
                         std::optional<std::uint64_t> shuffle_seed = std::nullopt) {
  return parse(split_words(sentence), g, shuffle_seed);
}

/// subject -> properties, e.g. {"Eleanor": {"athlete"}}.
using Context = std::map<std::string, std::set<std::string>>;

/// Narrows ambiguous leaf senses by context rules whose property holds of a
/// word in the tree. Several applicable rules union their senses; no
/// applicable rule leaves a leaf unchanged.
inline ParseTree disambiguate(const ParseTree& tree, const Context& ctx, const std::vector<ContextRule>& rules) {
  std::set<std::string> properties;
  for (const auto& w : tree.words()) {
    auto it = ctx.find(w);
    if (it != ctx.end()) properties.insert(it->second.begin(), it->second.end());
  }
  std::function<ParseTree(const ParseTree&)> go = [&](const ParseTree& t) {
    ParseTree out = t;
    if (t.leaf()) {
      std::optional<std::set<std::string>> allowed;
      for (const auto& r : rules) {
        if (r.lemma != t.lemma || !properties.count(r.property)) continue;
        if (!allowed) allowed.emplace();
        allowed->insert(r.senses.begin(), r.senses.end());
      }
      if (!allowed) return out;
      out.senses.clear();
      std::set_intersection(t.senses.begin(), t.senses.end(), allowed->begin(), allowed->end(),
                            std::inserter(out.senses, out.senses.end()));
      if (out.senses.empty()) throw ContradictionError("context leaves no reading of '" + t.word + "'");
      return out;
    }
    for (auto& c : out.children) c = go(c);
    return out;
  };
  return go(tree);
}

} // namespace cma
