#pragma once

// CMA-JSON documents for machines and clusters, fluent assignment files,
// and loaders that accept either inline specs or file paths.

#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "cma/automaton.hpp"
#include "cma/cluster.hpp"
#include "cma/fluents.hpp"
#include "cma/menagerie.hpp"

namespace cma {

using json = nlohmann::json;

inline json to_json(const Automaton& a) {
  json j;
  j["name"] = a.name();
  j["states"] = a.states();
  j["initial"] = a.state_name(a.initial());
  j["inputs"] = a.inputs();
  json outputs = json::object();
  for (StateId q = 0; q < a.size(); ++q) outputs[a.state_name(q)] = a.output(q);
  j["outputs"] = outputs;
  json edges = json::array();
  for (StateId q = 0; q < a.size(); ++q)
    for (SymbolId s = 0; s < a.inputs().size(); ++s)
      for (StateId r : a.successors(q, s)) edges.push_back({a.state_name(q), a.inputs()[s], a.state_name(r)});
  j["edges"] = edges;
  if (a.has_annotations()) {
    json fl = json::object();
    for (StateId q = 0; q < a.size(); ++q)
      if (!a.annotations(q).empty()) fl[a.state_name(q)] = a.annotations(q);
    j["fluents"] = fl;
  }
  return j;
}

inline Automaton automaton_from_json(const json& j) {
  try {
    Automaton::Builder b(j.value("name", std::string("M")));
    for (const auto& s : j.at("inputs")) b.input(s.get<std::string>());
    const json outputs = j.value("outputs", json::object());
    for (const auto& s : j.at("states")) {
      auto name = s.get<std::string>();
      b.state(name, outputs.contains(name) ? outputs.at(name).get<std::string>() : "");
    }
    for (const auto& [state, _] : outputs.items())
      if (!b.peek().find_state(state)) throw DomainError("output given for unknown state '" + state + "'");
    for (const auto& e : j.value("edges", json::array())) {
      if (!e.is_array() || e.size() != 3) throw DomainError("edges must be [from, symbol, to] triples");
      b.edge(e[0].get<std::string>(), e[1].get<std::string>(), e[2].get<std::string>());
    }
    if (j.contains("initial")) b.initial(j.at("initial").get<std::string>());
    if (j.contains("fluents"))
      for (const auto& [state, fl] : j.at("fluents").items())
        for (const auto& [name, v] : fl.items()) b.annotate(b.peek().state_id(state), name, v.get<bool>());
    return b.build();
  } catch (const json::exception& e) {
    throw DomainError(std::string("malformed machine document: ") + e.what());
  }
}

inline std::string serialize(const Automaton& a) { return to_json(a).dump(2) + "\n"; }

inline Automaton parse_automaton(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw DomainError(std::string("invalid JSON: ") + e.what());
  }
  return automaton_from_json(j);
}

inline json to_json(const ClusterNode& node) {
  json j = to_json(node.machine);
  j["scale"] = node.scale;
  j["tick_policy"] = to_string(node.policy);
  if (node.has_inner()) {
    json inner = json::object();
    for (StateId q = 0; q < node.inner.size(); ++q)
      if (const auto* c = node.inner_at(q)) inner[node.machine.state_name(q)] = to_json(*c);
    j["inner"] = inner;
  }
  return j;
}

inline ClusterNode cluster_from_json(const json& j) {
  try {
    ClusterNode node(automaton_from_json(j), j.value("scale", 0),
                     parse_tick_policy(j.value("tick_policy", std::string("external"))));
    if (j.contains("inner"))
      for (const auto& [state, doc] : j.at("inner").items()) node.place(state, cluster_from_json(doc));
    return node;
  } catch (const json::exception& e) {
    throw DomainError(std::string("malformed cluster document: ") + e.what());
  }
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DomainError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline json read_json_file(const std::string& path) {
  try {
    return json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw DomainError("invalid JSON in '" + path + "': " + e.what());
  }
}

/// An inline spec such as "wheel:4", or the path of a CMA-JSON file.
inline Automaton load_machine(const std::string& text, const Constraints& c = {}) {
  if (looks_like_spec(text)) return build(text, c);
  return automaton_from_json(read_json_file(text));
}

namespace detail {

inline std::vector<std::string> split_top(std::string_view s, char sep) {
  std::vector<std::string> out;
  int depth = 0;
  std::string cur;
  for (char ch : s) {
    if (ch == '{') ++depth;
    if (ch == '}') --depth;
    if (ch == sep && depth == 0) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

inline ClusterNode parse_inline_cluster(std::string_view text, const Constraints& c) {
  std::string_view body = text;
  TickPolicy policy = TickPolicy::union_of_inner;
  if (auto at = text.rfind('@'); at != std::string_view::npos && text.find('}', at) == std::string_view::npos) {
    policy = parse_tick_policy(text.substr(at + 1));
    body = text.substr(0, at);
  }
  auto open = body.find('{');
  if (open == std::string_view::npos) {
    if (body.size() != text.size()) throw DomainError("tick policy given for a machine without inner machines");
    return ClusterNode(build(std::string(body), c), 0);
  }
  if (body.back() != '}') throw DomainError("cluster spec '" + std::string(text) + "' has unbalanced braces");
  auto outer = build(std::string(body.substr(0, open)), c);
  auto parts = split_top(body.substr(open + 1, body.size() - open - 2), '|');
  if (parts.size() > outer.size())
    throw DomainError("cluster spec gives " + std::to_string(parts.size()) + " inner machines for " +
                      std::to_string(outer.size()) + " states");
  std::vector<std::optional<ClusterNode>> inner;
  int scale = 0;
  for (const auto& p : parts) {
    if (p.empty() || p == "_") {
      inner.emplace_back();
      continue;
    }
    inner.push_back(parse_inline_cluster(p, c));
    scale = std::max(scale, inner.back()->scale + 1);
  }
  ClusterNode node(std::move(outer), scale, policy);
  for (std::size_t q = 0; q < inner.size(); ++q)
    if (inner[q]) node.place(q, std::move(*inner[q]));
  return node;
}

} // namespace detail

/// Inline clusters nest specs in braces, one slot per outer state ("_"
/// leaves a state empty), with an optional @policy suffix:
/// "wheel:2{wheel:3|wheel:5}", "wheel:2{wheel:3|_}@current". Anything else
/// is a cluster document path.
inline ClusterNode load_cluster(const std::string& text, const Constraints& c = {}) {
  if (text.find('{') != std::string::npos || looks_like_spec(text)) return detail::parse_inline_cluster(text, c);
  return cluster_from_json(read_json_file(text));
}

/// {"base_scale": 0, "domain": [lo, hi], "fluents": {name: [[s, e], ...]},
///  "cyclic": [{"name", "period", "phase": [s, e]}], "complements": {name: of}}
inline FluentStore fluents_from_json(const json& j, ScaleSystem scales = ScaleSystem::modern()) {
  try {
    FluentStore store(std::move(scales), j.value("base_scale", 0));
    if (j.contains("fluents")) {
      auto domain = j.at("domain").get<std::pair<std::int64_t, std::int64_t>>();
      for (const auto& [name, ranges] : j.at("fluents").items())
        store.define(name, domain.first, domain.second,
                     ranges.get<std::vector<std::pair<std::int64_t, std::int64_t>>>());
    }
    for (const auto& c : j.value("cyclic", json::array())) {
      auto phase = c.at("phase").get<std::pair<std::int64_t, std::int64_t>>();
      store.cyclic(c.at("name").get<std::string>(), c.at("period").get<std::int64_t>(), phase.first, phase.second);
    }
    const auto complements = j.value("complements", json::object());
    for (const auto& [name, of] : complements.items())
      store.complement(name, of.get<std::string>());
    return store;
  } catch (const json::exception& e) {
    throw DomainError(std::string("malformed fluent file: ") + e.what());
  }
}

inline ScaleSystem scale_system_named(const std::string& name) {
  if (name == "modern") return ScaleSystem::modern();
  if (name == "naive") return ScaleSystem::naive();
  throw DomainError("unknown scale system '" + name + "'");
}

} // namespace cma
