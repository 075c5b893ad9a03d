#pragma once

// Command-line front end. dispatch() is the whole program; main() only
// forwards argv and the standard streams.

#include <cstdlib>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cma/analysis.hpp"
#include "cma/automaton.hpp"
#include "cma/cluster.hpp"
#include "cma/fluents.hpp"
#include "cma/json_io.hpp"
#include "cma/lingua.hpp"
#include "cma/memory.hpp"
#include "cma/menagerie.hpp"

namespace cma::cli {

namespace detail {

inline std::string fixed(double v, int digits = 6) {
  std::ostringstream ss;
  ss << std::fixed << std::setprecision(digits) << v;
  return ss.str();
}

inline std::string join(const std::vector<std::string>& items, const std::string& sep = ", ") {
  std::string s;
  for (std::size_t i = 0; i < items.size(); ++i) s += (i ? sep : "") + items[i];
  return s;
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, sep))
    if (!item.empty()) out.push_back(item);
  return out;
}

inline std::string rational_str(const Rational& r) {
  auto n = boost::multiprecision::numerator(r), d = boost::multiprecision::denominator(r);
  return d == 1 ? n.str() : n.str() + "/" + d.str();
}

inline json occupancy_json(const OccupancyVector& v, const std::string& mode) {
  json j{{"mode", mode}, {"labels", v.labels}, {"fractions", v.fractions}, {"horizon", v.horizon}};
  if (v.exact) {
    std::vector<std::string> ex;
    for (const auto& r : *v.exact) ex.push_back(rational_str(r));
    j["exact"] = ex;
  }
  return j;
}

inline json tree_json(const ParseTree& t) {
  json j{{"category", t.category}, {"span", {t.start, t.end}}};
  if (t.leaf()) {
    j["word"] = t.word;
    j["lemma"] = t.lemma;
    j["features"] = t.features;
    j["senses"] = t.senses;
  } else {
    json kids = json::array();
    for (const auto& c : t.children) kids.push_back(tree_json(c));
    j["children"] = kids;
  }
  return j;
}

/// Exit code 2 without going through CLI11's own error formatting.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

} // namespace detail

inline int dispatch(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err) {
  using namespace detail;

  CLI::App app{"Clustered Moore automata toolkit", "cma"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string format = "text";
  std::string constraints_text;
  app.add_option("--format", format, "Output format")->check(CLI::IsMember({"text", "json"}));
  app.add_option("--constraints", constraints_text, "Limits as m=..,s=..,o=..,i=.. (overrides CMA_CONSTRAINTS)");

  std::string machine, cluster, other, policy, mode, scales_name = "modern", file, out_path;
  std::vector<std::string> product, injects, faults, contexts;
  std::optional<std::uint64_t> seed;
  std::size_t steps = 0, ticks = 0, idle = 0, replicas = 3;
  std::string input, probs, labels, horizon, at, fluent_name, theta = "2/3", rule = "contiguous", lexicon = "demo",
                                                                  sentence, net = "grief-demo", schema_name;
  double eps = 0.01;
  std::uint64_t prime_limit = 0, outer_len = 0;
  bool open_start = false, open_end = false, by_signal = false;

  auto* validate_cmd = app.add_subcommand("validate", "Check a machine or cluster against the layer limits");
  validate_cmd->add_option("--machine,-m", machine, "Inline spec or CMA-JSON path");
  validate_cmd->add_option("--cluster,-c", cluster, "Inline cluster or cluster document path");
  validate_cmd->add_option("--scales", scales_name)->check(CLI::IsMember({"modern", "naive"}));

  auto* simulate_cmd = app.add_subcommand("simulate", "Run a machine on an input word, or tick a cluster");
  simulate_cmd->add_option("--machine,-m", machine);
  simulate_cmd->add_option("--cluster,-c", cluster);
  simulate_cmd->add_option("--input", input, "Space-separated symbols");
  simulate_cmd->add_option("--ticks", ticks, "Number of ticks (unary machines or clusters)");
  simulate_cmd->add_option("--policy", policy)->check(CLI::IsMember({"union", "current", "current-state", "external"}));
  simulate_cmd->add_option("--seed", seed);

  auto* occupancy_cmd = app.add_subcommand("occupancy", "Occupancy statistics of a unary machine");
  occupancy_cmd->add_option("--machine,-m", machine)->required();
  occupancy_cmd->add_option("--mode", mode)->required()->check(
      CLI::IsMember({"path-count", "stationary", "mc", "cycle"}));
  occupancy_cmd->add_option("--steps", steps);
  occupancy_cmd->add_option("--seed", seed);
  occupancy_cmd->add_flag("--by-signal", by_signal, "Aggregate states by output signal");

  auto* approx_cmd = app.add_subcommand("approx-dist", "Smallest labeled wheel approximating a distribution");
  approx_cmd->add_option("--probs", probs, "Comma-separated probabilities")->required();
  approx_cmd->add_option("--labels", labels, "Comma-separated outcome labels");
  approx_cmd->add_option("--eps", eps);
  approx_cmd->add_option("--out", out_path, "Write the wheel as CMA-JSON");

  auto* sync_cmd = app.add_subcommand("sync-word", "Synchronizing word of a deterministic complete machine");
  sync_cmd->add_option("--machine,-m", machine)->required();

  auto* classify_cmd = app.add_subcommand("classify", "Temporal class (Z, N, P, L, C)");
  classify_cmd->add_option("--machine,-m", machine);
  classify_cmd->add_option("--cluster,-c", cluster);
  classify_cmd->add_option("--product", product, "Two machines embedded in an outer 2-wheel")->expected(2);
  classify_cmd->add_option("--horizon", horizon, "Cycles longer than this count as unbounded");
  classify_cmd->add_flag("--open-start", open_start);
  classify_cmd->add_flag("--open-end", open_end);

  auto* cycle_cmd = app.add_subcommand("cycle-length", "First-return time of a wheel cluster");
  cycle_cmd->add_option("--cluster,-c", cluster);
  cycle_cmd->add_option("--prime-powers", prime_limit, "Inner wheels of maximal prime-power length below LIMIT");
  cycle_cmd->add_option("--outer", outer_len, "Outer wheel length for --prime-powers (default: number of primes)");

  auto* bisim_cmd = app.add_subcommand("bisim", "Bisimulation check between two machines");
  bisim_cmd->add_option("left", machine)->required();
  bisim_cmd->add_option("right", other)->required();

  auto* tape_cmd = app.add_subcommand("tape", "Drive the hierarchical tape with a command script");
  tape_cmd->add_option("--script", file, "One command (e, mu, nu, alpha, omega) per line")->required();
  tape_cmd->add_option("--replicas", replicas)->check(CLI::IsMember({1, 3}));
  tape_cmd->add_option("--inject-fault", faults, "replica:position, flips one stored bit");
  tape_cmd->add_option("--idle", idle, "Idle ticks after the script");

  auto* fluent_cmd = app.add_subcommand("fluent", "Fluent evaluation");
  fluent_cmd->require_subcommand(1);
  auto* fluent_eval = fluent_cmd->add_subcommand("eval", "Truth of a fluent at an instant i.j");
  fluent_eval->add_option("--file,-f", file, "Fluent assignment file")->required();
  fluent_eval->add_option("--fluent", fluent_name)->required();
  fluent_eval->add_option("--at", at)->required();
  fluent_eval->add_option("--mode", mode)->required()->check(CLI::IsMember({"forall", "exists", "preponderant"}));
  fluent_eval->add_option("--theta", theta);
  fluent_eval->add_option("--rule", rule)->check(CLI::IsMember({"contiguous", "total"}));
  fluent_eval->add_option("--scales", scales_name)->check(CLI::IsMember({"modern", "naive"}));
  auto* fluent_schema = fluent_cmd->add_subcommand("schema", "Per-state fluents of a schema machine");
  fluent_schema->add_option("--schema", schema_name)->required()->check(CLI::IsMember({"exchange", "gravity"}));

  auto* parse_cmd = app.add_subcommand("parse", "Island parsing of a sentence");
  parse_cmd->add_option("--lexicon", lexicon, "demo, or a grammar JSON path");
  parse_cmd->add_option("--sentence", sentence)->required();
  parse_cmd->add_option("--context", contexts, "subject:property facts");
  parse_cmd->add_option("--seed", seed, "Shuffle the agenda");

  auto* activate_cmd = app.add_subcommand("activate", "Spreading activation");
  activate_cmd->add_option("--net", net, "grief-demo, electra-demo, or a network JSON path");
  activate_cmd->add_option("--inject", injects, "Node receiving one impulse before the first step");
  activate_cmd->add_option("--steps", steps);

  auto* dot_cmd = app.add_subcommand("export-dot", "Graphviz rendering of a machine");
  dot_cmd->add_option("--machine,-m", machine)->required();
  dot_cmd->add_option("--out,-o", out_path);

  std::vector<std::string> reversed(argv.rbegin(), argv.rend());
  try {
    app.parse(std::move(reversed));
  } catch (const CLI::CallForHelp& e) {
    app.exit(e, out, err);
    return 0;
  } catch (const CLI::CallForAllHelp& e) {
    app.exit(e, out, err);
    return 0;
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return 2;
  }

  const bool as_json = format == "json";
  auto emit = [&](const json& j, const std::string& text) {
    if (as_json) out << j.dump(2) << "\n";
    else out << text;
  };
  auto need_seed = [&]() -> std::uint64_t {
    if (!seed && as_json) throw UsageError("--seed is required for randomized commands in JSON mode");
    return seed.value_or(0);
  };

  try {
    Constraints limits;
    if (const char* env = std::getenv("CMA_CONSTRAINTS"); env && *env) limits = Constraints::parse(env);
    if (!constraints_text.empty()) limits = Constraints::parse(constraints_text);

    if (validate_cmd->parsed()) {
      if (machine.empty() == cluster.empty()) throw UsageError("give exactly one of --machine or --cluster");
      std::vector<Violation> report;
      std::string name;
      if (!machine.empty()) {
        auto a = load_machine(machine, Constraints{100'000'000, 100'000'000, 100'000'000, 100'000'000});
        name = a.name();
        report = validate(a, limits);
      } else {
        auto c = load_cluster(cluster, Constraints{100'000'000, 100'000'000, 100'000'000, 100'000'000});
        name = c.machine.name();
        report = validate_cluster(c, scale_system_named(scales_name), limits);
      }
      json vs = json::array();
      std::string text;
      for (const auto& v : report) {
        vs.push_back({{"rule", v.rule}, {"subject", v.subject}, {"detail", v.detail}});
        text += v.rule + " " + v.subject + ": " + v.detail + "\n";
      }
      emit({{"name", name}, {"valid", report.empty()}, {"violations", vs}}, report.empty() ? "valid\n" : text);
      return report.empty() ? 0 : 1;
    }

    if (simulate_cmd->parsed()) {
      if (machine.empty() == cluster.empty()) throw UsageError("give exactly one of --machine or --cluster");
      if (!machine.empty()) {
        auto a = load_machine(machine, limits);
        std::vector<std::string> word = split(input, ' ');
        if (input.empty()) {
          if (!a.is_unary()) throw UsageError("--input is required for machines with several input symbols");
          word.assign(ticks, a.inputs()[0]);
        }
        std::optional<Chooser> chooser;
        if (!a.is_deterministic()) chooser = Chooser::seeded(need_seed());
        auto trace = run(a, word, chooser);
        std::vector<std::string> names, outs;
        std::string text;
        for (std::size_t i = 0; i < trace.visited.size(); ++i) {
          names.push_back(a.state_name(trace.visited[i]));
          outs.push_back(trace.emitted[i]);
          text += std::to_string(i) + " " + names.back() + " " + display_output(outs.back()) + "\n";
        }
        if (trace.halted) text += "halted after " + std::to_string(trace.steps) + " steps\n";
        emit({{"visited", names}, {"emitted", outs}, {"steps", trace.steps}, {"halted", trace.halted}}, text);
        return 0;
      }
      auto node = load_cluster(cluster, limits);
      if (!policy.empty()) node.policy = parse_tick_policy(policy);
      bool random = false;
      std::function<void(const ClusterNode&)> scan = [&](const ClusterNode& n) {
        random = random || !n.machine.is_deterministic();
        for (const auto& c : n.inner)
          if (c) scan(*c);
      };
      scan(node);
      auto rep = simulate(node, ticks, random ? need_seed() : seed.value_or(0));
      std::vector<std::string> fr;
      for (double f : rep.outer_occupancy.fractions) fr.push_back(fixed(f));
      json occ = json::object();
      for (std::size_t i = 0; i < rep.outer_occupancy.size(); ++i)
        occ[rep.outer_occupancy.labels[i]] = rep.outer_occupancy.fractions[i];
      emit({{"ticks", ticks},
            {"outer_advances", rep.outer_advances},
            {"halt_events", rep.halt_events},
            {"occupancy", occ},
            {"final_state", node.machine.state_name(rep.final_state.root.current)}},
           "ticks: " + std::to_string(ticks) + "\nouter advances: " + std::to_string(rep.outer_advances) +
               "\noccupancy: " + join(fr) + "\nstates: " + join(rep.outer_occupancy.labels) + "\n");
      return 0;
    }

    if (occupancy_cmd->parsed()) {
      auto a = load_machine(machine, limits);
      OccupancyVector v;
      if (mode == "path-count") v = path_count_occupancy(a, steps ? steps : 40);
      else if (mode == "stationary") v = stationary_distribution(a);
      else if (mode == "cycle") v = cycle_occupancy(a);
      else v = monte_carlo_occupancy(a, steps ? steps : 1'000'000, need_seed());
      if (by_signal) v = cma::by_signal(a, v);
      std::vector<std::string> fr;
      for (double f : v.fractions) fr.push_back(fixed(f));
      emit(occupancy_json(v, mode), "occupancy: " + join(fr) + "\nlabels: " + join(v.labels) + "\n");
      return 0;
    }

    if (approx_cmd->parsed()) {
      FiniteDistribution d;
      for (const auto& p : split(probs, ',')) {
        try {
          d.probabilities.push_back(std::stod(p));
        } catch (const std::exception&) {
          throw DomainError("cannot read probability '" + p + "'");
        }
      }
      d.outcomes = labels.empty() ? std::vector<std::string>{} : split(labels, ',');
      if (d.outcomes.empty())
        for (std::size_t i = 0; i < d.probabilities.size(); ++i) d.outcomes.push_back("o" + std::to_string(i + 1));
      auto w = approximate_distribution(d, eps, limits);
      if (!out_path.empty()) {
        std::ofstream f(out_path);
        if (!f) throw DomainError("cannot write '" + out_path + "'");
        f << serialize(w.wheel);
      }
      std::vector<std::string> counts;
      for (auto c : w.counts) counts.push_back(std::to_string(c));
      emit({{"k", w.k}, {"counts", w.counts}, {"outcomes", d.outcomes}, {"epsilon", w.epsilon}},
           "k: " + std::to_string(w.k) + "\ncounts: " + join(counts) + "\nepsilon: " + fixed(w.epsilon, 9) + "\n");
      return 0;
    }

    if (sync_cmd->parsed()) {
      auto a = load_machine(machine, limits);
      auto r = synchronizing_word(a);
      if (!r) {
        emit({{"synchronizing", false}}, "not synchronizing\n");
        return 0;
      }
      emit({{"synchronizing", true},
            {"word", r->word},
            {"length", r->word.size()},
            {"sink", a.state_name(r->sink)},
            {"shortest", r->shortest},
            {"reaches_initial", r->reaches_initial}},
           "word: " + join(r->word, " ") + "\nlength: " + std::to_string(r->word.size()) +
               "\nsink: " + a.state_name(r->sink) + (r->shortest ? "\nshortest: yes\n" : "\nshortest: not guaranteed\n"));
      return 0;
    }

    if (classify_cmd->parsed()) {
      int given = !machine.empty() + !cluster.empty() + !product.empty();
      if (given != 1) throw UsageError("give exactly one of --machine, --cluster or --product");
      BigInt h = default_horizon();
      if (!horizon.empty()) {
        if (!std::all_of(horizon.begin(), horizon.end(), [](unsigned char c) { return std::isdigit(c); }))
          throw DomainError("horizon must be a nonnegative integer");
        h = BigInt(horizon);
      }
      std::optional<DeclaredEndpoints> decl;
      if (open_start || open_end) decl = DeclaredEndpoints{open_start, open_end};
      TemporalClass c;
      if (!machine.empty()) c = classify(load_machine(machine, limits), h, decl);
      else if (!cluster.empty()) c = classify(load_cluster(cluster, limits), h, decl);
      else c = classify(cma::product(load_machine(product[0], limits), load_machine(product[1], limits)), h, decl);
      json j{{"class", c.str()},
             {"family", std::string(1, family_letter(c.family))},
             {"effective", c.effective},
             {"absorbing", c.absorbing},
             {"lead_in", c.lead_in}};
      j["size"] = c.size ? json(c.size->str()) : json(nullptr);
      emit(j, c.str() + "\n");
      return 0;
    }

    if (cycle_cmd->parsed()) {
      if (cluster.empty() == (prime_limit == 0)) throw UsageError("give exactly one of --cluster or --prime-powers");
      CycleLength c;
      if (!cluster.empty()) {
        c = cycle_length(load_cluster(cluster, limits));
      } else {
        auto lengths = prime_power_lengths(prime_limit);
        c = wheel_cluster_cycle(outer_len ? outer_len : lengths.size(), lengths);
      }
      std::string v = c.value.str();
      std::string shown = c.digits <= 60 ? v : v.substr(0, 12) + "..." + v.substr(v.size() - 12);
      emit({{"value", v}, {"digits", c.digits}, {"simulated", c.simulated}},
           "cycle: " + shown + "\ndigits: " + std::to_string(c.digits) + "\nconfirmed by simulation: " +
               (c.simulated ? "yes" : "no") + "\n");
      return 0;
    }

    if (bisim_cmd->parsed()) {
      auto r = bisimilar(load_machine(machine, limits), load_machine(other, limits));
      json blocks = json::array();
      std::string text = r.equivalent ? "bisimilar\n" : "not bisimilar\n";
      for (const auto& blk : r.partition) {
        std::vector<std::string> members;
        for (const auto& [side, name] : blk) members.push_back((side ? "right:" : "left:") + name);
        blocks.push_back(members);
        text += "  {" + join(members) + "}\n";
      }
      emit({{"bisimilar", r.equivalent}, {"partition", blocks}}, text);
      return 0;
    }

    if (tape_cmd->parsed()) {
      std::ifstream in(file);
      if (!in) throw DomainError("cannot open '" + file + "'");
      auto script = parse_script(in);
      auto tape = build_t1(replicas);
      std::size_t boundary = 0;
      Emission last;
      for (auto c : script) {
        last = tape.step(c);
        boundary += last.boundary;
      }
      for (const auto& f : faults) {
        auto parts = split(f, ':');
        if (parts.size() != 2) throw DomainError("fault must be replica:position, got '" + f + "'");
        tape.corrupt(std::stoul(parts[0]), std::stoul(parts[1]));
      }
      tape.idle(idle);
      std::string content;
      {
        std::vector<std::uint8_t> bytes(tape.length() / 8, 0);
        for (std::size_t p = 0; p < tape.length(); ++p)
          if (tape.read(p)) bytes[p / 8] |= static_cast<std::uint8_t>(1u << (p % 8));
        static const char* digits = "0123456789abcdef";
        for (auto b : bytes) {
          content += digits[b >> 4];
          content += digits[b & 15];
        }
      }
      std::vector<std::string> reps;
      for (std::size_t r = 0; r < tape.replicas(); ++r) reps.push_back(tape.hex(r));
      json j{{"commands", script.size()},   {"head", tape.head()}, {"counter", tape.counter().bits_string()},
             {"hex", content},              {"replicas", reps},    {"boundary_events", boundary},
             {"last_bit", last.bit ? 1 : 0}, {"at_rest", tape.at_rest()}};
      std::string text = "commands: " + std::to_string(script.size()) + "\nhead: " + std::to_string(tape.head()) +
                         "\ncounter: " + tape.counter().bits_string() + "\ncontent: " + content + "\n";
      for (std::size_t r = 0; r < reps.size(); ++r)
        if (reps[r] != content) text += "replica " + std::to_string(r) + " differs: " + reps[r] + "\n";
      text += "boundary events: " + std::to_string(boundary) + "\n";
      emit(j, text);
      return 0;
    }

    if (fluent_eval->parsed()) {
      auto store = fluents_from_json(read_json_file(file), scale_system_named(scales_name));
      auto t = store.eval(fluent_name, TimePoint::parse(at), parse_fluent_mode(mode), parse_theta(theta),
                          rule == "total" ? RunRule::total : RunRule::contiguous);
      emit({{"fluent", fluent_name}, {"at", at}, {"mode", mode}, {"value", to_string(t)}}, to_string(t) + "\n");
      return 0;
    }

    if (fluent_schema->parsed()) {
      auto report = schema_eval(parse_schema(schema_name));
      json j = json::array();
      std::string text;
      for (const auto& r : report) {
        json fl = json::object();
        text += r.state + ":";
        for (const auto& [f, v] : r.fluents) {
          fl[f] = to_string(v);
          text += " " + f + "=" + to_string(v);
        }
        text += "\n";
        j.push_back({{"state", r.state}, {"fluents", fl}});
      }
      emit({{"schema", schema_name}, {"states", j}}, text);
      return 0;
    }

    if (parse_cmd->parsed()) {
      Grammar g = lexicon == "demo" ? demo_grammar() : grammar_from_json(read_json_file(lexicon));
      auto res = parse(sentence, g, seed);
      Context ctx;
      for (const auto& c : contexts) {
        auto parts = split(c, ':');
        if (parts.size() != 2) throw DomainError("context must be subject:property, got '" + c + "'");
        ctx[parts[0]].insert(parts[1]);
      }
      auto narrow = [&](std::vector<ParseTree>& trees) {
        if (ctx.empty()) return;
        for (auto& t : trees) t = disambiguate(t, ctx, g.context_rules);
      };
      narrow(res.full);
      narrow(res.islands);
      json full = json::array(), islands = json::array();
      std::string text;
      for (const auto& t : res.full) {
        full.push_back(tree_json(t));
        text += t.bracketed() + "\n";
      }
      if (res.full.empty()) {
        text += "no full parse; islands:\n";
        for (const auto& t : res.islands) text += "  " + t.bracketed() + "\n";
      }
      for (const auto& t : res.islands) islands.push_back(tree_json(t));
      emit({{"words", res.words}, {"full", full}, {"islands", islands}}, text);
      return 0;
    }

    if (activate_cmd->parsed()) {
      ActivationNetwork n = net == "grief-demo"     ? grief_demo(true)
                            : net == "electra-demo" ? grief_demo(false)
                                                    : network_from_json(read_json_file(net));
      auto trace = activate(n, injects, steps ? steps : 4);
      json j = json::array();
      std::string text;
      for (const auto& s : trace) {
        j.push_back({{"step", s.step}, {"fired", s.fired}, {"states", s.states}});
        text += "step " + std::to_string(s.step) + ": fired " + (s.fired.empty() ? "-" : join(s.fired)) + "\n";
      }
      emit({{"steps", j}}, text);
      return 0;
    }

    if (dot_cmd->parsed()) {
      auto dot = to_dot(load_machine(machine, limits));
      if (out_path.empty()) {
        out << dot;
      } else {
        std::ofstream f(out_path);
        if (!f) throw DomainError("cannot write '" + out_path + "'");
        f << dot;
        emit({{"written", out_path}}, "wrote " + out_path + "\n");
      }
      return 0;
    }
  } catch (const UsageError& e) {
    err << "cma: usage: " << e.what() << "\n";
    return 2;
  } catch (const InfeasibleError& e) {
    if (as_json) out << json{{"error", e.kind()}, {"message", e.what()}, {"best_epsilon", e.best_epsilon()}}.dump() << "\n";
    err << "cma: error: " << e.kind() << ": " << e.what() << "\n";
    return 1;
  } catch (const Error& e) {
    if (as_json) out << json{{"error", e.kind()}, {"message", e.what()}}.dump() << "\n";
    err << "cma: error: " << e.kind() << ": " << e.what() << "\n";
    return 1;
  }
  return 2;
}

} // namespace cma::cli
