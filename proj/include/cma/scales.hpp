#pragma once

// Discrete timescales: integer scale indices with branching factors between
// neighbouring scales.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "cma/automaton.hpp"

namespace cma {

using BigInt = boost::multiprecision::cpp_int;


struct ScaleSystem {
  int min_scale = -18;
  int max_scale = 18;
  /// scale i -> number of scale i-1 units per scale i unit
  std::map<int, std::uint64_t> branching;
  std::map<int, std::string> names;

  /// Powers of ten from attoseconds to exaseconds.
  static ScaleSystem modern() {
    ScaleSystem s;
    for (int i = s.min_scale + 1; i <= s.max_scale; ++i) s.branching[i] = 10;
    s.names[0] = "second";
    return s;
  }

  /// Instants up to aeons. Factors above the day are configurable defaults.
  static ScaleSystem naive() {
    ScaleSystem s;
    s.min_scale = -1;
    s.max_scale = 5;
    s.branching = {{0, 100}, {1, 900}, {2, 96}, {3, 96}, {4, 120}, {5, 100}};
    s.names = {{-1, "instant"}, {0, "heartbeat"}, {1, "quarter-hour"}, {2, "day"},
               {3, "season"},   {4, "generation"}, {5, "aeon"}};
    return s;
  }

  /// Every scale in (min, max] gets the same factor.
  static ScaleSystem uniform(int min_scale, int max_scale, std::uint64_t factor) {
    ScaleSystem s;
    s.min_scale = min_scale;
    s.max_scale = max_scale;
    for (int i = min_scale + 1; i <= max_scale; ++i) s.branching[i] = factor;
    return s;
  }

  bool in_bounds(int scale) const noexcept { return scale >= min_scale && scale <= max_scale; }

  void require_in_bounds(int scale) const {
    if (!in_bounds(scale))
      throw ScaleError("scale " + std::to_string(scale) + " outside [" + std::to_string(min_scale) + ", " +
                       std::to_string(max_scale) + "]");
  }

  std::uint64_t factor(int scale) const {
    auto it = branching.find(scale);
    if (it == branching.end()) throw ScaleError("no branching factor for scale " + std::to_string(scale));
    return it->second;
  }

  /// Units of scale `lower` per unit of scale `upper` (lower < upper).
  BigInt units_between(int lower, int upper) const {
    BigInt b = 1;
    for (int i = lower + 1; i <= upper; ++i) b *= factor(i);
    return b;
  }

  std::vector<std::string> check(const Constraints& c = {}) const {
    std::vector<std::string> problems;
    if (min_scale >= max_scale) problems.push_back("min_scale must be below max_scale");
    for (int i = min_scale + 1; i <= max_scale; ++i) {
      auto it = branching.find(i);
      if (it == branching.end()) {
        problems.push_back("missing branching factor for scale " + std::to_string(i));
      } else if (it->second < 2 || it->second > c.max_states) {
        problems.push_back("branching factor " + std::to_string(it->second) + " at scale " + std::to_string(i) +
                           " outside [2, " + std::to_string(c.max_states) + "]");
      }
    }
    return problems;
  }
};

} // namespace cma
