#pragma once

// Fluents over two-index instants (scale i, index j). Truth values are
// stored at a base scale and derived upward over the window of base units a
// coarser instant covers.

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <boost/rational.hpp>

#include "cma/automaton.hpp"
#include "cma/menagerie.hpp"
#include "cma/scales.hpp"

namespace cma {

struct TimePoint {
  int scale = 0;
  std::int64_t index = 0;

  /// "i.j", either part may be negative: "2.3", "0.-5", "-1.7".
  static TimePoint parse(std::string_view text) {
    auto dot = text.find('.', text.starts_with('-') ? 1 : 0);
    if (dot == std::string_view::npos) throw DomainError("instant '" + std::string(text) + "' is not of the form i.j");
    TimePoint t;
    auto whole = [&](std::string_view part, auto& out) {
      auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), out);
      if (ec != std::errc() || ptr != part.data() + part.size() || part.empty())
        throw DomainError("instant '" + std::string(text) + "' is not of the form i.j");
    };
    whole(text.substr(0, dot), t.scale);
    whole(text.substr(dot + 1), t.index);
    return t;
  }

  std::string str() const { return std::to_string(scale) + "." + std::to_string(index); }

  bool operator==(const TimePoint&) const = default;
};

namespace detail {

inline BigInt floor_div(const BigInt& a, const BigInt& b) {
  BigInt q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

inline std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

} // namespace detail

/// True iff `inner` falls in the window of `outer`: unit (i.k) covers the
/// units [k*B, (k+1)*B) of a finer scale, B the product of the branching
/// factors in between.
inline bool contains(const TimePoint& outer, const TimePoint& inner, const ScaleSystem& s) {
  s.require_in_bounds(outer.scale);
  s.require_in_bounds(inner.scale);
  if (inner.scale >= outer.scale)
    throw DomainError("containment needs the inner instant on a finer scale (" + inner.str() + " vs " + outer.str() + ")");
  BigInt b = s.units_between(inner.scale, outer.scale);
  return detail::floor_div(BigInt(inner.index), b) == outer.index;
}

enum class Truth { True, False, Undefined };

inline std::string to_string(Truth t) {
  switch (t) {
  case Truth::True: return "true";
  case Truth::False: return "false";
  case Truth::Undefined: return "undefined";
  }
  return "undefined";
}

enum class FluentMode { forall, exists, preponderant };

inline FluentMode parse_fluent_mode(std::string_view s) {
  if (s == "forall" || s == "all") return FluentMode::forall;
  if (s == "exists" || s == "some") return FluentMode::exists;
  if (s == "preponderant" || s == "prep") return FluentMode::preponderant;
  throw DomainError("unknown fluent mode '" + std::string(s) + "'");
}

using Theta = boost::rational<std::int64_t>;

inline Theta default_theta() { return Theta(2, 3); }

inline Theta checked_theta(Theta t) {
  if (!(t > Theta(1, 2) && t <= Theta(1)))
    throw DomainError("theta must lie in (1/2, 1]");
  return t;
}

/// "2/3", "0.75" or "1".
inline Theta parse_theta(std::string_view s) {
  auto num = [&](std::string_view part) {
    std::int64_t v = 0;
    auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), v);
    if (ec != std::errc() || ptr != part.data() + part.size() || part.empty())
      throw DomainError("cannot read theta '" + std::string(s) + "'");
    return v;
  };
  if (auto slash = s.find('/'); slash != std::string_view::npos) {
    auto d = num(s.substr(slash + 1));
    if (d == 0) throw DomainError("theta has a zero denominator");
    return checked_theta(Theta(num(s.substr(0, slash)), d));
  }
  if (auto dot = s.find('.'); dot != std::string_view::npos) {
    auto frac = s.substr(dot + 1);
    if (frac.size() > 12) throw DomainError("theta has too many decimals");
    std::int64_t den = 1;
    for (std::size_t i = 0; i < frac.size(); ++i) den *= 10;
    auto whole = dot == 0 ? 0 : num(s.substr(0, dot));
    return checked_theta(Theta(whole * den + (frac.empty() ? 0 : num(frac)), den));
  }
  return checked_theta(Theta(num(s)));
}

/// How a preponderant stretch is measured: one contiguous run, or the
/// total count of agreeing units.
enum class RunRule { contiguous, total };

struct WindowSummary {
  std::int64_t length = 0;
  std::int64_t longest_true = 0;
  std::int64_t longest_false = 0;
  std::int64_t total_true = 0;

  std::int64_t total_false() const { return length - total_true; }

  WindowSummary negated() const {
    return {length, longest_false, longest_true, length - total_true};
  }
};

class FluentStore {
public:
  explicit FluentStore(ScaleSystem scales = ScaleSystem::modern(), int base_scale = 0)
      : scales_(std::move(scales)), base_(base_scale) {
    scales_.require_in_bounds(base_);
  }

  const ScaleSystem& scales() const noexcept { return scales_; }
  int base_scale() const noexcept { return base_; }

  bool has(const std::string& name) const { return defs_.count(name) != 0; }

  std::vector<std::string> names() const {
    std::vector<std::string> out;
    for (const auto& [n, _] : defs_) out.push_back(n);
    return out;
  }

  /// Assigns `name` over base indices [lo, hi): true on the given ranges,
  /// false elsewhere.
  void define(const std::string& name, std::int64_t lo, std::int64_t hi,
              std::vector<std::pair<std::int64_t, std::int64_t>> true_ranges) {
    if (lo >= hi) throw DomainError("fluent '" + name + "' needs a nonempty domain");
    std::sort(true_ranges.begin(), true_ranges.end());
    Explicit ex{lo, hi, {}};
    for (auto [s, e] : true_ranges) {
      if (s >= e) continue;
      if (s < lo || e > hi)
        throw DomainError("range [" + std::to_string(s) + ", " + std::to_string(e) + ") of '" + name +
                          "' leaves its domain");
      if (!ex.runs.empty() && s <= ex.runs.back().second) ex.runs.back().second = std::max(ex.runs.back().second, e);
      else ex.runs.emplace_back(s, e);
    }
    install(name, Def{ex, false});
  }

  /// Assigns consecutive base values starting at `start`.
  void define_values(const std::string& name, std::int64_t start, const std::vector<bool>& values) {
    std::vector<std::pair<std::int64_t, std::int64_t>> ranges;
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (!values[i]) continue;
      auto at = start + static_cast<std::int64_t>(i);
      if (!ranges.empty() && ranges.back().second == at) ranges.back().second = at + 1;
      else ranges.emplace_back(at, at + 1);
    }
    define(name, start, start + static_cast<std::int64_t>(values.size()), std::move(ranges));
  }

  /// True exactly on indices whose residue mod `period` lies in
  /// [phase_start, phase_end); the range may run past the period end.
  void cyclic(const std::string& name, std::int64_t period, std::int64_t phase_start, std::int64_t phase_end) {
    if (period < 2) throw DomainError("cyclic fluent '" + name + "' needs a period of at least 2");
    if (phase_start >= phase_end || phase_end - phase_start >= period)
      throw DomainError("cyclic fluent '" + name + "' needs a nonempty phase shorter than its period");
    std::int64_t shift = detail::floor_div(phase_start, period) * period;
    install(name, Def{Cyclic{period, phase_start - shift, phase_end - shift}, false});
  }

  /// `name` is the negation of the existing fluent `of` (Night of Day).
  void complement(const std::string& name, const std::string& of) {
    const auto& src = def(of);
    install(name, Def{src.body, !src.negated});
  }

  bool value(const std::string& name, std::int64_t index) const { return summarize(name, index, index + 1).total_true == 1; }

  /// Base-unit window of an instant at or above the base scale.
  std::pair<std::int64_t, std::int64_t> window(const TimePoint& at) const {
    scales_.require_in_bounds(at.scale);
    if (at.scale < base_)
      throw DomainError("instant " + at.str() + " is finer than the base scale " + std::to_string(base_));
    BigInt b = scales_.units_between(base_, at.scale);
    BigInt lo = b * at.index;
    BigInt hi = lo + b;
    const BigInt limit = BigInt(1) << 62;
    if (hi > limit || lo < -limit) throw DomainError("window of " + at.str() + " exceeds 62-bit indices");
    return {lo.convert_to<std::int64_t>(), hi.convert_to<std::int64_t>()};
  }

  WindowSummary summarize(const std::string& name, std::int64_t lo, std::int64_t hi) const {
    const auto& d = def(name);
    WindowSummary s = std::visit([&](const auto& body) { return summarize_body(name, body, lo, hi); }, d.body);
    return d.negated ? s.negated() : s;
  }

  Truth eval(const std::string& name, const TimePoint& at, FluentMode mode, Theta theta = default_theta(),
             RunRule rule = RunRule::contiguous) const {
    checked_theta(theta);
    auto [lo, hi] = window(at);
    auto s = summarize(name, lo, hi);
    switch (mode) {
    case FluentMode::forall: return s.total_true == s.length ? Truth::True : Truth::False;
    case FluentMode::exists: return s.total_true > 0 ? Truth::True : Truth::False;
    case FluentMode::preponderant: {
      auto yes = rule == RunRule::contiguous ? s.longest_true : s.total_true;
      auto no = rule == RunRule::contiguous ? s.longest_false : s.total_false();
      if (reaches(yes, s.length, theta)) return Truth::True;
      if (reaches(no, s.length, theta)) return Truth::False;
      return Truth::Undefined;
    }
    }
    return Truth::Undefined;
  }

private:
  struct Explicit {
    std::int64_t lo, hi;
    std::vector<std::pair<std::int64_t, std::int64_t>> runs; // sorted, disjoint true ranges
  };
  struct Cyclic {
    std::int64_t period, start, end;
  };
  struct Def {
    std::variant<Explicit, Cyclic> body;
    bool negated = false;
  };

  static bool reaches(std::int64_t run, std::int64_t width, Theta theta) {
    return BigInt(run) * theta.denominator() >= BigInt(theta.numerator()) * width;
  }

  void install(const std::string& name, Def d) {
    if (name.empty()) throw DomainError("fluent names must be nonempty");
    if (has(name)) throw DomainError("fluent '" + name + "' is already defined");
    defs_.emplace(name, std::move(d));
  }

  const Def& def(const std::string& name) const {
    auto it = defs_.find(name);
    if (it == defs_.end()) throw DomainError("unknown fluent '" + name + "'");
    return it->second;
  }

  template <class Ranges>
  static WindowSummary from_ranges(std::int64_t lo, std::int64_t hi, const Ranges& ranges) {
    WindowSummary s;
    s.length = hi - lo;
    std::int64_t cursor = lo;
    for (auto [a, b] : ranges) {
      a = std::max(a, lo);
      b = std::min(b, hi);
      if (a >= b) continue;
      s.longest_false = std::max(s.longest_false, a - cursor);
      s.longest_true = std::max(s.longest_true, b - a);
      s.total_true += b - a;
      cursor = b;
    }
    s.longest_false = std::max(s.longest_false, hi - cursor);
    return s;
  }

  static WindowSummary summarize_body(const std::string& name, const Explicit& ex, std::int64_t lo, std::int64_t hi) {
    if (lo < ex.lo || hi > ex.hi)
      throw DomainError("window [" + std::to_string(lo) + ", " + std::to_string(hi) + ") of '" + name +
                        "' is not fully assigned");
    auto first = std::lower_bound(ex.runs.begin(), ex.runs.end(), lo,
                                  [](const auto& r, std::int64_t v) { return r.second <= v; });
    std::vector<std::pair<std::int64_t, std::int64_t>> hit;
    for (auto it = first; it != ex.runs.end() && it->first < hi; ++it) hit.push_back(*it);
    return from_ranges(lo, hi, hit);
  }

  static WindowSummary summarize_body(const std::string&, const Cyclic& c, std::int64_t lo, std::int64_t hi) {
    const std::int64_t duty = c.end - c.start;
    std::int64_t n0 = detail::floor_div(lo - c.start, c.period) - 1;
    std::int64_t n1 = detail::floor_div(hi - c.start, c.period) + 1;
    if (n1 - n0 > 8) {
      // Whole cycles inside the window bound every run; only the total needs
      // the clipped ends.
      WindowSummary s;
      s.length = hi - lo;
      s.longest_true = duty;
      s.longest_false = c.period - duty;
      auto count_upto = [&](std::int64_t x) { // true units in [0, x) relative to an aligned origin
        std::int64_t full = detail::floor_div(x - c.start, c.period);
        std::int64_t rem = (x - c.start) - full * c.period;
        return full * duty + std::min(rem, duty);
      };
      s.total_true = count_upto(hi) - count_upto(lo);
      return s;
    }
    std::vector<std::pair<std::int64_t, std::int64_t>> ranges;
    for (std::int64_t n = n0; n <= n1; ++n) ranges.emplace_back(n * c.period + c.start, n * c.period + c.end);
    return from_ranges(lo, hi, ranges);
  }

  ScaleSystem scales_;
  int base_;
  std::map<std::string, Def> defs_;
};

/// Per-state truth of every fluent a schema machine mentions; fluents a
/// state leaves unannotated are undefined there.
struct SchemaStateReport {
  std::string state;
  std::map<std::string, Truth> fluents;
};

inline std::vector<SchemaStateReport> schema_eval(const Automaton& a) {
  std::set<std::string> names;
  for (StateId q = 0; q < a.size(); ++q)
    for (const auto& [f, _] : a.annotations(q)) names.insert(f);
  std::vector<SchemaStateReport> out;
  for (StateId q = 0; q < a.size(); ++q) {
    SchemaStateReport r{a.state_name(q), {}};
    const auto& ann = a.annotations(q);
    for (const auto& f : names) {
      auto it = ann.find(f);
      r.fluents[f] = it == ann.end() ? Truth::Undefined : (it->second ? Truth::True : Truth::False);
    }
    out.push_back(std::move(r));
  }
  return out;
}

inline std::vector<SchemaStateReport> schema_eval(Schema which) { return schema_eval(schema(which)); }

} // namespace cma
