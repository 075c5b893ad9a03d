#pragma once

#include <stdexcept>
#include <string>

namespace cma {

// Every failure raised by the library derives from Error. kind() is a short
// stable tag used by the CLI for its machine-readable error line.
class Error : public std::runtime_error {
public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}

  const std::string& kind() const noexcept { return kind_; }

private:
  std::string kind_;
};

// Unknown state, symbol, fluent, word, malformed argument.
class DomainError : public Error {
public:
  explicit DomainError(const std::string& what) : Error("domain", what) {}
};

// A partial machine ran out of successors before the requested horizon.
class HaltError : public Error {
public:
  explicit HaltError(const std::string& what) : Error("halt", what) {}
};

class UnsupportedError : public Error {
public:
  explicit UnsupportedError(const std::string& what) : Error("unsupported", what) {}
};

class AmbiguityError : public Error {
public:
  explicit AmbiguityError(const std::string& what) : Error("ambiguity", what) {}
};

class InfeasibleError : public Error {
public:
  InfeasibleError(const std::string& what, double best_epsilon)
      : Error("infeasible", what), best_epsilon_(best_epsilon) {}

  double best_epsilon() const noexcept { return best_epsilon_; }

private:
  double best_epsilon_;
};

class BudgetError : public Error {
public:
  explicit BudgetError(const std::string& what) : Error("budget", what) {}
};

class ContradictionError : public Error {
public:
  explicit ContradictionError(const std::string& what) : Error("contradiction", what) {}
};

class ScaleError : public Error {
public:
  explicit ScaleError(const std::string& what) : Error("scale", what) {}
};

} // namespace cma
