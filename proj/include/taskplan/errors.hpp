#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace taskplan {

/// Malformed map text. `line()` is 1-based.
class ParseError : public std::runtime_error {
public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

private:
  std::size_t line_;
};

class GenerationError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Vertex outside the map, on an obstacle, or outside a robot's graph.
class InvalidVertexError : public std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Both vertices are valid but lie in different components.
class NoPathError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

class InvalidPathError : public std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// A precondition of a solver call was violated by the caller.
class ContractError : public std::logic_error {
  using std::logic_error::logic_error;
};

/// A task that no robot can reach.
class InfeasibleTaskError : public std::runtime_error {
public:
  InfeasibleTaskError(std::size_t task, const std::string& what)
      : std::runtime_error(what), task_(task) {}
  std::size_t task() const { return task_; }

private:
  std::size_t task_;
};

}  // namespace taskplan
