#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace ident {

// Root of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed graph, table or file contents.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

class UnknownVertex : public InvalidInput {
 public:
  explicit UnknownVertex(const std::string& name)
      : InvalidInput("unknown vertex '" + name + "'"), name_(name) {}
  const std::string& name() const { return name_; }

 private:
  std::string name_;
};

class CycleDetected : public InvalidInput {
 public:
  explicit CycleDetected(std::vector<std::string> cycle);
  const std::vector<std::string>& cycle() const { return cycle_; }

 private:
  std::vector<std::string> cycle_;
};

// Query that does not make sense against the graph (overlapping sets, ...).
class InvalidQuery : public Error {
 public:
  using Error::Error;
};

// Attempt to fix a vertex that is not fixable. `step` is 1-based when the
// failure happened while replaying a sequence, 0 otherwise.
class FixabilityViolation : public Error {
 public:
  FixabilityViolation(const std::string& vertex, std::size_t step);
  const std::string& vertex() const { return vertex_; }
  std::size_t step() const { return step_; }

 private:
  std::string vertex_;
  std::size_t step_;
};

class PreconditionViolation : public Error {
 public:
  using Error::Error;
};

class EvaluationError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t position)
      : Error(what), position_(position) {}
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

}  // namespace ident
