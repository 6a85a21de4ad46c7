#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace dshape {

// Raised when a caller violates a documented precondition.
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Game-spec document failed schema or invariant validation.
class LoadError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// step() was handed an action outside valid_actions().
class InvalidActionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Textual knowledge graph could not be parsed.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, std::string text, const std::string& what)
      : std::runtime_error(what), line_(line), text_(std::move(text)) {}

  std::size_t line() const { return line_; }
  const std::string& text() const { return text_; }

 private:
  std::size_t line_;
  std::string text_;
};

class OracleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UpdateError : public std::runtime_error {
 public:
  UpdateError(std::size_t trajectory, const std::string& what)
      : std::runtime_error(what), trajectory_(trajectory) {}
  std::size_t trajectory() const { return trajectory_; }

 private:
  std::size_t trajectory_;
};

}  // namespace dshape
