#pragma once

#include <stdexcept>
#include <string>

namespace specinfer {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Broken diagram invariants: ordering violations, foreign handles, width
/// mismatches.
class StructuralError : public Error {
public:
  using Error::Error;
};

/// Arguments outside an operation's domain (bad encodings, non-dyadic
/// probabilities, alphabet mismatches, ...).
class DomainError : public Error {
public:
  using Error::Error;
};

/// A demonstration step that the dynamics cannot produce.
class ImpossibleTransition : public DomainError {
public:
  ImpossibleTransition(std::string what, std::size_t demo, std::size_t step)
      : DomainError(std::move(what)), demo_(demo), step_(step) {}

  std::size_t demo() const noexcept { return demo_; }
  std::size_t step() const noexcept { return step_; }

private:
  std::size_t demo_;
  std::size_t step_;
};

/// Malformed input text (world, demo, config or spec expression).
class ParseError : public Error {
public:
  using Error::Error;
};

/// Engine limits exceeded (variable width, node capacity).
class ResourceError : public Error {
public:
  using Error::Error;
};

} // namespace specinfer
