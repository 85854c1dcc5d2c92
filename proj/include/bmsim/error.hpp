#pragma once

#include <stdexcept>
#include <string>

namespace bmsim {

// Base class for everything thrown deliberately by this library.
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed input: bad CSV/JSON, inconsistent scenario data, bad config.
struct ValidationError : Error {
  explicit ValidationError(const std::string& msg) : Error(msg) {}
};

// Well-formed input that cannot be dispatched (infeasible, unbounded, or
// the solver failed to converge).
struct SolveError : Error {
  explicit SolveError(const std::string& msg) : Error(msg) {}
};

}  // namespace bmsim
