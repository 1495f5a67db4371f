#pragma once

#include <stdexcept>
#include <string>

namespace dta {

// Base class for every error thrown by the library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed DAG text. Positions are 1-based.
struct ParseError : Error {
  ParseError(const std::string& msg, int line_, int col_)
      : Error(std::to_string(line_) + ":" + std::to_string(col_) + ": " + msg),
        line(line_),
        col(col_) {}
  int line;
  int col;
};

// Structural validation failure: duplicate node, cycle, bad CPT shape, role misuse.
struct ValidationError : Error {
  using Error::Error;
};

// A name that does not exist in the graph or table at hand.
struct UnknownNodeError : Error {
  using Error::Error;
};

// Arithmetic failure: zero-probability conditioning, degenerate margin,
// model inconsistent with its inputs.
struct NumericError : Error {
  using Error::Error;
};

// Operation exceeds a documented size cap.
struct LimitError : Error {
  using Error::Error;
};

}  // namespace dta
