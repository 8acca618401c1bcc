#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace stlu {

// Base class for everything thrown by this library.
struct error : std::runtime_error {
  explicit error(const std::string& msg) : std::runtime_error(msg) {}
};

// Formula text could not be lexed/parsed. `position` is a 0-based character
// offset into the input string.
struct parse_error : error {
  std::size_t position;
  parse_error(const std::string& msg, std::size_t pos)
      : error(msg + " (at position " + std::to_string(pos) + ")"), position(pos) {}
};

// A precondition of an operation was violated (bad argument ranges,
// misaligned lengths, unordered event lists, ...).
struct contract_error : error {
  using error::error;
};

// A file could not be opened or its syntax is malformed.
struct io_error : error {
  using error::error;
};

// Tabular input is not rectangular.
struct shape_error : error {
  using error::error;
};

// A parsed value is outside its domain (NaN, Inf, epsilon out of range, ...).
struct value_error : error {
  using error::error;
};

// The signal environment has no flowpipe registered for a (channel, epsilon)
// pair required by the formula.
struct env_error : error {
  using error::error;
};

// The flowpipe is too short to evaluate the formula at the requested time.
struct horizon_error : error {
  using error::error;
};

}  // namespace stlu
