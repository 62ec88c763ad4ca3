#pragma once

#include <stdexcept>
#include <string>

namespace benchcut {

// Base class for everything thrown by this library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : Error {
  using Error::Error;
};

// Malformed input data; message carries a 1-based line number where known.
struct ParseError : Error {
  using Error::Error;
};

struct UsageError : Error {
  using Error::Error;
};

// HTTP transport failed after retries were exhausted.
struct TransportError : Error {
  using Error::Error;
};

struct AuthError : Error {
  using Error::Error;
};

struct TimeoutError : Error {
  using Error::Error;
};

// Response arrived but did not have the expected shape.
struct ProtocolError : Error {
  using Error::Error;
};

// Statistical operation undefined for the given input.
struct StatsError : Error {
  using Error::Error;
};

}  // namespace benchcut
