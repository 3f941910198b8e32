#pragma once

#include <stdexcept>
#include <string>

namespace weakiv {

// Base class for all library errors. Each subclass names the failure mode;
// the CLI maps them onto exit codes (data errors vs numerical errors).
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Shape or identification-count violations (e.g. k_z <= k_x).
class DimensionError : public Error {
 public:
  explicit DimensionError(const std::string& what) : Error("DimensionError: " + what) {}
};

// A matrix that must have full column rank does not, at the relative
// singular-value tolerance.
class RankError : public Error {
 public:
  explicit RankError(const std::string& what) : Error("RankError: " + what) {}
};

class NonFiniteError : public Error {
 public:
  explicit NonFiniteError(const std::string& what) : Error("NonFiniteError: " + what) {}
};

// A required inverse or factorization failed numerically.
class SingularityError : public Error {
 public:
  explicit SingularityError(const std::string& what) : Error("SingularityError: " + what) {}
};

class ConvergenceError : public Error {
 public:
  explicit ConvergenceError(const std::string& what) : Error("ConvergenceError: " + what) {}
};

// Invalid instrument partition (bad index set, or just-identifying block
// singular for every admissible rotation).
class PartitionError : public Error {
 public:
  explicit PartitionError(const std::string& what) : Error("PartitionError: " + what) {}
};

class UnsupportedError : public Error {
 public:
  explicit UnsupportedError(const std::string& what) : Error("UnsupportedError: " + what) {}
};

class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what) : Error("DomainError: " + what) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error("ConfigError: " + what) {}
};

class ParseError : public Error {
 public:
  explicit ParseError(const std::string& what) : Error("ParseError: " + what) {}
};

// Interior missing value in a time-series panel (only end trimming is allowed).
class GapError : public Error {
 public:
  explicit GapError(const std::string& what) : Error("GapError: " + what) {}
};

class SchemaError : public Error {
 public:
  explicit SchemaError(const std::string& what) : Error("SchemaError: " + what) {}
};

}  // namespace weakiv
