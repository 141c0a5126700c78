#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace kincal {

class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Non-finite or out-of-range numeric input (angles, offsets, scales, thresholds).
class InvalidParameterError : public Error {
public:
  using Error::Error;
};

/// Vector or grid sizes that do not agree with the kinematic model or each other.
class DimensionError : public Error {
public:
  using Error::Error;
};

class InvalidInputError : public Error {
public:
  using Error::Error;
};

class ConfigurationError : public Error {
public:
  using Error::Error;
};

class ExtrapolationError : public Error {
public:
  using Error::Error;
};

class IoError : public Error {
public:
  using Error::Error;
};

/// Malformed file content. Carries the file and the 1-based line of the offending record.
class ParseError : public Error {
public:
  ParseError(const std::string& file, std::size_t line, const std::string& what)
      : Error(file + ":" + std::to_string(line) + ": " + what), file_(file), line_(line) {}

  const std::string& file() const noexcept { return file_; }
  std::size_t line() const noexcept { return line_; }

private:
  std::string file_;
  std::size_t line_;
};

/// Normal equations without full rank over the free parameters.
class SingularSystemError : public Error {
public:
  SingularSystemError(const std::string& what, std::vector<std::size_t> indices)
      : Error(what), indices_(std::move(indices)) {}

  /// Packed-vector indices of the parameters the data does not constrain.
  const std::vector<std::size_t>& unconstrained() const noexcept { return indices_; }

private:
  std::vector<std::size_t> indices_;
};

/// The ICP loop could not proceed, e.g. no dataset pair produced a validated match.
class CalibrationError : public Error {
public:
  using Error::Error;
};

}  // namespace kincal
