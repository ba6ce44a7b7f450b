#pragma once

#include <stdexcept>

namespace ifmsan {

/// Base class for every error thrown by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shape or length mismatch: tensor construction, fold, layer wiring.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Invalid argument value: zero window size, negative gamma, empty records.
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// Inconsistent run configuration: unknown layer names, plan conflicts.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Unreadable or malformed files: tensor framing, manifests, sweep CSVs.
class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace ifmsan
