#pragma once

#include <stdexcept>
#include <string>

namespace lorentzlab {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Violated geometric precondition or numerically corrupted state
// (e.g. a phase point inside a scatterer).
class GeometryError : public Error {
 public:
  using Error::Error;
};

// Invalid model parameters, malformed experiment files, unknown keys.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Rejection sampling exhausted or a degenerate sampling region.
class SamplingError : public Error {
 public:
  using Error::Error;
};

// Estimator preconditions not met (too few samples, bad tuning values).
class StatsError : public Error {
 public:
  using Error::Error;
};

}  // namespace lorentzlab
