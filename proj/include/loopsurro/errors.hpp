#pragma once

#include <stdexcept>
#include <string>

namespace loopsurro {

// All library failures derive from Error so callers can catch one type.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid argument combination or out-of-range knob.
class ConfigError : public Error {
 public:
  using Error::Error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

// A residual, Jacobian or input function produced a non-finite value.
class EvaluationError : public Error {
 public:
  using Error::Error;
};

// Loss or gradient became non-finite during training.
class DivergedError : public Error {
 public:
  using Error::Error;
};

class SelectionError : public Error {
 public:
  using Error::Error;
};

// Artifacts on disk disagree with each other (problem names, labels missing, ...).
class ConsistencyError : public Error {
 public:
  using Error::Error;
};

class SimulationError : public Error {
 public:
  using Error::Error;
};

class GenerationError : public Error {
 public:
  using Error::Error;
};

}  // namespace loopsurro
