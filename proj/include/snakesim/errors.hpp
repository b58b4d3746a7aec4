#pragma once

#include <stdexcept>
#include <string>

namespace snakesim {

// Bad input files, invalid fields, violated invariants. CLI exit code 2.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Numerical blow-up or singular dynamics during a rollout. CLI exit code 3.
class SimulationError : public std::runtime_error {
 public:
  explicit SimulationError(const std::string& what) : std::runtime_error(what) {}
};

// Non-finite quantities during training. CLI exit code 4.
class TrainingError : public std::runtime_error {
 public:
  explicit TrainingError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace snakesim
