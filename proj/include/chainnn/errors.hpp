#pragma once

#include <stdexcept>
#include <string>

namespace chainnn {

// Error categories map one-to-one onto CLI exit codes.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Chain/kMemory/iMemory capacity or planning failure.
class CapacityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Simulator detected a state the schedule validator should have excluded.
class SimulationFault : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class InvariantError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace chainnn
