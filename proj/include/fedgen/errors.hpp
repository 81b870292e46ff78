#pragma once

#include <stdexcept>

namespace fedgen {

// Bad hyperparameters, infeasible sizes, malformed experiment configs.
struct config_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bad inputs: vocabulary mismatches, empty datasets, unreadable files.
struct data_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Non-finite values where finite ones are required.
struct numeric_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Parameter layout mismatches between models that must be combinable.
struct structural_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace fedgen
