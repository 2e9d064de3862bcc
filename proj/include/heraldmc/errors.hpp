#pragma once

#include <stdexcept>
#include <string>

namespace heraldmc {

// Bad configuration or malformed input files. CLI maps this to exit code 2.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Failures raised while a simulation is running. CLI maps this to exit code 3.
struct ModelError : std::runtime_error {
  explicit ModelError(const std::string& what) : std::runtime_error(what) {}
};

struct BranchCapExceeded : ModelError {
  explicit BranchCapExceeded(const std::string& what) : ModelError(what) {}
};

// Raised when a counterfactual outcome is requested from a model that has no
// hidden variable propagating in spacetime to support it.
struct CounterfactualUndefined : ModelError {
  explicit CounterfactualUndefined(const std::string& what) : ModelError(what) {}
};

}  // namespace heraldmc
