#pragma once

#include <stdexcept>
#include <string>

namespace loadveil {

// Bad arguments or malformed external input (files, config, hyperparameters).
class InvalidInput : public std::invalid_argument {
 public:
  explicit InvalidInput(const std::string& what) : std::invalid_argument(what) {}
};

// Structurally valid input on which the requested quantity is undefined
// (zero entropy denominator, no edges, failed rebalance, ...).
class DegenerateInput : public std::runtime_error {
 public:
  explicit DegenerateInput(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace loadveil
