#pragma once

#include <stdexcept>
#include <string>

namespace ud {

// Shape disagreement between tensors or layers.
struct DimensionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// API misuse: wrong call order, out-of-range arguments.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed input file. Messages carry the line number where known.
struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Invalid or inconsistent run configuration. Messages name the key.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// NaN/Inf encountered during training or inference.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace ud
