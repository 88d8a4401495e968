#pragma once

#include <stdexcept>
#include <string>

namespace ttc {

// Input outside the domain of a closed-form relation (non-positive depth,
// zero TTC, scale factor <= 0, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Quantity is not determined by the inputs (pixel at the FOE with no flow,
// FOE of a motion without a depth component).
class IndeterminateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Malformed configuration, scene description or sweep.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Requested TTC / scale lies outside the range the classifier was trained on.
class OutOfRangeError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

}  // namespace ttc
