#pragma once

#include <stdexcept>
#include <string>

namespace mrx {

// Bad or inconsistent configuration: dimension mismatches, out-of-range
// parameters, malformed config/parameter files.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A query was made from a cell that does not admit it (e.g. BFS from a
// non-free source).
class InvalidSource : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A metric was requested on a record for which it is not defined.
class UndefinedMetric : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

}  // namespace mrx
