#pragma once

#include <stdexcept>
#include <string>

namespace gendervec {

// Each error family maps onto one CLI exit code.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ExitCode : int {
  success = 0,
  config_error = 2,
  data_error = 3,
  numerical_failure = 4,
};

}  // namespace gendervec
