#pragma once

#include <stdexcept>
#include <string>

namespace spectra {

struct invalid_parameter : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct tolerance_not_met : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct resource_limit : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw invalid_parameter(msg);
}

}  // namespace spectra
