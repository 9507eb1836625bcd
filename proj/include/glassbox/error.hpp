#pragma once

#include <stdexcept>
#include <string>

namespace glassbox {

// Raised for malformed inputs at API boundaries (grammar files, configs, bad
// trees, dimension mismatches). Evaluation failures are Bottom values instead.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace glassbox
