#pragma once

#include <stdexcept>
#include <string>

namespace gfolio {

// Error taxonomy, mirrored by CLI exit codes:
//   config_error -> 1, data_error -> 2, numeric_error / shape_error -> 3.

struct config_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct data_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct numeric_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct shape_error : std::logic_error {
  using std::logic_error::logic_error;
};

}  // namespace gfolio
