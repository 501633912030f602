#pragma once

#include <stdexcept>
#include <string>

namespace mmdopt {

/// Input data is unusable: wrong shape, unreadable file, malformed contents.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An estimator cannot be evaluated on the given input (too few samples,
/// non-positive variance, ...).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace mmdopt
