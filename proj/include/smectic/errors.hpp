#pragma once

#include <stdexcept>
#include <string>

namespace smectic {

/// A numerical procedure failed to produce a trustworthy result
/// (step-size underflow, loss of bounds, insufficient span).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace smectic
