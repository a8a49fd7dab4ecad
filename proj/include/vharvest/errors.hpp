#pragma once

#include <stdexcept>
#include <string>

namespace vharvest {

/// A parameter is outside its admissible domain. `field()` names it.
class ValidationError : public std::invalid_argument {
 public:
  ValidationError(std::string field, const std::string& what)
      : std::invalid_argument(field + ": " + what), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// A numerical routine failed (bracketing, quadrature, non-convergence).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A request the model does not support (e.g. black-out under Poisson traffic).
class UnsupportedModel : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace vharvest
