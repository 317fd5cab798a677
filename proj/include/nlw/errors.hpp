#pragma once

#include <stdexcept>
#include <string>

namespace nlw {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Quadrature did not settle: the integrand is not integrable.
struct DivergentIntegral : Error {
  using Error::Error;
};

// Caller broke a documented precondition.
struct ContractViolation : Error {
  using Error::Error;
};

// Operation is not defined in the requested regime (e.g. expel bound with kappa = 0).
struct RegimeError : Error {
  using Error::Error;
};

struct ConfigError : Error {
  using Error::Error;
};

}  // namespace nlw
