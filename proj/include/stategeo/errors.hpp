#pragma once

#include <stdexcept>
#include <string>

namespace stategeo {

/// Base of every error the library raises.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  [[nodiscard]] virtual const char* kind() const noexcept { return "error"; }
};

/// Invalid input: a precondition on the arguments does not hold.
class DomainError : public Error {
 public:
  using Error::Error;
  [[nodiscard]] const char* kind() const noexcept override { return "domain"; }
};

/// The inputs were valid but the computation could not produce a trustworthy value.
class NumericalFailure : public Error {
 public:
  using Error::Error;
  [[nodiscard]] const char* kind() const noexcept override { return "numerical"; }
};

/// An inner-product integral has no finite value (e.g. two plane waves under a translation kernel).
class DivergenceError : public NumericalFailure {
 public:
  using NumericalFailure::NumericalFailure;
  [[nodiscard]] const char* kind() const noexcept override { return "divergence"; }
};

/// Antipodal endpoints: the great circle through them is not unique.
class NonUniqueGeodesic : public NumericalFailure {
 public:
  using NumericalFailure::NumericalFailure;
  [[nodiscard]] const char* kind() const noexcept override { return "non_unique_geodesic"; }
};

}  // namespace stategeo
