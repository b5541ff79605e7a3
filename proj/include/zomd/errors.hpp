#pragma once

#include <stdexcept>
#include <string>

namespace zomd {

/// Dimension below the supported minimum (n < 2).
class InvalidDimension : public std::invalid_argument {
 public:
  explicit InvalidDimension(std::size_t n)
      : std::invalid_argument("invalid dimension n=" + std::to_string(n) + " (need n >= 2)") {}
};

/// A query point or parameter left the region where the problem (or a
/// tuning rule) is valid, e.g. x + mu*e outside the mu0-neighbourhood.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

inline void require_dimension(std::size_t n) {
  if (n < 2) throw InvalidDimension(n);
}

}  // namespace zomd
