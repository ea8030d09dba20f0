#pragma once

#include <cmath>

namespace sgdbench {

// sigma(u) = e^u / (1 + e^u), evaluated without overflow for any finite u.
// For u <= 0 the exponent is bounded by 1; for u > 0 we use the reciprocal
// form. Underflow to subnormals (u around -745) is well defined.
inline double stable_sigmoid(double u) {
  if (u <= 0.0) {
    double e = std::exp(u);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(-u));
}

// log(1 + e^u) without overflow: for large positive u this is u + log1p(e^-u).
inline double stable_softplus(double u) {
  if (u > 0.0) return u + std::log1p(std::exp(-u));
  return std::log1p(std::exp(u));
}

}  // namespace sgdbench
