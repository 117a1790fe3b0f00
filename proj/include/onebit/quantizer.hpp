#pragma once

#include <cstdint>
#include <utility>

#include "onebit/linalg.hpp"

namespace onebit {

using SignDiagonal = Eigen::DiagonalMatrix<double, Eigen::Dynamic>;

// Output of the 1-bit ADCs: r with entries in {±1 ± j}, and its real and
// imaginary sign diagonals Λ_R, Λ_I.
struct QuantizedObservation {
  CVec r;
  SignDiagonal lambda_r;
  SignDiagonal lambda_i;

  Eigen::Index size() const { return r.size(); }
  QuantizedObservation negated() const;
  QuantizedObservation conjugated() const;
};

// sgn(Re b_k) + j sgn(Im b_k) with sgn(0) = +1. NaN input -> DomainError.
QuantizedObservation quantize(const CVec& b);

// Throws DomainError unless every entry is exactly ±1 ± j.
std::pair<SignDiagonal, SignDiagonal> sign_diagonals(const CVec& r);

// Wraps an already-quantised vector after validating it.
QuantizedObservation make_observation(const CVec& r);

// Sign pattern number `index` (0 <= index < 4^n): bit k sets the real sign of
// entry k, bit n + k its imaginary sign (bit set means -1).
QuantizedObservation observation_from_index(int n, std::uint64_t index);

}  // namespace onebit
