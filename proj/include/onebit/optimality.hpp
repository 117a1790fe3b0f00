#pragma once

#include <optional>

#include "onebit/core_model.hpp"
#include "onebit/linalg.hpp"

namespace onebit {

// Two off-diagonal entries of C sharing a row.
struct OptimalityWitness {
  int row = 0;
  int col_a = 0;
  int col_b = 0;
  double mag_a = 0.0;
  double mag_b = 0.0;
};

struct OptimalityVerdict {
  bool optimal = true;
  std::optional<OptimalityWitness> witness;  // present iff !optimal
  double tolerance_used = 0.0;               // absolute threshold on |C_il|
};

// The Bussgang linear estimator coincides with the MMSE estimator iff every
// row of C has at most one non-zero off-diagonal entry. Sign patterns only
// flip signs in C, so the test reads the magnitudes of D_R and D_I directly.
// Entries count as zero when below eps times the largest |entry| of Ω_b^{-1}.
OptimalityVerdict is_blmmse_optimal(const SecondOrderStats& stats, const SystemDims& dims, double eps = 1e-10);

// Same test on an explicit C with an absolute threshold.
OptimalityVerdict single_partner_pattern(const Mat& c, double abs_threshold);

}  // namespace onebit
