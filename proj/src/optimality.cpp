#include "onebit/optimality.hpp"

#include <cmath>
#include <vector>

#include "onebit/errors.hpp"

namespace onebit {

OptimalityVerdict single_partner_pattern(const Mat& c, double abs_threshold) {
  if (c.rows() != c.cols()) throw DimensionError("single_partner_pattern: matrix must be square");
  OptimalityVerdict verdict;
  verdict.tolerance_used = abs_threshold;
  for (Eigen::Index i = 0; i < c.rows(); ++i) {
    int first = -1;
    for (Eigen::Index l = 0; l < c.cols(); ++l) {
      if (l == i || std::abs(c(i, l)) <= abs_threshold) continue;
      if (first < 0) {
        first = static_cast<int>(l);
        continue;
      }
      verdict.optimal = false;
      verdict.witness = OptimalityWitness{static_cast<int>(i), first, static_cast<int>(l),
                                          std::abs(c(i, first)), std::abs(c(i, l))};
      return verdict;
    }
  }
  return verdict;
}

OptimalityVerdict is_blmmse_optimal(const SecondOrderStats& stats, const SystemDims& dims, double eps) {
  const Eigen::Index n = dims.observation_length();
  if (stats.d_r.rows() != n || stats.d_i.rows() != n)
    throw DimensionError("is_blmmse_optimal: statistics do not match the dimensions");
  if (!(eps > 0.0)) throw DomainError("is_blmmse_optimal: eps must be positive");
  double scale = 0.0;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index k = 0; k < n; ++k) scale = std::max(scale, std::hypot(stats.d_r(i, k), stats.d_i(i, k)));
  // |C| for the all-(+1+j) pattern; other patterns share the magnitudes.
  Mat mag(2 * n, 2 * n);
  mag << stats.d_r.cwiseAbs(), stats.d_i.transpose().cwiseAbs(), stats.d_i.cwiseAbs(), stats.d_r.cwiseAbs();
  return single_partner_pattern(mag, eps * scale);
}

}  // namespace onebit
