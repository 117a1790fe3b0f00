#include <algorithm>

#include "onebit/kernels/sov.hpp"

namespace onebit::kernels {

namespace {

double sov_sum_scalar(const SovProblem& problem, const double* points, std::size_t stride,
                      std::size_t count) {
  const int dim = problem.dim;
  const double* coef = problem.coef;
  double y[kMaxSovDim];
  double sum = 0.0;
  for (std::size_t n = 0; n < count; ++n) {
    double e = 0.5;
    double f = 0.5;
    for (int i = 1; i < dim; ++i) {
      const double w = points[static_cast<std::size_t>(i - 1) * stride + n];
      y[i - 1] = normal_quantile(std::clamp(w * e, kQuantileFloor, kQuantileCeil));
      double s = 0.0;
      const double* row = coef + static_cast<std::size_t>(i) * dim;
      for (int j = 0; j < i; ++j) s += row[j] * y[j];
      e = normal_cdf(-s);
      f *= e;
    }
    sum += f;
  }
  return sum;
}

void cdf_batch_scalar(const double* in, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = normal_cdf(in[i]);
}

void quantile_batch_scalar(const double* in, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = normal_quantile(in[i]);
}

}  // namespace

const KernelTable& scalar_kernels() {
  static const KernelTable table{"scalar", &sov_sum_scalar, &cdf_batch_scalar,
                                 &quantile_batch_scalar};
  return table;
}

}  // namespace onebit::kernels
