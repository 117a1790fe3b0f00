#include <cmath>
#include <limits>
#include <numbers>

#include "onebit/kernels/sov.hpp"
#include "normal_coefficients.hpp"

namespace onebit::kernels {

namespace {

template <std::size_t N>
inline double horner(const double (&c)[N], double x) {
  double r = c[0];
  for (std::size_t i = 1; i < N; ++i) r = r * x + c[i];
  return r;
}

}  // namespace

double normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }

double normal_cdf(double x) {
  using namespace coeff;
  const double ax = std::fabs(x);
  double tail;
  if (ax > kCdfZeroBeyond) {
    tail = 0.0;
  } else {
    const double e = std::exp(-0.5 * ax * ax);
    if (ax < kCdfSplit) {
      tail = e * horner(kCdfNum, ax) / horner(kCdfDen, ax);
    } else {
      double b = ax + 0.65;
      b = ax + 4.0 / b;
      b = ax + 3.0 / b;
      b = ax + 2.0 / b;
      b = ax + 1.0 / b;
      tail = e / b / kSqrt2Pi;
    }
  }
  return x > 0.0 ? 1.0 - tail : tail;
}

double normal_quantile(double p) {
  using namespace coeff;
  if (std::isnan(p) || p < 0.0 || p > 1.0) return std::numeric_limits<double>::quiet_NaN();
  if (p == 0.0) return -std::numeric_limits<double>::infinity();
  if (p == 1.0) return std::numeric_limits<double>::infinity();
  const double q = p - 0.5;
  if (std::fabs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    return q * horner(kQuantA, r) / horner(kQuantB, r);
  }
  double r = std::sqrt(-std::log(q < 0.0 ? p : 1.0 - p));
  double v;
  if (r <= 5.0) {
    r -= 1.6;
    v = horner(kQuantC, r) / horner(kQuantD, r);
  } else {
    r -= 5.0;
    v = horner(kQuantE, r) / horner(kQuantF, r);
  }
  return q < 0.0 ? -v : v;
}

}  // namespace onebit::kernels
