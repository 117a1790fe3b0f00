#include "onebit/quantizer.hpp"

#include <cmath>

#include "onebit/errors.hpp"

namespace onebit {

namespace {

inline double sgn(double x) { return x < 0.0 ? -1.0 : 1.0; }

}  // namespace

QuantizedObservation QuantizedObservation::negated() const {
  return make_observation(-r);
}

QuantizedObservation QuantizedObservation::conjugated() const {
  return make_observation(r.conjugate());
}

QuantizedObservation quantize(const CVec& b) {
  if (b.size() == 0) throw DimensionError("quantize: empty input");
  QuantizedObservation out;
  out.r.resize(b.size());
  out.lambda_r.resize(b.size());
  out.lambda_i.resize(b.size());
  for (Eigen::Index k = 0; k < b.size(); ++k) {
    const double re = b[k].real();
    const double im = b[k].imag();
    if (std::isnan(re) || std::isnan(im)) throw DomainError("quantize: NaN in input");
    const double sr = sgn(re);
    const double si = sgn(im);
    out.r[k] = cplx(sr, si);
    out.lambda_r.diagonal()[k] = sr;
    out.lambda_i.diagonal()[k] = si;
  }
  return out;
}

std::pair<SignDiagonal, SignDiagonal> sign_diagonals(const CVec& r) {
  SignDiagonal lr(r.size());
  SignDiagonal li(r.size());
  for (Eigen::Index k = 0; k < r.size(); ++k) {
    const double re = r[k].real();
    const double im = r[k].imag();
    if ((re != 1.0 && re != -1.0) || (im != 1.0 && im != -1.0))
      throw DomainError("sign_diagonals: entry " + std::to_string(k) + " is not of the form ±1±j");
    lr.diagonal()[k] = re;
    li.diagonal()[k] = im;
  }
  return {lr, li};
}

QuantizedObservation make_observation(const CVec& r) {
  if (r.size() == 0) throw DimensionError("make_observation: empty observation");
  auto [lr, li] = sign_diagonals(r);
  return QuantizedObservation{r, std::move(lr), std::move(li)};
}

QuantizedObservation observation_from_index(int n, std::uint64_t index) {
  if (n < 1 || n > 31) throw DimensionError("observation_from_index: n must be in [1, 31]");
  CVec r(n);
  for (int k = 0; k < n; ++k) {
    const double re = ((index >> k) & 1u) ? -1.0 : 1.0;
    const double im = ((index >> (n + k)) & 1u) ? -1.0 : 1.0;
    r[k] = cplx(re, im);
  }
  return make_observation(r);
}

}  // namespace onebit
