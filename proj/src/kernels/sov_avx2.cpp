// AVX2/FMA variants of the orthant kernels. Compiled with -mavx2 -mfma and
// reached only through the dispatch table; keep this file free of shared
// inline code (templates, std algorithms) so no AVX2 instructions leak into
// symbols used by the scalar path.

#include <immintrin.h>

#include <cstdint>

#include "normal_coefficients.hpp"
#include "onebit/kernels/sov.hpp"

namespace onebit::kernels {

namespace {

using v4 = __m256d;

inline v4 set1(double x) { return _mm256_set1_pd(x); }

template <int N>
inline v4 horner(const double (&c)[N], v4 x) {
  v4 r = set1(c[0]);
  for (int i = 1; i < N; ++i) r = _mm256_fmadd_pd(r, x, set1(c[i]));
  return r;
}

inline v4 vabs(v4 x) { return _mm256_andnot_pd(set1(-0.0), x); }

// 1.5 * 2^52: adding it to a double in (-2^51, 2^51) leaves the rounded
// integer in the low mantissa bits.
constexpr double kMagic = 6755399441055744.0;

inline v4 vexp(v4 x) {
  using namespace coeff;
  x = _mm256_min_pd(_mm256_max_pd(x, set1(-708.0)), set1(709.0));
  const v4 n = _mm256_round_pd(_mm256_mul_pd(x, set1(1.4426950408889634073599)),
                               _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  v4 r = _mm256_fnmadd_pd(n, set1(kLn2Hi), x);
  r = _mm256_fnmadd_pd(n, set1(kLn2Lo), r);
  const v4 rr = _mm256_mul_pd(r, r);
  const v4 px = _mm256_mul_pd(r, horner(kExpP, rr));
  const v4 qx = horner(kExpQ, rr);
  v4 y = _mm256_div_pd(px, _mm256_sub_pd(qx, px));
  y = _mm256_fmadd_pd(y, set1(2.0), set1(1.0));
  const __m256i ni = _mm256_sub_epi64(_mm256_castpd_si256(_mm256_add_pd(n, set1(kMagic))),
                                      _mm256_castpd_si256(set1(kMagic)));
  const __m256i bits = _mm256_slli_epi64(_mm256_add_epi64(ni, _mm256_set1_epi64x(1023)), 52);
  return _mm256_mul_pd(y, _mm256_castsi256_pd(bits));
}

// Natural log for positive normal inputs.
inline v4 vlog(v4 x) {
  using namespace coeff;
  const __m256i bits = _mm256_castpd_si256(x);
  const __m256i exp_bits = _mm256_and_si256(_mm256_srli_epi64(bits, 52), _mm256_set1_epi64x(0x7ff));
  const __m256i e_int = _mm256_sub_epi64(exp_bits, _mm256_set1_epi64x(1022));
  v4 e = _mm256_sub_pd(
      _mm256_castsi256_pd(_mm256_add_epi64(e_int, _mm256_castpd_si256(set1(kMagic)))),
      set1(kMagic));
  const __m256i mant_bits =
      _mm256_or_si256(_mm256_and_si256(bits, _mm256_set1_epi64x(0x000fffffffffffffLL)),
                      _mm256_set1_epi64x(0x3fe0000000000000LL));
  const v4 m = _mm256_castsi256_pd(mant_bits);  // [0.5, 1)
  const v4 small = _mm256_cmp_pd(m, set1(0.70710678118654752440), _CMP_LT_OQ);
  e = _mm256_sub_pd(e, _mm256_and_pd(small, set1(1.0)));
  const v4 t = _mm256_sub_pd(_mm256_add_pd(m, _mm256_and_pd(small, m)), set1(1.0));
  const v4 z = _mm256_mul_pd(t, t);
  v4 y = _mm256_mul_pd(_mm256_mul_pd(t, z), _mm256_div_pd(horner(kLogP, t), horner(kLogQ, t)));
  y = _mm256_fmadd_pd(e, set1(-2.121944400546905827679e-4), y);
  y = _mm256_fnmadd_pd(z, set1(0.5), y);
  v4 res = _mm256_add_pd(t, y);
  return _mm256_fmadd_pd(e, set1(0.693359375), res);
}

inline v4 vcdf(v4 x) {
  using namespace coeff;
  const v4 ax = vabs(x);
  const v4 e = vexp(_mm256_mul_pd(set1(-0.5), _mm256_mul_pd(ax, ax)));
  const v4 central = _mm256_div_pd(_mm256_mul_pd(e, horner(kCdfNum, ax)), horner(kCdfDen, ax));
  v4 b = _mm256_add_pd(ax, set1(0.65));
  b = _mm256_add_pd(ax, _mm256_div_pd(set1(4.0), b));
  b = _mm256_add_pd(ax, _mm256_div_pd(set1(3.0), b));
  b = _mm256_add_pd(ax, _mm256_div_pd(set1(2.0), b));
  b = _mm256_add_pd(ax, _mm256_div_pd(set1(1.0), b));
  const v4 far = _mm256_div_pd(_mm256_div_pd(e, b), set1(kSqrt2Pi));
  v4 tail = _mm256_blendv_pd(central, far, _mm256_cmp_pd(ax, set1(kCdfSplit), _CMP_GE_OQ));
  tail = _mm256_andnot_pd(_mm256_cmp_pd(ax, set1(kCdfZeroBeyond), _CMP_GT_OQ), tail);
  return _mm256_blendv_pd(tail, _mm256_sub_pd(set1(1.0), tail),
                          _mm256_cmp_pd(x, _mm256_setzero_pd(), _CMP_GT_OQ));
}

// Quantile for p strictly inside (0, 1).
inline v4 vquantile(v4 p) {
  using namespace coeff;
  const v4 q = _mm256_sub_pd(p, set1(0.5));
  const v4 rc = _mm256_fnmadd_pd(q, q, set1(0.180625));
  const v4 central = _mm256_div_pd(_mm256_mul_pd(q, horner(kQuantA, rc)), horner(kQuantB, rc));

  const v4 pm = _mm256_min_pd(p, _mm256_sub_pd(set1(1.0), p));
  // Central lanes may hold pm near 1/2; any positive value is safe here.
  const v4 r = _mm256_sqrt_pd(_mm256_sub_pd(_mm256_setzero_pd(), vlog(pm)));
  const v4 r1 = _mm256_sub_pd(r, set1(1.6));
  const v4 mid = _mm256_div_pd(horner(kQuantC, r1), horner(kQuantD, r1));
  const v4 r2 = _mm256_sub_pd(r, set1(5.0));
  const v4 far = _mm256_div_pd(horner(kQuantE, r2), horner(kQuantF, r2));
  v4 tail = _mm256_blendv_pd(mid, far, _mm256_cmp_pd(r, set1(5.0), _CMP_GT_OQ));
  const v4 neg = _mm256_cmp_pd(q, _mm256_setzero_pd(), _CMP_LT_OQ);
  tail = _mm256_blendv_pd(tail, _mm256_sub_pd(_mm256_setzero_pd(), tail), neg);
  return _mm256_blendv_pd(tail, central, _mm256_cmp_pd(vabs(q), set1(0.425), _CMP_LE_OQ));
}

inline v4 sov_block(int dim, const double* coef, const v4* w) {
  v4 y[kMaxSovDim];
  v4 e = set1(0.5);
  v4 f = e;
  for (int i = 1; i < dim; ++i) {
    v4 arg = _mm256_mul_pd(w[i - 1], e);
    arg = _mm256_min_pd(_mm256_max_pd(arg, set1(kQuantileFloor)), set1(kQuantileCeil));
    y[i - 1] = vquantile(arg);
    const double* row = coef + static_cast<std::size_t>(i) * dim;
    v4 s = _mm256_setzero_pd();
    for (int j = 0; j < i; ++j) s = _mm256_fmadd_pd(set1(row[j]), y[j], s);
    e = vcdf(_mm256_sub_pd(_mm256_setzero_pd(), s));
    f = _mm256_mul_pd(f, e);
  }
  return f;
}

double sov_sum_avx2(const SovProblem& problem, const double* points, std::size_t stride,
                    std::size_t count) {
  const int dim = problem.dim;
  v4 w[kMaxSovDim];
  v4 acc = _mm256_setzero_pd();
  std::size_t n = 0;
  for (; n + 4 <= count; n += 4) {
    for (int i = 0; i + 1 < dim; ++i)
      w[i] = _mm256_loadu_pd(points + static_cast<std::size_t>(i) * stride + n);
    acc = _mm256_add_pd(acc, sov_block(dim, problem.coef, w));
  }
  if (n < count) {
    const std::size_t rest = count - n;
    alignas(32) double lane[4];
    for (int i = 0; i + 1 < dim; ++i) {
      for (std::size_t k = 0; k < 4; ++k)
        lane[k] = k < rest ? points[static_cast<std::size_t>(i) * stride + n + k] : 0.5;
      w[i] = _mm256_load_pd(lane);
    }
    const v4 mask = _mm256_castsi256_pd(_mm256_cmpgt_epi64(
        _mm256_set1_epi64x(static_cast<long long>(rest)), _mm256_setr_epi64x(0, 1, 2, 3)));
    acc = _mm256_add_pd(acc, _mm256_and_pd(mask, sov_block(dim, problem.coef, w)));
  }
  alignas(32) double parts[4];
  _mm256_store_pd(parts, acc);
  return (parts[0] + parts[1]) + (parts[2] + parts[3]);
}

void cdf_batch_avx2(const double* in, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) _mm256_storeu_pd(out + i, vcdf(_mm256_loadu_pd(in + i)));
  if (i < n) {
    alignas(32) double buf[4] = {0.0, 0.0, 0.0, 0.0};
    for (std::size_t k = 0; i + k < n; ++k) buf[k] = in[i + k];
    _mm256_store_pd(buf, vcdf(_mm256_load_pd(buf)));
    for (std::size_t k = 0; i + k < n; ++k) out[i + k] = buf[k];
  }
}

// Same edge conventions as the scalar reference: 0 -> -inf, 1 -> +inf,
// NaN outside [0, 1].
void quantile_batch_avx2(const double* in, double* out, std::size_t n) {
  const double inf = __builtin_inf();
  for (std::size_t i = 0; i < n; i += 4) {
    alignas(32) double buf[4] = {0.5, 0.5, 0.5, 0.5};
    const std::size_t len = n - i < 4 ? n - i : 4;
    for (std::size_t k = 0; k < len; ++k) {
      const double p = in[i + k];
      buf[k] = (p > 0.0 && p < 1.0) ? p : 0.5;
    }
    _mm256_store_pd(buf, vquantile(_mm256_load_pd(buf)));
    for (std::size_t k = 0; k < len; ++k) {
      const double p = in[i + k];
      if (p > 0.0 && p < 1.0)
        out[i + k] = buf[k];
      else if (p == 0.0)
        out[i + k] = -inf;
      else if (p == 1.0)
        out[i + k] = inf;
      else
        out[i + k] = __builtin_nan("");
    }
  }
}

}  // namespace

const KernelTable& avx2_kernel_table() {
  static const KernelTable table{"avx2", &sov_sum_avx2, &cdf_batch_avx2, &quantile_batch_avx2};
  return table;
}

}  // namespace onebit::kernels
