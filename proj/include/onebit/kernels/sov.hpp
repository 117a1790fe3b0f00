#pragma once

// Data-parallel kernels behind the numeric orthant engine.
//
// Every kernel has a portable scalar reference and, on x86-64, an AVX2/FMA
// variant processing four lattice points per instruction. The variant is
// picked once at runtime (CPUID); ONEBIT_KERNELS=scalar in the environment
// forces the reference. Both variants evaluate the same approximations, so
// they agree to rounding (tests/test_kernels.cpp).
//
// This header is included by the AVX2 translation unit and must stay free of
// inline code.

#include <cstddef>

namespace onebit::kernels {

inline constexpr int kMaxSovDim = 32;

// Sequential-conditioning integrand for P(X_1 <= 0, ..., X_d <= 0) with the
// Cholesky factor already scaled row-wise: coef[i*dim + j] = l_ij / l_ii for
// j < i. The integrand at w in [0,1]^(d-1) is
//   f(w) = prod_i e_i,  e_0 = 1/2,  y_i = Phi^{-1}(w_i e_i),
//   e_i = Phi(-sum_{j<i} coef_ij y_j).
struct SovProblem {
  int dim = 0;
  const double* coef = nullptr;
};

// Sum of f over `count` points. Coordinate i of point n is
// points[i * stride + n], i < dim - 1.
using SovSumFn = double (*)(const SovProblem& problem, const double* points, std::size_t stride,
                            std::size_t count);
using BatchFn = void (*)(const double* in, double* out, std::size_t n);

struct KernelTable {
  const char* name;
  SovSumFn sov_sum;
  BatchFn normal_cdf;
  BatchFn normal_quantile;
};

const KernelTable& scalar_kernels();
// nullptr when the AVX2 variant was not compiled in or the CPU lacks AVX2+FMA.
const KernelTable* avx2_kernels();
const KernelTable& active_kernels();

// Scalar reference functions.
// Standard normal CDF (Hart 1968 rational/continued-fraction form; ~1e-15
// absolute accuracy).
double normal_cdf(double x);
// Standard normal quantile (Wichura AS241; ~1e-16 relative accuracy).
// Returns -inf/+inf at 0/1 and NaN outside [0, 1].
double normal_quantile(double p);
double normal_pdf(double x);

// Clamp range applied to quantile arguments inside the integrand.
inline constexpr double kQuantileFloor = 1e-300;
inline constexpr double kQuantileCeil = 1.0 - 0x1.0p-53;

}  // namespace onebit::kernels
