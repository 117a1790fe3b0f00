#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "onebit/linalg.hpp"

namespace onebit {

// Largest block the quasi-random engine accepts. Independent blocks are
// split off first, so this bounds the largest coupled block, not the
// overall dimension.
inline constexpr int kMaxOrthantDim = 16;

// Knobs shared by every orthant evaluation.
struct NumericPolicy {
  double rel_tol = 1e-4;                  // target relative accuracy of numeric integrals
  std::uint64_t max_samples = 10'000'000; // total integrand evaluations per integral
  std::uint64_t seed = 0x0b17'5eedULL;    // randomisation of the lattice shifts
  bool closed_forms = true;               // arcsin formulas for blocks of size <= 3
  bool split_blocks = true;               // factor independent blocks before integrating
};

struct OrthantRequest {
  Mat psi;  // symmetric positive definite covariance
  NumericPolicy policy;
};

enum class OrthantMethod { ClosedForm, QuasiRandom };

struct OrthantResult {
  double probability = 0.0;
  double error_estimate = 0.0;  // absolute, one standard error (0 for closed forms)
  std::uint64_t samples = 0;
  OrthantMethod method = OrthantMethod::ClosedForm;
};

struct Standardized {
  Mat corr;   // unit diagonal
  Vec scale;  // psi = diag(scale) corr diag(scale)
};

// DomainError when psi is not symmetric (1e-12) or not positive definite.
Standardized standardize(const Mat& psi);

// P(X > 0) for X ~ N(0, psi). Exact for blocks of size <= 3 (when enabled);
// otherwise sequential conditioning with randomly shifted lattice points,
// iterated until three standard errors fall below rel_tol * estimate.
// Throws AccuracyError when max_samples runs out first and CapabilityError
// for coupled blocks larger than kMaxOrthantDim.
OrthantResult orthant_probability(const OrthantRequest& request);
OrthantResult orthant_probability(const Mat& psi, const NumericPolicy& policy = {});

enum class MeanMethod { ClosedForm, Reduction, CharacteristicFunction, MonteCarlo };

struct TruncatedMeanResult {
  Vec mean;                  // E[z | z > 0] for density ∝ exp(-z^T C z)
  double normalizer = 0.0;   // ∫_{z>0} exp(-z^T C z) dz
  double probability = 0.0;  // P(C^{-1}) = normalizer |C|^{1/2} / π^{L/2}
  double rel_error = 0.0;    // relative standard error bound on the mean components
  MeanMethod method = MeanMethod::ClosedForm;
};

// Mean of the positively truncated Gaussian with precision-like matrix C
// (covariance ½C^{-1}). Uses the integration-by-parts reduction
//   mean = C^{-1} diag(C^{-1})^{-1/2} g / (2 √π P(C^{-1})),
//   g_k = P((C_{-k})^{-1}),
// where C_{-k} drops row and column k. When C^{-1} w cancels by a factor
// kappa, numeric g_k are re-integrated at rel_tol / kappa so that rel_tol
// holds for the mean and not only for each integral.
TruncatedMeanResult positive_orthant_mean(const Mat& c, const NumericPolicy& policy = {});

// Unnormalised first moments ∫_{u>0} u_i p(u) du of a standardised bivariate
// normal with correlation psi12, from its characteristic function:
// I_1 = I_2 = (1 + psi12) / (2 √(2π)). DomainError if |psi12| > 1.
std::array<double, 2> truncated_mean_cf_2d(double psi12);

// I / P for the same bivariate problem. DomainError at psi12 = -1 where the
// orthant carries no mass.
std::array<double, 2> cf_mean_2d(double psi12);

// Connected components of the graph with an edge wherever
// |m_ij| > rel_tol * sqrt(|m_ii m_jj|). Indices ascending within a block,
// blocks ordered by their first index.
std::vector<std::vector<int>> independent_blocks(const Mat& m, double rel_tol = 1e-10);

// arcsin with inputs up to 1e-12 outside [-1, 1] clamped; DomainError beyond.
double clamped_asin(double x);

}  // namespace onebit
