#include "onebit/orthant.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "onebit/errors.hpp"
#include "onebit/kernels/sov.hpp"
#include "onebit/rng.hpp"

namespace onebit {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr int kShifts = 10;
constexpr std::size_t kChunk = 1024;
constexpr std::uint64_t kFirstRound = 1024;  // lattice points per shift in the first round

constexpr std::array<int, kernels::kMaxSovDim> kPrimes = {
    2,  3,  5,  7,  11, 13, 17, 19, 23, 29, 31,  37,  41,  43,  47,  53,
    59, 61, 67, 71, 73, 79, 83, 89, 97, 101, 103, 107, 109, 113, 127, 131};

// Richtmyer generator frac(sqrt(p)) in 64-bit fixed point.
std::uint64_t richtmyer_generator(int prime) {
  const long double root = std::sqrt(static_cast<long double>(prime));
  const long double frac = root - std::floor(root);
  return static_cast<std::uint64_t>(std::ldexp(frac, 64));
}

Mat submatrix(const Mat& m, const std::vector<int>& idx) {
  const auto n = static_cast<Eigen::Index>(idx.size());
  Mat out(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) out(i, j) = m(idx[i], idx[j]);
  return out;
}

Mat drop_index(const Mat& m, Eigen::Index k) {
  const Eigen::Index n = m.rows();
  Mat out(n - 1, n - 1);
  for (Eigen::Index i = 0, oi = 0; i < n; ++i) {
    if (i == k) continue;
    for (Eigen::Index j = 0, oj = 0; j < n; ++j) {
      if (j == k) continue;
      out(oi, oj++) = m(i, j);
    }
    ++oi;
  }
  return out;
}

void require_spd(const Mat& m, const char* what) {
  if (m.rows() == 0 || m.rows() != m.cols())
    throw DimensionError(std::string(what) + ": expected a non-empty square matrix");
  if (!m.allFinite()) throw DomainError(std::string(what) + ": non-finite entry");
  if (!is_symmetric(m, 1e-12)) throw DomainError(std::string(what) + ": matrix is not symmetric");
}

double closed_form_probability(const Mat& corr) {
  switch (corr.rows()) {
    case 1:
      return 0.5;
    case 2:
      return 0.25 + clamped_asin(corr(0, 1)) / (2.0 * kPi);
    case 3:
      return 0.125 + (clamped_asin(corr(0, 1)) + clamped_asin(corr(0, 2)) +
                      clamped_asin(corr(1, 2))) /
                         (4.0 * kPi);
    default:
      throw Error("closed-form orthant probability requested for dimension > 3");
  }
}

// Sequential-conditioning factor with the variable order that integrates the
// most constrained coordinate first: rows of the returned matrix hold
// l_ij / l_ii for the permuted problem.
Mat ordered_sov_coefficients(const Mat& corr) {
  const Eigen::Index n = corr.rows();
  Mat a = corr;
  Mat l = Mat::Zero(n, n);
  Vec ybar = Vec::Zero(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    Eigen::Index best = k;
    double best_mass = 2.0;
    for (Eigen::Index i = k; i < n; ++i) {
      double v = a(i, i);
      double mu = 0.0;
      for (Eigen::Index j = 0; j < k; ++j) {
        v -= l(i, j) * l(i, j);
        mu += l(i, j) * ybar(j);
      }
      const double s = std::sqrt(std::max(v, 1e-300));
      const double mass = kernels::normal_cdf(-mu / s);
      if (mass < best_mass) {
        best_mass = mass;
        best = i;
      }
    }
    if (best != k) {
      a.row(k).swap(a.row(best));
      a.col(k).swap(a.col(best));
      l.row(k).swap(l.row(best));
    }
    double v = a(k, k);
    for (Eigen::Index j = 0; j < k; ++j) v -= l(k, j) * l(k, j);
    if (!(v > 0.0)) throw DomainError("orthant_probability: covariance is not positive definite");
    l(k, k) = std::sqrt(v);
    for (Eigen::Index i = k + 1; i < n; ++i) {
      double s = a(i, k);
      for (Eigen::Index j = 0; j < k; ++j) s -= l(i, j) * l(k, j);
      l(i, k) = s / l(k, k);
    }
    double mu = 0.0;
    for (Eigen::Index j = 0; j < k; ++j) mu += l(k, j) * ybar(j);
    const double b = -mu / l(k, k);
    const double mass = std::max(kernels::normal_cdf(b), 1e-300);
    ybar(k) = -kernels::normal_pdf(b) / mass;
  }
  Mat coef = Mat::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < i; ++j) coef(i, j) = l(i, j) / l(i, i);
  return coef;
}

OrthantResult quasi_random_probability(const Mat& corr, const NumericPolicy& policy) {
  const int dim = static_cast<int>(corr.rows());
  if (dim > kMaxOrthantDim)
    throw CapabilityError("orthant_probability: coupled block of dimension " + std::to_string(dim) +
                          " exceeds the supported maximum of " + std::to_string(kMaxOrthantDim));
  if (!(policy.rel_tol > 0.0)) throw DomainError("orthant_probability: rel_tol must be positive");

  const Mat coef_mat = ordered_sov_coefficients(corr);
  std::vector<double> coef(static_cast<std::size_t>(dim) * dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) coef[static_cast<std::size_t>(i) * dim + j] = coef_mat(i, j);
  const kernels::SovProblem problem{dim, coef.data()};
  const auto& table = kernels::active_kernels();

  const int free_dims = dim - 1;
  std::array<std::uint64_t, kernels::kMaxSovDim> gen{};
  for (int i = 0; i < free_dims; ++i) gen[i] = richtmyer_generator(kPrimes[i]);
  std::array<std::array<std::uint64_t, kernels::kMaxSovDim>, kShifts> shift{};
  for (int k = 0; k < kShifts; ++k) {
    RandomStream stream(policy.seed, static_cast<std::uint64_t>(k));
    for (int i = 0; i < free_dims; ++i) shift[k][i] = stream.next_u64();
  }

  std::vector<double> points(static_cast<std::size_t>(std::max(free_dims, 1)) * kChunk);
  std::array<double, kShifts> sums{};
  std::uint64_t n_done = 0;
  std::uint64_t n_next = kFirstRound;
  double estimate = 0.0;
  double stderr_abs = 0.0;
  for (;;) {
    for (int k = 0; k < kShifts; ++k) {
      for (std::uint64_t start = n_done; start < n_next; start += kChunk) {
        const std::size_t count = static_cast<std::size_t>(std::min<std::uint64_t>(kChunk, n_next - start));
        for (int i = 0; i < free_dims; ++i) {
          double* row = points.data() + static_cast<std::size_t>(i) * kChunk;
          for (std::size_t p = 0; p < count; ++p) {
            const std::uint64_t x = (start + p) * gen[i] + shift[k][i];
            const double u = static_cast<double>(x >> 11) * 0x1.0p-53;
            row[p] = std::abs(2.0 * u - 1.0);
          }
        }
        sums[k] += table.sov_sum(problem, points.data(), kChunk, count);
      }
    }
    n_done = n_next;
    double mean = 0.0;
    for (double s : sums) mean += s / static_cast<double>(n_done);
    mean /= kShifts;
    double var = 0.0;
    for (double s : sums) {
      const double d = s / static_cast<double>(n_done) - mean;
      var += d * d;
    }
    var /= static_cast<double>(kShifts) * (kShifts - 1);
    estimate = mean;
    stderr_abs = std::sqrt(var);
    if (3.0 * stderr_abs <= policy.rel_tol * estimate) break;
    if (kShifts * 2 * n_done > policy.max_samples) {
      const double achieved = estimate > 0.0 ? 3.0 * stderr_abs / estimate : HUGE_VAL;
      throw AccuracyError("orthant_probability: sample budget of " + std::to_string(policy.max_samples) +
                              " exhausted before reaching the requested relative accuracy",
                          achieved, policy.rel_tol);
    }
    n_next = 2 * n_done;
  }
  return OrthantResult{estimate, stderr_abs, kShifts * n_done, OrthantMethod::QuasiRandom};
}

OrthantResult block_probability(const Mat& corr, const NumericPolicy& policy) {
  if (corr.rows() <= 3 && (policy.closed_forms || corr.rows() == 1))
    return OrthantResult{closed_form_probability(corr), 0.0, 0, OrthantMethod::ClosedForm};
  return quasi_random_probability(corr, policy);
}

struct BlockMean {
  Vec mean;
  double probability;
  double log_normalizer;
  double rel_error;
  bool numeric;
};

void absorb(const OrthantResult& r, double& rel_error, bool& numeric) {
  if (r.method == OrthantMethod::QuasiRandom) {
    numeric = true;
    if (r.probability > 0.0) rel_error = std::max(rel_error, r.error_estimate / r.probability);
  }
}

BlockMean block_mean(const Mat& c, const NumericPolicy& policy) {
  const Eigen::Index n = c.rows();
  Eigen::LLT<Mat> llt(c);
  if (llt.info() != Eigen::Success)
    throw DomainError("positive_orthant_mean: matrix is not positive definite");
  const Mat c_inv = llt.solve(Mat::Identity(n, n));
  double log_det = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) log_det += 2.0 * std::log(llt.matrixLLT()(i, i));

  double rel_error = 0.0;
  bool numeric = false;
  const OrthantResult p = orthant_probability(c_inv, policy);
  absorb(p, rel_error, numeric);

  Vec g = Vec::Ones(n);
  std::vector<Mat> sub_psi;
  std::vector<Eigen::Index> numeric_g;
  double g_error = 0.0;
  bool unused = false;
  for (Eigen::Index k = 0; n > 1 && k < n; ++k) {
    sub_psi.push_back(spd_inverse(drop_index(c, k)));
    const OrthantResult gk = orthant_probability(sub_psi.back(), policy);
    absorb(gk, g_error, unused);
    if (gk.method == OrthantMethod::QuasiRandom) numeric_g.push_back(k);
    g(k) = gk.probability;
  }
  const Vec inv_sd = c_inv.diagonal().cwiseSqrt().cwiseInverse();
  // C^{-1} w can cancel; kappa bounds the growth of relative errors in w.
  auto cancellation = [&](const Vec& w) {
    const Vec num = (c_inv * w).cwiseAbs();
    const Vec den = c_inv.cwiseAbs() * w.cwiseAbs();
    double kappa = 1.0;
    for (Eigen::Index i = 0; i < n; ++i) kappa = std::max(kappa, den(i) / num(i));
    return kappa;
  };
  double kappa = cancellation(g.cwiseProduct(inv_sd));
  if (!numeric_g.empty() && kappa > 1.0) {
    NumericPolicy fine = policy;
    fine.rel_tol = policy.rel_tol / kappa;
    g_error = 0.0;
    for (Eigen::Index k : numeric_g) {
      const OrthantResult gk = orthant_probability(sub_psi[static_cast<std::size_t>(k)], fine);
      absorb(gk, g_error, unused);
      g(k) = gk.probability;
    }
    kappa = cancellation(g.cwiseProduct(inv_sd));
  }
  numeric = numeric || !numeric_g.empty();
  rel_error += kappa * g_error;
  const Vec weighted = g.cwiseProduct(inv_sd);
  Vec mean = c_inv * weighted / (2.0 * std::sqrt(kPi) * p.probability);
  const double log_norm = 0.5 * static_cast<double>(n) * std::log(kPi) - 0.5 * log_det + std::log(p.probability);
  return BlockMean{std::move(mean), p.probability, log_norm, rel_error, numeric};
}

}  // namespace

double clamped_asin(double x) {
  if (std::isnan(x) || std::abs(x) > 1.0 + 1e-12)
    throw DomainError("arcsin argument outside [-1, 1]: " + std::to_string(x));
  return std::asin(std::clamp(x, -1.0, 1.0));
}

Standardized standardize(const Mat& psi) {
  require_spd(psi, "standardize");
  if (psi.diagonal().minCoeff() <= 0.0)
    throw DomainError("standardize: covariance has a non-positive diagonal entry");
  Eigen::LLT<Mat> llt(psi);
  if (llt.info() != Eigen::Success) throw DomainError("standardize: covariance is not positive definite");
  const Vec scale = psi.diagonal().cwiseSqrt();
  const Vec inv = scale.cwiseInverse();
  Mat corr = inv.asDiagonal() * psi * inv.asDiagonal();
  corr = 0.5 * (corr + corr.transpose()).eval();
  corr.diagonal().setOnes();
  return Standardized{std::move(corr), scale};
}

std::vector<std::vector<int>> independent_blocks(const Mat& m, double rel_tol) {
  const int n = static_cast<int>(m.rows());
  std::vector<int> label(n, -1);
  std::vector<std::vector<int>> blocks;
  for (int root = 0; root < n; ++root) {
    if (label[root] >= 0) continue;
    const int id = static_cast<int>(blocks.size());
    std::vector<int> block{root};
    label[root] = id;
    for (std::size_t head = 0; head < block.size(); ++head) {
      const int i = block[head];
      for (int j = 0; j < n; ++j) {
        if (label[j] >= 0) continue;
        const double scale = std::sqrt(std::abs(m(i, i) * m(j, j)));
        if (std::abs(m(i, j)) > rel_tol * scale || std::abs(m(j, i)) > rel_tol * scale) {
          label[j] = id;
          block.push_back(j);
        }
      }
    }
    std::sort(block.begin(), block.end());
    blocks.push_back(std::move(block));
  }
  return blocks;
}

OrthantResult orthant_probability(const OrthantRequest& request) {
  return orthant_probability(request.psi, request.policy);
}

OrthantResult orthant_probability(const Mat& psi, const NumericPolicy& policy) {
  const Standardized st = standardize(psi);
  if (!policy.split_blocks) return block_probability(st.corr, policy);

  OrthantResult total{1.0, 0.0, 0, OrthantMethod::ClosedForm};
  double rel_var = 0.0;
  for (const auto& block : independent_blocks(st.corr)) {
    const OrthantResult r = block_probability(submatrix(st.corr, block), policy);
    total.probability *= r.probability;
    total.samples += r.samples;
    if (r.method == OrthantMethod::QuasiRandom) {
      total.method = OrthantMethod::QuasiRandom;
      const double rel = r.error_estimate / r.probability;
      rel_var += rel * rel;
    }
  }
  total.error_estimate = total.probability * std::sqrt(rel_var);
  return total;
}

TruncatedMeanResult positive_orthant_mean(const Mat& c, const NumericPolicy& policy) {
  require_spd(c, "positive_orthant_mean");
  const Eigen::Index n = c.rows();
  std::vector<std::vector<int>> blocks;
  if (policy.split_blocks) {
    blocks = independent_blocks(c);
  } else {
    blocks.emplace_back(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) blocks[0][i] = i;
  }

  TruncatedMeanResult out;
  out.mean = Vec::Zero(n);
  out.probability = 1.0;
  double log_norm = 0.0;
  bool numeric = false;
  for (const auto& block : blocks) {
    const BlockMean bm = block_mean(submatrix(c, block), policy);
    for (std::size_t i = 0; i < block.size(); ++i) out.mean(block[i]) = bm.mean(static_cast<Eigen::Index>(i));
    out.probability *= bm.probability;
    log_norm += bm.log_normalizer;
    out.rel_error = std::max(out.rel_error, bm.rel_error);
    numeric = numeric || bm.numeric;
  }
  out.normalizer = std::exp(log_norm);
  out.method = numeric ? MeanMethod::Reduction : MeanMethod::ClosedForm;

  if (!(out.mean.minCoeff() > 0.0)) {
    if (numeric)
      throw AccuracyError("positive_orthant_mean: numeric integration produced a non-positive mean",
                          out.rel_error, policy.rel_tol);
    throw Error("positive_orthant_mean: closed form produced a non-positive mean");
  }
  return out;
}

std::array<double, 2> truncated_mean_cf_2d(double psi12) {
  if (std::isnan(psi12) || std::abs(psi12) > 1.0 + 1e-12)
    throw DomainError("truncated_mean_cf_2d: correlation outside [-1, 1]");
  const double rho = std::clamp(psi12, -1.0, 1.0);
  const double i = (1.0 + rho) / (2.0 * std::sqrt(2.0 * kPi));
  return {i, i};
}

std::array<double, 2> cf_mean_2d(double psi12) {
  const auto moments = truncated_mean_cf_2d(psi12);
  const double p = 0.25 + clamped_asin(psi12) / (2.0 * kPi);
  if (!(p > 0.0)) throw DomainError("cf_mean_2d: orthant has zero probability at correlation -1");
  return {moments[0] / p, moments[1] / p};
}

}  // namespace onebit
