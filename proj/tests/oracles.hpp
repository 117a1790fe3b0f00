#pragma once

// Reference computations that share no code with the library: their own
// generator (xoshiro256++ with the polar method) and plain Monte Carlo.

#include <cmath>
#include <cstdint>
#include <map>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

class Xoshiro {
 public:
  explicit Xoshiro(std::uint64_t seed) {
    for (auto& w : s_) {
      seed += 0x9e3779b97f4a7c15ULL;
      std::uint64_t z = seed;
      z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
      z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
      w = z ^ (z >> 31);
    }
  }

  std::uint64_t next() {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    has_spare_ = true;
    return u * f;
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
  std::uint64_t s_[4];
  bool has_spare_ = false;
  double spare_ = 0.0;
};

struct Estimate {
  double value;
  double std_error;
};

// Fraction of N(0, psi) samples in the positive orthant.
inline Estimate orthant_by_counting(const Eigen::MatrixXd& psi, std::uint64_t samples, std::uint64_t seed) {
  const Eigen::MatrixXd l = psi.llt().matrixL();
  const int n = static_cast<int>(psi.rows());
  Xoshiro rng(seed);
  std::vector<double> y(n);
  std::uint64_t hits = 0;
  for (std::uint64_t s = 0; s < samples; ++s) {
    for (int i = 0; i < n; ++i) y[i] = rng.normal();
    bool inside = true;
    for (int i = 0; i < n && inside; ++i) {
      double x = 0.0;
      for (int j = 0; j <= i; ++j) x += l(i, j) * y[j];
      inside = x > 0.0;
    }
    hits += inside;
  }
  const double p = static_cast<double>(hits) / static_cast<double>(samples);
  return {p, std::sqrt(p * (1.0 - p) / static_cast<double>(samples))};
}

// Mean of exp(-z^T C z) restricted to z > 0 by rejection from N(0, ½C^{-1}).
struct VectorEstimate {
  Eigen::VectorXd mean;
  Eigen::VectorXd std_error;
  std::uint64_t accepted;
};

inline VectorEstimate truncated_mean_by_rejection(const Eigen::MatrixXd& c, std::uint64_t samples,
                                                  std::uint64_t seed) {
  const int n = static_cast<int>(c.rows());
  const Eigen::MatrixXd cov = 0.5 * c.inverse();
  const Eigen::MatrixXd l = cov.llt().matrixL();
  Xoshiro rng(seed);
  Eigen::VectorXd y(n), sum = Eigen::VectorXd::Zero(n), sum_sq = Eigen::VectorXd::Zero(n);
  std::uint64_t accepted = 0;
  for (std::uint64_t s = 0; s < samples; ++s) {
    for (int i = 0; i < n; ++i) y(i) = rng.normal();
    const Eigen::VectorXd x = l * y;
    if ((x.array() > 0.0).all()) {
      ++accepted;
      sum += x;
      sum_sq += x.cwiseAbs2();
    }
  }
  const double k = static_cast<double>(accepted);
  Eigen::VectorXd mean = sum / k;
  Eigen::VectorXd var = (sum_sq / k - mean.cwiseAbs2()).cwiseMax(0.0);
  return {mean, (var / k).cwiseSqrt(), accepted};
}

// J0 by its power series sum_k (-1)^k (x/2)^{2k} / (k!)^2 in extended
// precision. Cancellation limits it to |x| <~ 12.
inline double bessel_j0_series(double x) {
  const long double q = -static_cast<long double>(x) * x / 4.0L;
  long double term = 1.0L, sum = 1.0L;
  for (int k = 1; k < 400; ++k) {
    term *= q / (static_cast<long double>(k) * k);
    sum += term;
    if (std::abs(term) < 1e-22L) break;
  }
  return static_cast<double>(sum);
}

// J0(x) = (1/π) ∫_0^π cos(x sin t) dt by the trapezoid rule, which converges
// geometrically for this periodic integrand.
inline double bessel_j0_integral(double x, int panels = 512) {
  const double pi = 3.14159265358979323846;
  double sum = 0.5 * (1.0 + std::cos(x * std::sin(pi)));
  for (int i = 1; i < panels; ++i) sum += std::cos(x * std::sin(pi * i / panels));
  return sum / panels;
}

// E[h | r] for every sign pattern r by brute-force sampling of h and n.
// Keys follow the library's pattern numbering (bit k: Re r_k < 0, bit n+k:
// Im r_k < 0).
struct PosteriorCell {
  Eigen::VectorXcd sum;
  Eigen::VectorXd sum_sq;
  std::uint64_t count = 0;
};

inline std::map<std::uint64_t, PosteriorCell> posterior_means(const Eigen::MatrixXcd& sigma_factor,
                                                              const Eigen::MatrixXcd& a, double noise_var,
                                                              std::uint64_t samples, std::uint64_t seed) {
  std::map<std::uint64_t, PosteriorCell> cells;
  Xoshiro rng(seed);
  const auto nc = sigma_factor.cols();
  const auto nb = a.rows();
  const double half = std::sqrt(0.5);
  const double nsd = std::sqrt(noise_var * 0.5);
  Eigen::VectorXcd w(nc), noise(nb);
  for (std::uint64_t s = 0; s < samples; ++s) {
    for (Eigen::Index i = 0; i < nc; ++i) w(i) = {rng.normal() * half, rng.normal() * half};
    for (Eigen::Index i = 0; i < nb; ++i) noise(i) = {rng.normal() * nsd, rng.normal() * nsd};
    const Eigen::VectorXcd h = sigma_factor * w;
    const Eigen::VectorXcd b = a * h + noise;
    std::uint64_t key = 0;
    for (Eigen::Index k = 0; k < nb; ++k) {
      if (b(k).real() < 0) key |= std::uint64_t{1} << k;
      if (b(k).imag() < 0) key |= std::uint64_t{1} << (nb + k);
    }
    auto& cell = cells[key];
    if (cell.count == 0) {
      cell.sum = Eigen::VectorXcd::Zero(nc);
      cell.sum_sq = Eigen::VectorXd::Zero(nc);
    }
    cell.sum += h;
    cell.sum_sq += h.cwiseAbs2();
    ++cell.count;
  }
  return cells;
}

}  // namespace oracle
