#include "onebit/estimators.hpp"

#include <cmath>
#include <mutex>
#include <numbers>
#include <unordered_map>

#include "onebit/errors.hpp"

namespace onebit {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kStructTol = 1e-10;

bool close_rel(const CMat& a, const CMat& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  const double scale = std::max(max_abs(a), max_abs(b));
  return max_abs(CMat(a - b)) <= kStructTol * scale;
}

bool real_unit_diagonal(const CMat& sigma) {
  const double scale = max_abs(sigma);
  if (max_abs(Mat(sigma.imag())) > kStructTol * scale) return false;
  for (Eigen::Index i = 0; i < sigma.rows(); ++i)
    if (std::abs(sigma(i, i) - 1.0) > kStructTol) return false;
  return true;
}

bool is_simo(const SystemDims& d) { return d.n_pilots == 1 && d.n_tx == 1; }

double beta_of(double rho, cplx s, double noise_var) {
  const double e = std::norm(s);
  return rho * e / (e + noise_var);
}

// Pilot energy η when S S^H = η I (relative tolerance), otherwise nullopt.
std::optional<double> scaled_unitary_energy(const CMat& s) {
  const CMat gram = s * s.adjoint();
  const double eta = gram.trace().real() / static_cast<double>(s.rows());
  if (!(eta > 0.0)) return std::nullopt;
  if (!close_rel(gram, eta * CMat::Identity(s.rows(), s.rows()))) return std::nullopt;
  return eta;
}

CMat transmit_block(const CMat& sigma, int n_tx, int n_rx) {
  CMat tx(n_tx, n_tx);
  for (int i = 0; i < n_tx; ++i)
    for (int k = 0; k < n_tx; ++k) tx(i, k) = sigma(i * n_rx, k * n_rx);
  return tx;
}

std::optional<std::string> linear_case_violation(SpecialCase which, const SystemModel& model,
                                                 const SecondOrderStats& stats) {
  const SystemDims& d = model.dims();
  const CMat& sigma = stats.sigma_ch;
  switch (which) {
    case SpecialCase::UncorrelatedUnitary:
      if (d.n_pilots != d.n_tx) return "requires τ = N_T";
      if (!close_rel(sigma, CMat::Identity(sigma.rows(), sigma.cols()))) return "requires Σ = I";
      if (!scaled_unitary_energy(model.pilots())) return "requires S S^H = η I with η > 0";
      return std::nullopt;
    case SpecialCase::TxOnlyCorrelation: {
      if (d.n_pilots != d.n_tx) return "requires τ = N_T";
      const CMat tx = transmit_block(sigma, d.n_tx, d.n_rx);
      if (!close_rel(sigma, kron(tx, CMat::Identity(d.n_rx, d.n_rx)))) return "requires Σ = Σ_TX ⊗ I";
      if (!scaled_unitary_energy(model.pilots())) return "requires S S^H = η I with η > 0";
      CMat rotated = model.pilots() * tx * model.pilots().adjoint();
      const double scale = max_abs(rotated);
      rotated.diagonal().setZero();
      if (max_abs(rotated) > kStructTol * scale) return "requires S Σ_TX S^H to be diagonal";
      return std::nullopt;
    }
    case SpecialCase::Simo2Real: {
      if (!is_simo(d)) return "requires τ = N_T = 1";
      if (d.n_rx != 2) return "requires N_R = 2";
      if (!real_unit_diagonal(sigma)) return "requires real Σ with unit diagonal";
      const double beta = beta_of(sigma(0, 1).real(), model.pilots()(0, 0), stats.noise_var);
      if (!(std::abs(beta) < 1.0)) return "requires |β| < 1";
      return std::nullopt;
    }
  }
  return "unknown special case";
}

CMat linear_case_operator(SpecialCase which, const SystemModel& model, const SecondOrderStats& stats) {
  const SystemDims& d = model.dims();
  const double noise = stats.noise_var;
  const CMat id_rx = CMat::Identity(d.n_rx, d.n_rx);
  switch (which) {
    case SpecialCase::UncorrelatedUnitary: {
      const double eta = *scaled_unitary_energy(model.pilots());
      return kron(CMat(model.pilots().adjoint()), id_rx) / std::sqrt(kPi * (eta + noise));
    }
    case SpecialCase::TxOnlyCorrelation: {
      const double eta = *scaled_unitary_energy(model.pilots());
      const CMat tx = transmit_block(stats.sigma_ch, d.n_tx, d.n_rx);
      const CMat u = model.pilots().adjoint() / std::sqrt(eta);
      const CMat rotated = model.pilots() * tx * model.pilots().adjoint();
      CMat scaled = u;
      for (int i = 0; i < d.n_tx; ++i) {
        const double xi = std::max(rotated(i, i).real() / eta, 0.0);
        const double gain = xi > 0.0 ? xi * std::sqrt(eta) / std::sqrt(eta * xi + noise) : 0.0;
        scaled.col(i) *= gain;
      }
      return kron(scaled, id_rx) / std::sqrt(kPi);
    }
    case SpecialCase::Simo2Real: {
      const cplx s = model.pilots()(0, 0);
      const double t12 = 2.0 / kPi * clamped_asin(beta_of(stats.sigma_ch(0, 1).real(), s, noise));
      Mat t_inv(2, 2);
      t_inv << 1.0, -t12, -t12, 1.0;
      t_inv /= 1.0 - t12 * t12;
      return std::conj(s) * stats.sigma_ch * t_inv.cast<cplx>() / std::sqrt(kPi * (std::norm(s) + noise));
    }
  }
  throw Error("unknown special case");
}

double bivariate_orthant(double x1, double x2, double beta) {
  return 0.25 + x1 * x2 * clamped_asin(beta) / (2.0 * kPi);
}

double linear_case_probability(SpecialCase which, const SystemModel& model, const SecondOrderStats& stats,
                               const QuantizedObservation& obs) {
  if (which != SpecialCase::Simo2Real) return std::pow(0.25, static_cast<double>(obs.size()));
  const double beta = beta_of(stats.sigma_ch(0, 1).real(), model.pilots()(0, 0), stats.noise_var);
  const CVec& r = obs.r;
  return bivariate_orthant(r(0).real(), r(1).real(), beta) * bivariate_orthant(r(0).imag(), r(1).imag(), beta);
}

void check_observation(const SystemModel& model, const QuantizedObservation& obs) {
  if (obs.size() != model.dims().observation_length())
    throw DimensionError("observation length " + std::to_string(obs.size()) + " does not match τN_R = " +
                         std::to_string(model.dims().observation_length()));
}

}  // namespace

const char* to_string(EstimatorKind kind) {
  switch (kind) {
    case EstimatorKind::MmseGeneral:
      return "mmse-general";
    case EstimatorKind::MmseClosed:
      return "mmse-closed";
    case EstimatorKind::Blmmse:
      return "blmmse";
  }
  return "unknown";
}

const char* to_string(SpecialCase c) {
  switch (c) {
    case SpecialCase::UncorrelatedUnitary:
      return "uncorrelated-unitary";
    case SpecialCase::TxOnlyCorrelation:
      return "tx-only-correlation";
    case SpecialCase::Simo2Real:
      return "simo2-real";
  }
  return "unknown";
}

Mat build_c(const SecondOrderStats& stats, const QuantizedObservation& obs) {
  const Eigen::Index n = stats.d_r.rows();
  if (obs.size() != n || stats.d_i.rows() != n)
    throw DimensionError("build_c: observation length does not match the statistics");
  const auto& lr = obs.lambda_r.diagonal();
  const auto& li = obs.lambda_i.diagonal();
  Mat c(2 * n, 2 * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index k = 0; k < n; ++k) {
      c(i, k) = lr(i) * stats.d_r(i, k) * lr(k);
      c(i, n + k) = lr(i) * stats.d_i(k, i) * li(k);
      c(n + i, k) = li(i) * stats.d_i(i, k) * lr(k);
      c(n + i, n + k) = li(i) * stats.d_r(i, k) * li(k);
    }
  }
  return c;
}

StructureReport detect_structure(const SystemModel& model, const SecondOrderStats& stats) {
  StructureReport report;
  const SystemDims& d = model.dims();
  if (is_simo(d) && d.n_rx == 3 && real_unit_diagonal(stats.sigma_ch)) {
    const cplx s = model.pilots()(0, 0);
    bool interior = true;
    for (int i = 0; i < 3; ++i)
      for (int k = i + 1; k < 3; ++k)
        interior = interior && std::abs(beta_of(stats.sigma_ch(i, k).real(), s, stats.noise_var)) < 1.0;
    report.simo3 = interior;
  }
  for (SpecialCase c : {SpecialCase::UncorrelatedUnitary, SpecialCase::TxOnlyCorrelation, SpecialCase::Simo2Real}) {
    if (!linear_case_violation(c, model, stats)) {
      report.linear_case = c;
      break;
    }
  }
  return report;
}

struct MmseEstimator::BlockCache {
  struct Entry {
    Vec mean;
    double probability;
  };
  std::mutex mutex;
  std::unordered_map<std::uint64_t, Entry> entries;
};

MmseEstimator::MmseEstimator(const SystemModel& model, const SecondOrderStats& stats, MmseOptions options)
    : model_(model), stats_(stats), options_(options), cache_(std::make_shared<BlockCache>()) {
  if (stats.omega_b.rows() != model.dims().observation_length())
    throw DimensionError("MmseEstimator: statistics do not match the model dimensions");
  gain_ = stats.sigma_ch * model.kron_matrix().adjoint() * stats.omega_b_inverse();
  const int n = static_cast<int>(stats.omega_b.rows());
  c_plus_ = build_c(stats, make_observation(CVec::Constant(n, cplx(1.0, 1.0))));
  if (options_.policy.split_blocks) {
    blocks_ = independent_blocks(c_plus_);
  } else {
    blocks_.emplace_back(2 * n);
    for (int i = 0; i < 2 * n; ++i) blocks_.back()[static_cast<std::size_t>(i)] = i;
  }
  if (options_.structural_dispatch) {
    structure_ = detect_structure(model, stats);
    if (structure_.linear_case) linear_op_ = linear_case_operator(*structure_.linear_case, model, stats);
  }
}

Estimate MmseEstimator::estimate(const QuantizedObservation& obs) const {
  check_observation(model_, obs);
  if (structure_.linear_case) {
    Estimate e{linear_op_ * obs.r, EstimatorKind::MmseClosed,
               linear_case_probability(*structure_.linear_case, model_, stats_, obs),
               to_string(*structure_.linear_case)};
    return e;
  }
  if (structure_.simo3)
    return mmse_simo3(stats_.sigma_ch.real(), model_.pilots()(0, 0), stats_.noise_var, obs);
  return estimate_general(obs);
}

Estimate MmseEstimator::estimate_general(const QuantizedObservation& obs) const {
  check_observation(model_, obs);
  const Eigen::Index n = obs.size();
  Vec sign(2 * n);
  sign << obs.lambda_r.diagonal(), obs.lambda_i.diagonal();
  Vec mean(2 * n);
  double probability = 1.0;
  for (std::size_t b = 0; b < blocks_.size(); ++b) {
    const std::vector<int>& idx = blocks_[b];
    const auto m = static_cast<Eigen::Index>(idx.size());
    const bool cacheable = idx.size() <= 33;
    std::uint64_t key = static_cast<std::uint64_t>(b) << 32;
    for (std::size_t i = 1; cacheable && i < idx.size(); ++i)
      if (sign(idx[i]) != sign(idx[0])) key |= std::uint64_t{1} << (i - 1);

    BlockCache::Entry entry;
    bool found = false;
    if (cacheable) {
      const std::lock_guard<std::mutex> lock(cache_->mutex);
      const auto it = cache_->entries.find(key);
      if (it != cache_->entries.end()) {
        entry = it->second;
        found = true;
      }
    }
    if (!found) {
      Mat sub(m, m);
      for (Eigen::Index i = 0; i < m; ++i)
        for (Eigen::Index j = 0; j < m; ++j) sub(i, j) = sign(idx[i]) * sign(idx[j]) * c_plus_(idx[i], idx[j]);
      const TruncatedMeanResult tm = positive_orthant_mean(sub, options_.policy);
      entry = {tm.mean, tm.probability};
      if (cacheable) {
        const std::lock_guard<std::mutex> lock(cache_->mutex);
        cache_->entries.emplace(key, entry);
      }
    }
    for (Eigen::Index i = 0; i < m; ++i) mean(idx[i]) = entry.mean(i);
    probability *= entry.probability;
  }
  CVec q(n);
  for (Eigen::Index i = 0; i < n; ++i)
    q(i) = cplx(sign(i) * mean(i), sign(n + i) * mean(n + i));
  return Estimate{gain_ * q, EstimatorKind::MmseGeneral, probability, "truncated-mean"};
}

CMat blmmse_operator(const SystemModel& model, const SecondOrderStats& stats) {
  const CMat& omega = stats.omega_b;
  const Eigen::Index n = omega.rows();
  Vec inv_sqrt(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double d = omega(i, i).real();
    if (!(d > 0.0)) throw SingularityError("blmmse_operator: Ω_b has a non-positive diagonal entry");
    inv_sqrt(i) = 1.0 / std::sqrt(d);
  }
  CMat t(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    t(i, i) = kPi / 2.0;
    for (Eigen::Index k = 0; k < n; ++k) {
      if (k == i) continue;
      const cplx v = omega(i, k) * inv_sqrt(i) * inv_sqrt(k);
      t(i, k) = cplx(clamped_asin(v.real()), clamped_asin(v.imag()));
    }
  }
  const CMat t_inv = hermitian_pd_inverse(t, 1e-12).inverse;
  return std::sqrt(kPi) / 2.0 * stats.sigma_ch * model.kron_matrix().adjoint() *
         inv_sqrt.cast<cplx>().asDiagonal() * t_inv;
}

BlmmseEstimator::BlmmseEstimator(const SystemModel& model, const SecondOrderStats& stats)
    : w_(blmmse_operator(model, stats)) {}

Estimate BlmmseEstimator::estimate(const QuantizedObservation& obs) const {
  if (obs.size() != w_.cols()) throw DimensionError("BlmmseEstimator: observation length mismatch");
  return Estimate{w_ * obs.r, EstimatorKind::Blmmse, std::nullopt, "bussgang"};
}

Estimate mmse_estimate(const SecondOrderStats& stats, const SystemModel& model, const QuantizedObservation& obs,
                       const MmseOptions& options) {
  return MmseEstimator(model, stats, options).estimate(obs);
}

Estimate blmmse_estimate(const SecondOrderStats& stats, const SystemModel& model,
                         const QuantizedObservation& obs) {
  return BlmmseEstimator(model, stats).estimate(obs);
}

Estimate linear_mmse_special_case(SpecialCase which, const SystemModel& model, const SecondOrderStats& stats,
                                  const QuantizedObservation& obs) {
  check_observation(model, obs);
  if (auto violation = linear_case_violation(which, model, stats))
    throw PreconditionError(std::string(to_string(which)) + ": " + *violation);
  return Estimate{linear_case_operator(which, model, stats) * obs.r, EstimatorKind::MmseClosed,
                  linear_case_probability(which, model, stats, obs), to_string(which)};
}

Estimate mmse_simo3(const Mat& sigma_ch, cplx pilot, double noise_var, const QuantizedObservation& obs) {
  if (sigma_ch.rows() != 3 || sigma_ch.cols() != 3) throw DomainError("mmse_simo3: Σ must be 3x3");
  if (obs.size() != 3) throw DimensionError("mmse_simo3: observation must have length 3");
  if (!is_symmetric(sigma_ch, 1e-12)) throw DomainError("mmse_simo3: Σ must be symmetric");
  for (int i = 0; i < 3; ++i)
    if (std::abs(sigma_ch(i, i) - 1.0) > kStructTol) throw DomainError("mmse_simo3: Σ must have unit diagonal");
  if (!(noise_var >= 0.0)) throw DomainError("mmse_simo3: noise variance must be non-negative");
  const double energy = std::norm(pilot);
  if (!(energy + noise_var > 0.0)) throw DomainError("mmse_simo3: pilot and noise are both zero");

  const double b12 = beta_of(sigma_ch(0, 1), pilot, noise_var);
  const double b13 = beta_of(sigma_ch(0, 2), pilot, noise_var);
  const double b23 = beta_of(sigma_ch(1, 2), pilot, noise_var);
  for (double b : {b12, b13, b23})
    if (!(std::abs(b) < 1.0)) throw DomainError("mmse_simo3: correlation coefficient β on the boundary |β| = 1");
  const double a1 = clamped_asin((b23 - b12 * b13) / std::sqrt((1 - b12 * b12) * (1 - b13 * b13)));
  const double a2 = clamped_asin((b13 - b12 * b23) / std::sqrt((1 - b12 * b12) * (1 - b23 * b23)));
  const double a3 = clamped_asin((b12 - b13 * b23) / std::sqrt((1 - b13 * b13) * (1 - b23 * b23)));
  const double s12 = clamped_asin(b12);
  const double s13 = clamped_asin(b13);
  const double s23 = clamped_asin(b23);

  struct Part {
    Vec ratio;
    double probability;
  };
  auto part = [&](double x1, double x2, double x3) {
    const double cube = x1 * x2 * x3 / (2.0 * kPi);
    Vec v(3);
    v << x1 / 4.0 + cube * a1, x2 / 4.0 + cube * a2, x3 / 4.0 + cube * a3;
    const double p = 0.125 + (x1 * x2 * s12 + x1 * x3 * s13 + x2 * x3 * s23) / (4.0 * kPi);
    if (!(p > 0.0)) throw Error("mmse_simo3: non-positive orthant probability for a valid configuration");
    return Part{v / p, p};
  };
  const CVec& r = obs.r;
  const Part re = part(r(0).real(), r(1).real(), r(2).real());
  const Part im = part(r(0).imag(), r(1).imag(), r(2).imag());
  CVec q(3);
  for (int i = 0; i < 3; ++i) q(i) = cplx(re.ratio(i), im.ratio(i));
  const CVec h = std::conj(pilot) * sigma_ch.cast<cplx>() * q / (2.0 * std::sqrt(kPi * (energy + noise_var)));
  return Estimate{h, EstimatorKind::MmseClosed, re.probability * im.probability, "simo3"};
}

}  // namespace onebit
