#include "onebit/core_model.hpp"

#include <cmath>
#include <sstream>

#include "onebit/errors.hpp"
#include "onebit/rng.hpp"

namespace onebit {

SystemModel build_pilot_model(const CMat& pilots, int n_rx) {
  if (pilots.rows() == 0 || pilots.cols() == 0)
    throw DimensionError("build_pilot_model: pilot matrix is empty");
  if (n_rx < 1) throw DimensionError("build_pilot_model: n_rx must be at least 1");
  SystemDims dims{static_cast<int>(pilots.cols()), n_rx, static_cast<int>(pilots.rows())};
  CMat a = kron(pilots, CMat::Identity(n_rx, n_rx));
  return SystemModel(dims, pilots, std::move(a));
}

CMat SecondOrderStats::omega_b_inverse() const {
  CMat out(d_r.rows(), d_r.cols());
  out.real() = d_r;
  out.imag() = d_i;
  return out;
}

SecondOrderStats second_order_stats(const SystemModel& model, const CMat& sigma_ch,
                                    double noise_var) {
  const int nc = model.dims().channel_length();
  if (sigma_ch.rows() != nc || sigma_ch.cols() != nc) {
    std::ostringstream os;
    os << "second_order_stats: channel covariance must be " << nc << "x" << nc << ", got "
       << sigma_ch.rows() << "x" << sigma_ch.cols();
    throw DimensionError(os.str());
  }
  if (!(noise_var >= 0.0) || !std::isfinite(noise_var))
    throw DomainError("second_order_stats: noise variance must be finite and nonnegative");
  if (!is_hermitian(sigma_ch, 1e-10))
    throw DomainError("second_order_stats: channel covariance is not Hermitian");
  {
    Eigen::SelfAdjointEigenSolver<CMat> eig(0.5 * (sigma_ch + sigma_ch.adjoint()),
                                            Eigen::EigenvaluesOnly);
    const double hi = std::max(eig.eigenvalues().maxCoeff(), 0.0);
    if (eig.eigenvalues().minCoeff() < -1e-10 * std::max(hi, 1.0))
      throw DomainError("second_order_stats: channel covariance is not positive semidefinite");
  }

  const CMat& a = model.kron_matrix();
  CMat omega = a * sigma_ch * a.adjoint();
  omega.diagonal().array() += noise_var;
  omega = 0.5 * (omega + omega.adjoint());

  const HermitianInverse inv = hermitian_pd_inverse(omega, 1e-12);
  Mat d_r = inv.inverse.real();
  Mat d_i = inv.inverse.imag();
  d_r = 0.5 * (d_r + d_r.transpose()).eval();
  d_i = 0.5 * (d_i - d_i.transpose()).eval();
  return SecondOrderStats{sigma_ch, noise_var, std::move(omega), std::move(d_r), std::move(d_i)};
}

RealizationSampler::RealizationSampler(const SystemModel& model, const SecondOrderStats& stats)
    : channel_factor_(hermitian_psd_factor(stats.sigma_ch)),
      kron_(model.kron_matrix()),
      noise_sd_(std::sqrt(stats.noise_var)) {}

Realization RealizationSampler::draw(std::uint64_t seed, std::uint64_t index) const {
  RandomStream stream(seed, index);
  return draw(stream);
}

Realization RealizationSampler::draw(RandomStream& stream) const {
  // CN(0, 1) entries: independent N(0, 1/2) real and imaginary parts.
  const double half = std::sqrt(0.5);
  CVec w(channel_factor_.cols());
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    const double re = stream.normal();
    const double im = stream.normal();
    w[i] = cplx(re * half, im * half);
  }
  CVec noise(kron_.rows());
  for (Eigen::Index i = 0; i < noise.size(); ++i) {
    const double re = stream.normal();
    const double im = stream.normal();
    noise[i] = cplx(re * half * noise_sd_, im * half * noise_sd_);
  }
  Realization out;
  out.h = channel_factor_ * w;
  out.n = std::move(noise);
  out.b = kron_ * out.h + out.n;
  return out;
}

Realization sample_realization(const SecondOrderStats& stats, const SystemModel& model,
                               std::uint64_t seed) {
  return RealizationSampler(model, stats).draw(seed, 0);
}

double snr_of(const CMat& pilots, double noise_var) {
  if (!(noise_var > 0.0)) throw DomainError("snr_of: noise variance must be positive");
  if (pilots.size() == 0) throw DimensionError("snr_of: pilot matrix is empty");
  const double energy = pilots.squaredNorm();  // tr(S S^H)
  return energy / (static_cast<double>(pilots.rows()) * pilots.cols() * noise_var);
}

}  // namespace onebit
