#pragma once

#include <string>

#include "onebit/core_model.hpp"
#include "onebit/linalg.hpp"

namespace onebit {

// [Σ]_{ik} = ρ^{|i-k|}; DomainError unless |ρ| < 1.
Mat exponential_covariance(int n, double rho);

// Zeroth-order Bessel function of the first kind.
double bessel_j0(double x);

// [Σ_TX]_{ik} = J0(2π (k-i) Δ γ_max cos θ) exp(-j 2π (k-i) Δ sin θ).
// With γ_max = 0 the result is rank one (PSD, not PD).
CMat bessel_tx_covariance(int n_tx, double delta, double theta, double gamma_max);

struct CovarianceSpec {
  enum class Kind { Identity, Exponential, BesselTx, Custom };

  Kind kind = Kind::Identity;
  double rho = 0.0;        // exponential
  double delta = 0.5;      // bessel-tx antenna spacing (wavelengths)
  double theta = 0.0;      // bessel-tx angle of arrival (rad)
  double gamma_max = 0.0;  // bessel-tx maximum angle spread
  CMat custom;             // full (n_tx n_rx)^2 matrix

  std::string describe() const;
};

// Full channel covariance for the given dimensions:
//   identity     -> I
//   exponential  -> I_{n_tx} ⊗ R(ρ), receive-side correlation over n_rx
//   bessel-tx    -> Σ_TX ⊗ I_{n_rx}
//   custom       -> the stored matrix (size-checked)
CMat build_covariance(const CovarianceSpec& spec, const SystemDims& dims);

// Transmit covariance Σ_TX for bessel-tx (and I for identity); other kinds
// throw PreconditionError.
CMat transmit_covariance(const CovarianceSpec& spec, int n_tx);

}  // namespace onebit
