#pragma once

#include <cstdint>

#include "onebit/linalg.hpp"

namespace onebit {

class RandomStream;

struct SystemDims {
  int n_tx = 1;
  int n_rx = 1;
  int n_pilots = 1;

  int observation_length() const { return n_pilots * n_rx; }
  int channel_length() const { return n_tx * n_rx; }
  // Dimension of the real orthant problem, twice the observation length.
  int orthant_dimension() const { return 2 * observation_length(); }
};

// Deterministic part of the pilot model b = A h + n.
//
// Vectorisation is column-stacking: h = vec(H) with H of size n_rx x n_tx,
// b = vec(B) with B = H S^T + N of size n_rx x n_pilots. Under this
// convention vec(H S^T) = (S ⊗ I) vec(H), which is why the Kronecker
// matrix below has the pilots on the left.
class SystemModel {
 public:
  SystemModel(const SystemDims& dims, CMat pilots, CMat kron_matrix)
      : dims_(dims), pilots_(std::move(pilots)), kron_(std::move(kron_matrix)) {}

  const SystemDims& dims() const { return dims_; }
  // S, n_pilots x n_tx.
  const CMat& pilots() const { return pilots_; }
  // A = S ⊗ I_{n_rx}, (n_pilots n_rx) x (n_tx n_rx).
  const CMat& kron_matrix() const { return kron_; }

 private:
  SystemDims dims_;
  CMat pilots_;
  CMat kron_;
};

SystemModel build_pilot_model(const CMat& pilots, int n_rx);

// Second-order quantities of the pre-quantisation observation.
struct SecondOrderStats {
  CMat sigma_ch;    // channel covariance Σ
  double noise_var; // σ²
  CMat omega_b;     // A Σ A^H + σ² I
  Mat d_r;          // Re(Ω_b^{-1}), symmetric
  Mat d_i;          // Im(Ω_b^{-1}), antisymmetric

  CMat omega_b_inverse() const;
};

// Throws DimensionError on size mismatch, DomainError when Σ is not
// Hermitian PSD or noise_var < 0, SingularityError when Ω_b is not safely
// invertible (min/max eigenvalue ratio below 1e-12).
SecondOrderStats second_order_stats(const SystemModel& model, const CMat& sigma_ch,
                                    double noise_var);

struct Realization {
  CVec h;
  CVec n;
  CVec b;
};

// Draws (h, n, b) with precomputed factors. draw(seed, index) is a pure
// function of its arguments.
class RealizationSampler {
 public:
  RealizationSampler(const SystemModel& model, const SecondOrderStats& stats);

  Realization draw(std::uint64_t seed, std::uint64_t index) const;
  Realization draw(RandomStream& stream) const;

 private:
  CMat channel_factor_;
  CMat kron_;
  double noise_sd_;
};

Realization sample_realization(const SecondOrderStats& stats, const SystemModel& model,
                               std::uint64_t seed);

// SNR = tr(S S^H) / (n_pilots n_tx σ²).
double snr_of(const CMat& pilots, double noise_var);

}  // namespace onebit
