#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "onebit/channel_models.hpp"
#include "onebit/core_model.hpp"
#include "onebit/linalg.hpp"

namespace onebit {

// How the pilot matrix is built for a target SNR. The base matrix S_0 is
// normalised to unit SNR at σ² = 1 and then scaled by √(SNR σ²).
struct PilotSpec {
  enum class Kind {
    ScaledUnitary,  // DFT columns, τ >= N_T; S S^H = η I when τ = N_T
    Eigenbasis,     // S = √η U^H with Σ_TX = U Ξ U^H; requires τ = N_T
    Scalar,         // τ = N_T = 1, pilot along the direction of `scalar`
    Explicit,       // `matrix` rescaled to the target SNR
  };

  Kind kind = Kind::ScaledUnitary;
  cplx scalar{1.0, 0.0};
  CMat matrix;

  std::string describe() const;
};

// Pilot matrix with snr_of(S, noise_var) equal to 10^(snr_db/10).
CMat build_pilots(const PilotSpec& spec, const SystemDims& dims, const CovarianceSpec& covariance,
                  double snr_db, double noise_var);

enum class SweepEstimator { Mmse, Blmmse, ClosedForm };

const char* to_string(SweepEstimator e);

struct SweepConfig {
  SystemDims dims;
  CovarianceSpec covariance;
  PilotSpec pilots;
  std::vector<double> snr_grid_db;
  std::vector<SweepEstimator> estimators{SweepEstimator::Mmse, SweepEstimator::Blmmse};
  std::uint64_t trials = 10000;
  std::uint64_t seed = 1;
  double noise_var = 1.0;
  double rel_tol = 1e-4;
  std::uint64_t max_samples = 10'000'000;
  unsigned threads = 0;  // 0: hardware concurrency
};

struct MseRow {
  double snr_db = 0.0;
  std::string estimator;
  double mse = 0.0;        // per antenna, E‖ĥ − h‖² / (N_T N_R)
  double std_error = 0.0;
  std::uint64_t trials = 0;
};

struct MseSweepResult {
  std::vector<MseRow> rows;  // ascending SNR, then estimator name
  std::vector<std::pair<std::string, std::string>> metadata;

  // First row matching both keys; throws Error when absent.
  const MseRow& row(double snr_db, const std::string& estimator) const;
};

// Per-antenna MSE of the exact estimator for Σ = I, S S^H = η I, τ = N_T.
double analytic_mse_uncorrelated_unitary(double eta, double noise_var);

// Monte Carlo MSE sweep. Trial t at every SNR point draws from the stream
// (seed, t), so estimators and SNR points share their random numbers and
// the result does not depend on the thread count. Configurations matching
// the uncorrelated unitary case also get an "analytic" row.
MseSweepResult run_mse_sweep(const SweepConfig& config);

// CSV: '#'-prefixed metadata lines, header SNR_dB,estimator,MSE,stderr,trials,
// numbers with 12 significant digits.
void write_results(const MseSweepResult& result, std::ostream& out);
void emit_results(const MseSweepResult& result, const std::filesystem::path& destination);

// Shortest round-trip-safe rendering limited to 12 significant digits,
// independent of the C locale.
std::string format_number(double value);

}  // namespace onebit
