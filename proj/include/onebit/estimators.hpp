#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "onebit/core_model.hpp"
#include "onebit/linalg.hpp"
#include "onebit/orthant.hpp"
#include "onebit/quantizer.hpp"

namespace onebit {

enum class EstimatorKind { MmseGeneral, MmseClosed, Blmmse };

const char* to_string(EstimatorKind kind);

struct Estimate {
  CVec h_hat;
  EstimatorKind estimator = EstimatorKind::MmseGeneral;
  // Pr(r) when the estimator computes it along the way.
  std::optional<double> observation_probability;
  // Which route produced the estimate (e.g. "uncorrelated-unitary").
  std::string detail;
};

// Real (2 τN_R) x (2 τN_R) matrix
//   C = [[Λ_R D_R Λ_R, Λ_R D_I^T Λ_I], [Λ_I D_I Λ_R, Λ_I D_R Λ_I]].
// The posterior of h given r is carried by the positively truncated density
// exp(-z^T C z) of z = [x; y].
Mat build_c(const SecondOrderStats& stats, const QuantizedObservation& obs);

enum class SpecialCase { UncorrelatedUnitary, TxOnlyCorrelation, Simo2Real };

const char* to_string(SpecialCase c);

struct MmseOptions {
  NumericPolicy policy;
  // Use exact closed forms when the configuration is recognised. When false
  // every observation goes through the truncated-mean reduction.
  bool structural_dispatch = true;
};

// Configuration families with an exact MMSE formula. Detection is
// structural with relative tolerance 1e-10.
struct StructureReport {
  std::optional<SpecialCase> linear_case;
  bool simo3 = false;
};

StructureReport detect_structure(const SystemModel& model, const SecondOrderStats& stats);

// Posterior-mean estimator with the per-configuration work done once.
class MmseEstimator {
 public:
  MmseEstimator(const SystemModel& model, const SecondOrderStats& stats, MmseOptions options = {});

  Estimate estimate(const QuantizedObservation& obs) const;
  // The reduction route regardless of structure.
  Estimate estimate_general(const QuantizedObservation& obs) const;

  const StructureReport& structure() const { return structure_; }
  const MmseOptions& options() const { return options_; }

 private:
  SystemModel model_;
  SecondOrderStats stats_;
  MmseOptions options_;
  StructureReport structure_;
  CMat gain_;       // Σ A^H Ω_b^{-1}
  CMat linear_op_;  // closed-form operator when structure_.linear_case is set

  // Independent blocks of C share their zero pattern across all r, and a
  // block is unchanged when every sign inside it flips, so block means are
  // cached under the block's sign pattern up to a global flip.
  struct BlockCache;
  Mat c_plus_;                            // C for r = 1 + j1; C(r) = s s^T ∘ c_plus_
  std::vector<std::vector<int>> blocks_;
  std::shared_ptr<BlockCache> cache_;
};

// Bussgang linear estimator ĥ = W r with
//   W = (√π / 2) Σ A^H D_Ω^{-1/2} (arcsin(Re N) + j arcsin(Im N))^{-1},
//   N = D_Ω^{-1/2} Ω_b D_Ω^{-1/2}, D_Ω = diag(Ω_b).
// Throws SingularityError when the arcsin matrix is not safely invertible.
CMat blmmse_operator(const SystemModel& model, const SecondOrderStats& stats);

class BlmmseEstimator {
 public:
  BlmmseEstimator(const SystemModel& model, const SecondOrderStats& stats);

  Estimate estimate(const QuantizedObservation& obs) const;
  const CMat& matrix() const { return w_; }

 private:
  CMat w_;
};

Estimate mmse_estimate(const SecondOrderStats& stats, const SystemModel& model,
                       const QuantizedObservation& obs, const MmseOptions& options = {});

Estimate blmmse_estimate(const SecondOrderStats& stats, const SystemModel& model,
                         const QuantizedObservation& obs);

// Exact MMSE for the configurations in which it is linear in r:
//   UncorrelatedUnitary  Σ = I, S S^H = η I, τ = N_T:
//                        ĥ = (S^H ⊗ I) r / √(π(η + σ²))
//   TxOnlyCorrelation    Σ = Σ_TX ⊗ I, S S^H = η I, τ = N_T, S Σ_TX S^H diagonal:
//                        ĥ = ((U diag(ξ_i √η / √(η ξ_i + σ²))) ⊗ I) r / √π,
//                        U = S^H / √η, ξ_i = [S Σ_TX S^H]_ii / η
//   Simo2Real            τ = N_T = 1, N_R = 2, Σ real with unit diagonal:
//                        ĥ = s* Σ T^{-1} r / √(π(|s|² + σ²)),
//                        T = [[1, (2/π) asin β], [(2/π) asin β, 1]],
//                        β = ρ |s|² / (|s|² + σ²)
// Throws PreconditionError naming the first violated assumption.
Estimate linear_mmse_special_case(SpecialCase which, const SystemModel& model,
                                  const SecondOrderStats& stats, const QuantizedObservation& obs);

// Exact MMSE for τ = N_T = 1, N_R = 3 with real unit-diagonal Σ:
//   ĥ = s* Σ (v_R / P_R + j v_I / P_I) / (2 √(π(|s|² + σ²)))
// with, for x = Re r (resp. Im r) and β_ik = ρ_ik |s|² / (|s|² + σ²),
//   v_i = x_i / 4 + (x_1 x_2 x_3 / 2π) asin(partial correlation of the other two given i)
//   P   = 1/8 + Σ_{i<k} x_i x_k asin(β_ik) / (4π).
// DomainError when some |β_ik| = 1 or Σ is not real unit-diagonal 3x3.
Estimate mmse_simo3(const Mat& sigma_ch, cplx pilot, double noise_var, const QuantizedObservation& obs);

}  // namespace onebit
