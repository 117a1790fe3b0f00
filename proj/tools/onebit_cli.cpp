#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "onebit/config.hpp"
#include "onebit/errors.hpp"
#include "onebit/estimators.hpp"
#include "onebit/optimality.hpp"
#include "onebit/orthant.hpp"
#include "onebit/quantizer.hpp"
#include "onebit/sim_harness.hpp"

namespace {

using namespace onebit;

std::string format_complex(cplx z) {
  std::string s = format_number(z.real());
  s += z.imag() < 0 || std::signbit(z.imag()) ? "-" : "+";
  s += format_number(std::abs(z.imag()));
  s += "j";
  return s;
}

std::string format_vector(const CVec& v) {
  std::string s = "[";
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i) s += ", ";
    s += format_complex(v(i));
  }
  return s + "]";
}

std::string format_vector(const Vec& v) {
  std::string s = "[";
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i) s += ", ";
    s += format_number(v(i));
  }
  return s + "]";
}

double pick_snr(const SweepConfig& cfg, const std::optional<double>& snr) {
  if (snr) return *snr;
  if (cfg.snr_grid_db.empty()) throw DomainError("no SNR given: set snr_db in the config or pass --snr");
  return cfg.snr_grid_db.front();
}

void print_verdict(const OptimalityVerdict& v) {
  std::cout << "blmmse_optimal: " << (v.optimal ? "true" : "false") << '\n';
  std::cout << "threshold: " << format_number(v.tolerance_used) << '\n';
  if (v.witness) {
    const auto& w = *v.witness;
    std::cout << "witness: row " << w.row << " has entries in columns " << w.col_a << " (|C| = "
              << format_number(w.mag_a) << ") and " << w.col_b << " (|C| = " << format_number(w.mag_b) << ")\n";
  }
}

struct EstimateArgs {
  std::string config;
  std::string obs;
  bool sample = false;
  std::uint64_t seed = 0;
  std::string estimator = "auto";
  std::optional<double> snr;
};

int run_estimate(const EstimateArgs& a) {
  const SweepConfig cfg = load_config(a.config);
  const Scenario sc = make_scenario(cfg, pick_snr(cfg, a.snr));
  QuantizedObservation obs;
  std::cout << "snr_db: " << format_number(sc.snr_db) << '\n';
  if (a.sample) {
    const Realization real = sample_realization(sc.stats, sc.model, a.seed);
    obs = quantize(real.b);
    std::cout << "h: " << format_vector(real.h) << '\n';
  } else {
    obs = make_observation(parse_complex_vector(read_text_file(a.obs)));
  }
  std::cout << "r: " << format_vector(obs.r) << '\n';

  MmseOptions options;
  options.policy.rel_tol = cfg.rel_tol;
  options.policy.max_samples = cfg.max_samples;
  options.policy.seed = cfg.seed;
  std::optional<Estimate> mmse;
  std::optional<Estimate> blmmse;
  if (a.estimator != "blmmse") {
    mmse = mmse_estimate(sc.stats, sc.model, obs, options);
    std::cout << "mmse (" << to_string(mmse->estimator) << ", " << mmse->detail << "): " << format_vector(mmse->h_hat)
              << '\n';
    if (mmse->observation_probability)
      std::cout << "observation_probability: " << format_number(*mmse->observation_probability) << '\n';
  }
  if (a.estimator != "mmse") {
    blmmse = blmmse_estimate(sc.stats, sc.model, obs);
    std::cout << "blmmse: " << format_vector(blmmse->h_hat) << '\n';
  }
  if (mmse && blmmse) {
    std::cout << "max_abs_difference: " << format_number((mmse->h_hat - blmmse->h_hat).cwiseAbs().maxCoeff()) << '\n';
    print_verdict(is_blmmse_optimal(sc.stats, sc.model.dims()));
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"MMSE and Bussgang channel estimation from 1-bit quantized pilots"};
  app.require_subcommand(1);

  EstimateArgs est;
  auto* estimate = app.add_subcommand("estimate", "Estimate the channel from one quantized observation");
  estimate->add_option("--config", est.config, "JSON configuration")->required()->check(CLI::ExistingFile);
  auto* obs_opt = estimate->add_option("--obs", est.obs, "JSON file with the observation r")->check(CLI::ExistingFile);
  auto* sample_opt = estimate->add_flag("--sample", est.sample, "Draw (h, n) from the model and quantize");
  obs_opt->excludes(sample_opt);
  estimate->add_option("--seed", est.seed, "Seed for --sample");
  estimate->add_option("--estimator", est.estimator, "mmse, blmmse or auto (both)")
      ->check(CLI::IsMember({"mmse", "blmmse", "auto"}));
  estimate->add_option("--snr", est.snr, "SNR in dB (default: first entry of snr_db)");

  std::string sim_config;
  std::string sim_out;
  std::optional<unsigned> sim_threads;
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo MSE sweep written as CSV");
  simulate->add_option("--config", sim_config, "JSON configuration")->required()->check(CLI::ExistingFile);
  simulate->add_option("--out", sim_out, "CSV destination")->required();
  simulate->add_option("--threads", sim_threads, "Worker threads (overrides the config)");

  std::string opt_config;
  std::optional<double> opt_snr;
  double opt_eps = 1e-10;
  auto* check = app.add_subcommand("check-optimality", "Decide whether the Bussgang estimator is MMSE-optimal");
  check->add_option("--config", opt_config, "JSON configuration")->required()->check(CLI::ExistingFile);
  check->add_option("--snr", opt_snr, "SNR in dB (default: first entry of snr_db)");
  check->add_option("--eps", opt_eps, "Relative zero threshold")->check(CLI::PositiveNumber);

  std::string orth_matrix;
  bool orth_mean = false;
  NumericPolicy orth_policy;
  auto* orthant = app.add_subcommand("orthant", "Positive-orthant probability of N(0, Psi)");
  orthant->add_option("--matrix", orth_matrix, "JSON covariance Psi")->required()->check(CLI::ExistingFile);
  orthant->add_flag("--mean", orth_mean, "Also print the mean of N(0, Psi) truncated to the positive orthant");
  orthant->add_option("--rel-tol", orth_policy.rel_tol, "Relative accuracy of numeric integrals");
  orthant->add_option("--max-samples", orth_policy.max_samples, "Integrand evaluation budget");
  orthant->add_option("--seed", orth_policy.seed, "Seed of the lattice shifts");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*estimate) {
      if (!est.sample && est.obs.empty()) throw DomainError("estimate needs --obs or --sample");
      return run_estimate(est);
    }
    if (*simulate) {
      SweepConfig cfg = load_config(sim_config);
      if (sim_threads) cfg.threads = *sim_threads;
      const MseSweepResult result = run_mse_sweep(cfg);
      emit_results(result, sim_out);
      std::cout << "wrote " << result.rows.size() << " rows to " << sim_out << '\n';
      return 0;
    }
    if (*check) {
      const SweepConfig cfg = load_config(opt_config);
      const Scenario sc = make_scenario(cfg, pick_snr(cfg, opt_snr));
      print_verdict(is_blmmse_optimal(sc.stats, sc.model.dims(), opt_eps));
      return 0;
    }
    if (*orthant) {
      const Mat psi = parse_real_matrix(read_text_file(orth_matrix));
      const OrthantResult p = orthant_probability(psi, orth_policy);
      std::cout << "probability: " << format_number(p.probability) << '\n';
      std::cout << "method: " << (p.method == OrthantMethod::ClosedForm ? "closed-form" : "quasi-random") << '\n';
      std::cout << "std_error: " << format_number(p.error_estimate) << '\n';
      std::cout << "samples: " << p.samples << '\n';
      if (orth_mean) {
        // Density exp(-z^T C z) has covariance ½C^{-1}, so C = ½Ψ^{-1}.
        const Mat c = 0.5 * spd_inverse(psi);
        const TruncatedMeanResult m = positive_orthant_mean(0.5 * (c + c.transpose()), orth_policy);
        std::cout << "mean: " << format_vector(m.mean) << '\n';
      }
      return 0;
    }
  } catch (const AccuracyError& e) {
    std::cerr << "error: " << e.what() << " (achieved " << format_number(e.achieved_error()) << ", requested "
              << format_number(e.requested_error()) << ")\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
