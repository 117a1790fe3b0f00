#include "onebit/sim_harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <memory>
#include <numbers>
#include <optional>
#include <sstream>
#include <thread>
#include <unordered_map>

#include "onebit/errors.hpp"
#include "onebit/estimators.hpp"
#include "onebit/orthant.hpp"
#include "onebit/quantizer.hpp"
#include "onebit/rng.hpp"

namespace onebit {
namespace {

constexpr std::uint64_t kChunk = 1024;

// Neumaier compensated sum.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  void add(const CompensatedSum& other) {
    add(other.sum_);
    add(other.comp_);
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

struct Moments {
  CompensatedSum sum;
  CompensatedSum sum_sq;
};

CMat dft_columns(int rows, int cols) {
  CMat s(rows, cols);
  for (int t = 0; t < rows; ++t)
    for (int k = 0; k < cols; ++k)
      s(t, k) = std::polar(1.0, -2.0 * std::numbers::pi * t * k / rows);
  return s;
}

std::uint64_t pattern_key(const QuantizedObservation& obs) {
  const Eigen::Index n = obs.size();
  std::uint64_t key = 0;
  for (Eigen::Index k = 0; k < n; ++k) {
    if (obs.r(k).real() < 0) key |= std::uint64_t{1} << k;
    if (obs.r(k).imag() < 0) key |= std::uint64_t{1} << (n + k);
  }
  return key;
}

// Estimators for one SNR point.
struct PointSetup {
  SystemModel model;
  SecondOrderStats stats;
  std::vector<SweepEstimator> kinds;
  std::unique_ptr<MmseEstimator> mmse;
  std::unique_ptr<BlmmseEstimator> blmmse;
  std::unique_ptr<MmseEstimator> closed;
  bool memoize = false;
};

PointSetup make_point(const SweepConfig& cfg, double snr_db) {
  const CMat sigma = build_covariance(cfg.covariance, cfg.dims);
  SystemModel model = build_pilot_model(build_pilots(cfg.pilots, cfg.dims, cfg.covariance, snr_db, cfg.noise_var),
                                        cfg.dims.n_rx);
  SecondOrderStats stats = second_order_stats(model, sigma, cfg.noise_var);
  PointSetup p{std::move(model), std::move(stats), cfg.estimators, nullptr, nullptr, nullptr, false};

  MmseOptions options;
  options.policy.rel_tol = cfg.rel_tol;
  options.policy.max_samples = cfg.max_samples;
  options.policy.seed = cfg.seed;
  for (SweepEstimator e : cfg.estimators) {
    switch (e) {
      case SweepEstimator::Mmse: {
        p.mmse = std::make_unique<MmseEstimator>(p.model, p.stats, options);
        const auto& st = p.mmse->structure();
        if (!st.linear_case && !st.simo3) {
          QuantizedObservation probe = observation_from_index(static_cast<int>(cfg.dims.observation_length()), 0);
          int largest = 0;
          for (const auto& block : independent_blocks(build_c(p.stats, probe)))
            largest = std::max(largest, static_cast<int>(block.size()));
          if (largest > kMaxOrthantDim)
            throw CapabilityError("run_mse_sweep: MMSE needs a coupled orthant block of dimension " +
                                  std::to_string(largest) + ", above the supported limit of " +
                                  std::to_string(kMaxOrthantDim));
          p.memoize = cfg.dims.orthant_dimension() <= 64;
        }
        break;
      }
      case SweepEstimator::Blmmse:
        p.blmmse = std::make_unique<BlmmseEstimator>(p.model, p.stats);
        break;
      case SweepEstimator::ClosedForm: {
        p.closed = std::make_unique<MmseEstimator>(p.model, p.stats, options);
        const auto& st = p.closed->structure();
        if (!st.linear_case && !st.simo3)
          throw PreconditionError("run_mse_sweep: no closed-form MMSE applies to this configuration");
        break;
      }
    }
  }
  return p;
}

void run_chunk(const PointSetup& p, const RealizationSampler& sampler, std::uint64_t seed, std::uint64_t begin,
               std::uint64_t end, std::unordered_map<std::uint64_t, CVec>& memo, std::vector<Moments>& out) {
  const double per_antenna = 1.0 / static_cast<double>(p.model.dims().channel_length());
  for (std::uint64_t t = begin; t < end; ++t) {
    const Realization real = sampler.draw(seed, t);
    const QuantizedObservation obs = quantize(real.b);
    for (std::size_t e = 0; e < p.kinds.size(); ++e) {
      CVec h_hat;
      switch (p.kinds[e]) {
        case SweepEstimator::Mmse:
          if (p.memoize) {
            const std::uint64_t key = pattern_key(obs);
            auto it = memo.find(key);
            if (it == memo.end()) it = memo.emplace(key, p.mmse->estimate(obs).h_hat).first;
            h_hat = it->second;
          } else {
            h_hat = p.mmse->estimate(obs).h_hat;
          }
          break;
        case SweepEstimator::Blmmse:
          h_hat = p.blmmse->estimate(obs).h_hat;
          break;
        case SweepEstimator::ClosedForm:
          h_hat = p.closed->estimate(obs).h_hat;
          break;
      }
      const double err = (h_hat - real.h).squaredNorm() * per_antenna;
      out[e].sum.add(err);
      out[e].sum_sq.add(err * err);
    }
  }
}

std::vector<Moments> simulate_point(const SweepConfig& cfg, const PointSetup& p) {
  const RealizationSampler sampler(p.model, p.stats);
  const std::uint64_t n_chunks = (cfg.trials + kChunk - 1) / kChunk;
  std::vector<std::vector<Moments>> per_chunk(n_chunks, std::vector<Moments>(p.kinds.size()));
  unsigned workers = cfg.threads ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::uint64_t>(workers, n_chunks));

  std::vector<std::exception_ptr> failures(workers);
  auto work = [&](unsigned w) {
    std::unordered_map<std::uint64_t, CVec> memo;
    try {
      for (std::uint64_t c = w; c < n_chunks; c += workers)
        run_chunk(p, sampler, cfg.seed, c * kChunk, std::min(cfg.trials, (c + 1) * kChunk), memo, per_chunk[c]);
    } catch (...) {
      failures[w] = std::current_exception();
    }
  };
  if (workers <= 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work, w);
    for (auto& t : pool) t.join();
  }
  for (auto& f : failures)
    if (f) std::rethrow_exception(f);

  std::vector<Moments> total(p.kinds.size());
  for (const auto& chunk : per_chunk)
    for (std::size_t e = 0; e < total.size(); ++e) {
      total[e].sum.add(chunk[e].sum);
      total[e].sum_sq.add(chunk[e].sum_sq);
    }
  return total;
}

void validate(const SweepConfig& cfg) {
  const SystemDims& d = cfg.dims;
  if (d.n_tx < 1 || d.n_rx < 1 || d.n_pilots < 1) throw DimensionError("run_mse_sweep: dimensions must be positive");
  if (cfg.trials < 1) throw DomainError("run_mse_sweep: trials must be at least 1");
  if (cfg.snr_grid_db.empty()) throw DomainError("run_mse_sweep: SNR grid is empty");
  for (double s : cfg.snr_grid_db)
    if (!std::isfinite(s)) throw DomainError("run_mse_sweep: SNR grid contains a non-finite value");
  if (cfg.estimators.empty()) throw DomainError("run_mse_sweep: no estimators requested");
  if (!(cfg.noise_var > 0.0)) throw DomainError("run_mse_sweep: noise variance must be positive");
  if (!(cfg.rel_tol > 0.0)) throw DomainError("run_mse_sweep: rel_tol must be positive");
}

std::string join_numbers(const std::vector<double>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ' ';
    out += format_number(values[i]);
  }
  return out;
}

}  // namespace

std::string PilotSpec::describe() const {
  switch (kind) {
    case Kind::ScaledUnitary:
      return "scaled-unitary (DFT columns)";
    case Kind::Eigenbasis:
      return "eigenbasis of the transmit covariance";
    case Kind::Scalar:
      return "scalar (direction " + format_number(scalar.real()) + (scalar.imag() < 0 ? "" : "+") +
             format_number(scalar.imag()) + "j)";
    case Kind::Explicit:
      return "explicit " + std::to_string(matrix.rows()) + "x" + std::to_string(matrix.cols()) + " matrix";
  }
  return "unknown";
}

CMat build_pilots(const PilotSpec& spec, const SystemDims& dims, const CovarianceSpec& covariance, double snr_db,
                  double noise_var) {
  if (!(noise_var > 0.0)) throw DomainError("build_pilots: noise variance must be positive");
  if (!std::isfinite(snr_db)) throw DomainError("build_pilots: SNR must be finite");
  CMat base;
  switch (spec.kind) {
    case PilotSpec::Kind::ScaledUnitary:
      if (dims.n_pilots < dims.n_tx) throw PreconditionError("scaled-unitary pilots require τ >= N_T");
      base = dft_columns(dims.n_pilots, dims.n_tx);
      break;
    case PilotSpec::Kind::Eigenbasis: {
      if (dims.n_pilots != dims.n_tx) throw PreconditionError("eigenbasis pilots require τ = N_T");
      const CMat tx = transmit_covariance(covariance, dims.n_tx);
      Eigen::SelfAdjointEigenSolver<CMat> eig(tx);
      base = std::sqrt(static_cast<double>(dims.n_tx)) * eig.eigenvectors().adjoint();
      break;
    }
    case PilotSpec::Kind::Scalar:
      if (dims.n_pilots != 1 || dims.n_tx != 1) throw PreconditionError("scalar pilots require τ = N_T = 1");
      if (std::abs(spec.scalar) == 0.0) throw DomainError("scalar pilot direction must be non-zero");
      base = CMat::Constant(1, 1, spec.scalar / std::abs(spec.scalar));
      break;
    case PilotSpec::Kind::Explicit: {
      if (spec.matrix.rows() != dims.n_pilots || spec.matrix.cols() != dims.n_tx)
        throw DimensionError("explicit pilot matrix must be τ x N_T");
      const double snr = snr_of(spec.matrix, 1.0);
      if (!(snr > 0.0)) throw DomainError("explicit pilot matrix is zero");
      base = spec.matrix / std::sqrt(snr);
      break;
    }
  }
  return base * std::sqrt(std::pow(10.0, snr_db / 10.0) * noise_var);
}

const char* to_string(SweepEstimator e) {
  switch (e) {
    case SweepEstimator::Mmse:
      return "mmse";
    case SweepEstimator::Blmmse:
      return "blmmse";
    case SweepEstimator::ClosedForm:
      return "closed-form";
  }
  return "unknown";
}

const MseRow& MseSweepResult::row(double snr_db, const std::string& estimator) const {
  for (const auto& r : rows)
    if (r.snr_db == snr_db && r.estimator == estimator) return r;
  throw Error("no result row for " + estimator + " at " + format_number(snr_db) + " dB");
}

double analytic_mse_uncorrelated_unitary(double eta, double noise_var) {
  return 1.0 - 2.0 * eta / (std::numbers::pi * (eta + noise_var));
}

MseSweepResult run_mse_sweep(const SweepConfig& cfg) {
  validate(cfg);
  MseSweepResult result;
  std::vector<std::string> names;
  for (SweepEstimator e : cfg.estimators) names.emplace_back(to_string(e));

  std::vector<double> etas;
  bool analytic = true;
  for (double snr_db : cfg.snr_grid_db) {
    const PointSetup p = make_point(cfg, snr_db);
    const StructureReport st = detect_structure(p.model, p.stats);
    const double eta = p.model.pilots().squaredNorm() / cfg.dims.n_pilots;
    etas.push_back(eta);
    const std::vector<Moments> moments = simulate_point(cfg, p);
    const double n = static_cast<double>(cfg.trials);
    for (std::size_t e = 0; e < names.size(); ++e) {
      const double mean = moments[e].sum.value() / n;
      double se = 0.0;
      if (cfg.trials > 1) {
        const double var = std::max(0.0, (moments[e].sum_sq.value() - n * mean * mean) / (n - 1.0));
        se = std::sqrt(var / n);
      }
      result.rows.push_back(MseRow{snr_db, names[e], mean, se, cfg.trials});
    }
    if (st.linear_case == SpecialCase::UncorrelatedUnitary) {
      result.rows.push_back(MseRow{snr_db, "analytic", analytic_mse_uncorrelated_unitary(eta, cfg.noise_var), 0.0, 0});
    } else {
      analytic = false;
    }
  }
  std::stable_sort(result.rows.begin(), result.rows.end(), [](const MseRow& a, const MseRow& b) {
    if (a.snr_db != b.snr_db) return a.snr_db < b.snr_db;
    return a.estimator < b.estimator;
  });

  std::ostringstream dims;
  dims << "N_T=" << cfg.dims.n_tx << " N_R=" << cfg.dims.n_rx << " tau=" << cfg.dims.n_pilots;
  auto& md = result.metadata;
  md.emplace_back("dims", dims.str());
  md.emplace_back("covariance", cfg.covariance.describe());
  md.emplace_back("covariance_standardized", cfg.covariance.kind == CovarianceSpec::Kind::Custom
                                                 ? "as given"
                                                 : "yes (built-in models have unit diagonal)");
  md.emplace_back("pilots", cfg.pilots.describe());
  md.emplace_back("noise_var", format_number(cfg.noise_var));
  md.emplace_back("snr_mapping", "pilots scaled so that tr(S S^H)/(tau N_T noise_var) = 10^(SNR_dB/10)");
  md.emplace_back("eta_per_snr", join_numbers(etas));
  md.emplace_back("trials", std::to_string(cfg.trials));
  md.emplace_back("seed", std::to_string(cfg.seed));
  md.emplace_back("rel_tol", format_number(cfg.rel_tol));
  md.emplace_back("max_samples", std::to_string(cfg.max_samples));
  md.emplace_back("analytic_rows", analytic ? "1 - 2 eta/(pi (eta + noise_var))" : "not available for this configuration");
  return result;
}

std::string format_number(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::general, 12);
  std::string s(buf, res.ptr);
  // Drop trailing zeros of the fraction ("0.250000000000" -> "0.25").
  const auto exp_pos = s.find_first_of("eE");
  std::string mant = s.substr(0, exp_pos);
  const std::string exp = exp_pos == std::string::npos ? "" : s.substr(exp_pos);
  if (mant.find('.') != std::string::npos) {
    while (!mant.empty() && mant.back() == '0') mant.pop_back();
    if (!mant.empty() && mant.back() == '.') mant.pop_back();
  }
  return mant + exp;
}

void write_results(const MseSweepResult& result, std::ostream& out) {
  for (const auto& [key, value] : result.metadata) out << "# " << key << ": " << value << '\n';
  out << "SNR_dB,estimator,MSE,stderr,trials\n";
  for (const auto& r : result.rows)
    out << format_number(r.snr_db) << ',' << r.estimator << ',' << format_number(r.mse) << ','
        << format_number(r.std_error) << ',' << r.trials << '\n';
}

void emit_results(const MseSweepResult& result, const std::filesystem::path& destination) {
  std::ofstream out(destination, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + destination.string() + " for writing");
  write_results(result, out);
  out.flush();
  if (!out) throw IoError("failed writing " + destination.string());
}

}  // namespace onebit
