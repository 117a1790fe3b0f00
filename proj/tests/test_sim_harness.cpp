#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "onebit/core_model.hpp"
#include "onebit/errors.hpp"
#include "onebit/sim_harness.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace onebit;

namespace {

SweepConfig unitary_config() {
  SweepConfig cfg;
  cfg.dims = {2, 1, 2};
  cfg.snr_grid_db = {0.0, 10.0, -5.0};
  cfg.trials = 5000;
  cfg.seed = 77;
  return cfg;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace

TEST_CASE("format_number") {
  CHECK(format_number(0.25) == "0.25");
  CHECK(format_number(1.0) == "1");
  CHECK(format_number(-10.0) == "-10");
  CHECK(format_number(1.0 / 3.0) == "0.333333333333");
  CHECK(format_number(123456789012345.0) == "1.23456789012e+14");
  CHECK(format_number(0.0) == "0");
}

TEST_CASE("pilots hit the requested SNR") {
  CovarianceSpec cov;
  cov.kind = CovarianceSpec::Kind::BesselTx;
  cov.gamma_max = 0.1;
  for (auto kind : {PilotSpec::Kind::ScaledUnitary, PilotSpec::Kind::Eigenbasis}) {
    const SystemDims dims{3, 2, 3};
    const CMat s = build_pilots(PilotSpec{kind, {}, {}}, dims, cov, 7.0, 2.0);
    CHECK(snr_of(s, 2.0) == doctest::Approx(std::pow(10.0, 0.7)).epsilon(1e-12));
    const CMat gram = s * s.adjoint();
    CHECK(max_abs(CMat(gram - gram(0, 0) * CMat::Identity(3, 3))) < 1e-10 * std::abs(gram(0, 0)));
  }
  const CMat scalar = build_pilots(PilotSpec{PilotSpec::Kind::Scalar, cplx(0, 2), {}}, {1, 3, 1}, {}, 20.0, 1.0);
  CHECK(std::abs(scalar(0, 0) - cplx(0, 10)) < 1e-12);
  PilotSpec expl{PilotSpec::Kind::Explicit, {}, CMat::Constant(2, 1, cplx(1, 1))};
  CHECK(snr_of(build_pilots(expl, {1, 1, 2}, {}, 3.0, 1.0), 1.0) == doctest::Approx(std::pow(10.0, 0.3)));
  CHECK_THROWS_AS(build_pilots(PilotSpec{}, {3, 1, 2}, {}, 0.0, 1.0), PreconditionError);
  CHECK_THROWS_AS(build_pilots(PilotSpec{PilotSpec::Kind::Scalar, 1.0, {}}, {2, 1, 2}, {}, 0.0, 1.0),
                  PreconditionError);
}

TEST_CASE("analytic MSE against brute-force conditioning") {
  // MSE = E|h|^2 - Σ_r Pr(r) |E[h | r]|^2, with the cell means taken from samples.
  for (double eta : {0.7, 6.0}) {
    const int n = 2;
    const SystemModel m = build_pilot_model(std::sqrt(eta) * testutil::dft(n), 1);
    const std::uint64_t samples = 4'000'000;
    const auto cells = oracle::posterior_means(CMat::Identity(n, n), m.kron_matrix(), 1.0, samples, 61);
    double explained = 0.0;
    for (const auto& [key, cell] : cells) {
      const double c = static_cast<double>(cell.count);
      const double var = cell.sum_sq.sum() / c - (cell.sum / c).squaredNorm();
      explained += ((cell.sum / c).squaredNorm() - var / c) * c / static_cast<double>(samples);
    }
    CHECK(std::abs(1.0 - explained / n - analytic_mse_uncorrelated_unitary(eta, 1.0)) < 2e-3);
  }
}

TEST_CASE("sweep rows, ordering and analytic reference") {
  const SweepConfig cfg = unitary_config();
  const MseSweepResult r = run_mse_sweep(cfg);
  REQUIRE(r.rows.size() == 9);
  for (std::size_t i = 1; i < r.rows.size(); ++i) {
    const bool ordered = r.rows[i - 1].snr_db < r.rows[i].snr_db ||
                         (r.rows[i - 1].snr_db == r.rows[i].snr_db && r.rows[i - 1].estimator < r.rows[i].estimator);
    CHECK(ordered);
  }
  for (double snr : cfg.snr_grid_db) {
    const MseRow& a = r.row(snr, "analytic");
    const MseRow& m = r.row(snr, "mmse");
    const MseRow& b = r.row(snr, "blmmse");
    CHECK(a.trials == 0);
    CHECK(m.trials == cfg.trials);
    CHECK(m.mse == doctest::Approx(b.mse).epsilon(1e-12));
    CHECK(std::abs(m.mse - a.mse) < 4 * m.std_error);
    const double eta = 2.0 * std::pow(10.0, snr / 10.0);
    CHECK(a.mse == doctest::Approx(analytic_mse_uncorrelated_unitary(eta, 1.0)));
  }
  CHECK(r.row(-5.0, "mmse").mse > r.row(10.0, "mmse").mse);
  CHECK_THROWS_AS(r.row(3.0, "mmse"), Error);
}

TEST_CASE("sweep is independent of the thread count") {
  SweepConfig cfg = unitary_config();
  cfg.dims = {1, 2, 1};
  cfg.covariance.kind = CovarianceSpec::Kind::Exponential;
  cfg.covariance.rho = 0.8;
  cfg.pilots.kind = PilotSpec::Kind::Scalar;
  cfg.trials = 4000;
  cfg.threads = 1;
  std::ostringstream one, four;
  write_results(run_mse_sweep(cfg), one);
  cfg.threads = 4;
  write_results(run_mse_sweep(cfg), four);
  CHECK(one.str() == four.str());
}

TEST_CASE("general numeric MMSE inside a sweep") {
  SweepConfig cfg;
  // τ = 2 complex pilots and one antenna: a dense L = 4 problem with no closed form.
  cfg.dims = {1, 1, 2};
  cfg.pilots.kind = PilotSpec::Kind::Explicit;
  cfg.pilots.matrix = CMat(2, 1);
  cfg.pilots.matrix << cplx(1, 0.3), cplx(-0.4, 0.8);
  cfg.snr_grid_db = {5.0};
  cfg.trials = 3000;
  const MseSweepResult r = run_mse_sweep(cfg);
  const MseRow& m = r.row(5.0, "mmse");
  const MseRow& b = r.row(5.0, "blmmse");
  CHECK(m.mse != b.mse);
  CHECK(m.mse <= b.mse + 3 * std::hypot(m.std_error, b.std_error));
  CHECK_THROWS_AS(r.row(5.0, "analytic"), Error);
}

TEST_CASE("sweep validation and capability limits") {
  SweepConfig cfg = unitary_config();
  cfg.snr_grid_db.clear();
  CHECK_THROWS_AS(run_mse_sweep(cfg), DomainError);
  cfg = unitary_config();
  cfg.trials = 0;
  CHECK_THROWS_AS(run_mse_sweep(cfg), DomainError);
  cfg = unitary_config();
  cfg.snr_grid_db = {std::nan("")};
  CHECK_THROWS_AS(run_mse_sweep(cfg), DomainError);

  // A real covariance splits into two 9-dimensional blocks; a complex one couples all 18.
  cfg = SweepConfig{};
  cfg.dims = {1, 9, 1};
  cfg.covariance.kind = CovarianceSpec::Kind::Exponential;
  cfg.covariance.rho = 0.5;
  cfg.pilots.kind = PilotSpec::Kind::Scalar;
  cfg.snr_grid_db = {0.0};
  cfg.trials = 1;
  CHECK_NOTHROW(run_mse_sweep(cfg));
  cfg.covariance.kind = CovarianceSpec::Kind::Custom;
  cfg.covariance.custom = CMat(9, 9);
  for (int i = 0; i < 9; ++i)
    for (int j = 0; j < 9; ++j)
      cfg.covariance.custom(i, j) = std::pow(0.5, std::abs(i - j)) * std::polar(1.0, 0.4 * (i - j));
  cfg.pilots.kind = PilotSpec::Kind::Scalar;
  cfg.pilots.scalar = cplx(1, 1);
  cfg.snr_grid_db = {0.0};
  cfg.trials = 10;
  CHECK_THROWS_WITH_AS(run_mse_sweep(cfg), doctest::Contains("16"), CapabilityError);
  cfg.estimators = {SweepEstimator::Blmmse};
  CHECK_NOTHROW(run_mse_sweep(cfg));
  cfg.estimators = {SweepEstimator::ClosedForm};
  CHECK_THROWS_AS(run_mse_sweep(cfg), PreconditionError);
}

TEST_CASE("emit_results") {
  const auto dir = std::filesystem::temp_directory_path() / "onebit_sim_harness_test";
  std::filesystem::create_directories(dir);
  MseSweepResult empty;
  emit_results(empty, dir / "empty.csv");
  CHECK(slurp(dir / "empty.csv") == "SNR_dB,estimator,MSE,stderr,trials\n");

  SweepConfig cfg = unitary_config();
  cfg.trials = 500;
  cfg.estimators = {SweepEstimator::Blmmse, SweepEstimator::Mmse};
  cfg.dims = {1, 1, 1};
  cfg.covariance.kind = CovarianceSpec::Kind::Custom;
  cfg.covariance.custom = CMat::Constant(1, 1, 0.5);
  cfg.pilots.kind = PilotSpec::Kind::Scalar;
  const MseSweepResult r = run_mse_sweep(cfg);
  emit_results(r, dir / "a.csv");
  emit_results(run_mse_sweep(cfg), dir / "b.csv");
  const std::string text = slurp(dir / "a.csv");
  CHECK(text == slurp(dir / "b.csv"));
  std::istringstream lines(text);
  std::string line;
  int data = 0;
  bool header = false;
  while (std::getline(lines, line)) {
    if (line.rfind("# ", 0) == 0) continue;
    if (!header) {
      CHECK(line == "SNR_dB,estimator,MSE,stderr,trials");
      header = true;
      continue;
    }
    ++data;
  }
  CHECK(data == 6);
  CHECK(text.find("-5,blmmse,") < text.find("-5,mmse,"));
  CHECK(text.find("-5,mmse,") < text.find("0,blmmse,"));
  CHECK(text.find("# snr_mapping:") != std::string::npos);
  CHECK_THROWS_AS(emit_results(r, dir / "missing" / "x.csv"), IoError);
  std::filesystem::remove_all(dir);
}
