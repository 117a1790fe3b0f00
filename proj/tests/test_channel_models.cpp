#include <doctest.h>

#include <cmath>
#include <numbers>

#include "onebit/channel_models.hpp"
#include "onebit/errors.hpp"
#include "oracles.hpp"

using namespace onebit;

TEST_CASE("exponential_covariance") {
  CHECK(max_abs(Mat(exponential_covariance(4, 0.0) - Mat::Identity(4, 4))) == 0.0);
  Mat expected(3, 3);
  expected << 1, 0.5, 0.25, 0.5, 1, 0.5, 0.25, 0.5, 1;
  CHECK(max_abs(Mat(exponential_covariance(3, 0.5) - expected)) < 1e-15);
  CHECK(exponential_covariance(2, 0.95)(0, 1) == doctest::Approx(0.95));
  CHECK_THROWS_AS(exponential_covariance(3, 1.0), DomainError);
  CHECK_THROWS_AS(exponential_covariance(3, -1.5), DomainError);

  for (int n : {2, 8, 32, 64})
    for (double rho : {-0.999, -0.5, 0.3, 0.9, 0.999}) {
      const Mat m = exponential_covariance(n, rho);
      CHECK(is_symmetric(m, 1e-12));
      Eigen::SelfAdjointEigenSolver<Mat> eig(m, Eigen::EigenvaluesOnly);
      CHECK(eig.eigenvalues().minCoeff() > 0.0);
    }
}

TEST_CASE("bessel_j0 against independent evaluations") {
  for (double x = 0.0; x <= 12.0; x += 0.01) CHECK(std::abs(bessel_j0(x) - oracle::bessel_j0_series(x)) <= 1e-12);
  // Up to 2π N_T Δ for N_T = 16, Δ = 0.5.
  for (double x = 0.0; x <= 2.0 * std::numbers::pi * 16 * 0.5; x += 0.05)
    CHECK(std::abs(bessel_j0(x) - oracle::bessel_j0_integral(x)) <= 1e-12);
  CHECK(bessel_j0(-1.3) == bessel_j0(1.3));
  CHECK(bessel_j0(0.0) == 1.0);
}

TEST_CASE("bessel_tx_covariance") {
  SUBCASE("reference entry") {
    const double theta = std::numbers::pi / 6;
    const CMat m = bessel_tx_covariance(2, 0.5, theta, 0.1);
    const double amp = oracle::bessel_j0_series(std::numbers::pi * 0.1 * std::cos(theta));
    const cplx expected = amp * std::polar(1.0, -std::numbers::pi * 0.5);
    CHECK(std::abs(m(0, 1) - expected) < 1e-12);
    CHECK(std::abs(m(1, 0) - std::conj(expected)) < 1e-12);
  }
  SUBCASE("Hermitian with unit diagonal") {
    for (int n : {1, 3, 8})
      for (double theta : {0.0, 0.4, -1.1}) {
        const CMat m = bessel_tx_covariance(n, 0.5, theta, 0.2);
        CHECK(is_hermitian(m, 1e-12));
        for (int i = 0; i < n; ++i) CHECK(std::abs(m(i, i) - 1.0) < 1e-15);
      }
  }
  SUBCASE("zero angle spread is rank one") {
    const CMat m = bessel_tx_covariance(6, 0.5, 0.7, 0.0);
    Eigen::SelfAdjointEigenSolver<CMat> eig(m, Eigen::EigenvaluesOnly);
    const Vec ev = eig.eigenvalues();
    CHECK(ev(5) == doctest::Approx(6.0));
    for (int i = 0; i < 5; ++i) CHECK(std::abs(ev(i)) < 1e-10);
    CHECK(std::abs(m(0, 2) - std::polar(1.0, -2.0 * std::numbers::pi * 2 * 0.5 * std::sin(0.7))) < 1e-12);
  }
  CHECK_THROWS_AS(bessel_tx_covariance(2, std::nan(""), 0.0, 0.1), DomainError);
}

TEST_CASE("build_covariance") {
  const SystemDims dims{2, 3, 2};
  CovarianceSpec spec;
  CHECK(max_abs(CMat(build_covariance(spec, dims) - CMat::Identity(6, 6))) == 0.0);

  spec.kind = CovarianceSpec::Kind::Exponential;
  spec.rho = 0.4;
  const CMat e = build_covariance(spec, dims);
  const CMat expected_e = kron(CMat::Identity(2, 2), exponential_covariance(3, 0.4).cast<cplx>());
  CHECK(max_abs(CMat(e - expected_e)) < 1e-15);

  spec = CovarianceSpec{};
  spec.kind = CovarianceSpec::Kind::BesselTx;
  spec.theta = 0.3;
  spec.gamma_max = 0.1;
  const CMat b = build_covariance(spec, dims);
  const CMat tx = bessel_tx_covariance(2, 0.5, 0.3, 0.1);
  CHECK(max_abs(CMat(b - kron(tx, CMat::Identity(3, 3)))) < 1e-15);
  CHECK(max_abs(CMat(transmit_covariance(spec, 2) - tx)) < 1e-15);

  spec = CovarianceSpec{};
  spec.kind = CovarianceSpec::Kind::Custom;
  spec.custom = CMat::Identity(5, 5);
  CHECK_THROWS_AS(build_covariance(spec, dims), DimensionError);
  CHECK_THROWS_AS(transmit_covariance(spec, 2), PreconditionError);
  CHECK(!spec.describe().empty());
}
