#include <doctest.h>

#include <cmath>
#include <numbers>

#include "onebit/errors.hpp"
#include "onebit/orthant.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace onebit;

namespace {

Mat equicorrelated(int n, double rho) {
  Mat m = Mat::Constant(n, n, rho);
  m.diagonal().setOnes();
  return m;
}

Mat sign_flip(const Mat& m, unsigned pattern) {
  const auto n = m.rows();
  Vec s(n);
  for (Eigen::Index i = 0; i < n; ++i) s(i) = (pattern >> i) & 1u ? -1.0 : 1.0;
  return s.asDiagonal() * m * s.asDiagonal();
}

}  // namespace

TEST_CASE("standardize") {
  const Standardized id = standardize(Mat::Identity(3, 3));
  CHECK(max_abs(Mat(id.corr - Mat::Identity(3, 3))) == 0.0);
  CHECK((id.scale.array() == 1.0).all());

  Mat m(2, 2);
  m << 4, 3, 3, 9;
  const Standardized s = standardize(m);
  CHECK(s.corr(0, 1) == doctest::Approx(0.5));
  CHECK(s.scale(0) == doctest::Approx(2.0));
  CHECK(s.scale(1) == doctest::Approx(3.0));
  CHECK(max_abs(Mat(s.scale.asDiagonal() * s.corr * s.scale.asDiagonal() - m)) < 1e-14);

  Mat indefinite(2, 2);
  indefinite << 1, 2, 2, 1;
  CHECK_THROWS_AS(standardize(indefinite), DomainError);
  Mat asym(2, 2);
  asym << 1, 0.2, 0.3, 1;
  CHECK_THROWS_AS(standardize(asym), DomainError);
}

TEST_CASE("closed-form orthant probabilities") {
  CHECK(orthant_probability(Mat::Identity(1, 1)).probability == 0.5);
  CHECK(orthant_probability(Mat::Identity(2, 2)).probability == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(std::abs(orthant_probability(equicorrelated(2, 0.5)).probability - 1.0 / 3.0) < 1e-15);
  CHECK(std::abs(orthant_probability(Mat::Identity(3, 3)).probability - 0.125) < 1e-15);
  CHECK(std::abs(orthant_probability(equicorrelated(3, 0.5)).probability - 0.25) < 1e-15);
  CHECK(orthant_probability(equicorrelated(3, 0.5)).method == OrthantMethod::ClosedForm);
}

TEST_CASE("orthant probabilities sum to one over sign patterns") {
  RandomStream rng(21, 0);
  for (int n = 1; n <= 3; ++n)
    for (int t = 0; t < 20; ++t) {
      const Mat psi = testutil::random_spd(rng, n);
      double total = 0.0;
      for (unsigned p = 0; p < (1u << n); ++p) total += orthant_probability(sign_flip(psi, p)).probability;
      CHECK(std::abs(total - 1.0) <= 1e-12);
    }
  SUBCASE("numeric path at L = 4") {
    NumericPolicy policy;
    policy.rel_tol = 1e-5;
    policy.max_samples = 100'000'000;
    for (int t = 0; t < 5; ++t) {
      const Mat psi = testutil::random_spd(rng, 4);
      double total = 0.0, var = 0.0;
      for (unsigned p = 0; p < 16; ++p) {
        const OrthantResult r = orthant_probability(sign_flip(psi, p), policy);
        CHECK(r.method == OrthantMethod::QuasiRandom);
        total += r.probability;
        var += r.error_estimate * r.error_estimate;
      }
      CHECK(std::abs(total - 1.0) <= 3.0 * std::sqrt(var));
    }
  }
}

TEST_CASE("scale invariance") {
  RandomStream rng(22, 0);
  for (int n = 2; n <= 5; ++n) {
    const Mat psi = testutil::random_spd(rng, n);
    Vec d(n);
    for (int i = 0; i < n; ++i) d(i) = 0.1 + 5.0 * rng.uniform();
    const Mat scaled = d.asDiagonal() * psi * d.asDiagonal();
    const double a = orthant_probability(psi).probability;
    const double b = orthant_probability(scaled).probability;
    if (n <= 3)
      CHECK(std::abs(a - b) <= 1e-14);
    else
      CHECK(std::abs(a - b) <= 1e-4 * a);
  }
}

TEST_CASE("numeric engine against closed forms and the counting oracle") {
  RandomStream rng(23, 0);
  NumericPolicy numeric;
  numeric.closed_forms = false;
  numeric.rel_tol = 1e-6;
  numeric.max_samples = 100'000'000;
  for (int n = 2; n <= 3; ++n)
    for (int t = 0; t < 10; ++t) {
      const Mat psi = testutil::random_spd(rng, n);
      const OrthantResult exact = orthant_probability(psi);
      const OrthantResult approx = orthant_probability(psi, numeric);
      CHECK(approx.method == OrthantMethod::QuasiRandom);
      CHECK(std::abs(exact.probability - approx.probability) <= 5e-6 * exact.probability);
    }
  for (int n = 4; n <= 6; ++n) {
    const Mat psi = testutil::random_spd(rng, n);
    const OrthantResult r = orthant_probability(psi);
    const oracle::Estimate mc = oracle::orthant_by_counting(psi, 2'000'000, 100 + n);
    CHECK(std::abs(r.probability - mc.value) <= 5.0 * mc.std_error + 3.0 * r.error_estimate);
  }
}

TEST_CASE("block splitting") {
  Mat psi = Mat::Zero(5, 5);
  psi.block(0, 0, 2, 2) = equicorrelated(2, 0.3);
  psi.block(2, 2, 3, 3) = equicorrelated(3, -0.2);
  const auto blocks = independent_blocks(psi);
  REQUIRE(blocks.size() == 2);
  CHECK(blocks[0] == std::vector<int>{0, 1});
  CHECK(blocks[1] == std::vector<int>{2, 3, 4});

  const double expected = orthant_probability(equicorrelated(2, 0.3)).probability *
                          orthant_probability(equicorrelated(3, -0.2)).probability;
  const OrthantResult split = orthant_probability(psi);
  CHECK(split.method == OrthantMethod::ClosedForm);
  CHECK(std::abs(split.probability - expected) < 1e-15);

  NumericPolicy dense;
  dense.split_blocks = false;
  dense.rel_tol = 1e-6;
  dense.max_samples = 100'000'000;
  const OrthantResult joint = orthant_probability(psi, dense);
  CHECK(joint.method == OrthantMethod::QuasiRandom);
  CHECK(std::abs(joint.probability - expected) <= 5e-6 * expected);

  // Interleaved indices are found as one component.
  Mat chain = Mat::Identity(4, 4);
  chain(0, 3) = chain(3, 0) = 0.2;
  chain(3, 1) = chain(1, 3) = 0.1;
  const auto cb = independent_blocks(chain);
  REQUIRE(cb.size() == 2);
  CHECK(cb[0] == std::vector<int>{0, 1, 3});
  CHECK(cb[1] == std::vector<int>{2});
}

TEST_CASE("orthant error reporting") {
  Mat indefinite(2, 2);
  indefinite << 1, 2, 2, 1;
  CHECK_THROWS_AS(orthant_probability(indefinite), DomainError);

  RandomStream rng(24, 0);
  NumericPolicy tight;
  tight.rel_tol = 1e-9;
  tight.max_samples = 20000;
  try {
    orthant_probability(testutil::random_spd(rng, 5), tight);
    FAIL("expected AccuracyError");
  } catch (const AccuracyError& e) {
    CHECK(e.requested_error() == 1e-9);
    CHECK(e.achieved_error() > 1e-9);
  }

  const Mat big = equicorrelated(kMaxOrthantDim + 1, 0.3);
  CHECK_THROWS_AS(orthant_probability(big), CapabilityError);
  CHECK_NOTHROW(orthant_probability(Mat::Identity(kMaxOrthantDim + 8, kMaxOrthantDim + 8)));
}

TEST_CASE("numeric results are deterministic per seed") {
  RandomStream rng(25, 0);
  const Mat psi = testutil::random_spd(rng, 5);
  NumericPolicy a;
  NumericPolicy b;
  b.seed = a.seed + 1;
  const double p1 = orthant_probability(psi, a).probability;
  CHECK(orthant_probability(psi, a).probability == p1);
  const OrthantResult p2 = orthant_probability(psi, b);
  CHECK(p2.probability != p1);
  CHECK(std::abs(p2.probability - p1) <= 2e-4 * p1);
}

TEST_CASE("clamped_asin") {
  CHECK(clamped_asin(1.0 + 5e-13) == doctest::Approx(std::numbers::pi / 2));
  CHECK(clamped_asin(-1.0 - 5e-13) == doctest::Approx(-std::numbers::pi / 2));
  CHECK_THROWS_AS(clamped_asin(1.0 + 1e-9), DomainError);
  CHECK_THROWS_AS(clamped_asin(std::nan("")), DomainError);
}

TEST_CASE("positive_orthant_mean examples") {
  const double inv_sqrt_pi = 1.0 / std::sqrt(std::numbers::pi);
  const TruncatedMeanResult a = positive_orthant_mean(Mat::Identity(2, 2));
  CHECK(std::abs(a.mean(0) - inv_sqrt_pi) < 1e-15);
  CHECK(std::abs(a.mean(1) - inv_sqrt_pi) < 1e-15);
  CHECK(a.normalizer == doctest::Approx(std::numbers::pi / 4).epsilon(1e-14));

  const TruncatedMeanResult b = positive_orthant_mean(0.5 * Mat::Identity(2, 2));
  CHECK(std::abs(b.mean(0) - 1.0 / std::sqrt(0.5 * std::numbers::pi)) < 1e-15);

  const Mat psi = equicorrelated(2, 0.5);
  const TruncatedMeanResult c = positive_orthant_mean(0.5 * psi.inverse());
  CHECK(c.mean(0) == doctest::Approx(0.8976).epsilon(1e-4));
  CHECK(std::abs(c.mean(0) - 1.5 / (2 * std::sqrt(2 * std::numbers::pi)) * 3.0) < 1e-14);
  CHECK(std::abs(c.probability - 1.0 / 3.0) < 1e-15);
  CHECK(c.method == MeanMethod::ClosedForm);
}

TEST_CASE("positive_orthant_mean normalizer and probability") {
  RandomStream rng(26, 0);
  for (int n = 1; n <= 4; ++n) {
    const Mat c = testutil::random_spd(rng, n);
    const TruncatedMeanResult r = positive_orthant_mean(c);
    const double det = c.determinant();
    CHECK(r.normalizer == doctest::Approx(std::pow(std::numbers::pi, n / 2.0) / std::sqrt(det) * r.probability)
                              .epsilon(1e-12));
    CHECK(r.probability == doctest::Approx(orthant_probability(c.inverse()).probability).epsilon(1e-12));
    CHECK((r.mean.array() > 0.0).all());
  }
}

TEST_CASE("positive_orthant_mean agrees with rejection sampling up to L = 6") {
  RandomStream rng(27, 0);
  for (int n = 2; n <= 6; ++n) {
    const Mat c = testutil::random_spd(rng, n);
    const TruncatedMeanResult r = positive_orthant_mean(c);
    const oracle::VectorEstimate mc = oracle::truncated_mean_by_rejection(c, 4'000'000, 300 + n);
    REQUIRE(mc.accepted > 2000);
    for (int i = 0; i < n; ++i) CHECK(std::abs(r.mean(i) - mc.mean(i)) <= 5.0 * mc.std_error(i) + 1e-3 * r.mean(i));
  }
}

TEST_CASE("truncated mean through the characteristic function") {
  const double k = 1.0 / (2.0 * std::sqrt(2.0 * std::numbers::pi));
  CHECK(truncated_mean_cf_2d(0.0)[0] == doctest::Approx(0.19947).epsilon(1e-4));
  CHECK(std::abs(truncated_mean_cf_2d(0.0)[0] - k) < 1e-16);
  CHECK(std::abs(truncated_mean_cf_2d(1.0)[1] - 1.0 / std::sqrt(2.0 * std::numbers::pi)) < 1e-16);
  CHECK(truncated_mean_cf_2d(-1.0)[0] == 0.0);
  CHECK_THROWS_AS(truncated_mean_cf_2d(1.1), DomainError);
  CHECK_THROWS_AS(cf_mean_2d(-1.0), DomainError);

  RandomStream rng(28, 0);
  for (int t = 0; t < 50; ++t) {
    const double rho = 1.98 * rng.uniform() - 0.99;
    const auto cf = cf_mean_2d(rho);
    const TruncatedMeanResult r = positive_orthant_mean(0.5 * equicorrelated(2, rho).inverse());
    CHECK(std::abs(r.mean(0) - cf[0]) <= 1e-10);
    CHECK(std::abs(r.mean(1) - cf[1]) <= 1e-10);
  }
}

TEST_CASE("positive_orthant_mean numeric reduction") {
  RandomStream rng(29, 0);
  NumericPolicy numeric;
  numeric.closed_forms = false;
  numeric.rel_tol = 1e-6;
  numeric.max_samples = 100'000'000;
  for (int n = 2; n <= 3; ++n) {
    const Mat c = testutil::random_spd(rng, n);
    const TruncatedMeanResult exact = positive_orthant_mean(c);
    const TruncatedMeanResult approx = positive_orthant_mean(c, numeric);
    CHECK(exact.method == MeanMethod::ClosedForm);
    CHECK(approx.method == MeanMethod::Reduction);
    for (int i = 0; i < n; ++i) CHECK(std::abs(exact.mean(i) - approx.mean(i)) <= 2e-5 * exact.mean(i));
  }
  // L = 4 needs the numeric engine for P; the default tolerance bounds the gap.
  const Mat c4 = testutil::random_spd(rng, 4);
  const TruncatedMeanResult coarse = positive_orthant_mean(c4);
  const TruncatedMeanResult fine = positive_orthant_mean(c4, numeric);
  for (int i = 0; i < 4; ++i) CHECK(std::abs(coarse.mean(i) - fine.mean(i)) <= 2e-4 * fine.mean(i));
  const Mat c5 = testutil::random_spd(rng, 5);
  const TruncatedMeanResult r5 = positive_orthant_mean(c5);
  CHECK(r5.method == MeanMethod::Reduction);
  CHECK(r5.rel_error > 0.0);
  // P and the g_k each stay below rel_tol / 3.
  CHECK(r5.rel_error <= 2e-4 / 3.0 * 1.01);
}

TEST_CASE("positive_orthant_mean meets rel_tol under cancellation") {
  // Strong negative correlations make C^{-1} w cancel by more than 10x.
  Mat psi(3, 3);
  psi << 1, -0.39, -0.37, -0.39, 1, -0.67, -0.37, -0.67, 1;
  for (double shrink : {0.98, 0.995}) {
    Mat p = shrink * psi;
    p.diagonal().setOnes();
    for (int flip = 0; flip < 8; ++flip) {
      Vec d(3);
      for (int i = 0; i < 3; ++i) d(i) = (flip >> i) & 1 ? -1.0 : 1.0;
      const Mat c = 0.5 * (d.asDiagonal() * p * d.asDiagonal()).inverse();
      NumericPolicy lattice;
      lattice.closed_forms = false;
      lattice.max_samples = 100'000'000;
      const TruncatedMeanResult exact = positive_orthant_mean(c);
      const TruncatedMeanResult approx = positive_orthant_mean(c, lattice);
      CHECK((exact.mean - approx.mean).cwiseAbs().maxCoeff() <= lattice.rel_tol * exact.mean.maxCoeff());
    }
  }
}
