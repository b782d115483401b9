#include "copulacp/dgp.hpp"
#include "copulacp/error.hpp"
#include "copulacp/multipliers.hpp"
#include "copulacp/rng.hpp"
#include "support.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numeric>

using namespace copulacp;
using Catch::Matchers::WithinAbs;

TEST_CASE("parzen kernel values and continuity", "[multipliers]") {
  CHECK(parzen(0.0) == 1.0);
  CHECK(parzen(0.5) == 0.25);
  CHECK(parzen(-0.5) == 0.25);
  CHECK(parzen(1.0) == 0.0);
  CHECK(parzen(1.5) == 0.0);
  CHECK_THAT(parzen(0.5 - 1e-9), WithinAbs(parzen(0.5 + 1e-9), 1e-8));
  for (double x = -1.2; x <= 1.2; x += 0.01) CHECK(parzen(x) == parzen(-x));
}

TEST_CASE("correlation target", "[multipliers]") {
  CHECK_THAT(phi_target(0.0), WithinAbs(1.0, 1e-12));
  CHECK(phi_target(1.01) == 0.0);
  CHECK(phi_target(-3.0) == 0.0);
  CHECK_THAT(phi_target(1.0), WithinAbs(0.0, 1e-12));
  for (double x = 0.05; x < 1.0; x += 0.05) {
    CHECK_THAT(phi_target(x), WithinAbs(phi_target(-x), 1e-12));
    CHECK(phi_target(x) > 0.0);
    CHECK(phi_target(x) < 1.0);
  }
  // (k*k)(0) = int k^2 = 151/280; phi(0.5) = (k*k)(1) / (k*k)(0) from an independent quadrature.
  CHECK_THAT(parzen_autoconvolution(0.0), WithinAbs(151.0 / 280.0, 1e-13));
  CHECK_THAT(phi_target(0.5), WithinAbs(0.049668874172185434, 1e-10));
}

TEST_CASE("moving-average weights", "[multipliers]") {
  CHECK(ma_half_width(1) == 0);
  CHECK(ma_half_width(2) == 1);
  CHECK(ma_half_width(10) == 5);
  CHECK(ma_half_width(11) == 5);
  CHECK_THROWS_AS(ma_half_width(0), Error);
  CHECK(ma_weights(1) == std::vector<double>{1.0});

  for (std::size_t l = 1; l <= 40; ++l) {
    const auto w = ma_weights(l);
    const double ss = std::inner_product(w.begin(), w.end(), w.begin(), 0.0);
    CHECK_THAT(ss, WithinAbs(1.0, 1e-12));
    CHECK_THAT(ma_autocorrelation(l, 0), WithinAbs(1.0, 1e-12));
    for (std::size_t h = l; h < l + 10; ++h) CHECK(ma_autocorrelation(l, h) == 0.0);
    for (std::size_t h = 1; h < w.size(); ++h) {
      double direct = 0.0;
      for (std::size_t j = 0; j + h < w.size(); ++j) direct += w[j] * w[j + h];
      CHECK_THAT(ma_autocorrelation(l, h), WithinAbs(direct, 1e-15));
    }
  }
}

TEST_CASE("dependent multipliers with bandwidth one are the innovations", "[multipliers]") {
  Rng a(5), b(5);
  const auto xi = gen_dependent(50, 1, a);
  const auto z = gen_iid(50, b);
  CHECK(xi.xi == z.xi);
  CHECK_THROWS_AS(gen_dependent(10, 0, a), Error);
}

TEST_CASE("iid multipliers", "[multipliers]") {
  Rng rng(1);
  const auto one = gen_iid(1, rng);
  REQUIRE(one.xi.size() == 1);
  CHECK(std::isfinite(one.xi[0]));

  Rng r1(17), r2(17);
  const auto a = gen_iid(100000, r1);
  CHECK(a.xi == gen_iid(100000, r2).xi);
  CHECK(std::abs(oracle::mean(a.xi)) <= 4.0 / std::sqrt(1e5));
  CHECK_THAT(oracle::variance(a.xi), WithinAbs(1.0, 0.05));
}

TEST_CASE("dependent multiplier law", "[multipliers][simulation]") {
  Rng rng(23);
  const auto xi = gen_dependent(100000, 10, rng);
  CHECK(xi.bandwidth == 10);
  CHECK_THAT(oracle::mean(xi.xi), WithinAbs(0.0, 0.05));
  CHECK_THAT(oracle::variance(xi.xi), WithinAbs(1.0, 0.05));
  for (std::size_t h = 1; h <= 20; ++h) {
    CHECK_THAT(oracle::autocorrelation(xi.xi, h), WithinAbs(ma_autocorrelation(10, h), 0.05));
  }
}

TEST_CASE("multiplier matrix rows come from their own substreams", "[multipliers]") {
  const auto m = multiplier_matrix(30, 5, MultiplierKind::dependent, 4, 77);
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Rng rng = substream(77, {static_cast<std::uint64_t>(StreamTag::multiplier), static_cast<std::uint64_t>(r)});
    const auto row = gen_dependent(30, 4, rng);
    for (Eigen::Index c = 0; c < m.cols(); ++c) CHECK(m(r, c) == row.xi[c]);
  }
}

TEST_CASE("bandwidth policy", "[multipliers]") {
  const Eigen::MatrixXd any = Eigen::MatrixXd::Random(20, 2);
  CHECK(bandwidth_policy(Sample(any), BandwidthPolicy::fixed(5)) == 5);

  double iid_mean = 0.0, ar_mean = 0.0;
  for (std::uint64_t r = 0; r < 100; ++r) {
    ScenarioSpec spec;
    spec.n = 256;
    spec.before = {copula_from_tau(Family::independence, 0.0, 2), {}};
    Rng a = substream(5, {r});
    const std::size_t li = bandwidth_policy(make_scenario(spec, a), BandwidthPolicy::auto_select());
    CHECK(li >= 1);
    CHECK(li <= 8);
    iid_mean += static_cast<double>(li);
    spec.serial = SerialModel::ar1;
    Rng b = substream(6, {r});
    ar_mean += static_cast<double>(bandwidth_policy(make_scenario(spec, b), BandwidthPolicy::auto_select()));
  }
  CHECK(ar_mean > iid_mean);
}

TEST_CASE("automatic bandwidth depends on ranks only", "[multipliers][property]") {
  std::mt19937_64 rng(8);
  const Eigen::MatrixXd x = oracle::random_sample(120, 2, rng);
  Eigen::MatrixXd y = x;
  y.col(1) = x.col(1).array().exp();
  CHECK(mean_lag1_normal_score_autocorrelation(Sample(x)) == mean_lag1_normal_score_autocorrelation(Sample(y)));
}
