#include "copulacp/dgp.hpp"
#include "copulacp/error.hpp"
#include "copulacp/rng.hpp"
#include "copulacp/statistic.hpp"
#include "support.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

using namespace copulacp;
using Catch::Matchers::WithinAbs;

namespace {

std::string error_code(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return {};
}

// Each test case checks several margins; the 5% level is split across them.
void check_margins_uniform(const Eigen::MatrixXd& u, int margins_in_case) {
  const double bound = oracle::kolmogorov_quantile(0.05 / margins_in_case) / std::sqrt(static_cast<double>(u.rows()));
  for (Eigen::Index j = 0; j < u.cols(); ++j) {
    CHECK(oracle::ks_uniform(oracle::column(u, j)) <= bound);
    CHECK(u.col(j).minCoeff() > 0.0);
    CHECK(u.col(j).maxCoeff() < 1.0);
  }
}

}  // namespace

TEST_CASE("tau to parameter conversions", "[dgp]") {
  CHECK_THAT(tau_to_param(Family::clayton, 0.5), WithinAbs(2.0, 1e-15));
  CHECK_THAT(tau_to_param(Family::normal, 0.5), WithinAbs(std::sin(std::numbers::pi / 4.0), 1e-15));
  CHECK_THAT(tau_to_param(Family::gumbel, 1e-12), WithinAbs(1.0, 1e-11));
  CHECK(tau_to_param(Family::gumbel, 0.5) == 2.0);
  CHECK(error_code([] { tau_to_param(Family::clayton, 1.0); }) == "tau-range");
  CHECK(error_code([] { tau_to_param(Family::normal, -1.0); }) == "tau-range");
  CHECK(copula_from_tau(Family::clayton, 0.0, 2).family == Family::independence);

  for (const double tau : {-0.6, -0.2, 0.1, 0.25, 0.5, 0.75}) {
    const double theta = tau_to_param(Family::frank, tau);
    CHECK_THAT(param_to_tau(Family::frank, theta), WithinAbs(tau, 1e-9));
    CHECK((theta > 0.0) == (tau > 0.0));
  }
  for (const auto f : {Family::clayton, Family::gumbel, Family::normal}) {
    for (const double tau : {0.1, 0.4, 0.7}) CHECK_THAT(param_to_tau(f, tau_to_param(f, tau)), WithinAbs(tau, 1e-12));
  }
}

TEST_CASE("Kolmogorov quantile", "[dgp]") {
  CHECK_THAT(oracle::kolmogorov_quantile(0.05), WithinAbs(1.3581, 1e-4));
}

TEST_CASE("Debye function", "[dgp]") {
  // D1(x) = 1 - x/4 + x^2/36 - x^4/3600 + ... near 0; D1(-x) = D1(x) + x/2.
  CHECK_THAT(debye1(0.01), WithinAbs(1.0 - 0.0025 + 1e-4 / 36.0 - 1e-8 / 3600.0, 1e-15));
  CHECK_THAT(debye1(-2.0), WithinAbs(debye1(2.0) + 1.0, 1e-12));
  // Large-x limit pi^2 / (6 x).
  CHECK_THAT(debye1(200.0), WithinAbs(std::numbers::pi * std::numbers::pi / 1200.0, 1e-10));
}

TEST_CASE("copula samplers reproduce Kendall's tau and uniform margins", "[dgp][simulation]") {
  const std::size_t n = 100000;
  struct Case {
    Family family;
    double tau;
    std::size_t d;
  };
  const Case cases[] = {{Family::clayton, 0.5, 2},  {Family::gumbel, 0.5, 2},   {Family::normal, 0.5, 2},
                        {Family::frank, 0.5, 2},    {Family::frank, -0.4, 2},   {Family::clayton, 0.25, 3},
                        {Family::gumbel, 0.75, 3},  {Family::normal, -0.3, 2},  {Family::frank, 0.3, 3}};
  std::uint64_t stream = 0;
  for (const auto& c : cases) {
    Rng rng = substream(7, {++stream});
    const CopulaSpec spec = copula_from_tau(c.family, c.tau, c.d);
    const Eigen::MatrixXd u = sample_copula(spec, n, rng);
    INFO(to_string(c.family) << " tau=" << c.tau << " d=" << c.d);
    REQUIRE(u.rows() == static_cast<Eigen::Index>(n));
    REQUIRE(u.cols() == static_cast<Eigen::Index>(c.d));
    for (Eigen::Index a = 0; a < u.cols(); ++a)
      for (Eigen::Index b = a + 1; b < u.cols(); ++b)
        CHECK_THAT(oracle::kendall_tau(oracle::column(u, a), oracle::column(u, b)), WithinAbs(c.tau, 0.01));
    check_margins_uniform(u, 21);
  }

  Rng rng = substream(7, {100});
  const Eigen::MatrixXd ind = sample_copula({Family::independence, 0.0, 3}, 20000, rng);
  CHECK(std::abs(oracle::kendall_tau(oracle::column(ind, 0), oracle::column(ind, 2))) <= 4.0 / std::sqrt(20000.0));
}

TEST_CASE("Khoudraji construction", "[dgp][simulation]") {
  const CopulaSpec c1 = copula_from_tau(Family::clayton, 0.6, 2);
  const CopulaSpec c2 = copula_from_tau(Family::gumbel, 0.5, 2);
  const std::size_t n = 50000;

  Rng a = substream(8, {1}), b = substream(8, {2});
  const Eigen::MatrixXd degenerate = khoudraji_sample(c1, c2, 1.0, 1.0, n, a);
  const Eigen::MatrixXd direct = sample_copula(c2, n, b);
  CHECK_THAT(oracle::kendall_tau(oracle::column(degenerate, 0), oracle::column(degenerate, 1)),
             WithinAbs(oracle::kendall_tau(oracle::column(direct, 0), oracle::column(direct, 1)), 0.015));
  check_margins_uniform(degenerate, 4);

  Rng c = substream(8, {3});
  const CopulaSpec strong = copula_from_tau(Family::clayton, 0.7, 2);
  const Eigen::MatrixXd asym = khoudraji_sample(strong, strong, 0.8, 0.5, n, c);
  check_margins_uniform(asym, 4);
  // Largest standardised difference; each pair contributes +-1 or 0, so the
  // standard error is sqrt(#nonzero) / n.
  double largest_z = 0.0;
  for (const double s : {0.2, 0.4, 0.6}) {
    for (const double t : {0.3, 0.5, 0.8}) {
      double diff = 0.0, nonzero = 0.0;
      for (Eigen::Index i = 0; i < asym.rows(); ++i) {
        const double e = ((asym(i, 0) <= s && asym(i, 1) <= t) ? 1.0 : 0.0) -
                         ((asym(i, 0) <= t && asym(i, 1) <= s) ? 1.0 : 0.0);
        diff += e;
        nonzero += e != 0.0 ? 1.0 : 0.0;
      }
      if (nonzero > 0.0) largest_z = std::max(largest_z, std::abs(diff) / std::sqrt(nonzero));
    }
  }
  CHECK(largest_z > 5.0);

  Rng d = substream(8, {4});
  CHECK(error_code([&] { khoudraji_sample(copula_from_tau(Family::clayton, 0.5, 3), c2, 0.5, 0.5, 10, d); }) ==
        "dimension");
}

TEST_CASE("serial filters", "[dgp]") {
  const Eigen::MatrixXd ones = Eigen::MatrixXd::Ones(kBurnIn + 5, 2);
  const Eigen::MatrixXd path = filter_path(ones, SerialModel::ar1);
  CHECK(path(0, 0) == 1.0);
  CHECK(path(1, 0) == 1.5);
  CHECK(path(2, 1) == 1.75);
  CHECK(serial_filter(ones, SerialModel::ar1).rows() == 5);

  Eigen::MatrixXd eps = Eigen::MatrixXd::Zero(kBurnIn + 3, 2);
  eps(1, 0) = 2.0;
  const Eigen::MatrixXd ex = filter_path(eps, SerialModel::expar);
  CHECK(ex(0, 0) == 0.0);
  CHECK(ex(1, 0) == 0.1 * 2.0);

  CHECK(error_code([&] { serial_filter(Eigen::MatrixXd::Ones(kBurnIn, 2), SerialModel::ar1); }) == "burn-in");

  Rng rng(12);
  std::normal_distribution<double> z;
  Eigen::MatrixXd big(kBurnIn + 100000, 1);
  for (Eigen::Index i = 0; i < big.rows(); ++i) big(i, 0) = z(rng);
  const Eigen::MatrixXd x = serial_filter(big, SerialModel::ar1);
  CHECK_THAT(oracle::autocorrelation(oracle::column(x, 0), 1), WithinAbs(0.5, 0.05));
  CHECK(serial_filter(big, SerialModel::expar) == serial_filter(big, SerialModel::expar));
}

TEST_CASE("scenario assembly", "[dgp]") {
  ScenarioSpec spec;
  spec.n = 100;
  spec.before = {copula_from_tau(Family::clayton, 0.3, 2), {}};
  CHECK(spec.break_index() == 50);
  spec.break_fraction = 0.25;
  spec.after = CopulaModel{copula_from_tau(Family::clayton, 0.6, 2), {}};
  CHECK(spec.break_index() == 25);

  spec.break_fraction = 1.0;
  CHECK(error_code([&] { spec.validate(); }) == "break-range");
  spec.break_fraction = 0.0;
  CHECK(error_code([&] { spec.validate(); }) == "break-range");
  spec.break_fraction = 0.5;

  Rng a = substream(3, {1}), b = substream(3, {1});
  CHECK(make_scenario(spec, a).data() == make_scenario(spec, b).data());

  // Mean shift: post-break rows of component 1 are shifted by mu relative to the same draws.
  ScenarioSpec shift;
  shift.n = 60;
  shift.before = {copula_from_tau(Family::normal, 0.0, 2), {}};
  shift.shift = MarginShift{1, 2.0};
  ScenarioSpec plain = shift;
  plain.shift = MarginShift{1, 0.0};
  Rng c = substream(4, {1}), d = substream(4, {1});
  const auto shifted = make_scenario(shift, c).data();
  const auto base = make_scenario(plain, d).data();
  for (Eigen::Index i = 0; i < 60; ++i) {
    CHECK_THAT(shifted(i, 0) - base(i, 0), WithinAbs(i >= 30 ? 2.0 : 0.0, 1e-12));
    CHECK(shifted(i, 1) == base(i, 1));
  }
}

TEST_CASE("null scenarios are exchangeable in time", "[dgp][simulation]") {
  ScenarioSpec spec;
  spec.n = 60;
  spec.before = {copula_from_tau(Family::gumbel, 0.4, 2), {}};
  std::vector<double> a, b;
  for (std::uint64_t r = 0; r < 200; ++r) {
    Rng ra = substream(50, {r});
    Rng rb = substream(51, {r});
    a.push_back(statistic_sn(make_scenario(spec, ra), Scaling::den_lk1).statistic);
    Eigen::MatrixXd x = make_scenario(spec, rb).data();
    Eigen::PermutationMatrix<Eigen::Dynamic> perm(60);
    perm.setIdentity();
    std::shuffle(perm.indices().data(), perm.indices().data() + 60, rb);
    b.push_back(statistic_sn(Sample(perm * x), Scaling::den_lk1).statistic);
  }
  // Two-sample Kolmogorov distance at the 1% level.
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double dmax = 0.0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] <= b[j]) ++i;
    else ++j;
    dmax = std::max(dmax, std::abs(static_cast<double>(i) - static_cast<double>(j)) / 200.0);
  }
  CHECK(dmax <= 1.63 * std::sqrt(2.0 / 200.0));
}
