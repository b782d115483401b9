#include "copulacp/multipliers.hpp"

#include "copulacp/error.hpp"
#include "copulacp/normal.hpp"
#include "copulacp/ranks.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <cmath>

namespace copulacp {

double parzen(double x) {
  const double a = std::abs(x);
  if (a <= 0.5) return 1.0 - 6.0 * a * a + 6.0 * a * a * a;
  if (a <= 1.0) return 2.0 * (1.0 - a) * (1.0 - a) * (1.0 - a);
  return 0.0;
}

double parzen_autoconvolution(double x) {
  const double lo = std::max(-1.0, x - 1.0);
  const double hi = std::min(1.0, x + 1.0);
  if (!(lo < hi)) return 0.0;
  std::vector<double> cuts{lo, hi};
  for (const double c : {-1.0, -0.5, 0.0, 0.5, 1.0}) {
    for (const double p : {c, x + c}) {
      if (p > lo && p < hi) cuts.push_back(p);
    }
  }
  std::sort(cuts.begin(), cuts.end());
  const auto integrand = [x](double t) { return parzen(t) * parzen(x - t); };
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    if (cuts[i + 1] > cuts[i]) {
      total += boost::math::quadrature::gauss<double, 10>::integrate(integrand, cuts[i], cuts[i + 1]);
    }
  }
  return total;
}

double phi_target(double x) {
  static const double at_zero = parzen_autoconvolution(0.0);
  return parzen_autoconvolution(2.0 * x) / at_zero;
}

std::size_t ma_half_width(std::size_t bandwidth) {
  if (bandwidth < 1) throw Error("bandwidth", "bandwidth must be at least 1");
  return bandwidth / 2;
}

std::vector<double> ma_weights(std::size_t bandwidth) {
  const std::size_t b = ma_half_width(bandwidth);
  if (b == 0) return {1.0};
  std::vector<double> w(2 * b + 1);
  double norm = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double j = static_cast<double>(i) - static_cast<double>(b);
    w[i] = parzen(j / static_cast<double>(b));
    norm += w[i] * w[i];
  }
  norm = std::sqrt(norm);
  for (double& v : w) v /= norm;
  return w;
}

double ma_autocorrelation(std::size_t bandwidth, std::size_t lag) {
  const auto w = ma_weights(bandwidth);
  double acc = 0.0;
  for (std::size_t i = 0; i + lag < w.size(); ++i) acc += w[i] * w[i + lag];
  return acc;
}

MultiplierSeq gen_iid(std::size_t n, Rng& rng) {
  if (n < 1) throw Error("shape", "multiplier sequence needs n >= 1");
  std::normal_distribution<double> normal;
  MultiplierSeq out{std::vector<double>(n), MultiplierKind::iid, 1};
  for (double& v : out.xi) v = normal(rng);
  return out;
}

MultiplierSeq gen_dependent(std::size_t n, std::size_t bandwidth, Rng& rng) {
  if (n < 1) throw Error("shape", "multiplier sequence needs n >= 1");
  const auto w = ma_weights(bandwidth);
  std::normal_distribution<double> normal;
  std::vector<double> z(n + w.size() - 1);
  for (double& v : z) v = normal(rng);
  MultiplierSeq out{std::vector<double>(n, 0.0), MultiplierKind::dependent, bandwidth};
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < w.size(); ++j) acc += w[j] * z[i + j];
    out.xi[i] = acc;
  }
  return out;
}

double mean_lag1_normal_score_autocorrelation(const Sample& s) {
  const std::size_t n = s.n();
  double total = 0.0;
  for (std::size_t j = 0; j < s.d(); ++j) {
    const auto ranks = ranks_in_window(s.column(j), Window{1, n});
    std::vector<double> z(n);
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      z[i] = normal_quantile(static_cast<double>(ranks[i]) / static_cast<double>(n + 1));
      mean += z[i];
    }
    mean /= static_cast<double>(n);
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      den += (z[i] - mean) * (z[i] - mean);
      if (i + 1 < n) num += (z[i] - mean) * (z[i + 1] - mean);
    }
    total += den > 0.0 ? std::abs(num / den) : 0.0;
  }
  return total / static_cast<double>(s.d());
}

std::size_t bandwidth_policy(const Sample& s, BandwidthPolicy policy) {
  if (!policy.automatic) {
    if (policy.value < 1) throw Error("bandwidth", "bandwidth must be at least 1");
    return policy.value;
  }
  const double rho = mean_lag1_normal_score_autocorrelation(s);
  const double raw = std::pow(static_cast<double>(s.n()), 0.25) * (1.0 + 3.0 * rho);
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(raw)));
}

Eigen::MatrixXd multiplier_matrix(std::size_t n, std::size_t replicates, MultiplierKind kind,
                                  std::size_t bandwidth, std::uint64_t seed) {
  Eigen::MatrixXd xi(static_cast<Eigen::Index>(replicates), static_cast<Eigen::Index>(n));
  for (std::size_t m = 0; m < replicates; ++m) {
    Rng rng = substream(seed, {static_cast<std::uint64_t>(StreamTag::multiplier), m});
    const auto seq = kind == MultiplierKind::iid ? gen_iid(n, rng) : gen_dependent(n, bandwidth, rng);
    for (std::size_t i = 0; i < n; ++i) xi(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(i)) = seq.xi[i];
  }
  return xi;
}

}  // namespace copulacp
