#pragma once

// Independent reference code for the tests. Nothing here calls into the library's
// rank or copula routines.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <random>
#include <vector>

namespace oracle {

// Raw-definition empirical copula of rows k..l (1-based) of x, ranks recounted from scratch.
inline double window_copula(const Eigen::MatrixXd& x, std::size_t k, std::size_t l, const std::vector<double>& u,
                            bool plus_one) {
  if (k > l) return 0.0;
  const double m = static_cast<double>(l - k + 1);
  const double den = plus_one ? m + 1.0 : m;
  double count = 0.0;
  for (std::size_t i = k; i <= l; ++i) {
    bool below = true;
    for (Eigen::Index j = 0; j < x.cols() && below; ++j) {
      double r = 0.0;
      for (std::size_t t = k; t <= l; ++t) r += x(t - 1, j) <= x(i - 1, j) ? 1.0 : 0.0;
      below = r / den <= u[j];
    }
    count += below ? 1.0 : 0.0;
  }
  return count / m;
}

inline std::vector<double> pseudo_row(const Eigen::MatrixXd& x, std::size_t i, bool plus_one) {
  const auto n = static_cast<std::size_t>(x.rows());
  std::vector<double> u(static_cast<std::size_t>(x.cols()));
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    double r = 0.0;
    for (std::size_t t = 0; t < n; ++t) r += x(t, j) <= x(i - 1, j) ? 1.0 : 0.0;
    u[j] = r / (plus_one ? n + 1.0 : static_cast<double>(n));
  }
  return u;
}

inline double sn(const Eigen::MatrixXd& x, bool plus_one, std::size_t* k_star = nullptr) {
  const auto n = static_cast<std::size_t>(x.rows());
  const double nd = static_cast<double>(n);
  double best = -1.0;
  for (std::size_t k = 1; k < n; ++k) {
    double acc = 0.0;
    for (std::size_t i = 1; i <= n; ++i) {
      const auto u = pseudo_row(x, i, plus_one);
      const double diff = window_copula(x, 1, k, u, plus_one) - window_copula(x, k + 1, n, u, plus_one);
      const double dn = std::sqrt(nd) * (k / nd) * ((n - k) / nd) * diff;
      acc += dn * dn;
    }
    acc /= nd;
    if (acc > best) {
      best = acc;
      if (k_star) *k_star = k;
    }
  }
  return best;
}

inline Eigen::MatrixXd random_sample(std::size_t n, std::size_t d, std::mt19937_64& rng, bool ties = false) {
  Eigen::MatrixXd x(n, d);
  std::normal_distribution<double> z;
  std::uniform_int_distribution<int> level(0, 3);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) x(i, j) = ties ? static_cast<double>(level(rng)) : z(rng);
  return x;
}

// Kendall's tau-a by Knight's merge-sort count.
inline double kendall_tau(const std::vector<double>& a, const std::vector<double>& b) {
  const std::size_t n = a.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t i, std::size_t j) { return a[i] < a[j]; });
  std::vector<double> y(n), buf(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = b[idx[i]];
  long double discordant = 0;
  for (std::size_t width = 1; width < n; width *= 2) {
    for (std::size_t lo = 0; lo < n; lo += 2 * width) {
      const std::size_t mid = std::min(lo + width, n), hi = std::min(lo + 2 * width, n);
      std::size_t i = lo, j = mid, o = lo;
      while (i < mid && j < hi) {
        if (y[j] < y[i]) {
          discordant += static_cast<long double>(mid - i);
          buf[o++] = y[j++];
        } else {
          buf[o++] = y[i++];
        }
      }
      while (i < mid) buf[o++] = y[i++];
      while (j < hi) buf[o++] = y[j++];
    }
    y.swap(buf);
  }
  const long double pairs = static_cast<long double>(n) * (n - 1) / 2.0L;
  return static_cast<double>((pairs - 2.0L * discordant) / pairs);
}

inline std::vector<double> column(const Eigen::MatrixXd& x, Eigen::Index j) {
  return {x.col(j).data(), x.col(j).data() + x.rows()};
}

// Kolmogorov distance of a sample to U(0,1).
inline double ks_uniform(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const double n = static_cast<double>(v.size());
  double dmax = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    dmax = std::max({dmax, (i + 1) / n - v[i], v[i] - i / n});
  }
  return dmax;
}

// Upper alpha-quantile of the limiting Kolmogorov distribution (of sqrt(n) D_n).
inline double kolmogorov_quantile(double alpha) {
  auto tail = [](double c) {
    double s = 0.0;
    for (int k = 1; k <= 100; ++k) s += 2.0 * ((k % 2) ? 1.0 : -1.0) * std::exp(-2.0 * k * k * c * c);
    return s;
  };
  double lo = 0.3, hi = 5.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (tail(mid) > alpha ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

inline double autocorrelation(const std::vector<double>& x, std::size_t lag) {
  const double n = static_cast<double>(x.size());
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    den += (x[i] - mean) * (x[i] - mean);
    if (i + lag < x.size()) num += (x[i] - mean) * (x[i + lag] - mean);
  }
  return num / den;
}

inline double mean(const std::vector<double>& x) { return std::accumulate(x.begin(), x.end(), 0.0) / x.size(); }

inline double variance(const std::vector<double>& x) {
  const double m = mean(x);
  double s = 0.0;
  for (const double v : x) s += (v - m) * (v - m);
  return s / (x.size() - 1.0);
}

}  // namespace oracle
