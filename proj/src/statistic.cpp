#include "copulacp/statistic.hpp"

#include "copulacp/error.hpp"
#include "copulacp/parallel.hpp"

#include <cmath>

namespace copulacp {

namespace {

void check_split(const Sample& s, std::size_t k, bool interior) {
  if (interior ? (k < 1 || k >= s.n()) : k > s.n()) {
    throw Error("split-range", "split index " + std::to_string(k) + " outside the admissible range");
  }
}

double split_weight(std::size_t n, std::size_t k) {
  return std::sqrt(static_cast<double>(n)) * lambda_weight(n, 0, k) * lambda_weight(n, k, n);
}

double cvm_from_full(const Sample& s, const PseudoObs& full, std::size_t k, Scaling scaling) {
  const std::size_t n = s.n();
  const auto left = pseudo_observations(s, Window{1, k}, scaling);
  const auto right = pseudo_observations(s, Window{k + 1, n}, scaling);
  const auto below_left = dominance_counts(left.values, full.values);
  const auto below_right = dominance_counts(right.values, full.values);
  const double weight = split_weight(n, k);
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double diff = static_cast<double>(below_left[i]) / static_cast<double>(k) -
                        static_cast<double>(below_right[i]) / static_cast<double>(n - k);
    const double value = weight * diff;
    sum += value * value;
  }
  return sum / static_cast<double>(n);
}

}  // namespace

double difference_process(const Sample& s, std::size_t k, std::span<const double> u, Scaling scaling) {
  check_split(s, k, false);
  if (u.size() != s.d()) throw Error("dimension", "point has the wrong number of coordinates");
  if (k == 0 || k == s.n()) {
    for (const double v : u) {
      if (!(v >= 0.0 && v <= 1.0)) throw Error("domain", "point outside [0,1]^d");
    }
    return 0.0;
  }
  const double left = empirical_copula(pseudo_observations(s, Window{1, k}, scaling), u);
  const double right = empirical_copula(pseudo_observations(s, Window{k + 1, s.n()}, scaling), u);
  return split_weight(s.n(), k) * (left - right);
}

double difference_process_r(const Sample& s, std::size_t k, std::span<const double> u, Scaling scaling) {
  check_split(s, k, false);
  const auto full = pseudo_observations(s, Window{1, s.n()}, scaling);
  const double left = empirical_copula_fullrank(full, Window{1, k}, u);
  const double right = empirical_copula_fullrank(full, Window{k + 1, s.n()}, u);
  if (k == 0 || k == s.n()) return 0.0;
  return split_weight(s.n(), k) * (left - right);
}

double cvm_at_k(const Sample& s, std::size_t k, Scaling scaling) {
  check_split(s, k, true);
  const auto full = pseudo_observations(s, Window{1, s.n()}, scaling);
  return cvm_from_full(s, full, k, scaling);
}

double cvm_at_k_r(const Sample& s, std::size_t k, Scaling scaling) {
  check_split(s, k, true);
  return statistic_snr(s, scaling).values[k - 1];
}

StatTrajectory summarize_trajectory(std::vector<double> values) {
  StatTrajectory out;
  out.values = std::move(values);
  out.statistic = out.values.empty() ? 0.0 : out.values.front();
  for (std::size_t k = 1; k < out.values.size(); ++k) {
    if (out.values[k] > out.statistic) {
      out.statistic = out.values[k];
      out.k_star = k + 1;
    }
  }
  return out;
}

StatTrajectory statistic_sn(const Sample& s, Scaling scaling, unsigned threads) {
  const std::size_t n = s.n();
  const auto full = pseudo_observations(s, Window{1, n}, scaling);
  std::vector<double> values(n - 1);
  parallel_for(n - 1, threads, [&](std::size_t idx) { values[idx] = cvm_from_full(s, full, idx + 1, scaling); });
  return summarize_trajectory(std::move(values));
}

StatTrajectory statistic_snr(const Sample& s, Scaling scaling) {
  const std::size_t n = s.n();
  const std::size_t d = s.d();
  const auto full = pseudo_observations(s, Window{1, n}, scaling);
  const auto& u = full.values;
  std::vector<double> sums(n - 1, 0.0);
  std::vector<std::size_t> prefix(n + 1);
  for (std::size_t i = 0; i < n; ++i) {
    prefix[0] = 0;
    for (std::size_t t = 0; t < n; ++t) {
      bool inside = true;
      for (std::size_t j = 0; j < d && inside; ++j) {
        inside = u(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(j)) <=
                 u(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      }
      prefix[t + 1] = prefix[t] + (inside ? 1 : 0);
    }
    for (std::size_t k = 1; k < n; ++k) {
      const double diff = static_cast<double>(prefix[k]) / static_cast<double>(k) -
                          static_cast<double>(prefix[n] - prefix[k]) / static_cast<double>(n - k);
      const double value = split_weight(n, k) * diff;
      sums[k - 1] += value * value;
    }
  }
  for (double& v : sums) v /= static_cast<double>(n);
  return summarize_trajectory(std::move(sums));
}

}  // namespace copulacp
