#pragma once

#include "copulacp/ranks.hpp"
#include "copulacp/sample.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace copulacp {

/// Per-split Cramer-von Mises values S_{n,k} for k = 1..n-1 (values[k-1]), their
/// maximum and the smallest maximizing split.
struct StatTrajectory {
  std::vector<double> values;
  double statistic = 0.0;
  std::size_t k_star = 1;
};

/// (kt - ks) / n, the fraction of observations in the block (ks, kt].
[[nodiscard]] inline double lambda_weight(std::size_t n, std::size_t ks, std::size_t kt) noexcept {
  return (static_cast<double>(kt) - static_cast<double>(ks)) / static_cast<double>(n);
}

/// Weighted difference between the empirical copulas of the first k and the last n - k
/// observations, each computed from subsample ranks.
double difference_process(const Sample& s, std::size_t k, std::span<const double> u, Scaling scaling);

/// Same as difference_process but both block copulas use full-sample ranks.
double difference_process_r(const Sample& s, std::size_t k, std::span<const double> u, Scaling scaling);

/// S_{n,k}: mean of the squared difference process over the n full-sample
/// pseudo-observations.
double cvm_at_k(const Sample& s, std::size_t k, Scaling scaling);
double cvm_at_k_r(const Sample& s, std::size_t k, Scaling scaling);

StatTrajectory statistic_sn(const Sample& s, Scaling scaling, unsigned threads = 1);
StatTrajectory statistic_snr(const Sample& s, Scaling scaling);

/// Builds a trajectory from per-split values: max and smallest argmax.
StatTrajectory summarize_trajectory(std::vector<double> values);

}  // namespace copulacp
