#pragma once

#include "copulacp/rng.hpp"
#include "copulacp/sample.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <vector>

namespace copulacp {

enum class MultiplierKind { iid, dependent };

struct MultiplierSeq {
  std::vector<double> xi;
  MultiplierKind kind = MultiplierKind::iid;
  std::size_t bandwidth = 1;  // meaningful for dependent sequences only
};

/// Parzen kernel.
double parzen(double x);

/// (k * k)(x) for the Parzen kernel k, by piecewise Gauss-Legendre quadrature
/// (exact up to rounding since the integrand is piecewise polynomial).
double parzen_autoconvolution(double x);

/// Correlation target (k * k)(2x) / (k * k)(0).
double phi_target(double x);

/// Half-width b = ceil((l - 1) / 2) of the moving-average window for bandwidth l.
[[nodiscard]] std::size_t ma_half_width(std::size_t bandwidth);

/// Moving-average weights w_{-b..b} = k(j/b) / (sum_j k(j/b)^2)^{1/2}; {1} when b = 0.
std::vector<double> ma_weights(std::size_t bandwidth);

/// Theoretical lag-h autocorrelation sum_j w_j w_{j+h} of the moving average.
double ma_autocorrelation(std::size_t bandwidth, std::size_t lag);

MultiplierSeq gen_iid(std::size_t n, Rng& rng);
MultiplierSeq gen_dependent(std::size_t n, std::size_t bandwidth, Rng& rng);

/// Bandwidth choice: a fixed value, or the automatic heuristic
/// max(1, round(n^{1/4} (1 + 3 rho))) with rho the mean absolute lag-1
/// autocorrelation of the componentwise normal scores.
struct BandwidthPolicy {
  bool automatic = true;
  std::size_t value = 1;

  static BandwidthPolicy auto_select() { return {}; }
  static BandwidthPolicy fixed(std::size_t l) { return {false, l}; }
};

std::size_t bandwidth_policy(const Sample& s, BandwidthPolicy policy);

/// Mean absolute lag-1 autocorrelation of the componentwise normal scores.
double mean_lag1_normal_score_autocorrelation(const Sample& s);

/// M x n matrix whose row m is the multiplier sequence drawn from substream
/// (seed, multiplier, m).
Eigen::MatrixXd multiplier_matrix(std::size_t n, std::size_t replicates, MultiplierKind kind,
                                  std::size_t bandwidth, std::uint64_t seed);

}  // namespace copulacp
