#pragma once

#include "copulacp/multipliers.hpp"
#include "copulacp/sample.hpp"
#include "copulacp/statistic.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace copulacp {

/// Which statistic and resampling scheme a test uses:
///  - check: subsample-rank statistic, replicates with window-local ranks and derivatives
///  - hat:   subsample-rank statistic, replicates with full-sample ranks and derivatives
///  - r:     full-sample-rank statistic and its multiplier replicates
enum class Variant { check, hat, r };

std::string_view to_string(Variant v);
Variant parse_variant(std::string_view text);

struct ReplicateStat {
  double value = 0.0;
  Variant variant = Variant::check;
  std::size_t index = 0;
};

struct PValue {
  double p = 1.0;
  std::size_t replicates = 0;
  std::size_t exceedances = 0;
};

/// Multiplier process with full-sample ranks over the block (ks, kt]:
/// n^{-1/2} sum_i xi_i {1(U_i <= u) - C_{1:n}(u)}.
double hat_b(const Sample& s, std::span<const double> xi, std::size_t ks, std::size_t kt,
             std::span<const double> u, Scaling scaling);

/// Multiplier process with block-internal ranks and block-centered multipliers:
/// n^{-1/2} sum_i (xi_i - mean_block(xi)) 1(U_i^{block} <= u).
double check_b(const Sample& s, std::span<const double> xi, std::size_t ks, std::size_t kt,
               std::span<const double> u, Scaling scaling);

/// The same process written with centered indicators,
/// n^{-1/2} sum_i xi_i {1(U_i^{block} <= u) - C_{block}(u)}.
double check_b_centered_indicators(const Sample& s, std::span<const double> xi, std::size_t ks, std::size_t kt,
                                   std::span<const double> u, Scaling scaling);

/// Replicate statistics for every row of `xi` (an M x n multiplier matrix).
///
/// Each replicate difference process is linear in the multipliers, so for a split k
/// the values at all n evaluation points are xi * A_k with an n x n coefficient matrix
/// A_k that depends on the data only. The matrices are built once per split and
/// shared by all replicates; hat and r use prefix sums over a single matrix.
std::vector<double> replicate_statistics(const Sample& s, const Eigen::MatrixXd& xi, Variant variant,
                                         Scaling scaling, unsigned threads = 1);

ReplicateStat replicate_stat(const Sample& s, const MultiplierSeq& xi, Variant variant, Scaling scaling);

/// Fraction of replicates with value >= observed.
PValue p_value(double observed, std::span<const ReplicateStat> reps);

struct TestConfig {
  Variant variant = Variant::check;
  std::size_t replicates = 1000;
  MultiplierKind multiplier = MultiplierKind::dependent;
  BandwidthPolicy bandwidth = BandwidthPolicy::auto_select();
  Scaling scaling = Scaling::den_lk1;
  std::uint64_t seed = 1;
  unsigned threads = 1;
};

struct TestResult {
  Variant variant = Variant::check;
  StatTrajectory trajectory;
  std::vector<ReplicateStat> replicates;
  PValue p;
  MultiplierKind multiplier = MultiplierKind::iid;
  std::optional<std::size_t> bandwidth_used;  // set for dependent multipliers

  [[nodiscard]] double statistic() const noexcept { return trajectory.statistic; }
  [[nodiscard]] std::size_t k_star() const noexcept { return trajectory.k_star; }
};

TestResult run_test(const Sample& s, const TestConfig& cfg);

/// Runs several variants on the same sample with one shared multiplier matrix
/// (cfg.variant is ignored).
std::vector<TestResult> run_tests(const Sample& s, const TestConfig& cfg, std::span<const Variant> variants);

}  // namespace copulacp
