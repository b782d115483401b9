#include "copulacp/bootstrap.hpp"

#include "copulacp/error.hpp"
#include "copulacp/parallel.hpp"
#include "copulacp/ranks.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace copulacp {

std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::check: return "check";
    case Variant::hat: return "hat";
    case Variant::r: return "r";
  }
  return "check";
}

Variant parse_variant(std::string_view text) {
  if (text == "check") return Variant::check;
  if (text == "hat") return Variant::hat;
  if (text == "r") return Variant::r;
  throw Error("usage", "unknown statistic variant '" + std::string(text) + "'");
}

namespace {

void check_block(const Sample& s, std::span<const double> xi, std::size_t ks, std::size_t kt,
                 std::span<const double> u) {
  if (xi.size() != s.n()) throw Error("shape", "multiplier length differs from sample size");
  if (ks > kt || kt > s.n()) throw Error("split-range", "block boundaries must satisfy 0 <= ks <= kt <= n");
  if (u.size() != s.d()) throw Error("dimension", "point has the wrong number of coordinates");
  for (const double v : u) {
    if (!(v >= 0.0 && v <= 1.0)) throw Error("domain", "point outside [0,1]^d");
  }
}

bool below(const RowMatrix& values, Eigen::Index row, std::span<const double> u) {
  for (Eigen::Index j = 0; j < values.cols(); ++j) {
    if (values(row, j) > u[static_cast<std::size_t>(j)]) return false;
  }
  return true;
}

/// Writes, for every evaluation point u_i (row i of `points`), the coefficients
/// scale * [(a_t - C(u)) - sum_j D_j(u) (a_t^{(j)} - C(u^{(j)}))] of the multipliers
/// xi_t, t in the window, into column i of `out`, rows [row0, row0 + m). Here
/// a_t = 1(V_t <= u), a_t^{(j)} = 1(V_tj <= u_j), C is the empirical copula of V and D_j
/// its finite-difference partial derivative (omitted when with_derivative is false).
template <class Out>
void window_coefficients(const RowMatrix& window, const RowMatrix& points, double scale, bool with_derivative,
                         Out& out, Eigen::Index row0) {
  const Eigen::Index m = window.rows();
  const Eigen::Index d = window.cols();
  const double md = static_cast<double>(m);
  const double h = fd_bandwidth(static_cast<std::size_t>(m));
  std::vector<unsigned char> inside(static_cast<std::size_t>(m));
  std::vector<unsigned char> margin(static_cast<std::size_t>(m * d));
  std::vector<double> c_margin(static_cast<std::size_t>(d));
  std::vector<double> deriv(static_cast<std::size_t>(d));
  std::vector<double> upper(static_cast<std::size_t>(d));
  std::vector<double> lower(static_cast<std::size_t>(d));
  std::vector<std::size_t> count_up(static_cast<std::size_t>(d));
  std::vector<std::size_t> count_down(static_cast<std::size_t>(d));
  std::vector<std::size_t> count_margin(static_cast<std::size_t>(d));

  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    const auto u = points.row(i);
    for (Eigen::Index j = 0; j < d; ++j) {
      upper[static_cast<std::size_t>(j)] = std::min(u(j) + h, 1.0);
      lower[static_cast<std::size_t>(j)] = std::max(u(j) - h, 0.0);
    }
    std::fill(count_up.begin(), count_up.end(), 0);
    std::fill(count_down.begin(), count_down.end(), 0);
    std::fill(count_margin.begin(), count_margin.end(), 0);
    std::size_t count = 0;
    for (Eigen::Index t = 0; t < m; ++t) {
      int fails = 0;
      Eigen::Index failed = 0;
      for (Eigen::Index j = 0; j < d; ++j) {
        const bool ok = window(t, j) <= u(j);
        margin[static_cast<std::size_t>(t * d + j)] = ok ? 1 : 0;
        count_margin[static_cast<std::size_t>(j)] += ok ? 1 : 0;
        if (!ok) {
          ++fails;
          failed = j;
        }
      }
      inside[static_cast<std::size_t>(t)] = fails == 0 ? 1 : 0;
      count += fails == 0 ? 1 : 0;
      if (!with_derivative || fails > 1) continue;
      for (Eigen::Index j = 0; j < d; ++j) {
        if (fails == 1 && failed != j) continue;
        const double v = window(t, j);
        const auto jj = static_cast<std::size_t>(j);
        count_up[jj] += v <= upper[jj] ? 1 : 0;
        count_down[jj] += v <= lower[jj] ? 1 : 0;
      }
    }
    const double c = static_cast<double>(count) / md;
    for (Eigen::Index j = 0; j < d; ++j) {
      const auto jj = static_cast<std::size_t>(j);
      c_margin[jj] = static_cast<double>(count_margin[jj]) / md;
      deriv[jj] = with_derivative ? (static_cast<double>(count_up[jj]) - static_cast<double>(count_down[jj])) /
                                        md / (upper[jj] - lower[jj])
                                  : 0.0;
    }
    for (Eigen::Index t = 0; t < m; ++t) {
      double value = static_cast<double>(inside[static_cast<std::size_t>(t)]) - c;
      if (with_derivative) {
        for (Eigen::Index j = 0; j < d; ++j) {
          const auto jj = static_cast<std::size_t>(j);
          value -= deriv[jj] * (static_cast<double>(margin[static_cast<std::size_t>(t * d + j)]) - c_margin[jj]);
        }
      }
      out(row0 + t, i) = scale * value;
    }
  }
}

std::vector<double> check_replicates(const Sample& s, const Eigen::MatrixXd& xi, Scaling scaling, unsigned threads) {
  const std::size_t n = s.n();
  const auto full = pseudo_observations(s, Window{1, n}, scaling);
  const auto replicates = static_cast<std::size_t>(xi.rows());
  const double root_n = std::sqrt(static_cast<double>(n));
  const unsigned workers = static_cast<unsigned>(std::clamp<std::size_t>(threads, 1, n - 1));
  std::vector<std::vector<double>> partial(workers, std::vector<double>(replicates, 0.0));

  parallel_for(workers, workers, [&](std::size_t worker) {
    Eigen::MatrixXd coeffs(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    Eigen::MatrixXd values(xi.rows(), static_cast<Eigen::Index>(n));
    auto& best = partial[worker];
    for (std::size_t k = worker + 1; k < n; k += workers) {
      const auto left = pseudo_observations(s, Window{1, k}, scaling);
      const auto right = pseudo_observations(s, Window{k + 1, n}, scaling);
      window_coefficients(left.values, full.values, lambda_weight(n, k, n) / root_n, true, coeffs, 0);
      window_coefficients(right.values, full.values, -lambda_weight(n, 0, k) / root_n, true, coeffs,
                          static_cast<Eigen::Index>(k));
      values.noalias() = xi * coeffs;
      for (std::size_t m = 0; m < replicates; ++m) {
        const double stat = values.row(static_cast<Eigen::Index>(m)).squaredNorm() / static_cast<double>(n);
        best[m] = std::max(best[m], stat);
      }
    }
  });
  std::vector<double> out(replicates, 0.0);
  for (const auto& part : partial) {
    for (std::size_t m = 0; m < replicates; ++m) out[m] = std::max(out[m], part[m]);
  }
  return out;
}

std::vector<double> full_rank_replicates(const Sample& s, const Eigen::MatrixXd& xi, Scaling scaling,
                                         bool with_derivative) {
  const std::size_t n = s.n();
  const auto full = pseudo_observations(s, Window{1, n}, scaling);
  RowMatrix coeffs(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  window_coefficients(full.values, full.values, 1.0 / std::sqrt(static_cast<double>(n)), with_derivative, coeffs, 0);

  const Eigen::MatrixXd total = xi * coeffs;
  Eigen::MatrixXd prefix = Eigen::MatrixXd::Zero(xi.rows(), static_cast<Eigen::Index>(n));
  Eigen::VectorXd best = Eigen::VectorXd::Zero(xi.rows());
  for (std::size_t k = 1; k < n; ++k) {
    const auto t = static_cast<Eigen::Index>(k - 1);
    prefix.noalias() += xi.col(t) * coeffs.row(t);
    const double lambda = lambda_weight(n, 0, k);
    const Eigen::VectorXd stats = (prefix - lambda * total).rowwise().squaredNorm() / static_cast<double>(n);
    best = best.cwiseMax(stats);
  }
  return {best.data(), best.data() + best.size()};
}

}  // namespace

double hat_b(const Sample& s, std::span<const double> xi, std::size_t ks, std::size_t kt,
             std::span<const double> u, Scaling scaling) {
  check_block(s, xi, ks, kt, u);
  if (ks == kt) return 0.0;
  const auto full = pseudo_observations(s, Window{1, s.n()}, scaling);
  const double c = empirical_copula(full, u);
  double acc = 0.0;
  for (std::size_t i = ks; i < kt; ++i) {
    acc += xi[i] * ((below(full.values, static_cast<Eigen::Index>(i), u) ? 1.0 : 0.0) - c);
  }
  return acc / std::sqrt(static_cast<double>(s.n()));
}

double check_b(const Sample& s, std::span<const double> xi, std::size_t ks, std::size_t kt,
               std::span<const double> u, Scaling scaling) {
  check_block(s, xi, ks, kt, u);
  if (ks == kt) return 0.0;
  const auto block = pseudo_observations(s, Window{ks + 1, kt}, scaling);
  double mean = 0.0;
  for (std::size_t i = ks; i < kt; ++i) mean += xi[i];
  mean /= static_cast<double>(kt - ks);
  double acc = 0.0;
  for (std::size_t i = ks; i < kt; ++i) {
    if (below(block.values, static_cast<Eigen::Index>(i - ks), u)) acc += xi[i] - mean;
  }
  return acc / std::sqrt(static_cast<double>(s.n()));
}

double check_b_centered_indicators(const Sample& s, std::span<const double> xi, std::size_t ks, std::size_t kt,
                                   std::span<const double> u, Scaling scaling) {
  check_block(s, xi, ks, kt, u);
  if (ks == kt) return 0.0;
  const auto block = pseudo_observations(s, Window{ks + 1, kt}, scaling);
  const double c = empirical_copula(block, u);
  double acc = 0.0;
  for (std::size_t i = ks; i < kt; ++i) {
    acc += xi[i] * ((below(block.values, static_cast<Eigen::Index>(i - ks), u) ? 1.0 : 0.0) - c);
  }
  return acc / std::sqrt(static_cast<double>(s.n()));
}

std::vector<double> replicate_statistics(const Sample& s, const Eigen::MatrixXd& xi, Variant variant,
                                         Scaling scaling, unsigned threads) {
  if (static_cast<std::size_t>(xi.cols()) != s.n()) {
    throw Error("shape", "multiplier matrix has " + std::to_string(xi.cols()) + " columns, sample has " +
                             std::to_string(s.n()) + " rows");
  }
  if (xi.rows() == 0) return {};
  switch (variant) {
    case Variant::check: return check_replicates(s, xi, scaling, threads);
    case Variant::hat: return full_rank_replicates(s, xi, scaling, true);
    case Variant::r: return full_rank_replicates(s, xi, scaling, false);
  }
  return {};
}

ReplicateStat replicate_stat(const Sample& s, const MultiplierSeq& xi, Variant variant, Scaling scaling) {
  if (xi.xi.size() != s.n()) throw Error("shape", "multiplier length differs from sample size");
  const Eigen::MatrixXd row = Eigen::Map<const Eigen::RowVectorXd>(xi.xi.data(), static_cast<Eigen::Index>(xi.xi.size()));
  return {replicate_statistics(s, row, variant, scaling).front(), variant, 0};
}

PValue p_value(double observed, std::span<const ReplicateStat> reps) {
  if (reps.empty()) throw Error("no-replicates", "p-value needs at least one replicate");
  const Variant variant = reps.front().variant;
  std::size_t exceed = 0;
  for (const auto& rep : reps) {
    if (rep.variant != variant) throw Error("variant-mix", "replicates of different variants");
    exceed += rep.value >= observed ? 1 : 0;
  }
  return {static_cast<double>(exceed) / static_cast<double>(reps.size()), reps.size(), exceed};
}

std::vector<TestResult> run_tests(const Sample& s, const TestConfig& cfg, std::span<const Variant> variants) {
  if (cfg.replicates < 1) throw Error("no-replicates", "M must be at least 1");
  std::optional<std::size_t> bandwidth;
  if (cfg.multiplier == MultiplierKind::dependent) bandwidth = bandwidth_policy(s, cfg.bandwidth);
  const Eigen::MatrixXd xi = multiplier_matrix(s.n(), cfg.replicates, cfg.multiplier, bandwidth.value_or(1), cfg.seed);

  std::vector<TestResult> results;
  results.reserve(variants.size());
  std::optional<StatTrajectory> subsample_stat;
  for (const Variant variant : variants) {
    TestResult result;
    result.variant = variant;
    result.multiplier = cfg.multiplier;
    result.bandwidth_used = bandwidth;
    if (variant == Variant::r) {
      result.trajectory = statistic_snr(s, cfg.scaling);
    } else {
      if (!subsample_stat) subsample_stat = statistic_sn(s, cfg.scaling, cfg.threads);
      result.trajectory = *subsample_stat;
    }
    const auto values = replicate_statistics(s, xi, variant, cfg.scaling, cfg.threads);
    result.replicates.reserve(values.size());
    for (std::size_t m = 0; m < values.size(); ++m) result.replicates.push_back({values[m], variant, m});
    result.p = p_value(result.trajectory.statistic, result.replicates);
    results.push_back(std::move(result));
  }
  return results;
}

TestResult run_test(const Sample& s, const TestConfig& cfg) {
  const Variant variants[] = {cfg.variant};
  return std::move(run_tests(s, cfg, variants).front());
}

}  // namespace copulacp
