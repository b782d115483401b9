#pragma once

#include "copulacp/sample.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace copulacp {

/// Rescaled window ranks. Row r holds the pseudo-observation of time index
/// window.k + r. Values lie in (0, 1].
struct PseudoObs {
  Window window;
  Scaling scaling = Scaling::den_lk1;
  RowMatrix values;

  [[nodiscard]] std::size_t size() const noexcept { return static_cast<std::size_t>(values.rows()); }
  [[nodiscard]] std::size_t dim() const noexcept { return static_cast<std::size_t>(values.cols()); }
};

/// Maximal ranks of column[k-1 .. l-1]: rank_i = #{t in [k, l] : x_t <= x_i}.
std::vector<std::size_t> ranks_in_window(std::span<const double> column, Window w);

/// Denominator applied to ranks of a window of length m.
[[nodiscard]] inline double rank_denominator(std::size_t m, Scaling scaling) noexcept {
  return static_cast<double>(scaling == Scaling::den_lk1 ? m : m + 1);
}

PseudoObs pseudo_observations(const Sample& s, Window w, Scaling scaling);

/// Empirical copula of the pseudo-observations at u. Zero for an empty window.
double empirical_copula(const PseudoObs& p, std::span<const double> u);

/// Empirical distribution at u of the full-sample pseudo-observations with time
/// index in w. `full` must be the pseudo-observations of the window (1, n).
double empirical_copula_fullrank(const PseudoObs& full, Window w, std::span<const double> u);

/// Finite-difference bandwidth min(m^{-1/2}, 1/2) for a window of length m.
[[nodiscard]] double fd_bandwidth(std::size_t m);

/// Finite-difference estimate of the j-th (1-based) first-order partial derivative
/// of the copula at u. The shifted points u +/- h e_j are clamped to [0, 1].
double partial_derivative_hat(const PseudoObs& p, std::size_t j, std::span<const double> u);

/// For every query row q, the number of point rows x with x <= q componentwise.
/// Uses a sweep with a Fenwick tree for d = 2 and direct counting otherwise.
std::vector<std::size_t> dominance_counts(const RowMatrix& points, const RowMatrix& queries);

}  // namespace copulacp
