#include "copulacp/ranks.hpp"

#include "copulacp/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace copulacp {

namespace {

void check_point(std::span<const double> u, std::size_t d) {
  if (u.size() != d) throw Error("dimension", "point has the wrong number of coordinates");
  for (const double v : u) {
    if (!(v >= 0.0 && v <= 1.0)) throw Error("domain", "point outside [0,1]^d");
  }
}

std::size_t count_below(const RowMatrix& values, std::span<const double> u) {
  std::size_t count = 0;
  const auto d = values.cols();
  for (Eigen::Index r = 0; r < values.rows(); ++r) {
    bool inside = true;
    for (Eigen::Index j = 0; j < d && inside; ++j) inside = values(r, j) <= u[static_cast<std::size_t>(j)];
    count += inside ? 1 : 0;
  }
  return count;
}

}  // namespace

std::vector<std::size_t> ranks_in_window(std::span<const double> column, Window w) {
  if (w.empty()) throw Error("empty-window", "ranks requested over an empty window");
  if (w.k < 1 || w.l > column.size()) throw Error("split-range", "window outside the series");
  const auto first = column.begin() + static_cast<std::ptrdiff_t>(w.k - 1);
  const auto last = column.begin() + static_cast<std::ptrdiff_t>(w.l);
  std::vector<double> sorted(first, last);
  for (const double x : sorted) {
    if (!std::isfinite(x)) throw Error("invalid-data", "non-finite value in window");
  }
  std::sort(sorted.begin(), sorted.end());
  std::vector<std::size_t> ranks;
  ranks.reserve(sorted.size());
  for (auto it = first; it != last; ++it) {
    ranks.push_back(static_cast<std::size_t>(std::upper_bound(sorted.begin(), sorted.end(), *it) -
                                             sorted.begin()));
  }
  return ranks;
}

PseudoObs pseudo_observations(const Sample& s, Window w, Scaling scaling) {
  if (w.empty()) throw Error("empty-window", "pseudo-observations of an empty window");
  PseudoObs p{w, scaling, RowMatrix(static_cast<Eigen::Index>(w.size()), static_cast<Eigen::Index>(s.d()))};
  const double den = rank_denominator(w.size(), scaling);
  for (std::size_t j = 0; j < s.d(); ++j) {
    const auto ranks = ranks_in_window(s.column(j), w);
    for (std::size_t r = 0; r < ranks.size(); ++r) {
      p.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) = static_cast<double>(ranks[r]) / den;
    }
  }
  return p;
}

double empirical_copula(const PseudoObs& p, std::span<const double> u) {
  check_point(u, p.dim());
  if (p.size() == 0) return 0.0;
  return static_cast<double>(count_below(p.values, u)) / static_cast<double>(p.size());
}

double empirical_copula_fullrank(const PseudoObs& full, Window w, std::span<const double> u) {
  check_point(u, full.dim());
  if (w.empty()) return 0.0;
  if (full.window.k != 1 || w.k < 1 || w.l > full.size()) {
    throw Error("split-range", "window must lie inside the full-sample window");
  }
  const auto rows = full.values.middleRows(static_cast<Eigen::Index>(w.k - 1), static_cast<Eigen::Index>(w.size()));
  std::size_t count = 0;
  for (Eigen::Index r = 0; r < rows.rows(); ++r) {
    bool inside = true;
    for (Eigen::Index j = 0; j < rows.cols() && inside; ++j) inside = rows(r, j) <= u[static_cast<std::size_t>(j)];
    count += inside ? 1 : 0;
  }
  return static_cast<double>(count) / static_cast<double>(w.size());
}

double fd_bandwidth(std::size_t m) {
  if (m == 0) throw Error("empty-window", "bandwidth of an empty window");
  return std::min(1.0 / std::sqrt(static_cast<double>(m)), 0.5);
}

double partial_derivative_hat(const PseudoObs& p, std::size_t j, std::span<const double> u) {
  if (j < 1 || j > p.dim()) throw Error("dimension", "derivative index out of range");
  check_point(u, p.dim());
  if (p.size() == 0) throw Error("empty-window", "derivative over an empty window");
  const double h = fd_bandwidth(p.size());
  const std::size_t jj = j - 1;
  std::vector<double> point(u.begin(), u.end());
  const double upper = std::min(u[jj] + h, 1.0);
  const double lower = std::max(u[jj] - h, 0.0);
  point[jj] = upper;
  const double c_up = static_cast<double>(count_below(p.values, point));
  point[jj] = lower;
  const double c_down = static_cast<double>(count_below(p.values, point));
  return (c_up - c_down) / static_cast<double>(p.size()) / (upper - lower);
}

std::vector<std::size_t> dominance_counts(const RowMatrix& points, const RowMatrix& queries) {
  const auto np = static_cast<std::size_t>(points.rows());
  const auto nq = static_cast<std::size_t>(queries.rows());
  std::vector<std::size_t> counts(nq, 0);
  if (np == 0 || nq == 0) return counts;
  if (points.cols() != queries.cols()) throw Error("dimension", "points and queries differ in dimension");

  if (points.cols() != 2) {
    for (std::size_t q = 0; q < nq; ++q) {
      const auto row = queries.row(static_cast<Eigen::Index>(q));
      counts[q] = count_below(points, std::span<const double>(row.data(), static_cast<std::size_t>(row.size())));
    }
    return counts;
  }

  // Sweep over the first coordinate, Fenwick tree over the ranks of the second.
  std::vector<double> ys(np);
  for (std::size_t i = 0; i < np; ++i) ys[i] = points(static_cast<Eigen::Index>(i), 1);
  std::sort(ys.begin(), ys.end());
  ys.erase(std::unique(ys.begin(), ys.end()), ys.end());

  std::vector<std::size_t> by_x(np);
  std::iota(by_x.begin(), by_x.end(), 0);
  std::sort(by_x.begin(), by_x.end(), [&](std::size_t a, std::size_t b) {
    return points(static_cast<Eigen::Index>(a), 0) < points(static_cast<Eigen::Index>(b), 0);
  });
  std::vector<std::size_t> order(nq);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return queries(static_cast<Eigen::Index>(a), 0) < queries(static_cast<Eigen::Index>(b), 0);
  });

  std::vector<std::size_t> tree(ys.size() + 1, 0);
  std::size_t inserted = 0;
  for (const std::size_t q : order) {
    const double qx = queries(static_cast<Eigen::Index>(q), 0);
    while (inserted < np && points(static_cast<Eigen::Index>(by_x[inserted]), 0) <= qx) {
      const double y = points(static_cast<Eigen::Index>(by_x[inserted]), 1);
      auto pos = static_cast<std::size_t>(std::lower_bound(ys.begin(), ys.end(), y) - ys.begin()) + 1;
      for (; pos < tree.size(); pos += pos & (~pos + 1)) ++tree[pos];
      ++inserted;
    }
    auto pos = static_cast<std::size_t>(
        std::upper_bound(ys.begin(), ys.end(), queries(static_cast<Eigen::Index>(q), 1)) - ys.begin());
    std::size_t total = 0;
    for (; pos > 0; pos -= pos & (~pos + 1)) total += tree[pos];
    counts[q] = total;
  }
  return counts;
}

}  // namespace copulacp
