#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <span>

namespace copulacp {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// How ranks are rescaled to pseudo-observations: divide by the window length m,
/// or by m + 1 (the convention used by some reference implementations).
enum class Scaling { den_lk1, den_lk2 };

/// Closed 1-based index range [k, l]. k > l denotes the empty window.
struct Window {
  std::size_t k = 1;
  std::size_t l = 0;

  [[nodiscard]] bool empty() const noexcept { return k > l; }
  [[nodiscard]] std::size_t size() const noexcept { return empty() ? 0 : l - k + 1; }
};

/// n x d matrix of observations, rows in time order. Requires n >= 2, d >= 2 and
/// finite entries.
class Sample {
 public:
  explicit Sample(Eigen::MatrixXd data);

  [[nodiscard]] std::size_t n() const noexcept { return static_cast<std::size_t>(data_.rows()); }
  [[nodiscard]] std::size_t d() const noexcept { return static_cast<std::size_t>(data_.cols()); }
  [[nodiscard]] const Eigen::MatrixXd& data() const noexcept { return data_; }

  /// Column j (0-based) as a contiguous view.
  [[nodiscard]] std::span<const double> column(std::size_t j) const noexcept {
    return {data_.col(static_cast<Eigen::Index>(j)).data(), n()};
  }

 private:
  Eigen::MatrixXd data_;
};

}  // namespace copulacp
