#include "copulacp/sample.hpp"

#include "copulacp/error.hpp"

#include <cmath>
#include <string>

namespace copulacp {

Sample::Sample(Eigen::MatrixXd data) : data_(std::move(data)) {
  if (data_.rows() < 2) throw Error("too-short", "sample needs at least 2 observations");
  if (data_.cols() < 2) throw Error("dimension", "sample needs at least 2 components");
  for (Eigen::Index j = 0; j < data_.cols(); ++j) {
    for (Eigen::Index i = 0; i < data_.rows(); ++i) {
      if (!std::isfinite(data_(i, j))) {
        throw Error("invalid-data", "non-finite entry at row " + std::to_string(i + 1) +
                                        ", column " + std::to_string(j + 1));
      }
    }
  }
}

}  // namespace copulacp
