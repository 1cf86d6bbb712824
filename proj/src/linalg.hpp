#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <vector>

namespace dioph {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using IVec = Eigen::Matrix<long long, Eigen::Dynamic, 1>;
using IMat = Eigen::Matrix<long long, Eigen::Dynamic, Eigen::Dynamic>;

inline constexpr double kAbsFloor = 1e-14;

/// Max elementwise relative error |a-b| / max(|a|,|b|). Pairs where both
/// entries are below kAbsFloor count as equal.
inline double max_rel_error(const Mat& a, const Mat& b) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      const double x = a(i, j), y = b(i, j);
      const double scale = std::max(std::abs(x), std::abs(y));
      if (scale < kAbsFloor) continue;
      worst = std::max(worst, std::abs(x - y) / scale);
    }
  }
  return worst;
}

/// Operator norm induced by the sup-norm: the largest row l1-norm.
inline double sup_operator_norm(const Mat& a) {
  return a.cwiseAbs().rowwise().sum().maxCoeff();
}

/// sigma_k as a permutation: column action reverses coordinates.
inline Vec reversed(const Vec& v) { return v.reverse(); }

}  // namespace dioph
