#pragma once

#include <algorithm>

#include <Eigen/LU>

namespace hsdma::detail {

// Reciprocal condition estimate of an LU factorization. rcond() alone misses
// exact zero pivots, so the pivot ratio bounds it as well.
template <typename M>
double conditioning(const Eigen::PartialPivLU<M>& lu) {
  if (lu.rows() == 0) return 1.0;
  const auto u = lu.matrixLU().diagonal().cwiseAbs();
  const double hi = u.maxCoeff();
  if (!(hi > 0.0)) return 0.0;
  return std::min<double>(lu.rcond(), u.minCoeff() / hi);
}

}  // namespace hsdma::detail
