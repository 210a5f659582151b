#pragma once

#include <Eigen/Dense>

#include <initializer_list>
#include <string>

namespace gmvq {

// Dense row-major storage, templated on scalar. double is the working
// precision everywhere gradients are checked; float appears only on disk
// (checkpoints and dataset files store 32-bit values).
template <typename Scalar>
using MatT = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using Mat = MatT<double>;
using MatF = MatT<float>;

using Index = Eigen::Index;

inline std::string shape_str(Index r, Index c) {
  return std::to_string(r) + "x" + std::to_string(c);
}

template <typename Scalar>
std::string shape_str(const MatT<Scalar>& m) {
  return shape_str(m.rows(), m.cols());
}

/// 1xN row-vector literal, mostly for tests and small fixtures.
inline Mat rowvec(std::initializer_list<double> xs) {
  Mat m(1, static_cast<Index>(xs.size()));
  Index i = 0;
  for (double x : xs) m(0, i++) = x;
  return m;
}

}  // namespace gmvq
