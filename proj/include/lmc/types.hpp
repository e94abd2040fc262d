#pragma once

#include <Eigen/Dense>

namespace lmc {

// Small dense vectors/matrices for points, gradients and Hessians in
// dimension 1..3. Fixed maximum size keeps them on the stack.
using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 3, 1>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 3, 3>;

inline Vec make_vec(double x) {
  Vec v(1);
  v << x;
  return v;
}

inline Vec make_vec(double x, double y) {
  Vec v(2);
  v << x, y;
  return v;
}

inline Mat make_mat(double a11, double a12, double a22) {
  Mat m(2, 2);
  m << a11, a12, a12, a22;
  return m;
}

}  // namespace lmc
