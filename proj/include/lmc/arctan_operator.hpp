#pragma once

#include "lmc/types.hpp"

namespace lmc {

/// Eigen-decomposition of a small symmetric matrix. Eigenvalues ascending,
/// eigenvectors stored as columns; each column is signed so that its
/// largest-magnitude component is positive (first index wins ties).
struct SpectralData {
  Vec eigenvalues;
  Mat eigenvectors;
};

/// Closed-form symmetric eigensolve for n in {1,2,3}. Throws
/// Error("operator", "not-symmetric") if |a_ij - a_ji| > 1e-12.
SpectralData sym_eigen(const Mat& a);

/// Eigenvalues only, ascending. Same closed forms as sym_eigen.
Vec sym_eigenvalues(const Mat& a);

/// F[A] = sum_i arctan(lambda_i(A)), defined on every symmetric matrix.
double lagrangian_angle(const Mat& a);

/// 2x2 fast path: arctan(l1) + arctan(l2) = arg((1 + i l1)(1 + i l2))
/// = atan2(trace, 1 - det), valid because the sum lies in (-pi, pi).
inline double lagrangian_angle_2d(double axx, double axy, double ayy) {
  return std::atan2(axx + ayy, 1.0 - (axx * ayy - axy * axy));
}

/// dF/da_ij = (I + A^2)^{-1}, via a closed-form small inverse.
Mat lagrangian_angle_derivative(const Mat& a);

/// The two sums bounded in the structure conditions.
struct StructureSums {
  double sum_f = 0.0;       // sum 1/(1+l^2)
  double sum_f_lam2 = 0.0;  // sum l^2/(1+l^2)
};

StructureSums structure_sums(const Vec& eigenvalues);
StructureSums structure_sums(const Mat& a);

/// Uniform parabolicity constants derived from the range of F over the
/// initial data and the p-oscillation allowance delta.
struct StructureConstants {
  double mu1 = 0.0;      // upper bound on min eigenvalue
  double mu2 = 0.0;      // lower bound on max eigenvalue
  double lambda1 = 0.0;  // in (0, n)
  double delta = 0.0;
  double f_max0 = 0.0;
  double f_min0 = 0.0;
  int n = 0;
};

/// Requires 0 <= delta < min(n*pi/2 - f_max0, f_min0); otherwise throws
/// Error("operator", "delta-out-of-range").
StructureConstants structure_constants(double f_max0, double f_min0,
                                       double delta, int n);

/// Symmetric square root of an SPD matrix (n <= 3).
Mat spd_sqrt(const Mat& a);

}  // namespace lmc
