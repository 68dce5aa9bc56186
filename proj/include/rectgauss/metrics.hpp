#pragma once

#include "rectgauss/core.hpp"

#include <utility>
#include <vector>

namespace rectgauss {

/// Normalized parameter errors
///   (||sigma_hat - W W^T||_F / ||W||_F^2, ||b_hat - b||_2 / ||W||_F).
/// Throws when ||W||_F is zero.
std::pair<double, double> param_errors(const EstimatedModel& est,
                                       const GenerativeModel& truth);

/// Same errors restricted to a coordinate subset: the sigma block and bias
/// sub-vector over `coords`, normalized by the matching weight sub-matrix.
std::pair<double, double> param_errors_on(const EstimatedModel& est,
                                          const GenerativeModel& truth,
                                          const std::vector<Eigen::Index>& coords);

/// KL(N(b1, s1) || N(b2, s2)) by the closed form, computed through the
/// Cholesky factor of s2 with triangular solves; log-determinants come from
/// the factor diagonals. Returns +infinity when s1 is singular. Throws when
/// s2 is not positive definite.
double gaussian_kl(const Vector& b1, const Matrix& s1, const Vector& b2, const Matrix& s2);

/// KL(N(b_hat, clip(sigma_hat)) || N(b, W W^T)) of the fitted Gaussian
/// against the truth. The clip floors eigenvalues at 1e-12 * trace so the
/// log-determinant exists for indefinite finite-sample estimates. Throws
/// when W W^T is singular; the parameter errors are the only meaningful
/// metric there.
double fitted_kl(const EstimatedModel& est, const GenerativeModel& truth);

/// Computable bound on the total variation distance between the fitted and
/// true rectified distributions: sqrt(fitted_kl / 2), with the KL floored at
/// zero before the root so numerical slack cannot surface as NaN.
double tv_upper_bound(const EstimatedModel& est, const GenerativeModel& truth);

}  // namespace rectgauss
