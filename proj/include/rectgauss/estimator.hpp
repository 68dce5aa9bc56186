#pragma once

#include "rectgauss/core.hpp"
#include "rectgauss/truncated_mle.hpp"

#include <utility>
#include <vector>

namespace rectgauss {

struct FitDiagnostics {
  /// Coordinates with no positive samples or a constant positive part; their
  /// sigma_hat row and column are zero.
  std::vector<Eigen::Index> degenerate_coordinates;
  /// Pairs whose empirical cross moment fell outside the feasible kernel
  /// range and was clamped to the nearest endpoint (zero-bias path only).
  std::vector<std::pair<Eigen::Index, Eigen::Index>> clamped_moment_pairs;
};

struct FitResult {
  EstimatedModel model;
  FitDiagnostics diagnostics;
};

/// Off-diagonal assembly sqrt(sii * sjj) * cos(theta).
double assemble_entry(double sii, double sjj, double theta);

/// Two-pass estimator over non-negative samples. Per coordinate, the strictly
/// positive entries feed norm_bias_estimate; b_hat(i) is clamped at zero and
/// sigma_hat(i, i) takes the variance estimate. Per pair, the angle comes
/// from the joint-exceedance counts against b_hat and the off-diagonal is
/// assembled and mirrored. Coordinate work runs in parallel on per-coordinate
/// substreams, so results do not depend on the thread count.
FitResult fit_one_layer(const SampleMatrix& samples, const SgdConfig& cfg,
                        RandomStream& stream);

/// Cross-moment kernel h(theta) = sin(theta) + (pi - theta) cos(theta):
/// E[x(i) x(j)] = ||W(i,:)|| ||W(j,:)|| h(theta_ij) / (2 pi) for a zero-bias
/// noiseless model. Strictly decreasing from h(0) = pi to h(pi) = 0.
double cross_moment_kernel(double theta);

/// Inverse of cross_moment_kernel by bisection (60 fixed iterations, well
/// under 1e-10); targets outside [0, pi] clamp to the nearest endpoint.
double invert_cross_moment_kernel(double target);

/// Moment estimator for the zero-bias model with known additive noise level:
/// row norms from 2 * (mean(x(i)^2) - noise_sigma^2), angles by inverting the
/// cross-moment kernel, b_hat = 0. Coordinates whose corrected second moment
/// is non-positive degenerate to zero rows; out-of-range cross moments are
/// clamped and recorded.
FitResult fit_zero_bias_noisy(const SampleMatrix& samples, double noise_sigma);

}  // namespace rectgauss
