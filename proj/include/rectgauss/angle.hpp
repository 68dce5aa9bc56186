#pragma once

#include "rectgauss/core.hpp"

namespace rectgauss {

/// Inverts the joint-exceedance identity Pr[u'z > 0 and v'z > 0] =
/// (pi - theta) / (2 pi): returns pi - 2 pi p_hat clamped into [0, pi].
/// Sampling noise can push the raw value outside the valid range, so the
/// clamp is the projection onto the parameter space.
double orthant_prob_to_angle(double p_hat);

/// Empirical angle between weight rows i and j: the fraction of samples with
/// x(i) > b_hat(i) and x(j) > b_hat(j) (strict; ties count as non-exceedance),
/// mapped through orthant_prob_to_angle.
double estimate_angle(const SampleMatrix& samples, Eigen::Index i, Eigen::Index j,
                      const Vector& b_hat);

}  // namespace rectgauss
