#include "rectgauss/angle.hpp"

#include <algorithm>
#include <cstdint>
#include <numbers>
#include <stdexcept>

namespace rectgauss {

double orthant_prob_to_angle(double p_hat) {
  if (!(p_hat >= 0.0 && p_hat <= 1.0)) {
    throw std::invalid_argument("exceedance probability must lie in [0, 1]");
  }
  const double raw = std::numbers::pi - 2.0 * std::numbers::pi * p_hat;
  return std::clamp(raw, 0.0, std::numbers::pi);
}

double estimate_angle(const SampleMatrix& samples, Eigen::Index i, Eigen::Index j,
                      const Vector& b_hat) {
  const Eigen::Index n = samples.count();
  if (n == 0) {
    throw std::invalid_argument("estimate_angle needs at least one sample");
  }
  if (i == j || i < 0 || j < 0 || i >= samples.dim() || j >= samples.dim()) {
    throw std::invalid_argument("estimate_angle needs two distinct valid coordinates");
  }
  if (b_hat.size() != samples.dim() || b_hat.minCoeff() < 0.0) {
    throw std::invalid_argument("estimate_angle needs a non-negative bias estimate");
  }
  const double bi = b_hat(i);
  const double bj = b_hat(j);
  std::uint64_t joint = 0;
  for (Eigen::Index m = 0; m < n; ++m) {
    joint += static_cast<std::uint64_t>(samples.data(m, i) > bi && samples.data(m, j) > bj);
  }
  const double p_hat = static_cast<double>(joint) / static_cast<double>(n);
  return orthant_prob_to_angle(p_hat);
}

}  // namespace rectgauss
