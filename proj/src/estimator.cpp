#include "rectgauss/estimator.hpp"

#include "rectgauss/angle.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace rectgauss {

namespace {

Vector positive_entries(const Matrix& data, Eigen::Index col) {
  Eigen::Index count = 0;
  for (Eigen::Index m = 0; m < data.rows(); ++m) {
    count += static_cast<Eigen::Index>(data(m, col) > 0.0);
  }
  Vector out(count);
  Eigen::Index at = 0;
  for (Eigen::Index m = 0; m < data.rows(); ++m) {
    if (data(m, col) > 0.0) {
      out(at++) = data(m, col);
    }
  }
  return out;
}

std::vector<std::pair<Eigen::Index, Eigen::Index>> upper_pairs(Eigen::Index d) {
  std::vector<std::pair<Eigen::Index, Eigen::Index>> pairs;
  pairs.reserve(static_cast<std::size_t>(d * (d - 1) / 2));
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = i + 1; j < d; ++j) {
      pairs.emplace_back(i, j);
    }
  }
  return pairs;
}

}  // namespace

double assemble_entry(double sii, double sjj, double theta) {
  if (!(sii >= 0.0 && sjj >= 0.0)) {
    throw std::invalid_argument("diagonal entries must be non-negative");
  }
  if (!(theta >= 0.0 && theta <= std::numbers::pi)) {
    throw std::invalid_argument("angle must lie in [0, pi]");
  }
  return std::sqrt(sii * sjj) * std::cos(theta);
}

FitResult fit_one_layer(const SampleMatrix& samples, const SgdConfig& cfg,
                        RandomStream& stream) {
  cfg.validate();
  const Eigen::Index n = samples.count();
  const Eigen::Index d = samples.dim();
  if (n == 0 || d == 0) {
    throw std::invalid_argument("fit_one_layer needs a non-empty sample matrix");
  }
  if (samples.data.minCoeff() < 0.0) {
    throw std::invalid_argument(
        "fit_one_layer needs non-negative samples; negative entries indicate noisy data");
  }

  FitResult result;
  result.model.sigma_hat = Matrix::Zero(d, d);
  result.model.b_hat = Vector::Zero(d);

  RandomStream root = stream.fork();
  std::vector<std::uint8_t> degenerate(static_cast<std::size_t>(d), 0);

  parallel_for(d, [&](Eigen::Index i) {
    const Vector positives = positive_entries(samples.data, i);
    if (positives.size() == 0) {
      degenerate[static_cast<std::size_t>(i)] = 1;
      return;
    }
    RandomStream coordinate_stream = root.substream(static_cast<std::uint64_t>(i));
    const NormBiasEstimate estimate = norm_bias_estimate(positives, cfg, coordinate_stream);
    result.model.b_hat(i) = std::max(0.0, estimate.mu_hat);
    result.model.sigma_hat(i, i) = estimate.sigma_sq_hat;
    if (estimate.sigma_sq_hat == 0.0) {
      degenerate[static_cast<std::size_t>(i)] = 1;
    }
  });
  for (Eigen::Index i = 0; i < d; ++i) {
    if (degenerate[static_cast<std::size_t>(i)]) {
      result.diagnostics.degenerate_coordinates.push_back(i);
    }
  }

  const auto pairs = upper_pairs(d);
  parallel_for(static_cast<Eigen::Index>(pairs.size()), [&](Eigen::Index p) {
    const auto [i, j] = pairs[static_cast<std::size_t>(p)];
    const double theta = estimate_angle(samples, i, j, result.model.b_hat);
    const double entry =
        assemble_entry(result.model.sigma_hat(i, i), result.model.sigma_hat(j, j), theta);
    result.model.sigma_hat(i, j) = entry;
    result.model.sigma_hat(j, i) = entry;
  });
  return result;
}

double cross_moment_kernel(double theta) {
  return std::sin(theta) + (std::numbers::pi - theta) * std::cos(theta);
}

double invert_cross_moment_kernel(double target) {
  if (target >= std::numbers::pi) {
    return 0.0;
  }
  if (target <= 0.0) {
    return std::numbers::pi;
  }
  double lo = 0.0;  // h(lo) = pi >= target
  double hi = std::numbers::pi;
  for (int iter = 0; iter < 60; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (cross_moment_kernel(mid) >= target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

FitResult fit_zero_bias_noisy(const SampleMatrix& samples, double noise_sigma) {
  const Eigen::Index n = samples.count();
  const Eigen::Index d = samples.dim();
  if (n == 0 || d == 0) {
    throw std::invalid_argument("fit_zero_bias_noisy needs a non-empty sample matrix");
  }
  if (!(noise_sigma >= 0.0)) {
    throw std::invalid_argument("noise level must be non-negative");
  }

  FitResult result;
  result.model.sigma_hat = Matrix::Zero(d, d);
  result.model.b_hat = Vector::Zero(d);

  // Noise enters the second moment additively: E[x(i)^2] = ||W(i,:)||^2 / 2
  // + noise_sigma^2 when noise is added after the rectification.
  Vector norms = Vector::Zero(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    const double second_moment = samples.data.col(i).squaredNorm() / static_cast<double>(n);
    const double corrected = second_moment - noise_sigma * noise_sigma;
    if (corrected <= 0.0) {
      result.diagnostics.degenerate_coordinates.push_back(i);
      continue;
    }
    result.model.sigma_hat(i, i) = 2.0 * corrected;
    norms(i) = std::sqrt(2.0 * corrected);
  }

  const auto pairs = upper_pairs(d);
  std::mutex clamp_mutex;
  parallel_for(static_cast<Eigen::Index>(pairs.size()), [&](Eigen::Index p) {
    const auto [i, j] = pairs[static_cast<std::size_t>(p)];
    if (norms(i) == 0.0 || norms(j) == 0.0) {
      return;
    }
    const double cross =
        samples.data.col(i).dot(samples.data.col(j)) / static_cast<double>(n);
    const double target = 2.0 * std::numbers::pi * cross / (norms(i) * norms(j));
    if (target < 0.0 || target > std::numbers::pi) {
      const std::lock_guard<std::mutex> lock(clamp_mutex);
      result.diagnostics.clamped_moment_pairs.emplace_back(i, j);
    }
    const double theta = invert_cross_moment_kernel(target);
    const double entry =
        assemble_entry(result.model.sigma_hat(i, i), result.model.sigma_hat(j, j), theta);
    result.model.sigma_hat(i, j) = entry;
    result.model.sigma_hat(j, i) = entry;
  });
  std::sort(result.diagnostics.clamped_moment_pairs.begin(),
            result.diagnostics.clamped_moment_pairs.end());
  return result;
}

}  // namespace rectgauss
