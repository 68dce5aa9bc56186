#include "rectgauss/truncated_mle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace rectgauss {

void SgdConfig::validate() const {
  if (batches < 1) {
    throw std::invalid_argument("batch count must be at least 1");
  }
  if (!(radius > 1.0)) {
    throw std::invalid_argument("projection radius must exceed 1");
  }
  if (!(lambda > 0.0)) {
    throw std::invalid_argument("strong-convexity parameter must be positive");
  }
  if (max_attempts < 1) {
    throw std::invalid_argument("max_attempts must be at least 1");
  }
}

std::uint64_t SgdConfig::resolved_steps(Eigen::Index batch_size) const {
  if (steps > 0) {
    return steps;
  }
  // Four passes keep the optimization noise below the statistical noise of
  // the batch, so the overall error tracks the 1/sqrt(n) statistical rate.
  return std::max<std::uint64_t>(
      50'000, 4 * static_cast<std::uint64_t>(std::max<Eigen::Index>(batch_size, 0)));
}

DegenerateConstantError::DegenerateConstantError(double value)
    : std::runtime_error("samples are constant at " + std::to_string(value)),
      value_(value) {}

StandardizedSamples standardize(const Vector& samples) {
  const Eigen::Index n = samples.size();
  if (n == 0) {
    throw std::invalid_argument("standardize needs a non-empty sample vector");
  }
  if (samples.minCoeff() <= 0.0) {
    throw std::invalid_argument("standardize needs strictly positive samples");
  }
  const double mu0 = samples.mean();
  const double var0 = (samples.array() - mu0).square().sum() / static_cast<double>(n);
  if (var0 < 1e-12) {
    throw DegenerateConstantError(mu0);
  }
  const double sigma0 = std::sqrt(var0);

  StandardizedSamples out;
  out.values = (samples.array() - mu0) / sigma0;
  out.transform = Standardization{mu0, sigma0};
  out.truncation = TruncationInterval::above(-mu0 / sigma0);
  return out;
}

Eigen::Vector2d gradient_term(double x, double z) {
  return {0.5 * (x * x - z * z), z - x};
}

Eigen::Vector2d gradient_estimate(const ReparamPoint& v, double x,
                                  const TruncationInterval& trunc, RandomStream& stream,
                                  int max_attempts) {
  if (!(v.v1 > 0.0)) {
    throw std::invalid_argument("reparameterization point must have positive precision");
  }
  const double z =
      sample_truncated_normal(v.mean(), std::sqrt(v.variance()), trunc, stream, max_attempts);
  return gradient_term(x, z);
}

ReparamPoint project_domain(const ReparamPoint& v, double radius) {
  if (!(radius > 1.0)) {
    throw std::invalid_argument("projection radius must exceed 1");
  }
  return {std::clamp(v.v1, 1.0 / radius, radius), std::clamp(v.v2, -radius, radius)};
}

ReparamPoint proj_sgd(const Vector& samples, const TruncationInterval& trunc,
                      const SgdConfig& cfg, RandomStream& stream,
                      const GradientFn& gradient_override,
                      const std::function<void(const ReparamPoint&)>& iterate_observer) {
  cfg.validate();
  const Eigen::Index n = samples.size();
  if (n == 0) {
    throw std::invalid_argument("proj_sgd needs a non-empty sample vector");
  }
  const std::uint64_t steps = cfg.resolved_steps(n);

  ReparamPoint v{1.0, 0.0};
  double sum1 = 0.0;
  double sum2 = 0.0;
  for (std::uint64_t t = 1; t <= steps; ++t) {
    const double x = samples(uniform_index(stream, n));
    const Eigen::Vector2d g = gradient_override
                                  ? gradient_override(v, x, stream)
                                  : gradient_estimate(v, x, trunc, stream, cfg.max_attempts);
    const double step = 1.0 / (cfg.lambda * static_cast<double>(t));
    v.v1 -= step * g(0);
    v.v2 -= step * g(1);
    v = project_domain(v, cfg.radius);
    if (iterate_observer) {
      iterate_observer(v);
    }
    sum1 += v.v1;
    sum2 += v.v2;
  }
  const double scale = 1.0 / static_cast<double>(steps);
  return {sum1 * scale, sum2 * scale};
}

ReparamPoint medoid_select(const std::vector<ReparamPoint>& candidates) {
  if (candidates.empty()) {
    throw std::invalid_argument("medoid_select needs a non-empty candidate list");
  }
  std::size_t best = 0;
  double best_sum = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    double sum = 0.0;
    for (const auto& other : candidates) {
      sum += std::hypot(candidates[i].v1 - other.v1, candidates[i].v2 - other.v2);
    }
    if (sum < best_sum) {
      best_sum = sum;
      best = i;
    }
  }
  return candidates[best];
}

NormBiasEstimate norm_bias_estimate(const Vector& samples, const SgdConfig& cfg,
                                    RandomStream& stream) {
  cfg.validate();
  if (samples.size() == 0) {
    throw std::invalid_argument("norm_bias_estimate needs a non-empty sample vector");
  }

  StandardizedSamples standardized;
  try {
    standardized = standardize(samples);
  } catch (const DegenerateConstantError& degenerate) {
    return {degenerate.value(), 0.0};
  }

  const Eigen::Index n = standardized.values.size();
  const Eigen::Index batches = std::min<Eigen::Index>(cfg.batches, n);
  RandomStream root = stream.fork();

  std::vector<ReparamPoint> candidates;
  candidates.reserve(static_cast<std::size_t>(batches));
  for (Eigen::Index b = 0; b < batches; ++b) {
    const Eigen::Index begin = b * n / batches;
    const Eigen::Index end = (b + 1) * n / batches;
    RandomStream batch_stream = root.substream(static_cast<std::uint64_t>(b));
    candidates.push_back(proj_sgd(standardized.values.segment(begin, end - begin),
                                  standardized.truncation, cfg, batch_stream));
  }

  const ReparamPoint winner = medoid_select(candidates);
  return {standardized.transform.mean_from_standard(winner.mean()),
          standardized.transform.variance_from_standard(winner.variance())};
}

}  // namespace rectgauss
