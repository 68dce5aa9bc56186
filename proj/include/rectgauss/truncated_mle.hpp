#pragma once

#include "rectgauss/core.hpp"
#include "rectgauss/sampler.hpp"

#include <functional>
#include <stdexcept>
#include <vector>

namespace rectgauss {

/// Natural-parameter point v = [1/sigma^2, mu/sigma^2] of a univariate
/// normal. The negative log-likelihood of truncated samples is convex in v.
struct ReparamPoint {
  double v1 = 1.0;  // 1 / sigma^2
  double v2 = 0.0;  // mu / sigma^2

  double mean() const { return v2 / v1; }
  double variance() const { return 1.0 / v1; }
};

/// Projected-SGD hyper-parameters. steps == 0 resolves to
/// max(50000, 4 * batch size); the experiment defaults are
/// batches = 1, radius = 3, lambda = 0.1.
struct SgdConfig {
  std::uint64_t steps = 0;
  double lambda = 0.1;
  double radius = 3.0;
  int batches = 1;
  // Retry budget for the per-step truncated draw. SGD iterates can sit at
  // projection-box corners where the acceptance mass drops to ~2e-6, so this
  // is far larger than the data-generation default of 1000.
  int max_attempts = 10'000'000;

  void validate() const;
  std::uint64_t resolved_steps(Eigen::Index batch_size) const;
};

/// Affine sample transform x -> (x - mu0) / sigma0 and its inverse on
/// estimated parameters.
struct Standardization {
  double mu0 = 0.0;
  double sigma0 = 1.0;

  double mean_from_standard(double mu) const { return sigma0 * mu + mu0; }
  double variance_from_standard(double var) const { return sigma0 * sigma0 * var; }
};

struct StandardizedSamples {
  Vector values;
  Standardization transform;
  TruncationInterval truncation;
};

/// Thrown by standardize when the input is constant (empirical variance
/// below 1e-12). Carries the constant, which is the bias of a zero weight row.
class DegenerateConstantError : public std::runtime_error {
 public:
  explicit DegenerateConstantError(double value);
  double value() const { return value_; }

 private:
  double value_;
};

/// Shifts and rescales strictly positive samples to empirical mean 0 and
/// variance 1. The truncation set R_{>0} maps to R_{> -mu0/sigma0}.
StandardizedSamples standardize(const Vector& samples);

/// Deterministic part of the likelihood gradient: [x^2/2 - z^2/2, z - x].
Eigen::Vector2d gradient_term(double x, double z);

/// Unbiased gradient of the expected negative log-likelihood at v: draws
/// z ~ N(mean(v), variance(v)) conditioned on the truncation set and returns
/// gradient_term(x, z). Propagates TruncationExhaustedError.
Eigen::Vector2d gradient_estimate(const ReparamPoint& v, double x,
                                  const TruncationInterval& trunc, RandomStream& stream,
                                  int max_attempts);

/// Euclidean projection onto D_r = {1/r <= v1 <= r, |v2| <= r}, which is the
/// componentwise clamp since the box is axis-aligned. Requires r > 1.
ReparamPoint project_domain(const ReparamPoint& v, double radius);

/// Replaces the built-in gradient draw; used by tests to inject gradients.
using GradientFn =
    std::function<Eigen::Vector2d(const ReparamPoint& v, double x, RandomStream& stream)>;

/// Projected SGD over the standardized samples: v(0) = [1, 0],
/// v(t) = project(v(t-1) - g(t) / (lambda * t)), returning the average of the
/// projected iterates. The sample x at each step is drawn uniformly with
/// replacement. iterate_observer, when set, sees every projected iterate.
ReparamPoint proj_sgd(const Vector& samples, const TruncationInterval& trunc,
                      const SgdConfig& cfg, RandomStream& stream,
                      const GradientFn& gradient_override = {},
                      const std::function<void(const ReparamPoint&)>& iterate_observer = {});

/// Element minimizing the summed Euclidean distance to all elements; ties
/// break toward the lowest index.
ReparamPoint medoid_select(const std::vector<ReparamPoint>& candidates);

struct NormBiasEstimate {
  double mu_hat = 0.0;
  double sigma_sq_hat = 0.0;
};

/// Full estimation pipeline for one coordinate: standardize the positive
/// samples, run `batches` independent SGD passes on disjoint contiguous
/// batches, medoid-select, and map the winner back to the original space as
/// mu = v2/v1, sigma^2 = 1/v1. Constant input short-circuits to
/// (constant, 0), the zero-weight-row case.
NormBiasEstimate norm_bias_estimate(const Vector& samples, const SgdConfig& cfg,
                                    RandomStream& stream);

}  // namespace rectgauss
