#pragma once

#include "rectgauss/core.hpp"

#include <optional>
#include <stdexcept>

namespace rectgauss {

/// One-sided truncation set S = { x : x > lower }. An absent lower bound
/// means no truncation.
struct TruncationInterval {
  std::optional<double> lower;

  bool contains(double x) const { return !lower || x > *lower; }

  static TruncationInterval above(double lower_bound) { return {lower_bound}; }
  static TruncationInterval positive_axis() { return {0.0}; }
  static TruncationInterval unbounded() { return {}; }
};

/// Thrown when rejection sampling burns through its attempt budget. Under the
/// supported regime (truncation mass >= 1/2) this indicates a violated model
/// assumption rather than bad luck.
class TruncationExhaustedError : public std::runtime_error {
 public:
  explicit TruncationExhaustedError(int attempts);
  int attempts() const { return attempts_; }

 private:
  int attempts_;
};

enum class BiasMode { kNonNegative, kZero, kNegative };

/// n draws of ReLU(W z + b) + noise_sigma * xi with fresh z ~ N(0, I_k) per
/// row (and fresh xi ~ N(0, I_d) when noise_sigma > 0). Requires a model
/// without an outer matrix.
SampleMatrix sample_one_layer(const GenerativeModel& model, Eigen::Index n,
                              RandomStream& stream);

/// n draws of A ReLU(W z + b). Requires model.outer and consumes the same z
/// sequence as sample_one_layer, so A = I reproduces it draw for draw.
SampleMatrix sample_two_layer(const GenerativeModel& model, Eigen::Index n,
                              RandomStream& stream);

/// One draw from N(mu, sigma^2) conditioned on the truncation set, by
/// rejection. Throws TruncationExhaustedError after max_attempts misses.
double sample_truncated_normal(double mu, double sigma, const TruncationInterval& trunc,
                               RandomStream& stream, int max_attempts = 1000);

/// Random ground-truth model with cond(W W^T) = kappa. W = U diag(s) V^T with
/// Haar-random orthonormal factors and singular values geometrically spaced
/// from 1 to sqrt(kappa). Bias depends on the mode: non-negative draws
/// ReLU(N(0,1)) per coordinate, zero is exact zeros, negative subtracts
/// eta * ||W(i,:)|| * Uniform[0,1] from the non-negative draw.
GenerativeModel make_random_model(Eigen::Index d, Eigen::Index k, double kappa,
                                  BiasMode bias_mode, double eta, RandomStream& stream);

}  // namespace rectgauss
