#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <optional>

namespace rectgauss {

// Dense double-precision types. Row-major storage matches the on-disk
// sample layout, so bulk reads and writes are straight memory copies.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

/// Ground-truth parameters of a rectified Gaussian generator.
///
/// One-layer: x = ReLU(weight * z + bias) + noise_sigma * xi,
/// with z standard normal in R^k and xi standard normal in R^d.
/// Two-layer: x = outer * ReLU(weight * z + bias).
struct GenerativeModel {
  Matrix weight;                // d x k
  Vector bias;                  // d
  std::optional<Matrix> outer;  // d_out x d mixing matrix, two-layer only
  double noise_sigma = 0.0;     // 0 = noiseless

  Eigen::Index dim() const { return weight.rows(); }
  Eigen::Index latent_dim() const { return weight.cols(); }
  Eigen::Index output_dim() const { return outer ? outer->rows() : weight.rows(); }

  /// Throws std::invalid_argument if shapes disagree or entries are non-finite.
  void validate() const;
};

/// Estimator output: covariance surrogate for W W^T plus a bias estimate.
/// sigma_hat is exactly symmetric with non-negative diagonal, b_hat is
/// componentwise non-negative.
struct EstimatedModel {
  Matrix sigma_hat;  // d x d
  Vector b_hat;      // d

  Eigen::Index dim() const { return b_hat.size(); }
};

/// Observations, one per row, with generation provenance.
struct SampleMatrix {
  Matrix data;  // n x d
  std::uint64_t seed = 0;

  Eigen::Index count() const { return data.rows(); }
  Eigen::Index dim() const { return data.cols(); }
};

// Counter-based splittable generator. Output i of a stream with seed s is
//   mix64(s + (i + 1) * 0x9E3779B97F4A7C15)
// where mix64 is the SplitMix64 finalizer. Substreams rehash the parent seed
// with the stream id, so (seed, id) pairs yield unrelated sequences. The raw
// integer sequence is identical on every platform; the exact constants are
// listed in the README.
class RandomStream {
 public:
  RandomStream() = default;
  explicit RandomStream(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t counter() const { return counter_; }

  std::uint64_t next_u64() { return mix64(seed_ + (++counter_) * kGamma); }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Independent child stream keyed by (seed, stream_id). Does not advance *this.
  RandomStream substream(std::uint64_t stream_id) const {
    return RandomStream(mix64(seed_ ^ mix64(kLeaf + stream_id * kGamma)));
  }

  /// Child stream keyed by the next raw output. Advances *this, so repeated
  /// forks from the same stream are distinct.
  RandomStream fork() { return RandomStream(mix64(next_u64() ^ kLeaf)); }

 private:
  static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;
  static constexpr std::uint64_t kLeaf = 0xD1B54A32D192ED03ULL;

  static constexpr std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::uint64_t seed_ = 0;
  std::uint64_t counter_ = 0;
};

/// One N(0, 1) variate by Box-Muller, cosine branch only: two uniforms in,
/// one variate out, so the stream state stays just (seed, counter).
double standard_normal(RandomStream& stream);

/// Uniform index in [0, count). Lemire multiply-shift; the selection bias is
/// count / 2^64 and irrelevant at any count used here.
Eigen::Index uniform_index(RandomStream& stream, Eigen::Index count);

/// Symmetric eigendecomposition with eigenvalues clamped to at least
/// eigenvalue_floor (and never below zero). Returns a symmetric matrix.
Matrix clip_psd(const Matrix& m, double eigenvalue_floor = 0.0);

/// Factor L with L L^T equal to m after clipping negative eigenvalues to
/// zero. L is not triangular; any factor up to a right orthogonal rotation
/// satisfies the contract. Throws std::invalid_argument when m is not
/// symmetric (relative asymmetry above 1e-9).
Matrix cholesky_psd_sqrt(const Matrix& m);

/// Worker cap for parallel_for: RECTGAUSS_THREADS when set (minimum 1),
/// otherwise the hardware thread count.
int max_threads();

/// Runs body(0..count-1) across up to max_threads() workers. Each index is
/// executed exactly once; bodies must write only to their own slots. The
/// first-thrown exception at the lowest index is rethrown after the join.
void parallel_for(Eigen::Index count, const std::function<void(Eigen::Index)>& body);

}  // namespace rectgauss
