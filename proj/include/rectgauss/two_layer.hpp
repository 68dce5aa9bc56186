#pragma once

#include "rectgauss/core.hpp"
#include "rectgauss/estimator.hpp"

#include <optional>
#include <stdexcept>
#include <vector>

namespace rectgauss {

/// Normalized non-zero samples in testing order (descending original norm),
/// deduplicated, with the originating sample row per vector.
struct UnitVectorSet {
  Matrix vectors;  // d x m, unit-norm columns
  std::vector<Eigen::Index> source_rows;
};

/// Extracted cone generators: unit columns, none of which is a conical
/// combination of the others.
struct AnchorSet {
  Matrix columns;  // d x a
  std::vector<Eigen::Index> source_rows;
};

struct NnlsResult {
  Vector coefficients;
  double residual_norm = 0.0;
  int iterations = 0;
};

/// Nonnegative least squares min ||a x - b|| over x >= 0, Lawson-Hanson
/// active set, run to stationarity. max_iterations <= 0 picks 3 * cols + 30.
NnlsResult nnls(const Matrix& a, const Vector& b, int max_iterations = 0);

/// Drops zero rows, normalizes the rest, orders them by descending original
/// norm (stable), and drops vectors within dedup_tol of an earlier survivor.
/// Throws when every row is zero.
UnitVectorSet normalize_dedup(const SampleMatrix& samples, double dedup_tol);

/// True when some c >= 0 brings ||others * c - v|| within tol; the residual
/// of the nonnegative least-squares fit is exactly the distance from v to
/// the generated cone.
bool is_conical_combination(const Vector& v, const Matrix& others, double tol);

/// Keeps exactly the candidates that are not conical combinations of the
/// remaining ones. All memberships are tested against the full set and the
/// failures removed at once, which is order-independent on exact cones.
AnchorSet extract_anchors(const UnitVectorSet& candidates, double tol);

class AnchorCountError : public std::runtime_error {
 public:
  AnchorCountError(Eigen::Index found, Eigen::Index expected);
  Eigen::Index found() const { return found_; }
  Eigen::Index expected() const { return expected_; }

 private:
  Eigen::Index found_;
  Eigen::Index expected_;
};

struct TwoLayerTolerances {
  double dedup = 1e-6;
  double membership = 1e-6;
  /// Recovered latent entries below -latent_flag * ||x|| are counted as
  /// flagged before everything negative is clamped to zero.
  double latent_flag = 1e-6;
};

struct TwoLayerFit {
  Matrix a_hat;  // d x p, unit columns in anchor order
  AnchorSet anchors;
  FitResult fit;  // one-layer fit of the recovered latents
  Eigen::Index flagged_negative_latents = 0;
};

/// Anchor extraction followed by latent recovery (least squares against the
/// anchor matrix via column-pivoted QR) and delegation to fit_one_layer.
/// Throws AnchorCountError when expected_anchors is given and disagrees, and
/// std::runtime_error when the anchor matrix is rank-deficient.
TwoLayerFit fit_two_layer(const SampleMatrix& samples, const SgdConfig& cfg,
                          const TwoLayerTolerances& tols, RandomStream& stream,
                          std::optional<Eigen::Index> expected_anchors = {});

/// True when a permutation and strictly positive per-column scales align
/// every a_hat column with a distinct a_star column within l2 tolerance.
/// Greedy nearest match on normalized columns with a uniqueness check.
bool match_columns_up_to_perm_scale(const Matrix& a_hat, const Matrix& a_star, double tol);

}  // namespace rectgauss
