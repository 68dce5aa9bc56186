#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "rectgauss/sampler.hpp"
#include "rectgauss/two_layer.hpp"

#include <cmath>
#include <numbers>

using namespace rectgauss;

namespace {

SampleMatrix rows(std::initializer_list<std::initializer_list<double>> values) {
  SampleMatrix samples;
  const Eigen::Index n = static_cast<Eigen::Index>(values.size());
  const Eigen::Index d = static_cast<Eigen::Index>(values.begin()->size());
  samples.data.resize(n, d);
  Eigen::Index r = 0;
  for (const auto& row : values) {
    Eigen::Index c = 0;
    for (const double v : row) {
      samples.data(r, c++) = v;
    }
    ++r;
  }
  return samples;
}

}  // namespace

TEST_CASE("nnls solves an exactly feasible nonnegative system") {
  Matrix a(3, 2);
  a << 1.0, 0.0, 0.0, 1.0, 1.0, 1.0;
  const Vector truth = (Vector(2) << 0.7, 1.3).finished();
  const Vector b = a * truth;
  const NnlsResult result = nnls(a, b);
  CHECK(result.residual_norm < 1e-12);
  CHECK((result.coefficients - truth).norm() < 1e-10);
}

TEST_CASE("nnls leaves infeasible directions with their least-squares residual") {
  Matrix a(2, 1);
  a << 1.0, 0.0;
  Vector b(2);
  b << -1.0, 1.0;  // best nonnegative coefficient is zero
  const NnlsResult result = nnls(a, b);
  CHECK(result.coefficients(0) == 0.0);
  CHECK(result.residual_norm == doctest::Approx(b.norm()));
}

TEST_CASE("conical membership distinguishes interior from exterior directions") {
  Matrix generators(2, 2);
  generators.col(0) = Eigen::Vector2d{1.0, 1.0}.normalized();
  generators.col(1) = Eigen::Vector2d{1.0, -1.0}.normalized();
  CHECK(is_conical_combination((Vector(2) << 1.0, 0.0).finished(), generators, 1e-8));
  CHECK_FALSE(is_conical_combination((Vector(2) << -1.0, 0.0).finished(), generators, 1e-8));

  Matrix single(2, 1);
  single.col(0) = (Vector(2) << 1.0, 0.0).finished();
  CHECK_FALSE(is_conical_combination((Vector(2) << 0.0, 1.0).finished(), single, 1e-8));
  CHECK_FALSE(is_conical_combination((Vector(2) << 0.0, 1.0).finished(), Matrix(2, 0), 1e-8));
}

TEST_CASE("normalization drops zeros, merges duplicates, and orders by norm") {
  const UnitVectorSet set = normalize_dedup(rows({{2.0, 0.0}, {0.0, 0.0}, {4.0, 0.0}}), 1e-6);
  REQUIRE(set.vectors.cols() == 1);
  CHECK(set.vectors(0, 0) == doctest::Approx(1.0));
  CHECK(set.vectors(1, 0) == 0.0);
  CHECK(set.source_rows[0] == 2);  // the larger original survives

  const UnitVectorSet single = normalize_dedup(rows({{1.0, 1.0}}), 1e-6);
  CHECK(single.vectors.col(0).isApprox(Eigen::Vector2d{1.0, 1.0}.normalized()));

  const UnitVectorSet close = normalize_dedup(rows({{1.0, 0.0}, {1.0, 1e-9}}), 1e-6);
  CHECK(close.vectors.cols() == 1);

  CHECK_THROWS_AS(normalize_dedup(rows({{0.0, 0.0}, {0.0, 0.0}}), 1e-6), std::runtime_error);
  CHECK_THROWS_AS(normalize_dedup(rows({{1.0, 0.0}}), 0.0), std::invalid_argument);
}

TEST_CASE("anchor extraction recovers the generators of an exact cone") {
  // Standard basis plus positive mixtures of it.
  const UnitVectorSet candidates = normalize_dedup(
      rows({{1.0, 0.0}, {0.0, 1.0}, {3.0, 1.0}, {1.0, 3.0}, {2.0, 2.0}}), 1e-8);
  const AnchorSet anchors = extract_anchors(candidates, 1e-8);
  REQUIRE(anchors.columns.cols() == 2);
  for (Eigen::Index c = 0; c < 2; ++c) {
    const Vector col = anchors.columns.col(c);
    CHECK((std::abs(col(0) - 1.0) < 1e-12 || std::abs(col(1) - 1.0) < 1e-12));
  }
}

TEST_CASE("a single candidate is its own anchor") {
  const UnitVectorSet candidates = normalize_dedup(rows({{0.6, 0.8}}), 1e-8);
  const AnchorSet anchors = extract_anchors(candidates, 1e-8);
  REQUIRE(anchors.columns.cols() == 1);
  CHECK(anchors.columns(0, 0) == doctest::Approx(0.6));
  CHECK(anchors.columns(1, 0) == doctest::Approx(0.8));
}

TEST_CASE("anchor extraction is a fixed point on its own output") {
  const UnitVectorSet candidates = normalize_dedup(
      rows({{1.0, 0.0, 0.0}, {0.0, 2.0, 0.0}, {0.0, 0.0, 1.5}, {1.0, 1.0, 1.0}, {2.0, 0.5, 0.0}}),
      1e-8);
  const AnchorSet first = extract_anchors(candidates, 1e-8);
  UnitVectorSet again;
  again.vectors = first.columns;
  again.source_rows = first.source_rows;
  const AnchorSet second = extract_anchors(again, 1e-8);
  REQUIRE(second.columns.cols() == first.columns.cols());
  CHECK((second.columns - first.columns).norm() == 0.0);
}

TEST_CASE("membership classification is exact on synthetic cones") {
  // Random full-column-rank generators in R^5 plus known conical combinations.
  RandomStream stream(91);
  Matrix generators(5, 3);
  for (Eigen::Index r = 0; r < 5; ++r) {
    for (Eigen::Index c = 0; c < 3; ++c) {
      generators(r, c) = standard_normal(stream);
    }
  }
  for (Eigen::Index c = 0; c < 3; ++c) {
    generators.col(c).normalize();
  }
  SampleMatrix samples;
  samples.data.resize(7, 5);
  for (Eigen::Index c = 0; c < 3; ++c) {
    samples.data.row(c) = (2.0 + static_cast<double>(c)) * generators.col(c).transpose();
  }
  samples.data.row(3) = (generators.col(0) + generators.col(1)).transpose();
  samples.data.row(4) = (0.5 * generators.col(0) + 2.0 * generators.col(2)).transpose();
  samples.data.row(5) = (generators.col(1) + 3.0 * generators.col(2)).transpose();
  samples.data.row(6) = (generators.col(0) + generators.col(1) + generators.col(2)).transpose();

  const UnitVectorSet candidates = normalize_dedup(samples, 1e-8);
  const AnchorSet anchors = extract_anchors(candidates, 1e-8);
  CHECK(anchors.columns.cols() == 3);
  CHECK(match_columns_up_to_perm_scale(anchors.columns, generators, 1e-8));
}

TEST_CASE("latent recovery inverts the mixing exactly on clean data") {
  RandomStream stream(92);
  Matrix mixing(6, 3);
  for (Eigen::Index r = 0; r < 6; ++r) {
    for (Eigen::Index c = 0; c < 3; ++c) {
      mixing(r, c) = standard_normal(stream);
    }
  }
  Matrix latents(3, 50);
  for (Eigen::Index r = 0; r < 3; ++r) {
    for (Eigen::Index c = 0; c < 50; ++c) {
      latents(r, c) = std::max(standard_normal(stream), 0.0);
    }
  }
  const Matrix observed = mixing * latents;
  const Matrix recovered = Eigen::ColPivHouseholderQR<Matrix>(mixing).solve(observed);
  CHECK((recovered - latents).norm() < 1e-10);
}

TEST_CASE("the full two-layer pipeline recovers the mixing matrix") {
  RandomStream root(93);
  RandomStream outer_stream = root.substream(0);
  RandomStream weight_stream = root.substream(1);
  RandomStream sample_stream = root.substream(2);
  RandomStream fit_stream = root.substream(3);

  GenerativeModel model = make_random_model(5, 5, 1.0, BiasMode::kZero, 0.0, weight_stream);
  Matrix outer(10, 5);
  for (Eigen::Index r = 0; r < 10; ++r) {
    for (Eigen::Index c = 0; c < 5; ++c) {
      outer(r, c) = standard_normal(outer_stream);
    }
  }
  model.outer = outer;
  const SampleMatrix samples = sample_two_layer(model, 400, sample_stream);

  SgdConfig cfg;
  const TwoLayerTolerances tols;
  const TwoLayerFit fit = fit_two_layer(samples, cfg, tols, fit_stream, 5);
  CHECK(fit.a_hat.cols() == 5);
  CHECK(match_columns_up_to_perm_scale(fit.a_hat, outer, 1e-6));
  CHECK(fit.fit.model.b_hat.minCoeff() >= 0.0);
  CHECK(fit.flagged_negative_latents == 0);
}

TEST_CASE("anchor count disagreements and rank deficiencies are loud") {
  const SampleMatrix cone = rows({{1.0, 0.0}, {0.0, 1.0}, {1.0, 1.0}});
  SgdConfig cfg;
  const TwoLayerTolerances tols;
  RandomStream stream(94);
  try {
    fit_two_layer(cone, cfg, tols, stream, 3);
    FAIL("expected AnchorCountError");
  } catch (const AnchorCountError& e) {
    CHECK(e.found() == 2);
    CHECK(e.expected() == 3);
  }

  // Antipodal unit vectors survive extraction but span a rank-one matrix.
  const SampleMatrix antipodal = rows({{1.0, 0.0}, {-1.0, 0.0}});
  RandomStream stream2(95);
  CHECK_THROWS_AS(fit_two_layer(antipodal, cfg, tols, stream2), std::runtime_error);
}

TEST_CASE("an identity mixing matrix reduces recovery to the latents themselves") {
  GenerativeModel model;
  model.weight = Matrix::Identity(3, 3);
  model.bias = Vector::Zero(3);
  model.outer = Matrix::Identity(3, 3);
  RandomStream sample_stream(96);
  const SampleMatrix samples = sample_two_layer(model, 3000, sample_stream);

  SgdConfig cfg;
  const TwoLayerTolerances tols;
  RandomStream fit_stream(97);
  const TwoLayerFit fit = fit_two_layer(samples, cfg, tols, fit_stream, 3);
  CHECK(match_columns_up_to_perm_scale(fit.a_hat, Matrix::Identity(3, 3), 1e-9));
  // Identity anchors mean the recovered latents are the samples themselves,
  // so the delegated fit sees near-orthonormal rows.
  for (Eigen::Index i = 0; i < 3; ++i) {
    CHECK(std::abs(fit.fit.model.sigma_hat(i, i) - 1.0) < 0.15);
  }
}

TEST_CASE("column matching honors permutation and positive scale only") {
  Matrix a(3, 2);
  a << 1.0, 0.0, 0.0, 2.0, 0.0, 0.0;
  Matrix permuted_scaled(3, 2);
  permuted_scaled.col(0) = 3.0 * a.col(1);
  permuted_scaled.col(1) = 0.5 * a.col(0);
  CHECK(match_columns_up_to_perm_scale(permuted_scaled, a, 1e-9));

  Matrix negated = a;
  negated.col(0) = -negated.col(0);
  CHECK_FALSE(match_columns_up_to_perm_scale(negated, a, 1e-9));

  Matrix unrelated(3, 2);
  unrelated << 0.3, 0.7, -0.2, 0.1, 0.9, -0.4;
  CHECK_FALSE(match_columns_up_to_perm_scale(unrelated, a, 1e-6));

  CHECK_THROWS_AS(match_columns_up_to_perm_scale(Matrix::Identity(2, 2), a, 1e-9),
                  std::invalid_argument);
}
