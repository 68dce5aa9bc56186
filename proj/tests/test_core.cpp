#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "rectgauss/core.hpp"

#include <cmath>
#include <vector>

using namespace rectgauss;

TEST_CASE("streams with equal seeds emit identical sequences") {
  RandomStream a(1);
  RandomStream b(1);
  for (int i = 0; i < 1000; ++i) {
    CHECK(a.next_u64() == b.next_u64());
  }
  RandomStream c(1);
  RandomStream d(2);
  int differing = 0;
  for (int i = 0; i < 100; ++i) {
    differing += c.next_u64() != d.next_u64();
  }
  CHECK(differing == 100);
}

TEST_CASE("substreams are keyed by id and leave the parent untouched") {
  RandomStream parent(7);
  const auto counter_before = parent.counter();
  RandomStream child_a = parent.substream(0);
  RandomStream child_b = parent.substream(1);
  CHECK(parent.counter() == counter_before);
  CHECK(child_a.seed() != child_b.seed());
  CHECK(parent.substream(0).seed() == child_a.seed());

  RandomStream forked = parent.fork();
  CHECK(parent.counter() == counter_before + 1);
  CHECK(forked.seed() != parent.fork().seed());
}

TEST_CASE("uniform01 stays in the half-open unit interval") {
  RandomStream stream(3);
  for (int i = 0; i < 100000; ++i) {
    const double u = stream.uniform01();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("standard_normal matches the first two moments") {
  RandomStream stream(11);
  const int n = 100000;
  double sum = 0.0;
  double sum_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = standard_normal(stream);
    sum += z;
    sum_sq += z * z;
  }
  const double mean = sum / n;
  const double variance = sum_sq / n - mean * mean;
  CHECK(std::abs(mean) < 0.02);
  CHECK(std::abs(variance - 1.0) < 0.03);
}

TEST_CASE("standard_normal is reproducible per seed") {
  RandomStream a(5);
  RandomStream b(5);
  for (int i = 0; i < 100; ++i) {
    CHECK(standard_normal(a) == standard_normal(b));
  }
}

TEST_CASE("uniform_index covers the range without escaping it") {
  RandomStream stream(13);
  std::vector<int> counts(7, 0);
  for (int i = 0; i < 70000; ++i) {
    const Eigen::Index idx = uniform_index(stream, 7);
    REQUIRE(idx >= 0);
    REQUIRE(idx < 7);
    ++counts[static_cast<std::size_t>(idx)];
  }
  for (const int c : counts) {
    CHECK(c > 8000);  // 10000 expected per bucket
  }
  CHECK_THROWS_AS(uniform_index(stream, 0), std::invalid_argument);
}

TEST_CASE("cholesky_psd_sqrt reproduces diagonal and identity inputs") {
  Matrix diag = Matrix::Zero(2, 2);
  diag(0, 0) = 4.0;
  diag(1, 1) = 9.0;
  const Matrix l = cholesky_psd_sqrt(diag);
  CHECK((l * l.transpose() - diag).norm() < 1e-10);

  const Matrix eye = Matrix::Identity(3, 3);
  const Matrix li = cholesky_psd_sqrt(eye);
  CHECK((li * li.transpose() - eye).norm() < 1e-12);
}

TEST_CASE("cholesky_psd_sqrt clips negative eigenvalues to zero") {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 0) = 1.0;
  m(1, 1) = -0.001;
  const Matrix l = cholesky_psd_sqrt(m);
  Eigen::SelfAdjointEigenSolver<Matrix> es(l * l.transpose());
  CHECK(std::abs(es.eigenvalues()(0)) < 1e-9);
  CHECK(std::abs(es.eigenvalues()(1) - 1.0) < 1e-9);
}

TEST_CASE("cholesky_psd_sqrt rejects asymmetric input") {
  Matrix m(2, 2);
  m << 1.0, 0.5, 0.2, 1.0;
  CHECK_THROWS_AS(cholesky_psd_sqrt(m), std::invalid_argument);
}

TEST_CASE("cholesky_psd_sqrt factors random symmetric matrices after clipping") {
  RandomStream stream(17);
  for (const Eigen::Index d : {2, 5, 17, 50}) {
    Matrix g(d, d);
    for (Eigen::Index r = 0; r < d; ++r) {
      for (Eigen::Index c = 0; c < d; ++c) {
        g(r, c) = standard_normal(stream);
      }
    }
    const Matrix m = 0.5 * (g + g.transpose());
    const Matrix l = cholesky_psd_sqrt(m);
    const Matrix clipped = clip_psd(m);
    CHECK((l * l.transpose() - clipped).norm() <= 1e-9 * (1.0 + m.norm()));
  }
}

TEST_CASE("model validation catches shape mismatches") {
  GenerativeModel model;
  model.weight = Matrix::Identity(3, 2);
  model.bias = Vector::Zero(3);
  CHECK_NOTHROW(model.validate());

  model.bias = Vector::Zero(2);
  CHECK_THROWS_AS(model.validate(), std::invalid_argument);

  model.bias = Vector::Zero(3);
  model.outer = Matrix::Identity(4, 2);  // needs 3 columns
  CHECK_THROWS_AS(model.validate(), std::invalid_argument);
  model.outer = Matrix::Identity(4, 3);
  CHECK_NOTHROW(model.validate());
}

TEST_CASE("parallel_for visits every index once and forwards exceptions") {
  std::vector<int> hits(257, 0);
  parallel_for(257, [&](Eigen::Index i) { hits[static_cast<std::size_t>(i)] += 1; });
  for (const int h : hits) {
    CHECK(h == 1);
  }
  CHECK_THROWS_AS(parallel_for(8,
                               [&](Eigen::Index i) {
                                 if (i == 3) {
                                   throw std::runtime_error("boom");
                                 }
                               }),
                  std::runtime_error);
}
