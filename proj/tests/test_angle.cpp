#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "rectgauss/angle.hpp"
#include "rectgauss/sampler.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace rectgauss;

namespace {

SampleMatrix samples_for_rows(const Matrix& weight, Eigen::Index n, std::uint64_t seed) {
  GenerativeModel model;
  model.weight = weight;
  model.bias = Vector::Zero(weight.rows());
  RandomStream stream(seed);
  return sample_one_layer(model, n, stream);
}

}  // namespace

TEST_CASE("orthant probability maps to the angle with clamping") {
  CHECK(orthant_prob_to_angle(0.5) == doctest::Approx(0.0));
  CHECK(orthant_prob_to_angle(0.25) == doctest::Approx(std::numbers::pi / 2));
  CHECK(orthant_prob_to_angle(0.0) == doctest::Approx(std::numbers::pi));
  // Sampling noise can push the frequency past one half; the angle clamps.
  CHECK(orthant_prob_to_angle(0.55) == 0.0);
  CHECK_THROWS_AS(orthant_prob_to_angle(-0.01), std::invalid_argument);
  CHECK_THROWS_AS(orthant_prob_to_angle(1.01), std::invalid_argument);
}

TEST_CASE("identical rows measure a zero angle") {
  Matrix weight(2, 2);
  weight << 1.0, 0.0, 1.0, 0.0;
  const SampleMatrix samples = samples_for_rows(weight, 100000, 41);
  const double theta = estimate_angle(samples, 0, 1, Vector::Zero(2));
  CHECK(theta <= 0.02);
}

TEST_CASE("orthogonal rows measure a right angle and a quarter frequency") {
  const SampleMatrix samples = samples_for_rows(Matrix::Identity(2, 2), 100000, 42);
  Eigen::Index joint = 0;
  for (Eigen::Index m = 0; m < samples.count(); ++m) {
    joint += samples.data(m, 0) > 0.0 && samples.data(m, 1) > 0.0;
  }
  const double p_hat = static_cast<double>(joint) / static_cast<double>(samples.count());
  const double binom_sigma = std::sqrt(0.25 * 0.75 / static_cast<double>(samples.count()));
  CHECK(std::abs(p_hat - 0.25) <= 3.0 * binom_sigma);

  const double theta = estimate_angle(samples, 0, 1, Vector::Zero(2));
  CHECK(std::abs(theta - std::numbers::pi / 2) < 0.03);
}

TEST_CASE("a sixty-degree pair matches the brute-force orthant oracle") {
  const double target = std::numbers::pi / 3;
  Matrix weight(2, 2);
  weight << 1.0, 0.0, std::cos(target), std::sin(target);

  // Independent Monte Carlo of the joint-exceedance probability.
  std::mt19937_64 rng(7);
  std::normal_distribution<double> normal;
  Eigen::Index hits = 0;
  const Eigen::Index mc = 400000;
  for (Eigen::Index i = 0; i < mc; ++i) {
    const double z0 = normal(rng);
    const double z1 = normal(rng);
    hits += (z0 > 0.0) && (weight(1, 0) * z0 + weight(1, 1) * z1 > 0.0);
  }
  const double p_oracle = static_cast<double>(hits) / static_cast<double>(mc);
  CHECK(std::abs(p_oracle - 1.0 / 3.0) < 0.0035);

  const SampleMatrix samples = samples_for_rows(weight, 100000, 43);
  const double theta = estimate_angle(samples, 0, 1, Vector::Zero(2));
  CHECK(std::abs(theta - target) < 0.03);
}

TEST_CASE("angles always land in the closed unit interval of pi") {
  RandomStream stream(44);
  for (int trial = 0; trial < 10; ++trial) {
    RandomStream model_stream = stream.fork();
    RandomStream sample_stream = stream.fork();
    const GenerativeModel model =
        make_random_model(3, 3, 1.0, BiasMode::kNonNegative, 0.0, model_stream);
    const SampleMatrix samples = sample_one_layer(model, 500, sample_stream);
    const double theta = estimate_angle(samples, 0, 2, Vector::Zero(3));
    CHECK(theta >= 0.0);
    CHECK(theta <= std::numbers::pi);
  }
}

TEST_CASE("raising the threshold never raises the exceedance frequency") {
  const SampleMatrix samples = samples_for_rows(Matrix::Identity(2, 2), 20000, 45);
  double previous_theta = -1.0;
  for (const double shift : {0.0, 0.1, 0.3, 0.8}) {
    const double theta = estimate_angle(samples, 0, 1, Vector::Constant(2, shift));
    // Shrinking indicator sets shrink p, and theta = pi - 2 pi p grows.
    CHECK(theta >= previous_theta);
    previous_theta = theta;
  }
}

TEST_CASE("small bias perturbations move the frequency by at most the bound") {
  const Eigen::Index n = 100000;
  RandomStream model_stream(46);
  const GenerativeModel model =
      make_random_model(2, 2, 1.0, BiasMode::kNonNegative, 0.0, model_stream);
  RandomStream sample_stream(47);
  const SampleMatrix samples = sample_one_layer(model, n, sample_stream);

  const auto exceedance = [&](const Vector& threshold) {
    Eigen::Index joint = 0;
    for (Eigen::Index m = 0; m < n; ++m) {
      joint += samples.data(m, 0) > threshold(0) && samples.data(m, 1) > threshold(1);
    }
    return static_cast<double>(joint) / static_cast<double>(n);
  };

  Vector perturbed = model.bias;
  for (Eigen::Index i = 0; i < 2; ++i) {
    perturbed(i) += 0.05 * model.weight.row(i).norm();
  }
  const double p_true = exceedance(model.bias);
  const double p_perturbed = exceedance(perturbed);
  const double binom_sigma = std::sqrt(0.25 / static_cast<double>(n));
  CHECK(std::abs(p_true - p_perturbed) <= 0.05 + 3.0 * binom_sigma);
}

TEST_CASE("invalid angle queries are rejected") {
  const SampleMatrix samples = samples_for_rows(Matrix::Identity(2, 2), 10, 48);
  CHECK_THROWS_AS(estimate_angle(samples, 0, 0, Vector::Zero(2)), std::invalid_argument);
  CHECK_THROWS_AS(estimate_angle(samples, 0, 1, Vector::Constant(2, -0.1)),
                  std::invalid_argument);
  SampleMatrix empty;
  empty.data = Matrix::Zero(0, 2);
  CHECK_THROWS_AS(estimate_angle(empty, 0, 1, Vector::Zero(2)), std::invalid_argument);
}
