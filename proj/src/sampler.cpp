#include "rectgauss/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace rectgauss {

namespace {

Matrix gaussian_matrix(Eigen::Index rows, Eigen::Index cols, RandomStream& stream) {
  Matrix g(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      g(r, c) = standard_normal(stream);
    }
  }
  return g;
}

// Haar-distributed matrix with orthonormal columns: QR of a Gaussian draw
// with the column signs fixed by the R diagonal.
Matrix random_orthonormal(Eigen::Index rows, Eigen::Index cols, RandomStream& stream) {
  const Matrix g = gaussian_matrix(rows, cols, stream);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ() * Matrix::Identity(rows, cols);
  const Matrix r = qr.matrixQR().topRows(cols);
  for (Eigen::Index c = 0; c < cols; ++c) {
    if (r(c, c) < 0.0) {
      q.col(c) = -q.col(c);
    }
  }
  return q;
}

}  // namespace

TruncationExhaustedError::TruncationExhaustedError(int attempts)
    : std::runtime_error("truncated sampler exhausted " + std::to_string(attempts) +
                         " attempts; truncation mass is far below the supported regime"),
      attempts_(attempts) {}

SampleMatrix sample_one_layer(const GenerativeModel& model, Eigen::Index n,
                              RandomStream& stream) {
  model.validate();
  if (model.outer) {
    throw std::invalid_argument("sample_one_layer needs a model without an outer matrix");
  }
  if (n < 1) {
    throw std::invalid_argument("sample count must be at least 1");
  }
  const Eigen::Index d = model.dim();
  const Eigen::Index k = model.latent_dim();

  SampleMatrix out;
  out.seed = stream.seed();
  out.data.resize(n, d);
  Vector z(k);
  Vector row(d);
  for (Eigen::Index m = 0; m < n; ++m) {
    for (Eigen::Index j = 0; j < k; ++j) {
      z(j) = standard_normal(stream);
    }
    row.noalias() = model.weight * z;
    row += model.bias;
    row = row.cwiseMax(0.0);
    if (model.noise_sigma > 0.0) {
      for (Eigen::Index i = 0; i < d; ++i) {
        row(i) += model.noise_sigma * standard_normal(stream);
      }
    }
    out.data.row(m) = row;
  }
  return out;
}

SampleMatrix sample_two_layer(const GenerativeModel& model, Eigen::Index n,
                              RandomStream& stream) {
  model.validate();
  if (!model.outer) {
    throw std::invalid_argument("sample_two_layer needs a model with an outer matrix");
  }
  if (model.noise_sigma != 0.0) {
    throw std::invalid_argument("two-layer sampling does not support additive noise");
  }
  if (n < 1) {
    throw std::invalid_argument("sample count must be at least 1");
  }
  const Eigen::Index p = model.dim();
  const Eigen::Index k = model.latent_dim();
  const Eigen::Index d = model.output_dim();

  SampleMatrix out;
  out.seed = stream.seed();
  out.data.resize(n, d);
  Vector z(k);
  Vector latent(p);
  for (Eigen::Index m = 0; m < n; ++m) {
    for (Eigen::Index j = 0; j < k; ++j) {
      z(j) = standard_normal(stream);
    }
    latent.noalias() = model.weight * z;
    latent += model.bias;
    latent = latent.cwiseMax(0.0);
    out.data.row(m).noalias() = (*model.outer * latent).transpose();
  }
  return out;
}

double sample_truncated_normal(double mu, double sigma, const TruncationInterval& trunc,
                               RandomStream& stream, int max_attempts) {
  if (!(sigma > 0.0)) {
    throw std::invalid_argument("sigma must be positive");
  }
  if (max_attempts < 1) {
    throw std::invalid_argument("max_attempts must be at least 1");
  }
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    const double x = mu + sigma * standard_normal(stream);
    if (trunc.contains(x)) {
      return x;
    }
  }
  throw TruncationExhaustedError(max_attempts);
}

GenerativeModel make_random_model(Eigen::Index d, Eigen::Index k, double kappa,
                                  BiasMode bias_mode, double eta, RandomStream& stream) {
  if (d < 1 || k < 1) {
    throw std::invalid_argument("model dimensions must be at least 1");
  }
  if (!(kappa >= 1.0)) {
    throw std::invalid_argument("condition number must be at least 1");
  }
  // cond(W W^T) > 1 needs two distinct nonzero eigenvalues, and k < d leaves
  // W W^T rank-deficient with no finite condition number.
  if (kappa > 1.0 && (k < d || d < 2)) {
    throw std::invalid_argument(
        "condition number above 1 requires k >= d >= 2; W W^T would be rank-deficient");
  }
  if (bias_mode == BiasMode::kNegative && !(eta >= 0.0)) {
    throw std::invalid_argument("negative bias mode needs eta >= 0");
  }

  const Eigen::Index m = std::min(d, k);
  Vector singular_values(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    singular_values(i) =
        m == 1 ? 1.0 : std::pow(kappa, 0.5 * static_cast<double>(i) / static_cast<double>(m - 1));
  }

  const Matrix u = random_orthonormal(d, m, stream);
  const Matrix v = random_orthonormal(k, m, stream);

  GenerativeModel model;
  model.weight = u * singular_values.asDiagonal() * v.transpose();
  model.bias = Vector::Zero(d);
  switch (bias_mode) {
    case BiasMode::kZero:
      break;
    case BiasMode::kNonNegative:
      for (Eigen::Index i = 0; i < d; ++i) {
        model.bias(i) = std::max(0.0, standard_normal(stream));
      }
      break;
    case BiasMode::kNegative:
      for (Eigen::Index i = 0; i < d; ++i) {
        model.bias(i) = std::max(0.0, standard_normal(stream));
      }
      for (Eigen::Index i = 0; i < d; ++i) {
        model.bias(i) -= eta * model.weight.row(i).norm() * stream.uniform01();
      }
      break;
  }
  return model;
}

}  // namespace rectgauss
