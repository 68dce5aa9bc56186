#include "rectgauss/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace rectgauss {

std::pair<double, double> param_errors(const EstimatedModel& est,
                                       const GenerativeModel& truth) {
  if (est.dim() != truth.dim() || est.sigma_hat.rows() != truth.dim()) {
    throw std::invalid_argument("estimate and truth dimensions disagree");
  }
  const double weight_norm_sq = truth.weight.squaredNorm();
  if (weight_norm_sq == 0.0) {
    throw std::invalid_argument("parameter errors are undefined for a zero weight matrix");
  }
  const Matrix sigma_true = truth.weight * truth.weight.transpose();
  const double sigma_err = (est.sigma_hat - sigma_true).norm() / weight_norm_sq;
  const double bias_err = (est.b_hat - truth.bias).norm() / std::sqrt(weight_norm_sq);
  return {sigma_err, bias_err};
}

std::pair<double, double> param_errors_on(const EstimatedModel& est,
                                          const GenerativeModel& truth,
                                          const std::vector<Eigen::Index>& coords) {
  if (coords.empty()) {
    throw std::invalid_argument("coordinate subset must be non-empty");
  }
  const Eigen::Index m = static_cast<Eigen::Index>(coords.size());

  GenerativeModel sub_truth;
  sub_truth.weight.resize(m, truth.latent_dim());
  sub_truth.bias.resize(m);
  EstimatedModel sub_est;
  sub_est.sigma_hat.resize(m, m);
  sub_est.b_hat.resize(m);
  for (Eigen::Index a = 0; a < m; ++a) {
    sub_truth.weight.row(a) = truth.weight.row(coords[static_cast<std::size_t>(a)]);
    sub_truth.bias(a) = truth.bias(coords[static_cast<std::size_t>(a)]);
    sub_est.b_hat(a) = est.b_hat(coords[static_cast<std::size_t>(a)]);
    for (Eigen::Index b = 0; b < m; ++b) {
      sub_est.sigma_hat(a, b) = est.sigma_hat(coords[static_cast<std::size_t>(a)],
                                              coords[static_cast<std::size_t>(b)]);
    }
  }
  return param_errors(sub_est, sub_truth);
}

double gaussian_kl(const Vector& b1, const Matrix& s1, const Vector& b2, const Matrix& s2) {
  const Eigen::Index d = b1.size();
  if (b2.size() != d || s1.rows() != d || s1.cols() != d || s2.rows() != d || s2.cols() != d) {
    throw std::invalid_argument("gaussian_kl shape mismatch");
  }
  const Eigen::LLT<Matrix> llt2(s2);
  if (llt2.info() != Eigen::Success) {
    throw std::invalid_argument("second covariance must be positive definite");
  }
  const Eigen::LLT<Matrix> llt1(s1);
  if (llt1.info() != Eigen::Success) {
    return std::numeric_limits<double>::infinity();
  }

  const Matrix l1 = llt1.matrixL();
  const Matrix l2 = llt2.matrixL();
  // tr(s2^-1 s1) = ||L2^-1 L1||_F^2
  const Matrix whitened = l2.triangularView<Eigen::Lower>().solve(l1);
  const double trace_term = whitened.squaredNorm();
  const double log_det1 = 2.0 * l1.diagonal().array().log().sum();
  const double log_det2 = 2.0 * l2.diagonal().array().log().sum();
  const Vector mean_gap = l2.triangularView<Eigen::Lower>().solve(b1 - b2);
  return 0.5 * (trace_term - static_cast<double>(d) - (log_det1 - log_det2) +
                mean_gap.squaredNorm());
}

double fitted_kl(const EstimatedModel& est, const GenerativeModel& truth) {
  const Matrix sigma_true = truth.weight * truth.weight.transpose();
  const Eigen::LLT<Matrix> llt(sigma_true);
  if (llt.info() != Eigen::Success) {
    throw std::invalid_argument(
        "true covariance is degenerate; the bound is meaningless, use param_errors");
  }
  const Matrix clipped = clip_psd(est.sigma_hat, 1e-12 * est.sigma_hat.trace());
  return gaussian_kl(est.b_hat, clipped, truth.bias, sigma_true);
}

double tv_upper_bound(const EstimatedModel& est, const GenerativeModel& truth) {
  return std::sqrt(0.5 * std::max(fitted_kl(est, truth), 0.0));
}

}  // namespace rectgauss
