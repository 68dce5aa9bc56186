#include "rectgauss/two_layer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace rectgauss {

NnlsResult nnls(const Matrix& a, const Vector& b, int max_iterations) {
  if (a.rows() != b.size()) {
    throw std::invalid_argument("nnls shape mismatch");
  }
  const Eigen::Index cols = a.cols();
  NnlsResult result;
  result.coefficients = Vector::Zero(cols);
  if (cols == 0) {
    result.residual_norm = b.norm();
    return result;
  }
  if (max_iterations <= 0) {
    max_iterations = static_cast<int>(3 * cols + 30);
  }

  Vector x = Vector::Zero(cols);
  std::vector<bool> passive(static_cast<std::size_t>(cols), false);
  Vector dual = a.transpose() * b;
  const double dual_tol = 1e-12 * std::max(1.0, dual.cwiseAbs().maxCoeff());

  std::vector<Eigen::Index> passive_list;
  int iterations = 0;
  while (iterations < max_iterations) {
    // Most violated inactive coordinate of the stationarity conditions.
    Eigen::Index entering = -1;
    double best = dual_tol;
    for (Eigen::Index i = 0; i < cols; ++i) {
      if (!passive[static_cast<std::size_t>(i)] && dual(i) > best) {
        best = dual(i);
        entering = i;
      }
    }
    if (entering < 0) {
      break;
    }
    passive[static_cast<std::size_t>(entering)] = true;

    while (true) {
      ++iterations;
      passive_list.clear();
      for (Eigen::Index i = 0; i < cols; ++i) {
        if (passive[static_cast<std::size_t>(i)]) {
          passive_list.push_back(i);
        }
      }
      Matrix ap(a.rows(), static_cast<Eigen::Index>(passive_list.size()));
      for (std::size_t c = 0; c < passive_list.size(); ++c) {
        ap.col(static_cast<Eigen::Index>(c)) = a.col(passive_list[c]);
      }
      const Vector z = ap.colPivHouseholderQr().solve(b);

      const double feasible_floor = 1e-14;
      bool all_positive = true;
      for (Eigen::Index c = 0; c < z.size(); ++c) {
        if (z(c) <= feasible_floor) {
          all_positive = false;
          break;
        }
      }
      if (all_positive) {
        x.setZero();
        for (std::size_t c = 0; c < passive_list.size(); ++c) {
          x(passive_list[c]) = z(static_cast<Eigen::Index>(c));
        }
        break;
      }

      // Step from x toward z until the first passive coordinate hits zero.
      double alpha = std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < passive_list.size(); ++c) {
        const double zc = z(static_cast<Eigen::Index>(c));
        if (zc <= feasible_floor) {
          const double xc = x(passive_list[c]);
          const double denom = xc - zc;
          if (denom > 0.0) {
            alpha = std::min(alpha, xc / denom);
          } else {
            alpha = 0.0;
          }
        }
      }
      if (!std::isfinite(alpha)) {
        alpha = 0.0;
      }
      for (std::size_t c = 0; c < passive_list.size(); ++c) {
        const Eigen::Index idx = passive_list[c];
        x(idx) += alpha * (z(static_cast<Eigen::Index>(c)) - x(idx));
        if (x(idx) <= feasible_floor) {
          x(idx) = 0.0;
          passive[static_cast<std::size_t>(idx)] = false;
        }
      }
      if (iterations >= max_iterations) {
        break;
      }
    }
    dual = a.transpose() * (b - a * x);
  }

  result.coefficients = x;
  result.residual_norm = (b - a * x).norm();
  result.iterations = iterations;
  return result;
}

UnitVectorSet normalize_dedup(const SampleMatrix& samples, double dedup_tol) {
  if (!(dedup_tol > 0.0)) {
    throw std::invalid_argument("dedup tolerance must be positive");
  }
  const Eigen::Index n = samples.count();
  const Eigen::Index d = samples.dim();

  std::vector<Eigen::Index> order;
  std::vector<double> norms(static_cast<std::size_t>(n), 0.0);
  for (Eigen::Index m = 0; m < n; ++m) {
    const double norm = samples.data.row(m).norm();
    norms[static_cast<std::size_t>(m)] = norm;
    if (norm > 0.0) {
      order.push_back(m);
    }
  }
  if (order.empty()) {
    throw std::runtime_error("all sample rows are zero; nothing to normalize");
  }
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return norms[static_cast<std::size_t>(a)] > norms[static_cast<std::size_t>(b)];
  });

  Matrix accepted(d, static_cast<Eigen::Index>(order.size()));
  std::vector<Eigen::Index> sources;
  Eigen::Index kept = 0;
  for (const Eigen::Index row : order) {
    const Vector unit = samples.data.row(row).transpose() / norms[static_cast<std::size_t>(row)];
    bool duplicate = false;
    for (Eigen::Index c = 0; c < kept; ++c) {
      if ((accepted.col(c) - unit).norm() <= dedup_tol) {
        duplicate = true;
        break;
      }
    }
    if (!duplicate) {
      accepted.col(kept++) = unit;
      sources.push_back(row);
    }
  }

  UnitVectorSet out;
  out.vectors = accepted.leftCols(kept);
  out.source_rows = std::move(sources);
  return out;
}

bool is_conical_combination(const Vector& v, const Matrix& others, double tol) {
  if (others.cols() == 0) {
    return false;
  }
  return nnls(others, v).residual_norm <= tol;
}

AnchorSet extract_anchors(const UnitVectorSet& candidates, double tol) {
  const Eigen::Index m = candidates.vectors.cols();
  if (m == 0) {
    throw std::invalid_argument("extract_anchors needs at least one candidate");
  }
  const Eigen::Index d = candidates.vectors.rows();

  std::vector<std::uint8_t> keep(static_cast<std::size_t>(m), 1);
  if (m > 1) {
    parallel_for(m, [&](Eigen::Index idx) {
      Matrix others(d, m - 1);
      Eigen::Index at = 0;
      for (Eigen::Index c = 0; c < m; ++c) {
        if (c != idx) {
          others.col(at++) = candidates.vectors.col(c);
        }
      }
      if (is_conical_combination(candidates.vectors.col(idx), others, tol)) {
        keep[static_cast<std::size_t>(idx)] = 0;
      }
    });
  }

  const Eigen::Index kept = static_cast<Eigen::Index>(
      std::count(keep.begin(), keep.end(), static_cast<std::uint8_t>(1)));
  AnchorSet out;
  out.columns.resize(d, kept);
  Eigen::Index at = 0;
  for (Eigen::Index c = 0; c < m; ++c) {
    if (keep[static_cast<std::size_t>(c)]) {
      out.columns.col(at++) = candidates.vectors.col(c);
      out.source_rows.push_back(candidates.source_rows[static_cast<std::size_t>(c)]);
    }
  }
  return out;
}

AnchorCountError::AnchorCountError(Eigen::Index found, Eigen::Index expected)
    : std::runtime_error("anchor extraction found " + std::to_string(found) +
                         " anchors but " + std::to_string(expected) + " were expected"),
      found_(found),
      expected_(expected) {}

TwoLayerFit fit_two_layer(const SampleMatrix& samples, const SgdConfig& cfg,
                          const TwoLayerTolerances& tols, RandomStream& stream,
                          std::optional<Eigen::Index> expected_anchors) {
  const UnitVectorSet candidates = normalize_dedup(samples, tols.dedup);
  AnchorSet anchors = extract_anchors(candidates, tols.membership);
  const Eigen::Index p = anchors.columns.cols();
  if (expected_anchors && p != *expected_anchors) {
    throw AnchorCountError(p, *expected_anchors);
  }
  if (p == 0) {
    throw std::runtime_error("anchor extraction kept no vectors");
  }

  Eigen::ColPivHouseholderQR<Matrix> qr(anchors.columns);
  if (qr.rank() < p) {
    throw std::runtime_error("anchor matrix is rank-deficient; latent recovery is ill-posed");
  }

  // Least-squares latents for all samples at once: solve A m = x columnwise.
  const Matrix latents_t = qr.solve(samples.data.transpose());

  SampleMatrix latents;
  latents.seed = samples.seed;
  latents.data = latents_t.transpose();
  Eigen::Index flagged = 0;
  for (Eigen::Index m = 0; m < latents.data.rows(); ++m) {
    const double flag_floor = -tols.latent_flag * samples.data.row(m).norm();
    for (Eigen::Index c = 0; c < p; ++c) {
      const double value = latents.data(m, c);
      if (value < flag_floor) {
        ++flagged;
      }
      if (value < 0.0) {
        latents.data(m, c) = 0.0;
      }
    }
  }

  TwoLayerFit out;
  out.a_hat = anchors.columns;
  out.anchors = std::move(anchors);
  out.fit = fit_one_layer(latents, cfg, stream);
  out.flagged_negative_latents = flagged;
  return out;
}

bool match_columns_up_to_perm_scale(const Matrix& a_hat, const Matrix& a_star, double tol) {
  if (a_hat.rows() != a_star.rows() || a_hat.cols() != a_star.cols()) {
    throw std::invalid_argument("match_columns_up_to_perm_scale needs equal shapes");
  }
  const Eigen::Index p = a_hat.cols();
  std::vector<bool> used(static_cast<std::size_t>(p), false);
  for (Eigen::Index c = 0; c < p; ++c) {
    const double hat_norm = a_hat.col(c).norm();
    if (hat_norm == 0.0) {
      return false;
    }
    const Vector hat_unit = a_hat.col(c) / hat_norm;
    Eigen::Index best = -1;
    double best_dist = std::numeric_limits<double>::infinity();
    for (Eigen::Index s = 0; s < p; ++s) {
      if (used[static_cast<std::size_t>(s)]) {
        continue;
      }
      const double star_norm = a_star.col(s).norm();
      if (star_norm == 0.0) {
        continue;
      }
      const double dist = (a_star.col(s) / star_norm - hat_unit).norm();
      if (dist < best_dist) {
        best_dist = dist;
        best = s;
      }
    }
    if (best < 0 || best_dist > tol) {
      return false;
    }
    used[static_cast<std::size_t>(best)] = true;
  }
  return true;
}

}  // namespace rectgauss
