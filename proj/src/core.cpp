#include "rectgauss/core.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <stdexcept>
#include <thread>
#include <vector>

namespace rectgauss {

void GenerativeModel::validate() const {
  if (weight.size() == 0) {
    throw std::invalid_argument("model weight matrix must be non-empty");
  }
  if (!weight.allFinite()) {
    throw std::invalid_argument("model weight matrix has non-finite entries");
  }
  if (bias.size() != weight.rows()) {
    throw std::invalid_argument("bias length must equal the number of weight rows");
  }
  if (!bias.allFinite()) {
    throw std::invalid_argument("model bias has non-finite entries");
  }
  if (outer && outer->cols() != weight.rows()) {
    throw std::invalid_argument("outer matrix column count must equal the number of weight rows");
  }
  if (!(noise_sigma >= 0.0)) {
    throw std::invalid_argument("noise_sigma must be non-negative");
  }
}

double standard_normal(RandomStream& stream) {
  const double u1 = (static_cast<double>(stream.next_u64() >> 11) + 1.0) * 0x1.0p-53;  // (0, 1]
  const double u2 = static_cast<double>(stream.next_u64() >> 11) * 0x1.0p-53;          // [0, 1)
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

Eigen::Index uniform_index(RandomStream& stream, Eigen::Index count) {
  if (count <= 0) {
    throw std::invalid_argument("uniform_index needs a positive count");
  }
  const auto wide = static_cast<unsigned __int128>(stream.next_u64());
  return static_cast<Eigen::Index>((wide * static_cast<std::uint64_t>(count)) >> 64);
}

Matrix clip_psd(const Matrix& m, double eigenvalue_floor) {
  const double floor = std::max(eigenvalue_floor, 0.0);
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.transpose()));
  const Vector clipped = es.eigenvalues().cwiseMax(floor);
  Matrix out = es.eigenvectors() * clipped.asDiagonal() * es.eigenvectors().transpose();
  return 0.5 * (out + out.transpose());
}

Matrix cholesky_psd_sqrt(const Matrix& m) {
  if (m.rows() != m.cols()) {
    throw std::invalid_argument("cholesky_psd_sqrt needs a square matrix");
  }
  const double asymmetry = (m - m.transpose()).norm();
  if (asymmetry > 1e-9 * (1.0 + m.norm())) {
    throw std::invalid_argument("cholesky_psd_sqrt needs a symmetric matrix");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.transpose()));
  const Vector roots = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * roots.asDiagonal();
}

int max_threads() {
  static const int cached = [] {
    if (const char* env = std::getenv("RECTGAUSS_THREADS")) {
      char* end = nullptr;
      const long parsed = std::strtol(env, &end, 10);
      if (end != env && parsed >= 1) {
        return static_cast<int>(std::min(parsed, 1024L));
      }
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
  }();
  return cached;
}

void parallel_for(Eigen::Index count, const std::function<void(Eigen::Index)>& body) {
  if (count <= 0) {
    return;
  }
  const int workers = static_cast<int>(std::min<Eigen::Index>(max_threads(), count));
  if (workers <= 1) {
    for (Eigen::Index i = 0; i < count; ++i) {
      body(i);
    }
    return;
  }
  std::atomic<Eigen::Index> next{0};
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(count));
  const auto run = [&] {
    for (Eigen::Index i; (i = next.fetch_add(1)) < count;) {
      try {
        body(i);
      } catch (...) {
        errors[static_cast<std::size_t>(i)] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers - 1));
  for (int w = 1; w < workers; ++w) {
    pool.emplace_back(run);
  }
  run();
  for (auto& t : pool) {
    t.join();
  }
  for (const auto& error : errors) {
    if (error) {
      std::rethrow_exception(error);
    }
  }
}

}  // namespace rectgauss
