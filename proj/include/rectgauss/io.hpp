#pragma once

#include "rectgauss/core.hpp"
#include "rectgauss/estimator.hpp"

#include <string>

namespace rectgauss {

// Model files are JSON: {d, k, weight (row-major), bias, noise_sigma,
// outer (optional, row-major, row count inferred)}. Estimate files are JSON
// with sigma_hat/b_hat plus the fit diagnostics. Sample files are binary:
// magic "RGS1", then u64 n, u64 d, then n*d little-endian f64 row-major.

void save_model(const GenerativeModel& model, const std::string& path);
GenerativeModel load_model(const std::string& path);

void save_estimate(const EstimatedModel& model, const FitDiagnostics& diagnostics,
                   const std::string& path);
EstimatedModel load_estimate(const std::string& path);

/// Writes a matrix as JSON {rows, cols, data (row-major)}.
void save_matrix(const Matrix& m, const std::string& path);
Matrix load_matrix(const std::string& path);

void save_samples(const SampleMatrix& samples, const std::string& path);
SampleMatrix load_samples(const std::string& path);

}  // namespace rectgauss
