#pragma once

#include "rectgauss/core.hpp"
#include "rectgauss/sampler.hpp"
#include "rectgauss/truncated_mle.hpp"
#include "rectgauss/two_layer.hpp"

#include <optional>
#include <string>
#include <vector>

namespace rectgauss {

enum class ExperimentMode { kSweepN, kSweepD, kSweepKappa, kTable1, kSingle };

ExperimentMode parse_experiment_mode(const std::string& name);
std::string to_string(ExperimentMode mode);

BiasMode parse_bias_mode(const std::string& name);
std::string to_string(BiasMode mode);

/// Sweep specification. Grids the active mode does not vary must hold one
/// value. k == 0 tracks d per grid point; p == 0 tracks k (table1 anchors).
/// seeds defaults to 10, or 100 for table1, when the config file omits it.
struct ExperimentConfig {
  ExperimentMode mode = ExperimentMode::kSingle;
  std::vector<Eigen::Index> n_grid;
  std::vector<Eigen::Index> d_grid;
  std::vector<double> kappa_grid;
  Eigen::Index k = 0;
  Eigen::Index p = 0;
  BiasMode bias_mode = BiasMode::kNonNegative;
  double eta = 0.0;
  int seeds = 0;
  std::uint64_t seed = 0;
  SgdConfig sgd;
  TwoLayerTolerances tolerances;
  double match_tol = 1e-6;
  std::string out;

  void validate() const;
};

ExperimentConfig load_experiment_config(const std::string& path);

/// One CSV row. Empty optionals print as empty cells so the column set is
/// identical across modes.
struct ExperimentRow {
  std::string mode;
  std::optional<Eigen::Index> n;
  std::optional<Eigen::Index> d;
  std::optional<Eigen::Index> k;
  std::optional<double> kappa;
  std::optional<double> eta;
  std::optional<int> seed;
  std::optional<double> sigma_rel_err;
  std::optional<double> bias_rel_err;
  std::optional<double> kl;
  std::optional<double> tv_bound;
  std::optional<double> success;
  std::string status = "ok";
  std::int64_t wall_ms = 0;
};

/// Runs every (grid point, seed) pair; single-run failures become rows with
/// status=error and the experiment continues. table1 mode appends one
/// summary row per grid point carrying the success fraction. Runs execute in
/// a worker pool on per-run substreams, and rows come back in deterministic
/// (grid, seed) order regardless of the thread count.
std::vector<ExperimentRow> run_experiment(const ExperimentConfig& config);

std::string experiment_csv_header();
std::string to_csv_line(const ExperimentRow& row);
std::string to_csv(const std::vector<ExperimentRow>& rows);

}  // namespace rectgauss
