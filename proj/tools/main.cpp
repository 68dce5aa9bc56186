#include "rectgauss/angle.hpp"
#include "rectgauss/estimator.hpp"
#include "rectgauss/experiment.hpp"
#include "rectgauss/io.hpp"
#include "rectgauss/metrics.hpp"
#include "rectgauss/sampler.hpp"
#include "rectgauss/two_layer.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

namespace {

using namespace rectgauss;

constexpr int kExitOk = 0;
constexpr int kExitEstimationFailure = 1;
constexpr int kExitUsage = 2;

/// Input or configuration problems the user can fix; exits with code 2.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string format_metric(double value) {
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

double zero_fraction(const SampleMatrix& samples) {
  Eigen::Index zeros = 0;
  const double* values = samples.data.data();
  for (Eigen::Index i = 0; i < samples.data.size(); ++i) {
    zeros += static_cast<Eigen::Index>(values[i] == 0.0);
  }
  return samples.data.size() == 0
             ? 0.0
             : static_cast<double>(zeros) / static_cast<double>(samples.data.size());
}

std::string ahat_path_for(const std::string& estimate_path) {
  const auto dot = estimate_path.rfind('.');
  if (dot == std::string::npos || dot == 0) {
    return estimate_path + ".ahat.json";
  }
  return estimate_path.substr(0, dot) + ".ahat" + estimate_path.substr(dot);
}

struct FitOptions {
  std::uint64_t seed = 0;
  int batches = 1;
  double radius = 3.0;
  double lambda = 0.1;
  std::uint64_t steps = 0;

  SgdConfig to_sgd() const {
    SgdConfig cfg;
    cfg.batches = batches;
    cfg.radius = radius;
    cfg.lambda = lambda;
    cfg.steps = steps;
    return cfg;
  }
};

void add_fit_options(CLI::App* cmd, FitOptions& opts) {
  cmd->add_option("--seed", opts.seed, "Stream seed for the stochastic fit");
  cmd->add_option("--batches", opts.batches, "Independent SGD batches per coordinate");
  cmd->add_option("--radius", opts.radius, "Projection box radius");
  cmd->add_option("--lambda", opts.lambda, "Strong-convexity step parameter");
  cmd->add_option("--steps", opts.steps, "SGD steps per batch (0 = auto)");
}

void print_metrics_line(const EstimatedModel& estimate, const GenerativeModel& truth) {
  const auto [sigma_err, bias_err] = param_errors(estimate, truth);
  const double kl = fitted_kl(estimate, truth);
  const double tv = tv_upper_bound(estimate, truth);
  std::cout << "sigma_rel_err,bias_rel_err,kl,tv_bound\n"
            << format_metric(sigma_err) << ',' << format_metric(bias_err) << ','
            << format_metric(kl) << ',' << format_metric(tv) << '\n';
}

int run(int argc, char** argv) {
  CLI::App app{"Parameter estimation for rectified Gaussian generative models"};
  app.require_subcommand(1);

  // gen-model
  auto* gen = app.add_subcommand("gen-model", "Draw a random ground-truth model");
  Eigen::Index gen_dim = 5, gen_latent = 0, gen_outer_dim = 0;
  double gen_kappa = 1.0, gen_eta = 0.0, gen_noise = 0.0;
  std::string gen_bias_mode = "nonneg", gen_out;
  std::uint64_t gen_seed = 0;
  gen->add_option("--dim", gen_dim, "Output dimension d");
  gen->add_option("--latent", gen_latent, "Latent dimension k (0 = d)");
  gen->add_option("--kappa", gen_kappa, "Condition number of W W^T");
  gen->add_option("--bias-mode", gen_bias_mode, "nonneg, zero, or negative")
      ->check(CLI::IsMember({"nonneg", "zero", "negative"}));
  gen->add_option("--eta", gen_eta, "Negative-bias depth (negative mode only)");
  gen->add_option("--outer-dim", gen_outer_dim,
                  "Rows of a Gaussian outer mixing matrix (0 = one-layer model)");
  gen->add_option("--noise-sigma", gen_noise, "Additive noise level");
  gen->add_option("--seed", gen_seed, "Stream seed");
  gen->add_option("--out", gen_out, "Model file to write")->required();

  // sample
  auto* sample = app.add_subcommand("sample", "Draw samples from a model file");
  std::string sample_model, sample_out;
  Eigen::Index sample_n = 0;
  std::uint64_t sample_seed = 0;
  sample->add_option("model", sample_model, "Model file")->required();
  sample->add_option("--n", sample_n, "Number of samples")->required();
  sample->add_option("--seed", sample_seed, "Stream seed");
  sample->add_option("--out", sample_out, "Sample file to write")->required();

  // fit
  auto* fit = app.add_subcommand("fit", "Estimate model parameters from samples");
  std::string fit_samples, fit_out, fit_truth;
  FitOptions fit_opts;
  bool fit_zero_bias = false;
  double fit_noise_sigma = 0.0;
  fit->add_option("samples", fit_samples, "Sample file")->required();
  add_fit_options(fit, fit_opts);
  fit->add_flag("--zero-bias-noisy", fit_zero_bias,
                "Use the moment estimator for zero-bias models with known noise");
  fit->add_option("--noise-sigma", fit_noise_sigma,
                  "Known noise level for --zero-bias-noisy");
  fit->add_option("--truth", fit_truth, "Ground-truth model file; prints metrics when given");
  fit->add_option("--out", fit_out, "Estimate file to write")->required();

  // fit2
  auto* fit2 = app.add_subcommand("fit2", "Recover a two-layer model via anchor extraction");
  std::string fit2_samples, fit2_out;
  FitOptions fit2_opts;
  Eigen::Index fit2_p = 0;
  double fit2_tol = 1e-6;
  fit2->add_option("samples", fit2_samples, "Sample file")->required();
  fit2->add_option("--p", fit2_p, "Expected anchor count (0 = accept whatever is found)");
  fit2->add_option("--tol", fit2_tol, "Dedup and cone-membership tolerance");
  add_fit_options(fit2, fit2_opts);
  fit2->add_option("--out", fit2_out, "Estimate file to write (anchors go next to it)")
      ->required();

  // eval
  auto* eval = app.add_subcommand("eval", "Compare an estimate file against a truth model");
  std::string eval_estimate, eval_truth;
  eval->add_option("estimate", eval_estimate, "Estimate file")->required();
  eval->add_option("--truth", eval_truth, "Ground-truth model file")->required();

  // experiment
  auto* experiment = app.add_subcommand("experiment", "Run a sweep from a config file");
  std::string experiment_config, experiment_out;
  experiment->add_option("--config", experiment_config, "Experiment config JSON")->required();
  experiment->add_option("--out", experiment_out, "CSV path (overrides the config)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      return app.exit(e);  // --help
    }
    app.exit(e);
    return kExitUsage;
  }

  if (gen->parsed()) {
    if (gen_dim < 1) {
      throw UsageError("--dim must be positive");
    }
    RandomStream stream(gen_seed);
    GenerativeModel model = make_random_model(
        gen_dim, gen_latent > 0 ? gen_latent : gen_dim, gen_kappa,
        parse_bias_mode(gen_bias_mode), gen_eta, stream);
    model.noise_sigma = gen_noise;
    if (gen_outer_dim > 0) {
      Matrix outer(gen_outer_dim, gen_dim);
      for (Eigen::Index r = 0; r < gen_outer_dim; ++r) {
        for (Eigen::Index c = 0; c < gen_dim; ++c) {
          outer(r, c) = standard_normal(stream);
        }
      }
      model.outer = outer;
    }
    save_model(model, gen_out);
    std::cout << "wrote " << gen_out << " (d=" << model.dim() << ", k=" << model.latent_dim()
              << ")\n";
    return kExitOk;
  }

  if (sample->parsed()) {
    if (sample_n < 1) {
      throw UsageError("--n must be positive");
    }
    const GenerativeModel model = load_model(sample_model);
    RandomStream stream(sample_seed);
    const SampleMatrix samples = model.outer ? sample_two_layer(model, sample_n, stream)
                                             : sample_one_layer(model, sample_n, stream);
    SampleMatrix tagged = samples;
    tagged.seed = sample_seed;
    save_samples(tagged, sample_out);
    std::cout << "n=" << samples.count() << " d=" << samples.dim()
              << " zero_fraction=" << format_metric(zero_fraction(samples)) << '\n';
    return kExitOk;
  }

  if (fit->parsed()) {
    const SampleMatrix samples = load_samples(fit_samples);
    FitResult result;
    if (fit_zero_bias) {
      result = fit_zero_bias_noisy(samples, fit_noise_sigma);
    } else {
      if (samples.data.minCoeff() < 0.0) {
        throw UsageError(
            "sample file has negative entries; the estimator needs non-negative "
            "observations (use --zero-bias-noisy for noisy zero-bias data)");
      }
      RandomStream stream(fit_opts.seed);
      result = fit_one_layer(samples, fit_opts.to_sgd(), stream);
    }
    save_estimate(result.model, result.diagnostics, fit_out);
    if (!fit_truth.empty()) {
      print_metrics_line(result.model, load_model(fit_truth));
    }
    return kExitOk;
  }

  if (fit2->parsed()) {
    const SampleMatrix samples = load_samples(fit2_samples);
    RandomStream stream(fit2_opts.seed);
    TwoLayerTolerances tols;
    tols.dedup = fit2_tol;
    tols.membership = fit2_tol;
    const std::optional<Eigen::Index> expected =
        fit2_p > 0 ? std::optional<Eigen::Index>(fit2_p) : std::nullopt;
    const TwoLayerFit result =
        fit_two_layer(samples, fit2_opts.to_sgd(), tols, stream, expected);
    save_estimate(result.fit.model, result.fit.diagnostics, fit2_out);
    const std::string ahat_path = ahat_path_for(fit2_out);
    save_matrix(result.a_hat, ahat_path);
    std::cout << "anchors=" << result.a_hat.cols()
              << " flagged_negative_latents=" << result.flagged_negative_latents << '\n'
              << "wrote " << fit2_out << " and " << ahat_path << '\n';
    return kExitOk;
  }

  if (eval->parsed()) {
    const EstimatedModel estimate = load_estimate(eval_estimate);
    const GenerativeModel truth = load_model(eval_truth);
    print_metrics_line(estimate, truth);
    return kExitOk;
  }

  if (experiment->parsed()) {
    ExperimentConfig cfg = load_experiment_config(experiment_config);
    if (!experiment_out.empty()) {
      cfg.out = experiment_out;
    }
    const std::vector<ExperimentRow> rows = run_experiment(cfg);
    const std::string csv = to_csv(rows);
    if (cfg.out.empty()) {
      std::cout << csv;
    } else {
      std::ofstream out(cfg.out);
      if (!out) {
        throw UsageError("cannot write " + cfg.out);
      }
      out << csv;
      std::cout << "wrote " << rows.size() << " rows to " << cfg.out << '\n';
    }
    return kExitOk;
  }

  return kExitUsage;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::runtime_error& e) {
    // Missing or malformed files are usage problems; estimation failures are not.
    const std::string what = e.what();
    std::cerr << "error: " << what << '\n';
    if (what.find("cannot open") != std::string::npos ||
        what.find("malformed") != std::string::npos ||
        what.find("not a sample file") != std::string::npos) {
      return kExitUsage;
    }
    return kExitEstimationFailure;
  }
}
