#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "kernelflow/data.hpp"
#include "kernelflow/kernels.hpp"

namespace kernelflow {

enum class MethodKind { krr, kgf, kgd, ksgd, kcd, kegd, kl1r, klinfr };

std::string method_name(MethodKind method);
MethodKind method_from_string(const std::string& name);

/// Seeded benchmark loop: per split, draw/split data, select hyperparameters
/// (k-fold CV for the explicitly regularized methods, validation-holdout early
/// stopping for the iterative ones), fit, and score on held-out data.
///
/// Synthetic sources score predictions against the noiseless generator signal
/// on a fresh test sample; CSV sources score against observed y on a held-out
/// 20% split.
struct ExperimentConfig {
  enum class Source { sin, peak, csv };

  Source source = Source::sin;
  std::string csv_path;
  std::string target_column;

  std::vector<MethodKind> methods;
  int n = 100;      // synthetic training sample size
  int test_n = 200; // synthetic test sample size
  int splits = 20;
  std::uint64_t seed = 1;

  KernelFamily family = KernelFamily::gaussian;
  int bandwidth_count = 10;
  int reg_count = 10;
  int folds = 10;     // k-fold CV of the explicitly regularized methods
  int es_folds = 5;   // bandwidth CV folds for the early-stopping methods
  double jitter = 1e-10;

  bool add_outliers = false;  // multiply y by (1 + |Cauchy(0, 0.01)|)
  int subsample_rows = 0;     // csv only; 0 keeps all rows

  // Iterative-solver knobs (desk-scale defaults).
  double sign_step = 2e-3;
  std::size_t sign_max_steps = 30000;
  std::size_t kgd_max_steps = 4000;
  double kegd_mix = 0.9;
  double kegd_momentum = 0.5;
};

struct SplitOutcome {
  double r2 = 0.0;
  double sparsity = 0.0;
  double bandwidth = 0.0;
  double reg = 0.0;  // lambda or selected stopping time
};

struct MethodSummary {
  MethodKind method = MethodKind::krr;
  double r2_median = 0.0, r2_q1 = 0.0, r2_q3 = 0.0;
  double sparsity_median = 0.0;
  double wall_time_s = 0.0;  // total fitting time across splits
};

struct ExperimentReport {
  std::vector<MethodSummary> rows;
  std::vector<std::vector<SplitOutcome>> per_split;  // [method][split]
};

ExperimentReport run_experiment(const ExperimentConfig& config);

/// One method fitted on a training set with its hyperparameters selected the
/// way the experiment loop selects them: k-fold CV over (bandwidth, reg) for
/// the explicitly regularized methods; bandwidth CV with per-fold early
/// stopping, median stopping time, and a full-train refit for the iterative
/// ones. `bandwidths` overrides the derived bandwidth grid when nonempty.
struct MethodFit {
  Eigen::VectorXd alpha;
  double bandwidth = 0.0;
  double reg = 0.0;  // lambda or stopping time
};
MethodFit fit_method(const ExperimentConfig& config, MethodKind method,
                     const Dataset& train, std::uint64_t seed,
                     const std::vector<double>& bandwidths = {});

/// Linear-interpolation quantile of a copy of `values` (p in [0, 1]).
double quantile(std::vector<double> values, double p);

}  // namespace kernelflow
