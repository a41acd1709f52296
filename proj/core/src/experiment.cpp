#include "kernelflow/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "kernelflow/data.hpp"
#include "kernelflow/errors.hpp"
#include "kernelflow/estimators.hpp"
#include "kernelflow/parallel.hpp"
#include "kernelflow/selection.hpp"
#include "kernelflow/spectral.hpp"

namespace kernelflow {

namespace {

bool is_iterative(MethodKind m) {
  return m == MethodKind::kgd || m == MethodKind::ksgd || m == MethodKind::kcd ||
         m == MethodKind::kegd;
}

struct SplitData {
  Dataset train;            // standardized
  Eigen::MatrixXd X_test;   // standardized features
  Eigen::VectorXd y_test;   // standardized target (noiseless signal for synthetic)
};

SplitData prepare_split(const ExperimentConfig& config, std::uint64_t seed) {
  SplitData out;
  if (config.source == ExperimentConfig::Source::csv) {
    Dataset full = load_csv(config.csv_path, config.target_column);
    if (config.subsample_rows > 0) {
      full = subsample(full, config.subsample_rows, seed);
    }
    if (config.add_outliers) full.y = inject_outliers(full.y, seed + 1);
    auto [train, test] = split(full, 0.8, seed + 2);
    out.train = standardize(train);
    const StandardizationParams& p = *out.train.meta.standardization;
    out.X_test = standardize_inputs(test.X, p);
    out.y_test = (test.y.array() - p.y_mean) / p.y_sd;
    return out;
  }

  const bool sin = config.source == ExperimentConfig::Source::sin;
  Dataset train = sin ? gen_sin_cauchy(config.n, seed)
                      : gen_gauss_peak(config.n, seed);
  if (config.add_outliers) train.y = inject_outliers(train.y, seed + 1);
  out.train = standardize(train);
  const StandardizationParams& p = *out.train.meta.standardization;

  // Fresh test inputs with the noiseless generator signal as target.
  RandomStream stream = RandomStream(seed).split(7);
  out.X_test.resize(config.test_n, 1);
  out.y_test.resize(config.test_n);
  for (int i = 0; i < config.test_n; ++i) {
    const double x = -10.0 + 20.0 * stream.next_uniform();
    out.X_test(i, 0) = (x - p.x_mean[0]) / p.x_sd[0];
    out.y_test[i] = ((sin ? sin_signal(x) : peak_signal(x)) - p.y_mean) / p.y_sd;
  }
  return out;
}

DescentConfig descent_config(const ExperimentConfig& config, MethodKind method,
                             double s_max) {
  DescentConfig dc;
  switch (method) {
    case MethodKind::kgd:
      dc.method = DescentMethod::kgd;
      dc.step_size = 0.5 / s_max;
      dc.max_steps = config.kgd_max_steps;
      dc.checkpoint_stride = 10;
      break;
    case MethodKind::ksgd:
      dc.method = DescentMethod::ksgd;
      dc.step_size = config.sign_step;
      dc.max_steps = config.sign_max_steps;
      dc.checkpoint_stride = 50;
      break;
    case MethodKind::kcd:
      dc.method = DescentMethod::kcd;
      dc.step_size = config.sign_step;
      dc.max_steps = 2 * config.sign_max_steps;
      dc.checkpoint_stride = 50;
      break;
    case MethodKind::kegd:
      dc.method = DescentMethod::kegd;
      dc.step_size = config.sign_step;
      dc.momentum = config.kegd_momentum;
      dc.elastic_mix = config.kegd_mix;
      dc.max_steps = config.sign_max_steps;
      dc.checkpoint_stride = 50;
      break;
    default:
      throw input_error("descent_config: not an iterative method");
  }
  return dc;
}

// Early-stopping methods: bandwidth by k-fold CV where each fold contributes
// its best validation MSE along the path, stopping time as the median of the
// per-fold optima, final path refit on the full training data.
MethodFit fit_iterative(const ExperimentConfig& config, MethodKind method,
                        const Dataset& train,
                        const std::vector<double>& bandwidths,
                        std::uint64_t seed) {
  const Eigen::Index n = train.size();
  const int folds = config.es_folds;
  if (n < folds) throw input_error("fit_iterative: fold would have < 1 observation");

  RandomStream stream = RandomStream(seed + 3).split(11);
  std::vector<Eigen::Index> perm(n);
  std::iota(perm.begin(), perm.end(), Eigen::Index{0});
  for (Eigen::Index i = n - 1; i > 0; --i) {
    const auto j = static_cast<Eigen::Index>(stream.next_u64() %
                                             static_cast<std::uint64_t>(i + 1));
    std::swap(perm[i], perm[j]);
  }

  double best_score = 0.0;
  double best_bandwidth = bandwidths.front();
  double best_time = 0.0;
  bool first = true;
  for (double bw : bandwidths) {
    KernelSpec spec(config.family, bw);
    double score = 0.0;
    std::vector<double> stop_times;
    for (int fold = 0; fold < folds; ++fold) {
      const Eigen::Index lo = fold * n / folds;
      const Eigen::Index hi = (fold + 1) * n / folds;
      const Eigen::Index n_val = hi - lo;
      Eigen::MatrixXd X_fit(n - n_val, train.X.cols()), X_val(n_val, train.X.cols());
      Eigen::VectorXd y_fit(n - n_val), y_val(n_val);
      Eigen::Index it = 0, iv = 0;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (i >= lo && i < hi) {
          X_val.row(iv) = train.X.row(perm[i]);
          y_val[iv++] = train.y[perm[i]];
        } else {
          X_fit.row(it) = train.X.row(perm[i]);
          y_fit[it++] = train.y[perm[i]];
        }
      }
      const KernelMatrix K = kernel_matrix(spec, X_fit, config.jitter);
      const double s_max = eig_sym(K).eigenvalues.maxCoeff();
      const SolutionPath path =
          run_descent(K, y_fit, descent_config(config, method, s_max));
      const CrossKernelMatrix K_val = cross_kernel_matrix(spec, X_val, X_fit);
      const EarlyStopChoice choice = early_stop_select(path, K_val, y_val);
      score += choice.mse;
      stop_times.push_back(choice.time);
    }
    score /= folds;
    if (first || score < best_score) {
      best_score = score;
      best_bandwidth = bw;
      best_time = quantile(stop_times, 0.5);
      first = false;
    }
  }

  KernelSpec spec(config.family, best_bandwidth);
  const KernelMatrix K = kernel_matrix(spec, train.X, config.jitter);
  const double s_max = eig_sym(K).eigenvalues.maxCoeff();
  DescentConfig dc = descent_config(config, method, s_max);
  dc.record_times = {best_time};
  const SolutionPath path = run_descent(K, train.y, dc);

  MethodFit fit;
  fit.alpha = path.alpha_at(best_time);
  fit.bandwidth = best_bandwidth;
  fit.reg = best_time;
  return fit;
}

MethodFit fit_explicit(const ExperimentConfig& config, MethodKind method,
                       const Dataset& train, const GridSpec& grid,
                       std::uint64_t seed) {
  CvEstimator estimator;
  switch (method) {
    case MethodKind::krr:
      estimator = cv_estimator_krr(config.family, config.jitter);
      break;
    case MethodKind::kgf:
      estimator = cv_estimator_kgf(config.family, config.jitter);
      break;
    case MethodKind::kl1r:
      estimator = cv_estimator_prox(config.family, Penalty::l1, config.jitter);
      break;
    case MethodKind::klinfr:
      estimator = cv_estimator_prox(config.family, Penalty::linf, config.jitter);
      break;
    default:
      throw input_error("fit_explicit: not an explicitly regularized method");
  }
  const CvResult cv = kfold_cv(train, estimator, grid, seed + 4);

  KernelSpec spec(config.family, cv.best_bandwidth);
  const KernelMatrix K = kernel_matrix(spec, train.X, config.jitter);
  MethodFit fit;
  if (method == MethodKind::krr) {
    fit.alpha = fit_krr(K, train.y, cv.best_reg, spec).alpha;
  } else if (method == MethodKind::kgf) {
    fit.alpha = fit_kgf(K, train.y, cv.best_reg, 0.0, spec).alpha;
  } else {
    ProxConfig pc;
    pc.penalty = method == MethodKind::kl1r ? Penalty::l1 : Penalty::linf;
    pc.lambda = cv.best_reg;
    pc.max_iter = 100000;
    fit.alpha = fit_prox(K, train.y, pc, std::nullopt, spec).dual.alpha;
  }
  fit.bandwidth = cv.best_bandwidth;
  fit.reg = cv.best_reg;
  return fit;
}

}  // namespace

MethodFit fit_method(const ExperimentConfig& config, MethodKind method,
                     const Dataset& train, std::uint64_t seed,
                     const std::vector<double>& bandwidths) {
  const double med = median_pairwise_distance(train.X);
  const std::vector<double> bw_grid =
      bandwidths.empty()
          ? log_spaced(1e-2 * med, 1e1 * med, config.bandwidth_count)
          : bandwidths;
  if (is_iterative(method)) {
    return fit_iterative(config, method, train, bw_grid, seed);
  }
  GridSpec grid;
  grid.bandwidths = bw_grid;
  grid.regs = method == MethodKind::kgf ? log_spaced(1e-2, 1e6, config.reg_count)
                                        : log_spaced(1e-4, 1e2, config.reg_count);
  grid.folds = config.folds;
  return fit_explicit(config, method, train, grid, seed);
}

std::string method_name(MethodKind method) {
  switch (method) {
    case MethodKind::krr: return "krr";
    case MethodKind::kgf: return "kgf";
    case MethodKind::kgd: return "kgd";
    case MethodKind::ksgd: return "ksgd";
    case MethodKind::kcd: return "kcd";
    case MethodKind::kegd: return "kegd";
    case MethodKind::kl1r: return "kl1r";
    case MethodKind::klinfr: return "klinfr";
  }
  throw input_error("unknown method");
}

MethodKind method_from_string(const std::string& name) {
  if (name == "krr") return MethodKind::krr;
  if (name == "kgf") return MethodKind::kgf;
  if (name == "kgd") return MethodKind::kgd;
  if (name == "ksgd") return MethodKind::ksgd;
  if (name == "kcd") return MethodKind::kcd;
  if (name == "kegd") return MethodKind::kegd;
  if (name == "kl1r") return MethodKind::kl1r;
  if (name == "klinfr") return MethodKind::klinfr;
  throw input_error("unknown method: " + name);
}

double quantile(std::vector<double> values, double p) {
  if (values.empty()) throw input_error("quantile: empty input");
  std::sort(values.begin(), values.end());
  const double pos = p * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = static_cast<std::size_t>(std::ceil(pos));
  const double w = pos - static_cast<double>(lo);
  return values[lo] * (1.0 - w) + values[hi] * w;
}

ExperimentReport run_experiment(const ExperimentConfig& config) {
  if (config.methods.empty()) throw input_error("run_experiment: no methods given");
  if (config.splits < 1) throw input_error("run_experiment: splits must be positive");

  ExperimentReport report;
  report.per_split.assign(config.methods.size(),
                          std::vector<SplitOutcome>(config.splits));
  std::vector<std::vector<double>> seconds(config.methods.size(),
                                           std::vector<double>(config.splits, 0.0));

  parallel_for(static_cast<std::size_t>(config.splits), [&](std::size_t s) {
    const std::uint64_t seed = config.seed + 1000 * s;
    const SplitData data = prepare_split(config, seed);

    for (std::size_t m = 0; m < config.methods.size(); ++m) {
      const MethodKind method = config.methods[m];
      const auto start = std::chrono::steady_clock::now();
      const MethodFit fit = fit_method(config, method, data.train, seed);
      const auto stop = std::chrono::steady_clock::now();
      seconds[m][s] = std::chrono::duration<double>(stop - start).count();

      const KernelSpec spec(config.family, fit.bandwidth);
      SplitOutcome outcome;
      outcome.bandwidth = fit.bandwidth;
      outcome.reg = fit.reg;
      outcome.r2 =
          r2(data.y_test,
             cross_kernel_matrix(spec, data.X_test, data.train.X) * fit.alpha);
      outcome.sparsity = sparsity(fit.alpha);
      report.per_split[m][s] = outcome;
    }
  });

  for (std::size_t m = 0; m < config.methods.size(); ++m) {
    std::vector<double> r2s, sparsities;
    double total_seconds = 0.0;
    for (int s = 0; s < config.splits; ++s) {
      r2s.push_back(report.per_split[m][s].r2);
      sparsities.push_back(report.per_split[m][s].sparsity);
      total_seconds += seconds[m][s];
    }
    MethodSummary summary;
    summary.method = config.methods[m];
    summary.r2_median = quantile(r2s, 0.5);
    summary.r2_q1 = quantile(r2s, 0.25);
    summary.r2_q3 = quantile(r2s, 0.75);
    summary.sparsity_median = quantile(sparsities, 0.5);
    summary.wall_time_s = total_seconds;
    report.rows.push_back(summary);
  }
  return report;
}

}  // namespace kernelflow
