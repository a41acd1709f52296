#include "commands.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#include "json.hpp"
#include "kernelflow/data.hpp"
#include "kernelflow/errors.hpp"
#include "kernelflow/estimators.hpp"
#include "kernelflow/experiment.hpp"
#include "kernelflow/prox.hpp"
#include "kernelflow/selection.hpp"
#include "kernelflow/spectral.hpp"
#include "kernelflow/verify.hpp"

namespace kernelflow::cli {

namespace {

using nlohmann::json;

constexpr int kExitVerifyFailure = 1;
constexpr int kExitUsage = 2;
constexpr int kExitNumeric = 3;

int usage_error(const std::string& message) {
  std::cerr << "error: " << message << "\n";
  return kExitUsage;
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw input_error("cannot write " + path.string());
  out << text;
}

json vector_to_json(const Eigen::VectorXd& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

struct FitArtifacts {
  Eigen::VectorXd alpha;
  Eigen::MatrixXd X_model;  // rows backing alpha (standardized)
  double bandwidth = 0.0;
  json regularizer;
  std::optional<SolutionPath> path;
  std::optional<GridSpec> cv_grid;
  std::optional<CvResult> cv_result;
};

bool is_iterative_name(const std::string& method) {
  return method == "kgd" || method == "ksgd" || method == "kcd" || method == "kegd";
}

DescentConfig descent_config_for(const std::string& method, double s_max,
                                 double max_time) {
  DescentConfig dc;
  dc.method = descent_method_from_string(method);
  if (dc.method == DescentMethod::kgd) {
    dc.step_size = 0.5 / s_max;
    dc.checkpoint_stride = 10;
  } else {
    dc.step_size = 2e-3;
    dc.checkpoint_stride = 50;
    if (dc.method == DescentMethod::kegd) {
      dc.momentum = 0.5;
      dc.elastic_mix = 0.9;
    }
  }
  const double steps = std::ceil(max_time / dc.step_size);
  dc.max_steps = static_cast<std::size_t>(
      std::min(steps, 2e5));
  dc.record_times = {max_time};
  return dc;
}

FitArtifacts fit_iterative_cli(const FitOptions& options, const Dataset& train,
                               const KernelSpec base_spec,
                               const std::vector<double>& bandwidths) {
  FitArtifacts artifacts;

  if (options.early_stop) {
    // Same selection protocol as the comparison experiment: bandwidth by CV
    // with per-fold early stopping, median stopping time, full-train refit.
    ExperimentConfig config;
    config.family = base_spec.family;
    config.jitter = options.jitter;
    config.bandwidth_count = options.paper_grid ? 50 : options.grid;
    const MethodFit fit = fit_method(config, method_from_string(options.method),
                                     train, options.seed, bandwidths);
    artifacts.alpha = fit.alpha;
    artifacts.X_model = train.X;
    artifacts.bandwidth = fit.bandwidth;
    artifacts.regularizer = {{"kind", "early_stop"}, {"time", fit.reg}};

    KernelSpec spec(base_spec.family, fit.bandwidth);
    const KernelMatrix K = kernel_matrix(spec, train.X, options.jitter);
    const double s_max = eig_sym(K).eigenvalues.maxCoeff();
    DescentConfig dc = descent_config_for(options.method, s_max,
                                          std::max(fit.reg, 1e-12));
    dc.record_times = {fit.reg};
    artifacts.path = run_descent(K, train.y, dc);
    return artifacts;
  }

  // Fixed stopping time given via --reg.
  const double time = options.reg;
  double best_mse = 0.0;
  bool first = true;
  const bool select_bandwidth = bandwidths.size() > 1;
  for (double bw : bandwidths) {
    KernelSpec spec(base_spec.family, bw);
    Dataset fit_part = train;
    std::optional<Dataset> val_part;
    if (select_bandwidth) {
      auto parts = split(train, 0.8, options.seed + 3);
      fit_part = parts.first;
      val_part = parts.second;
    }
    const KernelMatrix K = kernel_matrix(spec, fit_part.X, options.jitter);
    const double s_max = eig_sym(K).eigenvalues.maxCoeff();
    DescentConfig dc = descent_config_for(options.method, s_max,
                                          std::max(time, 1e-12));
    const SolutionPath path = run_descent(K, fit_part.y, dc);
    const Eigen::VectorXd alpha = path.alpha_at(time);
    double mse = 0.0;
    if (val_part) {
      const CrossKernelMatrix K_val =
          cross_kernel_matrix(spec, val_part->X, fit_part.X);
      mse = (K_val * alpha - val_part->y).squaredNorm() /
            static_cast<double>(val_part->y.size());
    }
    if (first || mse < best_mse) {
      best_mse = mse;
      artifacts.alpha = alpha;
      artifacts.X_model = fit_part.X;
      artifacts.bandwidth = bw;
      artifacts.regularizer = {{"kind", "time"}, {"time", time}};
      artifacts.path = path;
      first = false;
    }
  }
  return artifacts;
}

FitArtifacts fit_explicit_cli(const FitOptions& options, const Dataset& train,
                              const KernelSpec base_spec,
                              const std::vector<double>& bandwidths) {
  FitArtifacts artifacts;
  const bool ridge_like = options.method == "krr";
  const bool flow = options.method == "kgf";
  const Penalty penalty = options.method == "kl1r" ? Penalty::l1 : Penalty::linf;

  double bandwidth = bandwidths.front();
  double reg = options.reg;
  if (options.use_cv) {
    GridSpec grid = make_grid(train.X, options.paper_grid ? 50 : options.grid,
                              options.paper_grid ? 50 : options.grid,
                              flow ? RegKind::flow_time : RegKind::ridge_lambda);
    if (options.bandwidth > 0.0) grid.bandwidths = {options.bandwidth};
    if (options.reg >= 0.0) grid.regs = {options.reg};
    CvEstimator estimator;
    if (ridge_like) {
      estimator = cv_estimator_krr(base_spec.family, options.jitter);
    } else if (flow) {
      estimator = cv_estimator_kgf(base_spec.family, options.jitter);
    } else {
      estimator = cv_estimator_prox(base_spec.family, penalty, options.jitter);
    }
    const CvResult cv = kfold_cv(train, estimator, grid, options.seed + 4);
    bandwidth = cv.best_bandwidth;
    reg = cv.best_reg;
    artifacts.cv_grid = grid;
    artifacts.cv_result = cv;
  }

  KernelSpec spec(base_spec.family, bandwidth);
  const KernelMatrix K = kernel_matrix(spec, train.X, options.jitter);
  if (ridge_like) {
    artifacts.alpha = fit_krr(K, train.y, reg, spec).alpha;
    artifacts.regularizer = {{"kind", "ridge"}, {"lambda", reg}};
  } else if (flow) {
    artifacts.alpha = fit_kgf(K, train.y, reg, 0.0, spec).alpha;
    artifacts.regularizer = {{"kind", "flow_time"}, {"time", reg}};
  } else {
    ProxConfig pc;
    pc.penalty = penalty;
    pc.lambda = reg;
    pc.max_iter = 200000;
    const ProxFit fit = fit_prox(K, train.y, pc, std::nullopt, spec);
    artifacts.alpha = fit.dual.alpha;
    artifacts.regularizer = {{"kind", penalty == Penalty::l1 ? "l1" : "linf"},
                             {"lambda", reg},
                             {"converged", fit.converged}};
  }
  artifacts.bandwidth = bandwidth;
  artifacts.X_model = train.X;
  return artifacts;
}

std::string render_text_table(const ExperimentReport& report) {
  std::ostringstream os;
  os << std::left << std::setw(8) << "method" << std::right << std::setw(10)
     << "r2_med" << std::setw(10) << "r2_q1" << std::setw(10) << "r2_q3"
     << std::setw(12) << "sparsity" << std::setw(12) << "time_s" << "\n";
  os << std::string(62, '-') << "\n";
  os << std::fixed << std::setprecision(3);
  for (const MethodSummary& row : report.rows) {
    os << std::left << std::setw(8) << method_name(row.method) << std::right
       << std::setw(10) << row.r2_median << std::setw(10) << row.r2_q1
       << std::setw(10) << row.r2_q3 << std::setw(12) << row.sparsity_median
       << std::setw(12) << row.wall_time_s << "\n";
  }
  return os.str();
}

// Deterministic report: wall time stays out of the JSON (it goes to the text
// table), so identical flags reproduce byte-identical files.
json report_to_json(const CompareOptions& options, const ExperimentReport& report) {
  json config;
  config["source"] = options.data_path.empty() ? options.synth : options.data_path;
  config["kernel"] = options.kernel;
  config["splits"] = options.splits;
  config["n"] = options.n;
  config["seed"] = options.seed;
  config["grid"] = {{"bandwidth_count", options.paper_grid ? 50 : options.grid},
                    {"reg_count", options.paper_grid ? 50 : options.grid},
                    {"folds", 10}};
  config["outliers"] = options.add_outliers;
  json methods = json::array();
  for (const MethodSummary& row : report.rows) {
    methods.push_back({{"method", method_name(row.method)},
                       {"r2_median", row.r2_median},
                       {"r2_q1", row.r2_q1},
                       {"r2_q3", row.r2_q3},
                       {"sparsity_median", row.sparsity_median}});
  }
  return json{{"config", config}, {"methods", methods}};
}

}  // namespace

int cmd_fit(const FitOptions& options) {
  if (options.reg >= 0.0 && options.early_stop) {
    return usage_error("--reg conflicts with --early-stop");
  }
  if (options.bandwidth > 0.0 && options.use_cv && is_iterative_name(options.method)) {
    return usage_error("--bandwidth conflicts with --cv");
  }
  if (options.synth.empty() == options.data_path.empty()) {
    return usage_error("exactly one of --synth or --data is required");
  }
  const bool iterative = is_iterative_name(options.method);
  if (iterative && !options.early_stop && options.reg < 0.0) {
    return usage_error("iterative methods need --reg <time> or --early-stop");
  }
  if (!iterative && options.early_stop) {
    return usage_error("--early-stop requires an iterative method");
  }
  if (!iterative && options.reg < 0.0 && !options.use_cv) {
    return usage_error(options.method + " needs --reg <value> or --cv");
  }
  if (options.bandwidth <= 0.0 && !options.use_cv) {
    return usage_error("need --bandwidth <sigma> or --cv");
  }

  try {
    Dataset raw;
    if (!options.synth.empty()) {
      if (options.synth == "sin") {
        raw = gen_sin_cauchy(options.n, options.seed);
      } else if (options.synth == "peak") {
        raw = gen_gauss_peak(options.n, options.seed);
      } else {
        return usage_error("--synth must be sin or peak");
      }
    } else {
      raw = load_csv(options.data_path, options.target_column);
      if (options.subsample > 0) raw = subsample(raw, options.subsample, options.seed);
    }
    if (options.add_outliers) raw.y = inject_outliers(raw.y, options.seed + 1);

    auto [train_raw, test_raw] = split(raw, 0.8, options.seed + 2);
    const Dataset train = standardize(train_raw);
    const StandardizationParams& params = *train.meta.standardization;
    const Eigen::MatrixXd X_test = standardize_inputs(test_raw.X, params);

    const KernelSpec base_spec(family_from_string(options.kernel), 1.0);
    std::vector<double> bandwidths;
    if (options.bandwidth > 0.0) {
      bandwidths = {options.bandwidth};
    } else {
      bandwidths = make_grid(train.X, options.paper_grid ? 50 : options.grid, 2,
                             RegKind::ridge_lambda)
                       .bandwidths;
    }

    const FitArtifacts artifacts =
        iterative ? fit_iterative_cli(options, train, base_spec, bandwidths)
                  : fit_explicit_cli(options, train, base_spec, bandwidths);

    const KernelSpec spec(base_spec.family, artifacts.bandwidth);
    const Eigen::VectorXd pred_std =
        cross_kernel_matrix(spec, X_test, artifacts.X_model) * artifacts.alpha;
    const Eigen::VectorXd pred = destandardize_predictions(pred_std, params);

    const double test_r2 = r2(test_raw.y, pred);
    const double model_sparsity = sparsity(artifacts.alpha);

    std::filesystem::create_directories(options.out_dir);
    const std::filesystem::path out(options.out_dir);

    json model;
    model["method"] = options.method;
    model["kernel"] = {{"family", family_name(spec.family)},
                       {"bandwidth", artifacts.bandwidth}};
    model["regularizer"] = artifacts.regularizer;
    model["seed"] = options.seed;
    model["alpha"] = vector_to_json(artifacts.alpha);
    write_text_file(out / "model.json", model.dump(2) + "\n");

    {
      std::ofstream csv(out / "predictions.csv");
      csv << std::setprecision(17);
      for (Eigen::Index j = 0; j < test_raw.X.cols(); ++j) csv << "x" << j << ",";
      csv << "y_true,y_pred\n";
      for (Eigen::Index i = 0; i < X_test.rows(); ++i) {
        for (Eigen::Index j = 0; j < test_raw.X.cols(); ++j) {
          csv << test_raw.X(i, j) << ",";
        }
        csv << test_raw.y[i] << "," << pred[i] << "\n";
      }
    }

    json metrics;
    metrics["r2"] = test_r2;
    metrics["sparsity"] = model_sparsity;
    write_text_file(out / "metrics.json", metrics.dump(2) + "\n");

    if (!options.path_csv.empty() && artifacts.path) {
      std::ofstream csv(options.path_csv);
      write_path_csv(*artifacts.path, csv);
    }
    if (!options.cv_csv.empty() && artifacts.cv_grid) {
      std::ofstream csv(options.cv_csv);
      write_cv_table_csv(*artifacts.cv_grid, *artifacts.cv_result, csv);
    }
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumeric;
  }
}

int cmd_compare(const CompareOptions& options) {
  if (options.methods.empty()) return usage_error("--methods must be nonempty");

  ExperimentConfig config;
  try {
    if (!options.data_path.empty()) {
      config.source = ExperimentConfig::Source::csv;
      config.csv_path = options.data_path;
      config.target_column = options.target_column;
      config.subsample_rows = options.subsample;
    } else if (options.synth == "sin") {
      config.source = ExperimentConfig::Source::sin;
    } else if (options.synth == "peak") {
      config.source = ExperimentConfig::Source::peak;
    } else {
      return usage_error("--synth must be sin or peak");
    }
    for (const std::string& m : options.methods) {
      config.methods.push_back(method_from_string(m));
    }
    config.family = family_from_string(options.kernel);
  } catch (const input_error& e) {
    return usage_error(e.what());
  }
  config.splits = options.splits;
  config.n = options.n;
  config.seed = options.seed;
  config.bandwidth_count = options.paper_grid ? 50 : options.grid;
  config.reg_count = options.paper_grid ? 50 : options.grid;
  config.add_outliers = options.add_outliers;

  try {
    const ExperimentReport report = run_experiment(config);
    const std::string table = render_text_table(report);
    const std::string json_text = report_to_json(options, report).dump(2) + "\n";
    std::cout << table;
    if (!options.out_dir.empty()) {
      std::filesystem::create_directories(options.out_dir);
      write_text_file(std::filesystem::path(options.out_dir) / "report.json", json_text);
      write_text_file(std::filesystem::path(options.out_dir) / "report.txt", table);
    }
    if (!options.json_path.empty()) write_text_file(options.json_path, json_text);
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumeric;
  }
}

int cmd_verify(const VerifyOptions& options) {
  std::vector<int> props;
  for (const std::string& p : options.props) {
    if (p == "all") {
      props = {1, 2, 3, 4, 5, 6, 8};
      break;
    }
    int value = 0;
    try {
      value = std::stoi(p);
    } catch (const std::exception&) {
      return usage_error("bad --prop value: " + p);
    }
    if (value != 1 && value != 2 && value != 3 && value != 4 && value != 5 &&
        value != 6 && value != 8) {
      return usage_error("no such proposition check: " + p);
    }
    props.push_back(value);
  }
  if (options.instances < 1) return usage_error("--instances must be positive");

  try {
    const std::vector<PropositionReport> reports =
        run_verification(props, options.instances, options.seed);
    bool all_pass = true;
    json body = json::array();
    for (const PropositionReport& r : reports) {
      all_pass = all_pass && r.pass;
      json entry = {{"proposition", r.proposition},
                    {"instances", r.instances},
                    {"max_ratio", r.max_ratio},
                    {"pass", r.pass},
                    {"worst", r.worst}};
      if (!r.note.empty()) entry["note"] = r.note;
      body.push_back(entry);
    }
    const json doc = {{"seed", options.seed},
                      {"instances", options.instances},
                      {"propositions", body},
                      {"pass", all_pass}};
    const std::string text = doc.dump(2) + "\n";
    if (options.json_path.empty()) {
      std::cout << text;
    } else {
      write_text_file(options.json_path, text);
    }
    return all_pass ? 0 : kExitVerifyFailure;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumeric;
  }
}

}  // namespace kernelflow::cli
