#include <cstdio>
#include <string>

#include "CLI11.hpp"
#include "commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Kernel regression with explicit and early-stopping regularization"};
  app.require_subcommand(1);

  kernelflow::cli::FitOptions fit;
  std::string fit_reg;
  CLI::App* fit_cmd = app.add_subcommand("fit", "Fit one model and write artifacts");
  fit_cmd->add_option("--synth", fit.synth, "Synthetic generator: sin or peak");
  fit_cmd->add_option("--data", fit.data_path, "CSV input path");
  fit_cmd->add_option("--target", fit.target_column, "Response column for --data");
  fit_cmd->add_option("--kernel", fit.kernel,
                      "gaussian|matern12|matern32|matern52|cauchy");
  auto* method_opt = fit_cmd->add_option("--method", fit.method,
                                         "krr|kgf|kgd|ksgd|kcd|kegd|kl1r|klinfr");
  std::string fit_penalty;
  auto* penalty_opt = fit_cmd->add_option(
      "--penalty", fit_penalty, "l1|linf (shorthand for --method kl1r/klinfr)");
  penalty_opt->excludes(method_opt);
  auto* bw_opt = fit_cmd->add_option("--bandwidth", fit.bandwidth, "Kernel bandwidth");
  auto* cv_opt = fit_cmd->add_flag("--cv", fit.use_cv, "Select hyperparameters by CV");
  bw_opt->excludes(cv_opt);
  auto* reg_opt = fit_cmd->add_option(
      "--reg", fit_reg, "Regularization (lambda or time; t=0.5 also accepted)");
  double fit_lambda = -1.0;
  auto* lambda_opt =
      fit_cmd->add_option("--lambda", fit_lambda, "Penalty strength (alias of --reg)");
  lambda_opt->excludes(reg_opt);
  fit_cmd->add_flag("--early-stop", fit.early_stop, "Select stopping time on validation data");
  fit_cmd->add_option("--seed", fit.seed, "Random seed");
  fit_cmd->add_option("--n", fit.n, "Synthetic sample size");
  fit_cmd->add_option("--subsample", fit.subsample, "Rows to subsample from --data");
  fit_cmd->add_flag("--inject-outliers", fit.add_outliers,
                    "Multiply y by (1 + |Cauchy(0, 0.01)|)");
  fit_cmd->add_option("--grid", fit.grid, "CV grid points per axis");
  fit_cmd->add_flag("--paper-grid", fit.paper_grid, "Use the full 50x50 CV grid");
  fit_cmd->add_option("--jitter", fit.jitter, "Diagonal jitter for the Gram matrix");
  fit_cmd->add_option("--out", fit.out_dir, "Output directory");
  fit_cmd->add_option("--path-csv", fit.path_csv, "Write the solution path CSV here");
  fit_cmd->add_option("--cv-csv", fit.cv_csv, "Write the CV table CSV here");

  kernelflow::cli::CompareOptions compare;
  CLI::App* compare_cmd =
      app.add_subcommand("compare", "Run the seeded method-comparison experiment");
  compare_cmd->add_option("--synth", compare.synth, "Synthetic generator: sin or peak");
  compare_cmd->add_option("--data", compare.data_path, "CSV input path");
  compare_cmd->add_option("--target", compare.target_column, "Response column for --data");
  compare_cmd->add_option("--methods", compare.methods, "Methods to compare")
      ->delimiter(',')
      ->required();
  compare_cmd->add_option("--kernel", compare.kernel,
                          "gaussian|matern12|matern32|matern52|cauchy");
  compare_cmd->add_option("--splits", compare.splits, "Number of random splits");
  compare_cmd->add_option("--n", compare.n, "Synthetic sample size");
  compare_cmd->add_option("--seed", compare.seed, "Random seed");
  compare_cmd->add_option("--grid", compare.grid, "CV grid points per axis");
  compare_cmd->add_flag("--paper-grid", compare.paper_grid, "Use the full 50x50 CV grid");
  compare_cmd->add_flag("--inject-outliers", compare.add_outliers,
                        "Multiply y by (1 + |Cauchy(0, 0.01)|)");
  compare_cmd->add_option("--subsample", compare.subsample, "Rows per split for --data");
  compare_cmd->add_option("--out", compare.out_dir, "Write report.json/report.txt here");
  compare_cmd->add_option("--json", compare.json_path, "Write the JSON report here");

  kernelflow::cli::VerifyOptions verify;
  CLI::App* verify_cmd =
      app.add_subcommand("verify", "Numerically certify the theoretical bounds");
  verify_cmd->add_option("--prop", verify.props, "1|2|3|4|5|6|8|all")->delimiter(',');
  verify_cmd->add_option("--instances", verify.instances, "Random instances per check");
  verify_cmd->add_option("--seed", verify.seed, "Random seed");
  verify_cmd->add_option("--json", verify.json_path, "Write the JSON report here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return e.get_exit_code() == 0 ? 0 : 2;
  }

  if (fit_cmd->parsed()) {
    if (!fit_penalty.empty()) {
      if (fit_penalty == "l1") {
        fit.method = "kl1r";
      } else if (fit_penalty == "linf") {
        fit.method = "klinfr";
      } else {
        std::fprintf(stderr, "error: --penalty must be l1 or linf\n");
        return 2;
      }
    }
    if (fit_lambda >= 0.0) fit.reg = fit_lambda;
    if (!fit_reg.empty()) {
      try {
        const auto eq = fit_reg.find('=');
        fit.reg = std::stod(eq == std::string::npos ? fit_reg : fit_reg.substr(eq + 1));
      } catch (const std::exception&) {
        std::fprintf(stderr, "error: cannot parse --reg value '%s'\n", fit_reg.c_str());
        return 2;
      }
      if (fit.reg < 0.0) {
        std::fprintf(stderr, "error: --reg must be nonnegative\n");
        return 2;
      }
    }
    return kernelflow::cli::cmd_fit(fit);
  }
  if (compare_cmd->parsed()) return kernelflow::cli::cmd_compare(compare);
  if (verify_cmd->parsed()) return kernelflow::cli::cmd_verify(verify);
  return 2;
}
