#pragma once

#include <Eigen/Core>
#include <functional>
#include <iosfwd>
#include <memory>
#include <vector>

#include "kernelflow/data.hpp"
#include "kernelflow/descent.hpp"
#include "kernelflow/kernels.hpp"
#include "kernelflow/prox.hpp"

namespace kernelflow {

std::vector<double> log_spaced(double lo, double hi, int count);

/// Cross-validation grid: log-spaced bandwidths and regularization values.
struct GridSpec {
  std::vector<double> bandwidths;
  std::vector<double> regs;
  int folds = 10;
};

enum class RegKind { ridge_lambda, flow_time, prox_lambda };

/// Bandwidth bounds anchored at the median pairwise distance of X,
/// regularization bounds by kind: lambda in [1e-6, 1e2], t in [1e-2, 1e6].
GridSpec make_grid(const Eigen::MatrixXd& X, int n_bandwidths, int n_regs,
                   RegKind kind, int folds = 10);

/// Two-stage estimator for CV: `prepare` runs once per (fold, bandwidth) and
/// may cache factorizations; `predict_val` is then called per regularization
/// value, in descending order so warm-start contexts stay valid.
struct CvEstimator {
  using Context = std::shared_ptr<void>;
  std::function<Context(const Eigen::MatrixXd& X_train, const Eigen::VectorXd& y_train,
                        const Eigen::MatrixXd& X_val, double bandwidth)>
      prepare;
  std::function<Eigen::VectorXd(const Context&, double reg)> predict_val;
};

CvEstimator cv_estimator_krr(KernelFamily family, double jitter = 1e-10);
CvEstimator cv_estimator_kgf(KernelFamily family, double jitter = 1e-10);
CvEstimator cv_estimator_prox(KernelFamily family, Penalty penalty,
                              double jitter = 1e-10);

struct CvResult {
  double best_bandwidth = 0.0;
  double best_reg = 0.0;
  double best_mse = 0.0;
  Eigen::MatrixXd mean_mse;  // bandwidths x regs
  Eigen::MatrixXd sd_mse;
};

/// Mean validation MSE per grid cell over seeded folds; returns the argmin
/// cell with ties broken toward larger regularization, then larger bandwidth.
CvResult kfold_cv(const Dataset& data, const CvEstimator& estimator,
                  const GridSpec& grid, std::uint64_t seed);

/// Columns: bandwidth, reg, mean_mse, sd_mse.
void write_cv_table_csv(const GridSpec& grid, const CvResult& result,
                        std::ostream& out);

struct EarlyStopChoice {
  double time = 0.0;
  Eigen::VectorXd alpha;
  double mse = 0.0;
};

/// Checkpoint minimizing validation MSE; ties resolve to the earliest time.
EarlyStopChoice early_stop_select(const SolutionPath& path,
                                  const CrossKernelMatrix& K_val_rows,
                                  const Eigen::VectorXd& y_val);

/// 1 - sum (y_i - p_i)^2 / sum (y_i - mean)^2. Throws if y has zero variance.
double r2(const Eigen::VectorXd& y_true, const Eigen::VectorXd& y_pred);

/// Fraction of coefficients with |alpha_i| > threshold.
double sparsity(const Eigen::VectorXd& alpha, double threshold = 1e-10);

}  // namespace kernelflow
