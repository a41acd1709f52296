#include "kernelflow/selection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>

#include "kernelflow/errors.hpp"
#include "kernelflow/estimators.hpp"
#include "kernelflow/spectral.hpp"

namespace kernelflow {

std::vector<double> log_spaced(double lo, double hi, int count) {
  if (!(lo > 0.0) || !(hi > 0.0)) throw input_error("log_spaced: bounds must be positive");
  if (count < 1) throw input_error("log_spaced: count must be positive");
  if (count == 1) return {lo};
  if (!(hi > lo)) throw input_error("log_spaced: hi must exceed lo");
  std::vector<double> out(count);
  const double step = (std::log(hi) - std::log(lo)) / (count - 1);
  for (int i = 0; i < count; ++i) out[i] = std::exp(std::log(lo) + i * step);
  return out;
}

GridSpec make_grid(const Eigen::MatrixXd& X, int n_bandwidths, int n_regs,
                   RegKind kind, int folds) {
  const double med = median_pairwise_distance(X);
  GridSpec grid;
  grid.bandwidths = log_spaced(1e-2 * med, 1e2 * med, n_bandwidths);
  switch (kind) {
    case RegKind::ridge_lambda:
    case RegKind::prox_lambda:
      grid.regs = log_spaced(1e-6, 1e2, n_regs);
      break;
    case RegKind::flow_time:
      grid.regs = log_spaced(1e-2, 1e6, n_regs);
      break;
  }
  grid.folds = folds;
  return grid;
}

namespace {

struct SpectralContext {
  SpectralDecomposition decomp;
  Eigen::VectorXd y;
  CrossKernelMatrix K_val;
};

struct ProxContext {
  Eigen::MatrixXd K;
  Eigen::VectorXd y;
  CrossKernelMatrix K_val;
  double step_size;
  Eigen::VectorXd warm;  // descending-lambda warm start
};

CvEstimator spectral_estimator(KernelFamily family, double jitter, bool ridge) {
  CvEstimator est;
  est.prepare = [family, jitter](const Eigen::MatrixXd& X_train,
                                 const Eigen::VectorXd& y_train,
                                 const Eigen::MatrixXd& X_val, double bandwidth) {
    KernelSpec spec(family, bandwidth);
    auto ctx = std::make_shared<SpectralContext>();
    ctx->decomp = eig_sym(kernel_matrix(spec, X_train, jitter));
    ctx->y = y_train;
    ctx->K_val = cross_kernel_matrix(spec, X_val, X_train);
    return std::shared_ptr<void>(ctx);
  };
  est.predict_val = [ridge](const CvEstimator::Context& raw, double reg) {
    auto* ctx = static_cast<SpectralContext*>(raw.get());
    const Filter filter = ridge ? Filter::krr(reg) : Filter::kgf(reg);
    return Eigen::VectorXd(ctx->K_val * apply_filter(ctx->decomp, filter, ctx->y));
  };
  return est;
}

}  // namespace

CvEstimator cv_estimator_krr(KernelFamily family, double jitter) {
  return spectral_estimator(family, jitter, true);
}

CvEstimator cv_estimator_kgf(KernelFamily family, double jitter) {
  return spectral_estimator(family, jitter, false);
}

CvEstimator cv_estimator_prox(KernelFamily family, Penalty penalty, double jitter) {
  CvEstimator est;
  est.prepare = [family, jitter](const Eigen::MatrixXd& X_train,
                                 const Eigen::VectorXd& y_train,
                                 const Eigen::MatrixXd& X_val, double bandwidth) {
    KernelSpec spec(family, bandwidth);
    auto ctx = std::make_shared<ProxContext>();
    ctx->K = kernel_matrix(spec, X_train, jitter).matrix();
    ctx->y = y_train;
    ctx->K_val = cross_kernel_matrix(spec, X_val, X_train);
    ctx->step_size = 1.0 / eig_sym(ctx->K).eigenvalues.maxCoeff();
    ctx->warm = Eigen::VectorXd::Zero(y_train.size());
    return std::shared_ptr<void>(ctx);
  };
  est.predict_val = [penalty](const CvEstimator::Context& raw, double reg) {
    auto* ctx = static_cast<ProxContext*>(raw.get());
    ProxConfig config;
    config.penalty = penalty;
    config.lambda = reg;
    config.step_size = ctx->step_size;
    config.max_iter = 4000;
    config.stall_iter = 300;
    const ProxFit fit = fit_prox(ctx->K, ctx->y, config, ctx->warm);
    ctx->warm = fit.dual.alpha;
    if (!fit.converged) {
      // No fixed point in budget: the cell holds no explicit-regularization
      // solution, so it must not compete in the CV argmin.
      return Eigen::VectorXd(Eigen::VectorXd::Constant(
          ctx->K_val.rows(), std::numeric_limits<double>::quiet_NaN()));
    }
    return Eigen::VectorXd(ctx->K_val * fit.dual.alpha);
  };
  return est;
}

CvResult kfold_cv(const Dataset& data, const CvEstimator& estimator,
                  const GridSpec& grid, std::uint64_t seed) {
  const Eigen::Index n = data.size();
  if (grid.folds < 2) throw input_error("kfold_cv: need at least 2 folds");
  if (n < grid.folds) throw input_error("kfold_cv: fold would have < 1 observation");
  if (grid.bandwidths.empty() || grid.regs.empty())
    throw input_error("kfold_cv: empty grid");

  RandomStream stream = RandomStream(seed).split(3);
  std::vector<Eigen::Index> perm(n);
  std::iota(perm.begin(), perm.end(), Eigen::Index{0});
  for (Eigen::Index i = n - 1; i > 0; --i) {
    const auto j = static_cast<Eigen::Index>(stream.next_u64() %
                                             static_cast<std::uint64_t>(i + 1));
    std::swap(perm[i], perm[j]);
  }

  const auto n_bw = static_cast<Eigen::Index>(grid.bandwidths.size());
  const auto n_reg = static_cast<Eigen::Index>(grid.regs.size());
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(n_bw, n_reg);
  Eigen::MatrixXd sum_sq = Eigen::MatrixXd::Zero(n_bw, n_reg);

  // Visit regularization values in descending order (warm starts); the score
  // table is still indexed by the grid's order.
  std::vector<Eigen::Index> reg_order(n_reg);
  std::iota(reg_order.begin(), reg_order.end(), Eigen::Index{0});
  std::sort(reg_order.begin(), reg_order.end(), [&grid](Eigen::Index a, Eigen::Index b) {
    return grid.regs[a] > grid.regs[b];
  });

  for (int fold = 0; fold < grid.folds; ++fold) {
    const Eigen::Index lo = fold * n / grid.folds;
    const Eigen::Index hi = (fold + 1) * n / grid.folds;
    const Eigen::Index n_val = hi - lo;
    const Eigen::Index n_train = n - n_val;

    Eigen::MatrixXd X_train(n_train, data.X.cols()), X_val(n_val, data.X.cols());
    Eigen::VectorXd y_train(n_train), y_val(n_val);
    Eigen::Index it = 0, iv = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (i >= lo && i < hi) {
        X_val.row(iv) = data.X.row(perm[i]);
        y_val[iv++] = data.y[perm[i]];
      } else {
        X_train.row(it) = data.X.row(perm[i]);
        y_train[it++] = data.y[perm[i]];
      }
    }

    for (Eigen::Index b = 0; b < n_bw; ++b) {
      const CvEstimator::Context ctx =
          estimator.prepare(X_train, y_train, X_val, grid.bandwidths[b]);
      for (Eigen::Index r : reg_order) {
        const Eigen::VectorXd pred = estimator.predict_val(ctx, grid.regs[r]);
        double mse = (pred - y_val).squaredNorm() / static_cast<double>(n_val);
        if (!std::isfinite(mse)) mse = std::numeric_limits<double>::infinity();
        sum(b, r) += mse;
        sum_sq(b, r) += mse * mse;
      }
    }
  }

  CvResult result;
  const double k = grid.folds;
  result.mean_mse = sum / k;
  result.sd_mse =
      ((sum_sq - sum.cwiseProduct(sum) / k) / (k - 1.0)).cwiseMax(0.0).cwiseSqrt();
  for (Eigen::Index b = 0; b < n_bw; ++b) {
    for (Eigen::Index r = 0; r < n_reg; ++r) {
      if (!std::isfinite(result.mean_mse(b, r))) {
        result.mean_mse(b, r) = std::numeric_limits<double>::infinity();
        result.sd_mse(b, r) = std::numeric_limits<double>::infinity();
      }
    }
  }

  bool first = true;
  for (Eigen::Index b = 0; b < n_bw; ++b) {
    for (Eigen::Index r = 0; r < n_reg; ++r) {
      const double mse = result.mean_mse(b, r);
      const bool better =
          first || mse < result.best_mse ||
          (mse == result.best_mse &&
           (grid.regs[r] > result.best_reg ||
            (grid.regs[r] == result.best_reg &&
             grid.bandwidths[b] > result.best_bandwidth)));
      if (better) {
        result.best_mse = mse;
        result.best_bandwidth = grid.bandwidths[b];
        result.best_reg = grid.regs[r];
        first = false;
      }
    }
  }
  return result;
}

void write_cv_table_csv(const GridSpec& grid, const CvResult& result,
                        std::ostream& out) {
  out << "bandwidth,reg,mean_mse,sd_mse\n";
  const auto previous = out.precision(17);
  for (Eigen::Index b = 0; b < result.mean_mse.rows(); ++b) {
    for (Eigen::Index r = 0; r < result.mean_mse.cols(); ++r) {
      out << grid.bandwidths[b] << ',' << grid.regs[r] << ','
          << result.mean_mse(b, r) << ',' << result.sd_mse(b, r) << '\n';
    }
  }
  out.precision(previous);
}

EarlyStopChoice early_stop_select(const SolutionPath& path,
                                  const CrossKernelMatrix& K_val_rows,
                                  const Eigen::VectorXd& y_val) {
  if (K_val_rows.rows() != y_val.size()) {
    throw input_error("early_stop_select: validation size mismatch");
  }
  EarlyStopChoice choice;
  bool first = true;
  for (const PathCheckpoint& c : path.checkpoints()) {
    const double mse =
        (K_val_rows * c.alpha - y_val).squaredNorm() / static_cast<double>(y_val.size());
    if (first || mse < choice.mse) {
      choice.time = c.time;
      choice.alpha = c.alpha;
      choice.mse = mse;
      first = false;
    }
  }
  return choice;
}

double r2(const Eigen::VectorXd& y_true, const Eigen::VectorXd& y_pred) {
  if (y_true.size() != y_pred.size()) throw input_error("r2: length mismatch");
  if (y_true.size() < 2) throw input_error("r2: need at least 2 observations");
  const double mean = y_true.mean();
  const double total = (y_true.array() - mean).square().sum();
  if (!(total > 0.0)) throw input_error("r2: zero variance in y_true");
  return 1.0 - (y_true - y_pred).squaredNorm() / total;
}

double sparsity(const Eigen::VectorXd& alpha, double threshold) {
  if (alpha.size() == 0) return 0.0;
  const Eigen::Index nnz = (alpha.array().abs() > threshold).count();
  return static_cast<double>(nnz) / static_cast<double>(alpha.size());
}

}  // namespace kernelflow
