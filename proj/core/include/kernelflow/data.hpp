#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "kernelflow/rng.hpp"

namespace kernelflow {

struct StandardizationParams {
  Eigen::VectorXd x_mean, x_sd;         // per kept column
  std::vector<Eigen::Index> kept_columns;  // original indices of kept columns
  double y_mean = 0.0, y_sd = 1.0;
};

/// Map new inputs into the standardized coordinates of a fitted dataset,
/// selecting and scaling the kept columns.
Eigen::MatrixXd standardize_inputs(const Eigen::MatrixXd& X,
                                   const StandardizationParams& params);

struct DatasetMeta {
  std::string source;
  std::uint64_t seed = 0;
  std::optional<StandardizationParams> standardization;
  std::vector<std::string> dropped_columns;
};

struct Dataset {
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
  DatasetMeta meta;

  Eigen::Index size() const { return X.rows(); }
};

/// Centered Cauchy quantile gamma * tan(pi (u - 1/2)); u is clamped away from
/// the endpoints by 1e-12 so the value is always finite.
double cauchy_quantile(double u, double gamma);

/// One centered Cauchy draw via the quantile of a uniform from `stream`.
double sample_cauchy(RandomStream& stream, double gamma);

/// x ~ U(-10, 10), y = sin(pi/2 x) + Cauchy(0, 0.1). Deterministic per seed.
Dataset gen_sin_cauchy(int n, std::uint64_t seed);

/// x ~ U(-10, 10), y = exp(-5 x^2) + N(0, 0.1^2). Deterministic per seed.
Dataset gen_gauss_peak(int n, std::uint64_t seed);

/// Noiseless generator signals of the two synthetic sets.
double sin_signal(double x);
double peak_signal(double x);

/// Multiply each y_i by (1 + |eps_i|), eps_i ~ Cauchy(0, scale).
Eigen::VectorXd inject_outliers(const Eigen::VectorXd& y, std::uint64_t seed,
                                double scale = 0.01);

/// Zero-mean unit-variance columns of X and y; parameters stored in meta.
/// Constant columns are dropped and recorded.
Dataset standardize(const Dataset& d);

/// Undo y-standardization on a prediction vector.
Eigen::VectorXd destandardize_predictions(const Eigen::VectorXd& predictions,
                                          const StandardizationParams& params);

/// CSV with a header row; `target_column` names the response, the remaining
/// numeric columns form X. Throws parse_error with 1-based row/column on
/// malformed numeric cells.
Dataset load_csv(const std::string& path, const std::string& target_column);

/// Seeded permutation partition into round(train_fraction * n) / rest.
std::pair<Dataset, Dataset> split(const Dataset& d, double train_fraction,
                                  std::uint64_t seed);

/// Seeded subsample without replacement (at most n rows).
Dataset subsample(const Dataset& d, Eigen::Index count, std::uint64_t seed);

}  // namespace kernelflow
