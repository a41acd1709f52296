#include "kernelflow/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "kernelflow/errors.hpp"

namespace kernelflow {

namespace {

std::vector<Eigen::Index> seeded_permutation(Eigen::Index n, RandomStream& stream) {
  std::vector<Eigen::Index> perm(n);
  std::iota(perm.begin(), perm.end(), Eigen::Index{0});
  for (Eigen::Index i = n - 1; i > 0; --i) {
    const auto j = static_cast<Eigen::Index>(stream.next_u64() %
                                             static_cast<std::uint64_t>(i + 1));
    std::swap(perm[i], perm[j]);
  }
  return perm;
}

Dataset take_rows(const Dataset& d, const std::vector<Eigen::Index>& rows) {
  Dataset out;
  out.X.resize(static_cast<Eigen::Index>(rows.size()), d.X.cols());
  out.y.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.X.row(static_cast<Eigen::Index>(i)) = d.X.row(rows[i]);
    out.y[static_cast<Eigen::Index>(i)] = d.y[rows[i]];
  }
  out.meta = d.meta;
  return out;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

bool parse_double(const std::string& cell, double& out) {
  try {
    std::size_t pos = 0;
    out = std::stod(cell, &pos);
    while (pos < cell.size() && std::isspace(static_cast<unsigned char>(cell[pos]))) ++pos;
    return pos == cell.size();
  } catch (const std::exception&) {
    return false;
  }
}

}  // namespace

double cauchy_quantile(double u, double gamma) {
  if (!(gamma > 0.0)) throw input_error("cauchy_quantile: scale must be positive");
  u = std::min(std::max(u, 1e-12), 1.0 - 1e-12);
  return gamma * std::tan(M_PI * (u - 0.5));
}

double sample_cauchy(RandomStream& stream, double gamma) {
  return cauchy_quantile(stream.next_uniform(), gamma);
}

double sin_signal(double x) { return std::sin(M_PI / 2.0 * x); }
double peak_signal(double x) { return std::exp(-5.0 * x * x); }

Dataset gen_sin_cauchy(int n, std::uint64_t seed) {
  if (n < 1) throw input_error("gen_sin_cauchy: n must be positive");
  RandomStream stream(seed);
  Dataset d;
  d.X.resize(n, 1);
  d.y.resize(n);
  for (int i = 0; i < n; ++i) {
    const double x = -10.0 + 20.0 * stream.next_uniform();
    d.X(i, 0) = x;
    d.y[i] = sin_signal(x) + sample_cauchy(stream, 0.1);
  }
  d.meta.source = "sin";
  d.meta.seed = seed;
  return d;
}

Dataset gen_gauss_peak(int n, std::uint64_t seed) {
  if (n < 1) throw input_error("gen_gauss_peak: n must be positive");
  RandomStream stream(seed);
  Dataset d;
  d.X.resize(n, 1);
  d.y.resize(n);
  for (int i = 0; i < n; ++i) {
    const double x = -10.0 + 20.0 * stream.next_uniform();
    d.X(i, 0) = x;
    d.y[i] = peak_signal(x) + 0.1 * stream.next_normal();
  }
  d.meta.source = "peak";
  d.meta.seed = seed;
  return d;
}

Eigen::VectorXd inject_outliers(const Eigen::VectorXd& y, std::uint64_t seed,
                                double scale) {
  if (!(scale > 0.0)) throw input_error("inject_outliers: scale must be positive");
  RandomStream stream(seed);
  Eigen::VectorXd out(y.size());
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    out[i] = y[i] * (1.0 + std::abs(sample_cauchy(stream, scale)));
  }
  return out;
}

Dataset standardize(const Dataset& d) {
  if (d.size() < 2) throw input_error("standardize: need at least 2 rows");
  const Eigen::Index n = d.size();

  std::vector<Eigen::Index> kept;
  StandardizationParams params;
  std::vector<double> means, sds;
  Dataset out;
  out.meta = d.meta;
  for (Eigen::Index j = 0; j < d.X.cols(); ++j) {
    const double mean = d.X.col(j).mean();
    const double sd =
        std::sqrt((d.X.col(j).array() - mean).square().sum() / static_cast<double>(n));
    if (sd > 0.0) {
      kept.push_back(j);
      means.push_back(mean);
      sds.push_back(sd);
    } else {
      out.meta.dropped_columns.push_back("column " + std::to_string(j));
    }
  }
  if (kept.empty()) throw input_error("standardize: all feature columns are constant");

  out.X.resize(n, static_cast<Eigen::Index>(kept.size()));
  for (std::size_t j = 0; j < kept.size(); ++j) {
    out.X.col(static_cast<Eigen::Index>(j)) =
        (d.X.col(kept[j]).array() - means[j]) / sds[j];
  }

  params.x_mean = Eigen::Map<Eigen::VectorXd>(means.data(), static_cast<Eigen::Index>(means.size()));
  params.x_sd = Eigen::Map<Eigen::VectorXd>(sds.data(), static_cast<Eigen::Index>(sds.size()));
  params.kept_columns = kept;
  params.y_mean = d.y.mean();
  const double y_sd =
      std::sqrt((d.y.array() - params.y_mean).square().sum() / static_cast<double>(n));
  if (!(y_sd > 0.0)) throw input_error("standardize: response is constant");
  params.y_sd = y_sd;
  out.y = (d.y.array() - params.y_mean) / params.y_sd;
  out.meta.standardization = params;
  return out;
}

Eigen::MatrixXd standardize_inputs(const Eigen::MatrixXd& X,
                                   const StandardizationParams& params) {
  const auto cols = static_cast<Eigen::Index>(params.kept_columns.size());
  Eigen::MatrixXd out(X.rows(), cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    const Eigen::Index source = params.kept_columns[static_cast<std::size_t>(j)];
    if (source >= X.cols()) throw input_error("standardize_inputs: column out of range");
    out.col(j) = (X.col(source).array() - params.x_mean[j]) / params.x_sd[j];
  }
  return out;
}

Eigen::VectorXd destandardize_predictions(const Eigen::VectorXd& predictions,
                                          const StandardizationParams& params) {
  return (predictions.array() * params.y_sd + params.y_mean).matrix();
}

Dataset load_csv(const std::string& path, const std::string& target_column) {
  std::ifstream in(path);
  if (!in) throw input_error("load_csv: cannot open " + path);

  std::string line;
  if (!std::getline(in, line)) throw parse_error("missing header row", 1, 1);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const std::vector<std::string> header = split_csv_line(line);

  std::size_t target_idx = header.size();
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (header[j] == target_column) target_idx = j;
  }
  if (target_idx == header.size()) {
    throw input_error("load_csv: target column '" + target_column + "' not found");
  }

  std::vector<std::vector<double>> feature_rows;
  std::vector<double> targets;
  std::vector<bool> numeric(header.size(), true);
  std::vector<std::vector<std::string>> raw_rows;

  std::size_t row_number = 1;
  while (std::getline(in, line)) {
    ++row_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells = split_csv_line(line);
    if (cells.size() != header.size()) {
      throw parse_error("expected " + std::to_string(header.size()) + " cells, got " +
                            std::to_string(cells.size()),
                        row_number, cells.size() + 1);
    }
    // First data row decides which columns are numeric; later failures in a
    // numeric column are hard errors.
    if (raw_rows.empty()) {
      for (std::size_t j = 0; j < cells.size(); ++j) {
        double v;
        numeric[j] = parse_double(cells[j], v);
      }
      if (!numeric[target_idx]) {
        throw parse_error("target column is not numeric", row_number, target_idx + 1);
      }
    }
    raw_rows.push_back(std::move(cells));
  }
  if (raw_rows.empty()) throw input_error("load_csv: no data rows");

  std::vector<std::size_t> feature_cols;
  Dataset d;
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (j == target_idx) continue;
    if (numeric[j]) {
      feature_cols.push_back(j);
    } else {
      d.meta.dropped_columns.push_back(header[j]);
    }
  }
  if (feature_cols.empty()) throw input_error("load_csv: no numeric feature columns");

  const auto n = static_cast<Eigen::Index>(raw_rows.size());
  d.X.resize(n, static_cast<Eigen::Index>(feature_cols.size()));
  d.y.resize(n);
  for (std::size_t i = 0; i < raw_rows.size(); ++i) {
    const std::size_t row_number_here = i + 2;
    double v;
    if (!parse_double(raw_rows[i][target_idx], v)) {
      throw parse_error("non-numeric value '" + raw_rows[i][target_idx] + "'",
                        row_number_here, target_idx + 1);
    }
    d.y[static_cast<Eigen::Index>(i)] = v;
    for (std::size_t j = 0; j < feature_cols.size(); ++j) {
      if (!parse_double(raw_rows[i][feature_cols[j]], v)) {
        throw parse_error("non-numeric value '" + raw_rows[i][feature_cols[j]] + "'",
                          row_number_here, feature_cols[j] + 1);
      }
      d.X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
    }
  }
  d.meta.source = path;
  return d;
}

std::pair<Dataset, Dataset> split(const Dataset& d, double train_fraction,
                                  std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw input_error("split: train_fraction must be in (0, 1)");
  }
  if (d.size() < 2) throw input_error("split: need at least 2 rows");
  RandomStream stream = RandomStream(seed).split(1);
  const std::vector<Eigen::Index> perm = seeded_permutation(d.size(), stream);
  auto n_train = static_cast<Eigen::Index>(
      std::llround(train_fraction * static_cast<double>(d.size())));
  n_train = std::clamp<Eigen::Index>(n_train, 1, d.size() - 1);
  const std::vector<Eigen::Index> train_rows(perm.begin(), perm.begin() + n_train);
  const std::vector<Eigen::Index> test_rows(perm.begin() + n_train, perm.end());
  return {take_rows(d, train_rows), take_rows(d, test_rows)};
}

Dataset subsample(const Dataset& d, Eigen::Index count, std::uint64_t seed) {
  if (count < 1) throw input_error("subsample: count must be positive");
  if (count >= d.size()) return d;
  RandomStream stream = RandomStream(seed).split(2);
  std::vector<Eigen::Index> perm = seeded_permutation(d.size(), stream);
  perm.resize(static_cast<std::size_t>(count));
  return take_rows(d, perm);
}

}  // namespace kernelflow
