#include "kernelflow/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "kernelflow/errors.hpp"

namespace kernelflow {

namespace {

// Kernel value from the squared distance; every family maps r = ||x - x'|| to
// (0, 1] with k(x, x) = 1.
double kernel_from_sqdist(const KernelSpec& spec, double d2) {
  const double sigma = spec.bandwidth;
  switch (spec.family) {
    case KernelFamily::gaussian:
      return std::exp(-d2 / (2.0 * sigma * sigma));
    case KernelFamily::matern12:
      return std::exp(-std::sqrt(d2) / sigma);
    case KernelFamily::matern32: {
      const double u = std::sqrt(3.0 * d2) / sigma;
      return (1.0 + u) * std::exp(-u);
    }
    case KernelFamily::matern52: {
      const double u = std::sqrt(5.0 * d2) / sigma;
      return (1.0 + u + 5.0 * d2 / (3.0 * sigma * sigma)) * std::exp(-u);
    }
    case KernelFamily::cauchy:
      return 1.0 / (1.0 + d2 / (sigma * sigma));
  }
  throw input_error("unknown kernel family");
}

double squared_distance(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  double d2 = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    const double diff = a[i] - b[i];
    d2 = std::fma(diff, diff, d2);
  }
  return d2;
}

}  // namespace

std::string family_name(KernelFamily family) {
  switch (family) {
    case KernelFamily::gaussian: return "gaussian";
    case KernelFamily::matern12: return "matern12";
    case KernelFamily::matern32: return "matern32";
    case KernelFamily::matern52: return "matern52";
    case KernelFamily::cauchy: return "cauchy";
  }
  throw input_error("unknown kernel family");
}

KernelFamily family_from_string(const std::string& name) {
  if (name == "gaussian") return KernelFamily::gaussian;
  if (name == "matern12") return KernelFamily::matern12;
  if (name == "matern32") return KernelFamily::matern32;
  if (name == "matern52") return KernelFamily::matern52;
  if (name == "cauchy") return KernelFamily::cauchy;
  throw input_error("unknown kernel family: " + name);
}

KernelSpec::KernelSpec(KernelFamily family, double bandwidth)
    : family(family), bandwidth(bandwidth) {
  if (!(bandwidth > 0.0) || !std::isfinite(bandwidth)) {
    throw input_error("kernel bandwidth must be positive and finite");
  }
}

KernelMatrix::KernelMatrix(Eigen::MatrixXd entries, double jitter)
    : entries_(std::move(entries)), jitter_(jitter) {
  if (entries_.rows() != entries_.cols()) {
    throw input_error("kernel matrix must be square");
  }
  if (jitter_ < 0.0) throw input_error("jitter must be nonnegative");
}

double eval_kernel(const KernelSpec& spec, const Eigen::VectorXd& x,
                   const Eigen::VectorXd& x2) {
  if (x.size() != x2.size()) {
    throw input_error("eval_kernel: dimension mismatch");
  }
  return kernel_from_sqdist(spec, squared_distance(x, x2));
}

KernelMatrix kernel_matrix(const KernelSpec& spec, const Eigen::MatrixXd& X,
                           double jitter) {
  if (X.rows() < 1) throw input_error("kernel_matrix: empty input");
  if (jitter < 0.0) throw input_error("kernel_matrix: jitter must be nonnegative");
  const Eigen::Index n = X.rows();
  Eigen::MatrixXd K(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    K(i, i) = kernel_from_sqdist(spec, 0.0) + jitter;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double k = kernel_from_sqdist(
          spec, squared_distance(X.row(i).transpose(), X.row(j).transpose()));
      K(i, j) = k;
      K(j, i) = k;
    }
  }
  return KernelMatrix(std::move(K), jitter);
}

CrossKernelMatrix cross_kernel_matrix(const KernelSpec& spec,
                                      const Eigen::MatrixXd& Xstar,
                                      const Eigen::MatrixXd& X) {
  if (Xstar.cols() != X.cols()) {
    throw input_error("cross_kernel_matrix: feature dimension mismatch");
  }
  Eigen::MatrixXd K(Xstar.rows(), X.rows());
  for (Eigen::Index i = 0; i < Xstar.rows(); ++i) {
    for (Eigen::Index j = 0; j < X.rows(); ++j) {
      K(i, j) = kernel_from_sqdist(
          spec, squared_distance(Xstar.row(i).transpose(), X.row(j).transpose()));
    }
  }
  return K;
}

double median_pairwise_distance(const Eigen::MatrixXd& X) {
  const Eigen::Index n = X.rows();
  if (n < 2) throw input_error("median_pairwise_distance: need at least 2 rows");
  std::vector<double> dists;
  dists.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      dists.push_back(std::sqrt(
          squared_distance(X.row(i).transpose(), X.row(j).transpose())));
    }
  }
  const std::size_t mid = dists.size() / 2;
  std::nth_element(dists.begin(), dists.begin() + mid, dists.end());
  return dists[mid];
}

}  // namespace kernelflow
