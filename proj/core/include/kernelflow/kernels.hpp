#pragma once

#include <Eigen/Core>
#include <string>

namespace kernelflow {

enum class KernelFamily { gaussian, matern12, matern32, matern52, cauchy };

std::string family_name(KernelFamily family);
KernelFamily family_from_string(const std::string& name);

/// Stationary kernel: family plus bandwidth sigma. All five families satisfy
/// k(x, x) = 1 and 0 < k <= 1.
struct KernelSpec {
  KernelFamily family = KernelFamily::gaussian;
  double bandwidth = 1.0;

  KernelSpec() = default;
  KernelSpec(KernelFamily family, double bandwidth);
};

/// Dense symmetric Gram matrix with an optional diagonal jitter. Built
/// symmetrically (each pair evaluated once), so m == m^T holds bit-exactly.
class KernelMatrix {
 public:
  KernelMatrix(Eigen::MatrixXd entries, double jitter);

  const Eigen::MatrixXd& matrix() const { return entries_; }
  double jitter() const { return jitter_; }
  Eigen::Index size() const { return entries_.rows(); }

 private:
  Eigen::MatrixXd entries_;
  double jitter_;
};

/// n* x n matrix of k(x*_i, x_j); no symmetry structure.
using CrossKernelMatrix = Eigen::MatrixXd;

double eval_kernel(const KernelSpec& spec, const Eigen::VectorXd& x,
                   const Eigen::VectorXd& x2);

/// Gram matrix of the rows of X, plus `jitter` on the diagonal.
KernelMatrix kernel_matrix(const KernelSpec& spec, const Eigen::MatrixXd& X,
                           double jitter = 0.0);

CrossKernelMatrix cross_kernel_matrix(const KernelSpec& spec,
                                      const Eigen::MatrixXd& Xstar,
                                      const Eigen::MatrixXd& X);

/// Median of pairwise Euclidean row distances; the usual bandwidth-grid anchor.
double median_pairwise_distance(const Eigen::MatrixXd& X);

}  // namespace kernelflow
