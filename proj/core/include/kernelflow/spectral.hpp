#pragma once

#include <Eigen/Core>
#include <functional>

#include "kernelflow/kernels.hpp"

namespace kernelflow {

/// Eigendecomposition K = U diag(s) U^T of a symmetric PSD matrix.
/// Eigenvalues are sorted descending; values in [-1e-8, 0) are clamped to 0.
struct SpectralDecomposition {
  Eigen::MatrixXd eigenvectors;  // columns U_:,i
  Eigen::VectorXd eigenvalues;   // s, descending

  Eigen::Index size() const { return eigenvalues.size(); }
};

SpectralDecomposition eig_sym(const KernelMatrix& K);
SpectralDecomposition eig_sym(const Eigen::MatrixXd& K);

/// (1 - exp(-t*s)) / s, with the series limit t * (1 - ts/2 + (ts)^2/6 - (ts)^3/24)
/// for ts < 1e-4 so the value is well-defined down to s = 0. Result lies in [0, t].
double phi_stable(double s, double t);

/// Spectral filters shared by the closed-form estimators.
struct Filter {
  enum class Kind { krr, kgf, kgf_residual, krr_residual };

  Kind kind;
  double reg;       // lambda for krr kinds, t for kgf kinds
  double momentum;  // gamma in [0,1), kgf kinds only

  static Filter krr(double lambda);
  static Filter kgf(double t, double gamma = 0.0);
  static Filter kgf_residual(double t, double gamma = 0.0);
  static Filter krr_residual(double lambda);

  /// Scalar filter value g(s).
  double gain(double s) const;
};

/// U diag(g(s_i)) U^T y for the given filter.
Eigen::VectorXd apply_filter(const SpectralDecomposition& decomp,
                             const Filter& filter, const Eigen::VectorXd& y);

/// Same, for an arbitrary eigenvalue function g. Used by cross-check routes
/// that evaluate a filter in a rewritten algebraic form.
Eigen::VectorXd apply_spectral_function(const SpectralDecomposition& decomp,
                                        const std::function<double(double)>& g,
                                        const Eigen::VectorXd& y);

}  // namespace kernelflow
