#include "kernelflow/spectral.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

#include "kernelflow/errors.hpp"

namespace kernelflow {

namespace {

constexpr double kClampTolerance = 1e-8;
constexpr double kPsdTolerance = 1e-6;

}  // namespace

SpectralDecomposition eig_sym(const KernelMatrix& K) { return eig_sym(K.matrix()); }

SpectralDecomposition eig_sym(const Eigen::MatrixXd& K) {
  if (K.rows() != K.cols()) throw input_error("eig_sym: matrix must be square");
  if (!K.allFinite()) throw input_error("eig_sym: non-finite entries");

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(K);
  if (solver.info() != Eigen::Success) {
    throw numeric_error("eig_sym: eigendecomposition failed to converge");
  }

  // Eigen sorts ascending; flip to descending.
  const Eigen::Index n = K.rows();
  SpectralDecomposition decomp;
  decomp.eigenvalues = solver.eigenvalues().reverse();
  decomp.eigenvectors = solver.eigenvectors().rowwise().reverse();

  for (Eigen::Index i = 0; i < n; ++i) {
    double& s = decomp.eigenvalues[i];
    if (s < -kPsdTolerance) throw not_psd_error(s);
    if (s < 0.0 && s >= -kClampTolerance) s = 0.0;
  }
  return decomp;
}

double phi_stable(double s, double t) {
  if (s < 0.0 || t < 0.0) throw input_error("phi_stable: s and t must be nonnegative");
  const double x = t * s;
  if (x < 1e-4) {
    return t * (1.0 - x / 2.0 + x * x / 6.0 - x * x * x / 24.0);
  }
  return (1.0 - std::exp(-x)) / s;
}

Filter Filter::krr(double lambda) {
  if (!(lambda > 0.0)) throw input_error("krr filter: lambda must be positive");
  return Filter{Kind::krr, lambda, 0.0};
}

Filter Filter::kgf(double t, double gamma) {
  if (t < 0.0) throw input_error("kgf filter: t must be nonnegative");
  if (gamma < 0.0 || gamma >= 1.0) throw input_error("kgf filter: gamma must be in [0,1)");
  return Filter{Kind::kgf, t, gamma};
}

Filter Filter::kgf_residual(double t, double gamma) {
  if (t < 0.0) throw input_error("kgf_residual filter: t must be nonnegative");
  if (gamma < 0.0 || gamma >= 1.0)
    throw input_error("kgf_residual filter: gamma must be in [0,1)");
  return Filter{Kind::kgf_residual, t, gamma};
}

Filter Filter::krr_residual(double lambda) {
  if (!(lambda > 0.0)) throw input_error("krr_residual filter: lambda must be positive");
  return Filter{Kind::krr_residual, lambda, 0.0};
}

double Filter::gain(double s) const {
  switch (kind) {
    case Kind::krr:
      return 1.0 / (s + reg);
    case Kind::kgf:
      return phi_stable(s, reg / (1.0 - momentum));
    case Kind::kgf_residual:
      return std::exp(-reg * s / (1.0 - momentum));
    case Kind::krr_residual:
      return reg / (s + reg);
  }
  throw input_error("unknown filter kind");
}

Eigen::VectorXd apply_filter(const SpectralDecomposition& decomp,
                             const Filter& filter, const Eigen::VectorXd& y) {
  return apply_spectral_function(
      decomp, [&filter](double s) { return filter.gain(s); }, y);
}

Eigen::VectorXd apply_spectral_function(const SpectralDecomposition& decomp,
                                        const std::function<double(double)>& g,
                                        const Eigen::VectorXd& y) {
  if (y.size() != decomp.size()) throw input_error("apply_filter: size mismatch");
  Eigen::VectorXd coeffs = decomp.eigenvectors.transpose() * y;
  for (Eigen::Index i = 0; i < coeffs.size(); ++i) {
    coeffs[i] *= g(decomp.eigenvalues[i]);
  }
  return decomp.eigenvectors * coeffs;
}

}  // namespace kernelflow
