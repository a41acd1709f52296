#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <optional>
#include <vector>

#include "kernelflow/estimators.hpp"
#include "kernelflow/kernels.hpp"
#include "kernelflow/spectral.hpp"

namespace kernelflow {

enum class Penalty { l1, linf };

std::string penalty_name(Penalty penalty);

struct ProxConfig {
  Penalty penalty = Penalty::l1;
  double lambda = 1.0;
  double step_size = 0.0;  // <= 0: use 1 / s_max(K)
  std::size_t max_iter = 1000000;
  double tol = 1e-8;
  // When > 0, give up early if the step size has not contracted between
  // iterations stall_iter and 2 * stall_iter. Ill-posed instances (lambda far
  // below the spectrum floor) drift with a near-constant step and would
  // otherwise burn the whole budget; geometric convergence passes untouched.
  std::size_t stall_iter = 0;
};

/// Elementwise sign(v_i) * max(|v_i| - tau, 0); the prox of tau ||.||_1.
Eigen::VectorXd soft_threshold(const Eigen::VectorXd& v, double tau);

/// Euclidean projection onto {u : ||u||_1 <= r}. Exact: the threshold is found
/// by sorting |v_i| and scanning the piecewise-linear equation.
Eigen::VectorXd project_l1_ball(const Eigen::VectorXd& v, double r);

/// Prox of tau ||.||_inf via Moreau decomposition: v - project_l1_ball(v, tau).
/// Clamped coordinates come out with bit-identical magnitude.
Eigen::VectorXd prox_linf(const Eigen::VectorXd& v, double tau);

struct ProxFit {
  DualCoefficients dual;
  bool converged;
  std::size_t iterations;
};

/// Proximal gradient descent on 1/2 ||y - K alpha||^2_{K^-1} + lambda * pen(alpha).
/// The K^-1 weight cancels in the smooth gradient, which is exactly K alpha - y.
/// Iterates alpha <- prox(alpha - eta (K alpha - y), eta lambda) until the step
/// is below tol * eta in the max norm, or max_iter.
ProxFit fit_prox(const KernelMatrix& K, const Eigen::VectorXd& y,
                 const ProxConfig& config,
                 const std::optional<Eigen::VectorXd>& start = std::nullopt,
                 const KernelSpec& spec = {});
ProxFit fit_prox(const Eigen::MatrixXd& K, const Eigen::VectorXd& y,
                 const ProxConfig& config,
                 const std::optional<Eigen::VectorXd>& start = std::nullopt,
                 const KernelSpec& spec = {});

/// Fit a descending-lambda path with warm starts. Results are returned in the
/// order of `lambdas`; each solution is the fixed point for its own lambda, so
/// correctness does not depend on the grid order.
std::vector<ProxFit> fit_prox_path(const Eigen::MatrixXd& K,
                                   const Eigen::VectorXd& y,
                                   const std::vector<double>& lambdas,
                                   ProxConfig config,
                                   const KernelSpec& spec = {});

/// Objective value 1/2 ||y - K alpha||^2_{K^-1} + lambda * pen(alpha), with the
/// weighted norm evaluated in the eigenbasis and a pseudo-inverse convention on
/// the null space.
double penalized_objective(const SpectralDecomposition& decomp,
                           const Eigen::VectorXd& y, const Eigen::VectorXd& alpha,
                           double lambda, Penalty penalty);

}  // namespace kernelflow
