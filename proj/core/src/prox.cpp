#include "kernelflow/prox.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "kernelflow/errors.hpp"

namespace kernelflow {

namespace {

double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

// Threshold theta such that soft_threshold(v, theta) has l1 norm exactly r;
// caller guarantees ||v||_1 > r.
double l1_projection_threshold(const Eigen::VectorXd& v, double r) {
  std::vector<double> mags(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) mags[i] = std::abs(v[i]);
  std::sort(mags.begin(), mags.end(), std::greater<double>());
  double cumulative = 0.0;
  double theta = 0.0;
  for (std::size_t k = 0; k < mags.size(); ++k) {
    cumulative += mags[k];
    const double candidate = (cumulative - r) / static_cast<double>(k + 1);
    if (k + 1 == mags.size() || mags[k + 1] <= candidate) {
      theta = candidate;
      break;
    }
  }
  return std::max(theta, 0.0);
}

double largest_eigenvalue(const Eigen::MatrixXd& K) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(K, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().maxCoeff();
}

}  // namespace

std::string penalty_name(Penalty penalty) {
  return penalty == Penalty::l1 ? "l1" : "linf";
}

Eigen::VectorXd soft_threshold(const Eigen::VectorXd& v, double tau) {
  if (tau < 0.0) throw input_error("soft_threshold: tau must be nonnegative");
  Eigen::VectorXd out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    out[i] = sign(v[i]) * std::max(std::abs(v[i]) - tau, 0.0);
  }
  return out;
}

Eigen::VectorXd project_l1_ball(const Eigen::VectorXd& v, double r) {
  if (!(r > 0.0)) throw input_error("project_l1_ball: radius must be positive");
  if (v.lpNorm<1>() <= r) return v;
  return soft_threshold(v, l1_projection_threshold(v, r));
}

Eigen::VectorXd prox_linf(const Eigen::VectorXd& v, double tau) {
  if (tau < 0.0) throw input_error("prox_linf: tau must be nonnegative");
  if (tau == 0.0) return v;
  if (v.lpNorm<1>() <= tau) return Eigen::VectorXd::Zero(v.size());
  const double theta = l1_projection_threshold(v, tau);
  Eigen::VectorXd out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    out[i] = sign(v[i]) * std::min(std::abs(v[i]), theta);
  }
  return out;
}

ProxFit fit_prox(const KernelMatrix& K, const Eigen::VectorXd& y,
                 const ProxConfig& config,
                 const std::optional<Eigen::VectorXd>& start,
                 const KernelSpec& spec) {
  return fit_prox(K.matrix(), y, config, start, spec);
}

ProxFit fit_prox(const Eigen::MatrixXd& K, const Eigen::VectorXd& y,
                 const ProxConfig& config,
                 const std::optional<Eigen::VectorXd>& start,
                 const KernelSpec& spec) {
  const Eigen::Index n = y.size();
  if (K.rows() != n || K.cols() != n) throw input_error("fit_prox: size mismatch");
  if (!(config.lambda > 0.0)) throw input_error("fit_prox: lambda must be positive");
  if (!(config.tol > 0.0)) throw input_error("fit_prox: tol must be positive");

  const double eta =
      config.step_size > 0.0 ? config.step_size : 1.0 / largest_eigenvalue(K);
  const double tau = eta * config.lambda;

  Eigen::VectorXd alpha = start ? *start : Eigen::VectorXd::Zero(n);
  if (alpha.size() != n) throw input_error("fit_prox: bad warm start size");

  bool converged = false;
  std::size_t iterations = 0;
  double stall_reference = 0.0;
  Eigen::VectorXd z(n);
  while (iterations < config.max_iter) {
    ++iterations;
    z.noalias() = alpha - eta * (K * alpha - y);
    Eigen::VectorXd next =
        config.penalty == Penalty::l1 ? soft_threshold(z, tau) : prox_linf(z, tau);
    const double delta = (next - alpha).lpNorm<Eigen::Infinity>();
    alpha = std::move(next);
    if (delta <= config.tol * eta) {
      converged = true;
      break;
    }
    if (config.stall_iter > 0) {
      if (iterations == config.stall_iter) {
        stall_reference = delta;
      } else if (iterations == 2 * config.stall_iter && delta > 0.9 * stall_reference) {
        break;
      }
    }
  }

  ProxFit fit;
  fit.dual.alpha = std::move(alpha);
  fit.dual.regularizer =
      reg::ProxPenalty{config.lambda, config.penalty == Penalty::l1};
  fit.dual.kernel = spec;
  fit.converged = converged;
  fit.iterations = iterations;
  return fit;
}

std::vector<ProxFit> fit_prox_path(const Eigen::MatrixXd& K,
                                   const Eigen::VectorXd& y,
                                   const std::vector<double>& lambdas,
                                   ProxConfig config, const KernelSpec& spec) {
  if (config.step_size <= 0.0) config.step_size = 1.0 / largest_eigenvalue(K);

  std::vector<std::size_t> order(lambdas.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&lambdas](std::size_t a, std::size_t b) {
    return lambdas[a] > lambdas[b];
  });

  std::vector<ProxFit> fits(lambdas.size());
  std::optional<Eigen::VectorXd> warm;
  for (std::size_t idx : order) {
    config.lambda = lambdas[idx];
    fits[idx] = fit_prox(K, y, config, warm, spec);
    warm = fits[idx].dual.alpha;
  }
  return fits;
}

double penalized_objective(const SpectralDecomposition& decomp,
                           const Eigen::VectorXd& y, const Eigen::VectorXd& alpha,
                           double lambda, Penalty penalty) {
  const Eigen::VectorXd yc = decomp.eigenvectors.transpose() * y;
  const Eigen::VectorXd ac = decomp.eigenvectors.transpose() * alpha;
  double reconstruction = 0.0;
  for (Eigen::Index i = 0; i < yc.size(); ++i) {
    const double s = decomp.eigenvalues[i];
    if (s > 0.0) {
      const double r = yc[i] - s * ac[i];
      reconstruction += r * r / s;
    }
  }
  const double pen =
      penalty == Penalty::l1 ? alpha.lpNorm<1>() : alpha.lpNorm<Eigen::Infinity>();
  return 0.5 * reconstruction + lambda * pen;
}

}  // namespace kernelflow
