#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <vector>

#include "kernelflow/rng.hpp"
#include "kernelflow/spectral.hpp"

namespace kernelflow {

/// Data model y = K alpha0 + eps with alpha0 either fixed or zero-mean with a
/// covariance that is simultaneously diagonalizable with K.
struct RiskScenario {
  enum class Mode { fixed, isotropic, feature_space };

  Mode mode = Mode::fixed;
  Eigen::VectorXd alpha0;  // fixed mode only
  double variance = 0.0;   // sigma_alpha^2 (isotropic) or sigma_beta^2 (feature_space)
  double noise_sd = 0.0;

  static RiskScenario fixed(Eigen::VectorXd alpha0, double noise_sd);
  static RiskScenario isotropic(double sigma_alpha_sq, double noise_sd);
  /// Sigma_alpha = sigma_beta^2 K^{-1}, i.e. beta0 ~ (0, sigma_beta^2 I) in feature space.
  static RiskScenario feature_space(double sigma_beta_sq, double noise_sd);
};

enum class RiskMethod { kgf, krr };
enum class RiskSpace { parameter, prediction };

/// Maximizer and maximum of h(x) = (1/(1+x) - e^{-x})^2 on [0, 50], found by
/// golden-section refinement to |dx| < 1e-9. The maximum is the sharp constant
/// of the gradient-flow vs ridge gap bounds (~0.0415 at x ~ 2.513).
struct GapConstant {
  double x_star;
  double value;
};
GapConstant gap_constant();

/// Gap bound certificate on one instance: per-t squared gap norms against the
/// bound constant times the non-regularized reference, in both coefficient
/// space (reference ||K^{-1} y||^2) and in-sample prediction space
/// (reference ||y||^2).
struct GapReport {
  std::vector<double> t_grid;
  std::vector<double> alpha_gap_sq, alpha_bound;
  std::vector<double> prediction_gap_sq, prediction_bound;
  double max_ratio = 0.0;
  double constant = 0.0;       // bound constant used (computed maximum of h)
  bool pseudo_inverse = false; // zero eigenvalues dropped from the alpha reference
};
GapReport check_gap_bounds(const SpectralDecomposition& decomp,
                           const Eigen::VectorXd& y,
                           const std::vector<double>& t_grid);
GapReport check_gap_bounds(const Eigen::MatrixXd& K, const Eigen::VectorXd& y,
                           const std::vector<double>& t_grid);

/// Expected squared gap between the flow and ridge estimates at matched
/// regularization, probed along a fixed vector w (a basis vector for
/// per-coefficient bounds, a cross-kernel row for out-of-sample bounds),
/// together with the non-regularized reference E[(w^T K^{-1} y)^2].
struct ExpectedGap {
  double gap_sq;
  double reference;
};
ExpectedGap expected_gap_sq(const SpectralDecomposition& decomp,
                            const RiskScenario& scenario, double t,
                            const Eigen::VectorXd& probe);

/// Closed-form risk at time t (flow) or penalty 1/t (ridge), parameter space:
///   kgf: sum_i b_i e^{-2 t s_i}      + sd^2 sum_i ((1 - e^{-t s_i}) / s_i)^2
///   krr: sum_i b_i / (t s_i + 1)^2   + sd^2 sum_i t^2 / (t s_i + 1)^2
/// Prediction space carries an extra s_i^2 weight on every term. b_i is
/// (U_:,i^T alpha0)^2, sigma_alpha^2, or sigma_beta^2 / s_i by scenario mode.
double risk_closed_form(const SpectralDecomposition& decomp,
                        const RiskScenario& scenario, double t, RiskMethod method,
                        RiskSpace space = RiskSpace::parameter);

/// Expected out-of-sample risk along a cross-kernel row k(x*), for scenarios
/// with random alpha0 (isotropic or feature-space covariance):
///   E Risk(f(x*)) = sum_i (U^T k*)_i^2 (b_i bias_i + sd^2 var_i)
/// with the parameter-space bias/variance factors of risk_closed_form.
double out_of_sample_risk(const SpectralDecomposition& decomp,
                          const RiskScenario& scenario, double t,
                          RiskMethod method, const Eigen::VectorXd& probe);

struct RiskRatioReport {
  std::vector<double> t_grid;
  std::vector<double> parameter_ratio, prediction_ratio, out_of_sample_ratio;
  double max_ratio = 0.0;
  double bound = 0.0;
  bool pass = false;
};
/// Flow-to-ridge risk ratios over a t grid; the certified bound is 1.6862.
/// When probe rows are given (one k(x*) per row) and alpha0 is random, the
/// out-of-sample ratios are included.
RiskRatioReport check_risk_ratio(const SpectralDecomposition& decomp,
                                 const RiskScenario& scenario,
                                 const std::vector<double>& t_grid,
                                 const Eigen::MatrixXd& probes = {});

/// Worst-case operator-norm ratios at matched regularization t = 1/lambda:
///   residual side: ||exp(-tK)|| = e^{-t s_min}  vs  ||(I+tK)^{-1}|| = 1/(1+t s_min)
///   shrinkage side: ||I-(I+tK)^{-1}|| = 1-1/(1+t s_max)  vs  ||I-exp(-tK)|| = 1-e^{-t s_max}
/// `ordered` records that flow residual <= ridge residual and ridge shrinkage
/// <= flow shrinkage.
struct ShrinkageExtremes {
  double kgf_residual;
  double krr_residual;
  double krr_shrinkage;
  double kgf_shrinkage;
  bool ordered;
};
ShrinkageExtremes shrinkage_extremes(double s_min, double s_max, double t);

enum class SignflowSpace { alpha, f };

/// Closed-form sign-flow path on a diagonal kernel at time t.
/// alpha space: sign(y_i/k_ii) min(t, |y_i/k_ii|), sizes must match.
/// f space: sign(y_i) min(t, |y_i|) on the first y.size() (training)
/// coordinates and exactly 0 on the remaining (test) coordinates.
Eigen::VectorXd diag_signflow(const Eigen::VectorXd& k_diag,
                              const Eigen::VectorXd& y, double t,
                              SignflowSpace space);

/// Explicit Mercer factor Phi = U diag(sqrt(s)) with Phi Phi^T = K.
struct ExplicitFeatureMap {
  Eigen::MatrixXd phi;
};
ExplicitFeatureMap feature_map(const SpectralDecomposition& decomp);

struct MonteCarloRisk {
  double mean;
  double std_error;
};
/// Empirical parameter risk over `draws` simulations of y = K alpha0 + eps
/// with Gaussian noise; cross-checks risk_closed_form.
MonteCarloRisk monte_carlo_risk(const SpectralDecomposition& decomp,
                                const Eigen::VectorXd& alpha0, double noise_sd,
                                double t, RiskMethod method, std::size_t draws,
                                RandomStream& stream);

}  // namespace kernelflow
