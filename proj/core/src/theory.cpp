#include "kernelflow/theory.hpp"

#include <cmath>

#include "kernelflow/errors.hpp"

namespace kernelflow {

namespace {

// Gap filter d(s, t) = 1/(1 + t s) - e^{-t s}; zero at s = 0 and s -> inf.
double gap_filter(double s, double t) {
  const double x = t * s;
  return 1.0 / (1.0 + x) - std::exp(-x);
}

double gap_objective(double x) {
  const double d = 1.0 / (1.0 + x) - std::exp(-x);
  return d * d;
}

// E[(U^T alpha0)_i^2] under the scenario's alpha0 model.
double bias_weight(const RiskScenario& scenario, const Eigen::VectorXd& u_t_alpha0,
                   double s, Eigen::Index i) {
  switch (scenario.mode) {
    case RiskScenario::Mode::fixed: {
      const double c = u_t_alpha0[i];
      return c * c;
    }
    case RiskScenario::Mode::isotropic:
      return scenario.variance;
    case RiskScenario::Mode::feature_space:
      if (s <= 0.0) {
        throw input_error("feature_space scenario requires strictly positive eigenvalues");
      }
      return scenario.variance / s;
  }
  throw input_error("unknown scenario mode");
}

// Eigenvalue of E[y y^T] = Sigma_alpha K^2 + noise_sd^2 I at eigenvalue s.
double second_moment_weight(const RiskScenario& scenario,
                            const Eigen::VectorXd& u_t_alpha0, double s,
                            Eigen::Index i) {
  return bias_weight(scenario, u_t_alpha0, s, i) * s * s +
         scenario.noise_sd * scenario.noise_sd;
}

}  // namespace

RiskScenario RiskScenario::fixed(Eigen::VectorXd alpha0, double noise_sd) {
  if (noise_sd < 0.0) throw input_error("noise_sd must be nonnegative");
  RiskScenario s;
  s.mode = Mode::fixed;
  s.alpha0 = std::move(alpha0);
  s.noise_sd = noise_sd;
  return s;
}

RiskScenario RiskScenario::isotropic(double sigma_alpha_sq, double noise_sd) {
  if (sigma_alpha_sq < 0.0 || noise_sd < 0.0)
    throw input_error("variances must be nonnegative");
  RiskScenario s;
  s.mode = Mode::isotropic;
  s.variance = sigma_alpha_sq;
  s.noise_sd = noise_sd;
  return s;
}

RiskScenario RiskScenario::feature_space(double sigma_beta_sq, double noise_sd) {
  if (sigma_beta_sq < 0.0 || noise_sd < 0.0)
    throw input_error("variances must be nonnegative");
  RiskScenario s;
  s.mode = Mode::feature_space;
  s.variance = sigma_beta_sq;
  s.noise_sd = noise_sd;
  return s;
}

GapConstant gap_constant() {
  // h is zero at both ends and unimodal in between; golden-section search.
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = 0.0, b = 50.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = gap_objective(c);
  double fd = gap_objective(d);
  while (b - a > 1e-9) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = gap_objective(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = gap_objective(d);
    }
  }
  const double x = (a + b) / 2.0;
  return GapConstant{x, gap_objective(x)};
}

GapReport check_gap_bounds(const SpectralDecomposition& decomp,
                           const Eigen::VectorXd& y,
                           const std::vector<double>& t_grid) {
  if (y.size() != decomp.size()) throw input_error("check_gap_bounds: size mismatch");

  const double constant = gap_constant().value;
  const Eigen::VectorXd coeffs = decomp.eigenvectors.transpose() * y;

  double alpha_reference = 0.0;
  bool pseudo = false;
  for (Eigen::Index i = 0; i < coeffs.size(); ++i) {
    const double s = decomp.eigenvalues[i];
    if (s > 0.0) {
      alpha_reference += coeffs[i] * coeffs[i] / (s * s);
    } else {
      pseudo = true;
    }
  }
  const double prediction_reference = y.squaredNorm();

  GapReport report;
  report.t_grid = t_grid;
  report.constant = constant;
  report.pseudo_inverse = pseudo;
  for (double t : t_grid) {
    if (t < 0.0) throw input_error("check_gap_bounds: t must be nonnegative");
    double alpha_gap = 0.0, prediction_gap = 0.0;
    for (Eigen::Index i = 0; i < coeffs.size(); ++i) {
      const double s = decomp.eigenvalues[i];
      const double d = gap_filter(s, t);
      prediction_gap += d * d * coeffs[i] * coeffs[i];
      if (s > 0.0) alpha_gap += d * d * coeffs[i] * coeffs[i] / (s * s);
    }
    report.alpha_gap_sq.push_back(alpha_gap);
    report.alpha_bound.push_back(constant * alpha_reference);
    report.prediction_gap_sq.push_back(prediction_gap);
    report.prediction_bound.push_back(constant * prediction_reference);
    if (alpha_reference > 0.0) {
      report.max_ratio =
          std::max(report.max_ratio, alpha_gap / (constant * alpha_reference));
    }
    if (prediction_reference > 0.0) {
      report.max_ratio = std::max(
          report.max_ratio, prediction_gap / (constant * prediction_reference));
    }
  }
  return report;
}

GapReport check_gap_bounds(const Eigen::MatrixXd& K, const Eigen::VectorXd& y,
                           const std::vector<double>& t_grid) {
  return check_gap_bounds(eig_sym(K), y, t_grid);
}

ExpectedGap expected_gap_sq(const SpectralDecomposition& decomp,
                            const RiskScenario& scenario, double t,
                            const Eigen::VectorXd& probe) {
  if (probe.size() != decomp.size()) throw input_error("expected_gap_sq: size mismatch");
  if (scenario.mode == RiskScenario::Mode::fixed) {
    throw input_error("expected_gap_sq: scenario must model alpha0 as random");
  }
  const Eigen::VectorXd w = decomp.eigenvectors.transpose() * probe;
  ExpectedGap out{0.0, 0.0};
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    const double s = decomp.eigenvalues[i];
    if (s <= 0.0) {
      throw input_error("expected_gap_sq: requires strictly positive eigenvalues");
    }
    const double m = second_moment_weight(scenario, {}, s, i);
    const double d = gap_filter(s, t);
    out.gap_sq += w[i] * w[i] * d * d * m / (s * s);
    out.reference += w[i] * w[i] * m / (s * s);
  }
  return out;
}

double risk_closed_form(const SpectralDecomposition& decomp,
                        const RiskScenario& scenario, double t, RiskMethod method,
                        RiskSpace space) {
  if (!(t > 0.0)) throw input_error("risk_closed_form: t must be positive");
  Eigen::VectorXd u_t_alpha0;
  if (scenario.mode == RiskScenario::Mode::fixed) {
    if (scenario.alpha0.size() != decomp.size()) {
      throw input_error("risk_closed_form: alpha0 size mismatch");
    }
    u_t_alpha0 = decomp.eigenvectors.transpose() * scenario.alpha0;
  }
  const double noise_var = scenario.noise_sd * scenario.noise_sd;

  double risk = 0.0;
  for (Eigen::Index i = 0; i < decomp.size(); ++i) {
    const double s = decomp.eigenvalues[i];
    const double b = bias_weight(scenario, u_t_alpha0, s, i);
    double bias_factor, var_term;
    if (method == RiskMethod::kgf) {
      const double e = std::exp(-t * s);
      bias_factor = e * e;
      var_term = space == RiskSpace::parameter
                     ? phi_stable(s, t) * phi_stable(s, t)
                     : (1.0 - e) * (1.0 - e);
    } else {
      const double denom = t * s + 1.0;
      bias_factor = 1.0 / (denom * denom);
      var_term = space == RiskSpace::parameter
                     ? t * t / (denom * denom)
                     : t * t * s * s / (denom * denom);
    }
    const double bias_weight_s = space == RiskSpace::parameter ? 1.0 : s * s;
    risk += b * bias_weight_s * bias_factor + noise_var * var_term;
  }
  return risk;
}

double out_of_sample_risk(const SpectralDecomposition& decomp,
                          const RiskScenario& scenario, double t,
                          RiskMethod method, const Eigen::VectorXd& probe) {
  if (!(t > 0.0)) throw input_error("out_of_sample_risk: t must be positive");
  if (probe.size() != decomp.size())
    throw input_error("out_of_sample_risk: probe size mismatch");
  if (scenario.mode == RiskScenario::Mode::fixed) {
    throw input_error("out_of_sample_risk: scenario must model alpha0 as random");
  }
  const Eigen::VectorXd w = decomp.eigenvectors.transpose() * probe;
  const double noise_var = scenario.noise_sd * scenario.noise_sd;
  double risk = 0.0;
  for (Eigen::Index i = 0; i < decomp.size(); ++i) {
    const double s = decomp.eigenvalues[i];
    const double b = bias_weight(scenario, {}, s, i);
    double bias_factor, var_factor;
    if (method == RiskMethod::kgf) {
      const double e = std::exp(-t * s);
      bias_factor = e * e;
      var_factor = phi_stable(s, t) * phi_stable(s, t);
    } else {
      const double denom = t * s + 1.0;
      bias_factor = 1.0 / (denom * denom);
      var_factor = t * t / (denom * denom);
    }
    risk += w[i] * w[i] * (b * bias_factor + noise_var * var_factor);
  }
  return risk;
}

RiskRatioReport check_risk_ratio(const SpectralDecomposition& decomp,
                                 const RiskScenario& scenario,
                                 const std::vector<double>& t_grid,
                                 const Eigen::MatrixXd& probes) {
  RiskRatioReport report;
  report.t_grid = t_grid;
  report.bound = 1.6862;
  for (double t : t_grid) {
    for (RiskSpace space : {RiskSpace::parameter, RiskSpace::prediction}) {
      const double kgf = risk_closed_form(decomp, scenario, t, RiskMethod::kgf, space);
      const double krr = risk_closed_form(decomp, scenario, t, RiskMethod::krr, space);
      const double ratio = krr > 0.0 ? kgf / krr : 0.0;
      (space == RiskSpace::parameter ? report.parameter_ratio
                                     : report.prediction_ratio)
          .push_back(ratio);
      report.max_ratio = std::max(report.max_ratio, ratio);
    }
    double worst_probe = 0.0;
    for (Eigen::Index i = 0; i < probes.rows(); ++i) {
      const double kgf = out_of_sample_risk(decomp, scenario, t, RiskMethod::kgf,
                                            probes.row(i).transpose());
      const double krr = out_of_sample_risk(decomp, scenario, t, RiskMethod::krr,
                                            probes.row(i).transpose());
      if (krr > 0.0) worst_probe = std::max(worst_probe, kgf / krr);
    }
    if (probes.rows() > 0) {
      report.out_of_sample_ratio.push_back(worst_probe);
      report.max_ratio = std::max(report.max_ratio, worst_probe);
    }
  }
  report.pass = report.max_ratio <= report.bound + 1e-9;
  return report;
}

ShrinkageExtremes shrinkage_extremes(double s_min, double s_max, double t) {
  if (!(s_min > 0.0) || s_max < s_min) {
    throw input_error("shrinkage_extremes: need 0 < s_min <= s_max");
  }
  if (t < 0.0) throw input_error("shrinkage_extremes: t must be nonnegative");
  ShrinkageExtremes out;
  out.kgf_residual = std::exp(-t * s_min);
  out.krr_residual = 1.0 / (1.0 + t * s_min);
  out.krr_shrinkage = 1.0 - 1.0 / (1.0 + t * s_max);
  out.kgf_shrinkage = 1.0 - std::exp(-t * s_max);
  // The analytic gaps are O((ts)^2) near ts = 0, below double round-off, so
  // the ordering is asserted up to one part in 1e-12.
  const double slack = 1e-15;
  out.ordered =
      out.kgf_residual <= out.krr_residual * (1.0 + 1e-12) + slack &&
      out.krr_shrinkage <= out.kgf_shrinkage * (1.0 + 1e-12) + slack;
  return out;
}

Eigen::VectorXd diag_signflow(const Eigen::VectorXd& k_diag,
                              const Eigen::VectorXd& y, double t,
                              SignflowSpace space) {
  if (t < 0.0) throw input_error("diag_signflow: t must be nonnegative");
  if ((k_diag.array() <= 0.0).any()) {
    throw input_error("diag_signflow: diagonal must be strictly positive");
  }
  if (space == SignflowSpace::alpha) {
    if (k_diag.size() != y.size()) throw input_error("diag_signflow: size mismatch");
    Eigen::VectorXd out(y.size());
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      const double target = y[i] / k_diag[i];
      out[i] = (target > 0.0 ? 1.0 : (target < 0.0 ? -1.0 : 0.0)) *
               std::min(t, std::abs(target));
    }
    return out;
  }
  if (k_diag.size() < y.size()) {
    throw input_error("diag_signflow: f space needs k_diag covering all coordinates");
  }
  Eigen::VectorXd out = Eigen::VectorXd::Zero(k_diag.size());
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    out[i] = (y[i] > 0.0 ? 1.0 : (y[i] < 0.0 ? -1.0 : 0.0)) *
             std::min(t, std::abs(y[i]));
  }
  return out;
}

ExplicitFeatureMap feature_map(const SpectralDecomposition& decomp) {
  Eigen::VectorXd roots(decomp.size());
  for (Eigen::Index i = 0; i < decomp.size(); ++i) {
    roots[i] = std::sqrt(std::max(decomp.eigenvalues[i], 0.0));
  }
  return ExplicitFeatureMap{decomp.eigenvectors * roots.asDiagonal()};
}

MonteCarloRisk monte_carlo_risk(const SpectralDecomposition& decomp,
                                const Eigen::VectorXd& alpha0, double noise_sd,
                                double t, RiskMethod method, std::size_t draws,
                                RandomStream& stream) {
  if (draws < 2) throw input_error("monte_carlo_risk: need at least 2 draws");
  const Eigen::Index n = decomp.size();
  if (alpha0.size() != n) throw input_error("monte_carlo_risk: alpha0 size mismatch");

  Eigen::VectorXd gains(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double s = decomp.eigenvalues[i];
    gains[i] = method == RiskMethod::kgf ? phi_stable(s, t) : 1.0 / (s + 1.0 / t);
  }
  const Eigen::VectorXd mean_y =
      decomp.eigenvectors *
      (decomp.eigenvalues.array() *
       (decomp.eigenvectors.transpose() * alpha0).array())
          .matrix();

  double sum = 0.0, sum_sq = 0.0;
  Eigen::VectorXd y(n), alpha_hat(n);
  for (std::size_t d = 0; d < draws; ++d) {
    for (Eigen::Index i = 0; i < n; ++i) {
      y[i] = mean_y[i] + noise_sd * stream.next_normal();
    }
    alpha_hat = decomp.eigenvectors *
                (gains.array() * (decomp.eigenvectors.transpose() * y).array())
                    .matrix();
    const double loss = (alpha_hat - alpha0).squaredNorm();
    sum += loss;
    sum_sq += loss * loss;
  }
  const double mean = sum / static_cast<double>(draws);
  const double var =
      (sum_sq - sum * sum / static_cast<double>(draws)) /
      static_cast<double>(draws - 1);
  return MonteCarloRisk{mean, std::sqrt(std::max(var, 0.0) / static_cast<double>(draws))};
}

}  // namespace kernelflow
