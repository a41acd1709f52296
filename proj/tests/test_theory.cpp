#include <cmath>

#include "doctest.h"
#include "kernelflow/errors.hpp"
#include "kernelflow/rng.hpp"
#include "kernelflow/theory.hpp"
#include "kernelflow/verify.hpp"

using namespace kernelflow;

namespace {

SpectralDecomposition identity_decomp(int n) {
  SpectralDecomposition d;
  d.eigenvectors = Eigen::MatrixXd::Identity(n, n);
  d.eigenvalues = Eigen::VectorXd::Ones(n);
  return d;
}

SpectralDecomposition random_gaussian_decomp(int n, std::uint64_t seed) {
  RandomStream stream(seed);
  Eigen::MatrixXd X(n, 1);
  for (int i = 0; i < n; ++i) X(i, 0) = -3.0 + 6.0 * stream.next_uniform();
  return eig_sym(kernel_matrix(KernelSpec{}, X, 1e-8));
}

}  // namespace

TEST_CASE("gap constant maximizer and value") {
  const GapConstant gc = gap_constant();
  CHECK(gc.value >= 0.0414);
  CHECK(gc.value <= 0.0416);
  CHECK(gc.x_star >= 2.50);
  CHECK(gc.x_star <= 2.53);

  // Endpoint sanity for the objective h.
  auto h = [](double x) {
    const double d = 1.0 / (1.0 + x) - std::exp(-x);
    return d * d;
  };
  CHECK(h(0.0) == 0.0);
  CHECK(h(50.0) < 1e-3);
}

TEST_CASE("gap bounds hold and vanish at t = 0") {
  const SpectralDecomposition decomp = random_gaussian_decomp(20, 3);
  RandomStream stream(4);
  Eigen::VectorXd y(20);
  for (int i = 0; i < 20; ++i) y[i] = stream.next_normal();

  const GapReport zero = check_gap_bounds(decomp, y, {0.0});
  CHECK(zero.alpha_gap_sq[0] == doctest::Approx(0.0));
  CHECK(zero.prediction_gap_sq[0] == doctest::Approx(0.0));

  std::vector<double> t_grid;
  for (double t = -2.0; t <= 3.0; t += 0.25) t_grid.push_back(std::pow(10.0, t));
  const GapReport report = check_gap_bounds(decomp, y, t_grid);
  CHECK(report.max_ratio <= 1.0 + 1e-9);
  CHECK_FALSE(report.pseudo_inverse);
}

TEST_CASE("gap bound is tight on the identity at t = x*") {
  const GapConstant gc = gap_constant();
  const GapReport report = check_gap_bounds(
      identity_decomp(3), Eigen::VectorXd::Unit(3, 0), {gc.x_star});
  CHECK(report.max_ratio >= 0.999);
  CHECK(report.max_ratio <= 1.0 + 1e-9);
}

TEST_CASE("expected gap bounds for random alpha0 hold on both probe kinds") {
  const SpectralDecomposition decomp = random_gaussian_decomp(15, 7);
  const double constant = gap_constant().value;
  for (const RiskScenario& scenario :
       {RiskScenario::isotropic(1.0, 0.5), RiskScenario::feature_space(2.0, 0.1)}) {
    for (double t : {0.2, 2.0, 20.0}) {
      for (int i = 0; i < 15; ++i) {
        const ExpectedGap gap =
            expected_gap_sq(decomp, scenario, t, Eigen::VectorXd::Unit(15, i));
        CHECK(gap.gap_sq <= constant * gap.reference * (1.0 + 1e-9));
      }
    }
  }
}

TEST_CASE("closed-form risks on the identity kernel") {
  const SpectralDecomposition id = identity_decomp(2);
  const RiskScenario scenario = RiskScenario::fixed(Eigen::VectorXd::Unit(2, 0), 0.0);
  CHECK(risk_closed_form(id, scenario, 1.0, RiskMethod::kgf) ==
        doctest::Approx(std::exp(-2.0)).epsilon(1e-12));
  CHECK(risk_closed_form(id, scenario, 1.0, RiskMethod::krr) ==
        doctest::Approx(0.25).epsilon(1e-12));

  // Bias vanishes as t grows.
  CHECK(risk_closed_form(id, scenario, 1e8, RiskMethod::kgf) <= 1e-12);
  CHECK(risk_closed_form(id, scenario, 1e8, RiskMethod::krr) <= 1e-12);

  // Pure-variance risk is increasing in t.
  const RiskScenario noise_only =
      RiskScenario::fixed(Eigen::VectorXd::Zero(2), 1.0);
  double previous = 0.0;
  for (double t : {0.1, 0.5, 2.0, 10.0}) {
    const double risk = risk_closed_form(id, noise_only, t, RiskMethod::kgf);
    CHECK(risk > previous);
    previous = risk;
  }
}

TEST_CASE("risk ratio stays within the certified constant") {
  const SpectralDecomposition id = identity_decomp(2);
  const RiskScenario scenario = RiskScenario::fixed(Eigen::VectorXd::Unit(2, 0), 0.0);
  const RiskRatioReport point = check_risk_ratio(id, scenario, {1.0});
  CHECK(point.parameter_ratio[0] ==
        doctest::Approx(std::exp(-2.0) / 0.25).epsilon(1e-10));
  CHECK(point.pass);

  const SpectralDecomposition decomp = random_gaussian_decomp(18, 9);
  RandomStream stream(10);
  Eigen::VectorXd alpha0(18);
  for (int i = 0; i < 18; ++i) alpha0[i] = stream.next_normal();
  alpha0.normalize();
  std::vector<double> t_grid;
  for (double e = -2.0; e <= 3.0; e += 0.5) t_grid.push_back(std::pow(10.0, e));
  for (double noise : {0.0, 0.1, 1.0}) {
    const RiskRatioReport report =
        check_risk_ratio(decomp, RiskScenario::fixed(alpha0, noise), t_grid);
    CHECK(report.max_ratio <= 1.6862 + 1e-9);
    CHECK(report.pass);
  }

  // Variance-only ratios are also covered by the constant.
  const RiskRatioReport noise_report = check_risk_ratio(
      decomp, RiskScenario::fixed(Eigen::VectorXd::Zero(18), 3.0), t_grid);
  CHECK(noise_report.max_ratio <= 1.6862 + 1e-9);
}

TEST_CASE("singular directions fall back to the pseudo-inverse convention") {
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(2, 2);
  D(0, 0) = 1.0;
  const SpectralDecomposition decomp = eig_sym(D);
  Eigen::VectorXd y(2);
  y << 1.0, 0.5;
  const GapReport report = check_gap_bounds(decomp, y, {0.5, 2.0});
  CHECK(report.pseudo_inverse);
  CHECK(report.max_ratio <= 1.0 + 1e-9);
}

TEST_CASE("out-of-sample risk ratio stays within the certified constant") {
  const SpectralDecomposition decomp = random_gaussian_decomp(14, 19);
  RandomStream stream(20);
  Eigen::MatrixXd X(14, 1);
  for (int i = 0; i < 14; ++i) X(i, 0) = -3.0 + 6.0 * stream.next_uniform();
  Eigen::MatrixXd fresh(4, 1);
  for (int i = 0; i < 4; ++i) fresh(i, 0) = -3.0 + 6.0 * stream.next_uniform();
  const CrossKernelMatrix probes = cross_kernel_matrix(KernelSpec{}, fresh, X);

  std::vector<double> t_grid;
  for (double e = -2.0; e <= 3.0; e += 0.5) t_grid.push_back(std::pow(10.0, e));
  const RiskRatioReport report = check_risk_ratio(
      decomp, RiskScenario::isotropic(1.0, 0.4), t_grid, probes);
  REQUIRE(report.out_of_sample_ratio.size() == t_grid.size());
  CHECK(report.max_ratio <= 1.6862 + 1e-9);
  CHECK(report.pass);

  // Probe risks are consistent with the parameter risk when the probe spans
  // all coordinates equally: identity probes reduce to the parameter risk.
  const SpectralDecomposition id = identity_decomp(2);
  const RiskScenario scenario = RiskScenario::isotropic(0.7, 0.2);
  const double via_probe =
      out_of_sample_risk(id, scenario, 1.3, RiskMethod::kgf,
                         Eigen::VectorXd::Unit(2, 0)) +
      out_of_sample_risk(id, scenario, 1.3, RiskMethod::kgf,
                         Eigen::VectorXd::Unit(2, 1));
  CHECK(via_probe == doctest::Approx(risk_closed_form(id, scenario, 1.3,
                                                      RiskMethod::kgf))
                         .epsilon(1e-12));
}

TEST_CASE("Monte-Carlo risk agrees with the closed form") {
  const SpectralDecomposition decomp = random_gaussian_decomp(10, 11);
  RandomStream alpha_stream(12);
  Eigen::VectorXd alpha0(10);
  for (int i = 0; i < 10; ++i) alpha0[i] = alpha_stream.next_normal();
  alpha0.normalize();

  const double noise = 0.3;
  const RiskScenario scenario = RiskScenario::fixed(alpha0, noise);
  for (RiskMethod method : {RiskMethod::kgf, RiskMethod::krr}) {
    const double exact = risk_closed_form(decomp, scenario, 1.5, method);
    RandomStream stream(13);
    const MonteCarloRisk mc =
        monte_carlo_risk(decomp, alpha0, noise, 1.5, method, 800, stream);
    CHECK(std::abs(mc.mean - exact) <= 5.0 * mc.std_error);
  }
}

TEST_CASE("shrinkage extremes") {
  const ShrinkageExtremes at_zero = shrinkage_extremes(0.5, 2.0, 0.0);
  CHECK(at_zero.kgf_residual == 1.0);
  CHECK(at_zero.krr_residual == 1.0);
  CHECK(at_zero.krr_shrinkage == 0.0);
  CHECK(at_zero.kgf_shrinkage == 0.0);
  CHECK(at_zero.ordered);

  const ShrinkageExtremes unit = shrinkage_extremes(1.0, 1.0, 1.0);
  CHECK(unit.kgf_residual == doctest::Approx(std::exp(-1.0)));
  CHECK(unit.krr_residual == doctest::Approx(0.5));
  CHECK(unit.krr_shrinkage == doctest::Approx(0.5));
  CHECK(unit.kgf_shrinkage == doctest::Approx(1.0 - std::exp(-1.0)));
  CHECK(unit.ordered);

  const ShrinkageExtremes late = shrinkage_extremes(0.5, 2.0, 1e9);
  CHECK(late.kgf_residual == doctest::Approx(0.0));
  CHECK(late.krr_residual == doctest::Approx(0.0).epsilon(1e-8));
  CHECK(late.krr_shrinkage == doctest::Approx(1.0));
  CHECK(late.kgf_shrinkage == doctest::Approx(1.0));
}

TEST_CASE("diagonal sign-flow closed form") {
  Eigen::VectorXd k(1), y(1);
  k << 2.0;
  y << 3.0;
  CHECK(diag_signflow(k, y, 1.0, SignflowSpace::alpha)[0] == doctest::Approx(1.0));
  CHECK(diag_signflow(k, y, 2.0, SignflowSpace::alpha)[0] == doctest::Approx(1.5));
  CHECK(diag_signflow(k, y, 0.0, SignflowSpace::alpha)[0] == 0.0);

  Eigen::VectorXd k_full(4), y_train(2);
  k_full << 1.0, 2.0, 0.5, 3.0;
  y_train << -0.8, 2.0;
  const Eigen::VectorXd f = diag_signflow(k_full, y_train, 1.0, SignflowSpace::f);
  CHECK(f[0] == doctest::Approx(-0.8));
  CHECK(f[1] == doctest::Approx(1.0));
  CHECK(f[2] == 0.0);
  CHECK(f[3] == 0.0);
}

TEST_CASE("feature map factors the kernel") {
  const SpectralDecomposition decomp = random_gaussian_decomp(16, 17);
  const Eigen::MatrixXd K = decomp.eigenvectors *
                            decomp.eigenvalues.asDiagonal() *
                            decomp.eigenvectors.transpose();
  const Eigen::MatrixXd phi = feature_map(decomp).phi;
  CHECK((phi * phi.transpose() - K).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("scenario validation") {
  CHECK_THROWS_AS(RiskScenario::isotropic(-1.0, 0.1), input_error);
  CHECK_THROWS_AS(RiskScenario::fixed(Eigen::VectorXd::Zero(2), -0.5), input_error);
  const SpectralDecomposition id = identity_decomp(2);
  CHECK_THROWS_AS(
      risk_closed_form(id, RiskScenario::fixed(Eigen::VectorXd::Zero(3), 0.1), 1.0,
                       RiskMethod::kgf),
      input_error);
}

TEST_CASE("verification drivers pass on small instance counts") {
  for (int prop : {1, 2, 3, 4, 5, 6, 8}) {
    const std::vector<PropositionReport> reports = run_verification({prop}, 3, 42);
    REQUIRE(reports.size() == 1);
    CHECK(reports[0].proposition == prop);
    CHECK(reports[0].pass);
  }
}
