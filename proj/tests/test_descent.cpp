#include <cmath>
#include <sstream>

#include "doctest.h"
#include "kernelflow/descent.hpp"
#include "kernelflow/errors.hpp"
#include "kernelflow/estimators.hpp"
#include "kernelflow/rng.hpp"

using namespace kernelflow;

namespace {

Eigen::MatrixXd random_gaussian_K(int n, std::uint64_t seed, double jitter = 0.0) {
  RandomStream stream(seed);
  Eigen::MatrixXd X(n, 1);
  for (int i = 0; i < n; ++i) X(i, 0) = -3.0 + 6.0 * stream.next_uniform();
  return kernel_matrix(KernelSpec{}, X, jitter).matrix();
}

Eigen::VectorXd random_response(int n, std::uint64_t seed) {
  RandomStream stream(seed);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) y[i] = stream.next_normal();
  return y;
}

}  // namespace

TEST_CASE("first kgd step from zero moves by eta * y") {
  Eigen::VectorXd y(3);
  y << 1.0, -2.0, 0.5;
  DescentConfig config;
  config.method = DescentMethod::kgd;
  config.step_size = 0.125;
  config.max_steps = 1;
  config.checkpoint_stride = 1;
  const SolutionPath path =
      run_descent(Eigen::MatrixXd::Identity(3, 3), y, config);
  CHECK(path.back().alpha.isApprox(0.125 * y, 1e-15));
}

TEST_CASE("path always starts at (0, zero, norms of y)") {
  const Eigen::MatrixXd K = random_gaussian_K(8, 1);
  const Eigen::VectorXd y = random_response(8, 2);
  DescentConfig config;
  config.method = DescentMethod::ksgd;
  config.step_size = 1e-3;
  config.max_steps = 57;
  config.checkpoint_stride = 10;
  const SolutionPath path = run_descent(K, y, config);
  const PathCheckpoint& first = path.front();
  CHECK(first.step == 0);
  CHECK(first.time == 0.0);
  CHECK(first.alpha.norm() == 0.0);
  CHECK(first.residual_l1 == doctest::Approx(y.lpNorm<1>()));
  CHECK(first.residual_l2 == doctest::Approx(y.norm()));
  CHECK(first.residual_linf == doctest::Approx(y.lpNorm<Eigen::Infinity>()));
  CHECK(path.back().step == 57);
  for (std::size_t i = 1; i < path.checkpoints().size(); ++i) {
    CHECK(path.checkpoints()[i].time > path.checkpoints()[i - 1].time);
  }
}

TEST_CASE("ksgd on a 1x1 kernel follows the sign-flow ramp") {
  Eigen::MatrixXd K(1, 1);
  K << 2.0;
  Eigen::VectorXd y(1);
  y << 3.0;
  DescentConfig config;
  config.method = DescentMethod::ksgd;
  config.step_size = 1e-3;
  config.max_steps = 3000;
  config.checkpoint_stride = 1;
  const SolutionPath path = run_descent(K, y, config);
  for (double t : {0.4, 1.0, 1.4, 2.5}) {
    const double expected = std::min(t, 1.5);
    CHECK(std::abs(path.alpha_at(t)[0] - expected) <= 1e-3 + 1e-12);
  }
}

TEST_CASE("first kcd step touches exactly the max-residual coordinate") {
  const Eigen::MatrixXd K = random_gaussian_K(6, 3);
  Eigen::VectorXd y(6);
  y << 0.3, -2.0, 1.0, 0.1, -0.2, 1.9;
  DescentConfig config;
  config.method = DescentMethod::kcd;
  config.step_size = 0.01;
  config.max_steps = 1;
  config.checkpoint_stride = 1;
  const SolutionPath path = run_descent(K, y, config);
  const Eigen::VectorXd alpha = path.back().alpha;
  CHECK((alpha.array() != 0.0).count() == 1);
  CHECK(alpha[1] == doctest::Approx(-0.01));
}

TEST_CASE("kegd with mix 0 moves every coordinate like ksgd") {
  const Eigen::MatrixXd K = random_gaussian_K(7, 5);
  const Eigen::VectorXd y = random_response(7, 6);
  DescentConfig sign_config;
  sign_config.method = DescentMethod::ksgd;
  sign_config.step_size = 1e-3;
  sign_config.max_steps = 50;
  sign_config.checkpoint_stride = 1;
  DescentConfig elastic_config = sign_config;
  elastic_config.method = DescentMethod::kegd;
  elastic_config.elastic_mix = 0.0;
  elastic_config.momentum = 0.0;
  const SolutionPath sign_path = run_descent(K, y, sign_config);
  const SolutionPath elastic_path = run_descent(K, y, elastic_config);
  CHECK((sign_path.back().alpha - elastic_path.back().alpha).norm() == 0.0);
}

TEST_CASE("sign-method paths are bounded by k * eta in the max norm") {
  const Eigen::MatrixXd K = random_gaussian_K(9, 7);
  const Eigen::VectorXd y = random_response(9, 8);
  const double eta = 0x1p-10;  // dyadic step: coordinate sums stay exact
  for (DescentMethod method : {DescentMethod::ksgd, DescentMethod::kcd}) {
    DescentConfig config;
    config.method = method;
    config.step_size = eta;
    config.max_steps = 400;
    config.checkpoint_stride = 1;
    const SolutionPath path = run_descent(K, y, config);
    for (const PathCheckpoint& c : path.checkpoints()) {
      CHECK(c.alpha.lpNorm<Eigen::Infinity>() <= static_cast<double>(c.step) * eta);
    }
  }
}

TEST_CASE("divergence guard names the offending step") {
  const Eigen::MatrixXd K = random_gaussian_K(10, 9);
  const Eigen::VectorXd y = random_response(10, 10);
  DescentConfig config;
  config.method = DescentMethod::kgd;
  config.step_size = 5.0;  // far above 2/s_max for this kernel
  config.max_steps = 10000;
  config.checkpoint_stride = 100;
  CHECK_THROWS_AS(run_descent(K, y, config), divergence_error);
  try {
    run_descent(K, y, config);
  } catch (const divergence_error& e) {
    CHECK(e.step > 0);
    CHECK(std::string(e.what()).find("step") != std::string::npos);
  }
}

TEST_CASE("termination on a zero response") {
  const Eigen::MatrixXd K = random_gaussian_K(4, 11);
  DescentConfig config;
  config.method = DescentMethod::kgd;
  config.step_size = 0.1;
  const SolutionPath path = run_descent(K, Eigen::VectorXd::Zero(4), config);
  CHECK(path.checkpoints().size() == 1);
  CHECK(path.back().step == 0);
}

TEST_CASE("forced record times appear as checkpoints") {
  const Eigen::MatrixXd K = random_gaussian_K(6, 12);
  const Eigen::VectorXd y = random_response(6, 13);
  DescentConfig config;
  config.method = DescentMethod::kgd;
  config.step_size = 1e-3;
  config.max_steps = 5000;
  config.checkpoint_stride = 1000000;  // rely on forced times only
  config.record_times = {0.371, 2.0};
  const SolutionPath path = run_descent(K, y, config);
  bool saw_371 = false, saw_2000 = false;
  for (const PathCheckpoint& c : path.checkpoints()) {
    if (c.step == 371) saw_371 = true;
    if (c.step == 2000) saw_2000 = true;
  }
  CHECK(saw_371);
  CHECK(saw_2000);
}

TEST_CASE("alpha_at interpolates linearly between checkpoints") {
  std::vector<PathCheckpoint> checkpoints;
  Eigen::VectorXd a0 = Eigen::VectorXd::Zero(2);
  Eigen::VectorXd a1(2);
  a1 << 2.0, -4.0;
  checkpoints.push_back({0, 0.0, a0, 0, 0, 0});
  checkpoints.push_back({10, 1.0, a1, 0, 0, 0});
  const SolutionPath path(checkpoints);
  CHECK(path.alpha_at(0.25).isApprox(0.25 * a1, 1e-15));
  CHECK(path.alpha_at(-1.0).isApprox(a0));
  CHECK(path.alpha_at(9.0).isApprox(a1));
}

TEST_CASE("kgd path converges to the gradient-flow closed form") {
  const int n = 20;
  const Eigen::MatrixXd K = random_gaussian_K(n, 14);
  const Eigen::VectorXd y = random_response(n, 15);
  DescentConfig config;
  config.method = DescentMethod::kgd;
  config.step_size = 1e-4;
  config.max_steps = 20000;
  config.checkpoint_stride = 100;
  config.record_times = {0.5, 2.0};
  const SolutionPath path = run_descent(K, y, config);
  const SpectralDecomposition decomp = eig_sym(K);
  for (double t : {0.5, 2.0}) {
    const Eigen::VectorXd flow = fit_kgf(decomp, y, t).alpha;
    CHECK((path.alpha_at(t) - flow).norm() <= 1e-3 * (1.0 + flow.norm()));
  }
}

TEST_CASE("step_size_limit closed forms") {
  CHECK(step_size_limit(Eigen::MatrixXd::Identity(3, 3),
                        Eigen::VectorXd::Ones(3), DescentMethod::kgd) ==
        doctest::Approx(2.0));

  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(2, 2);
  D(0, 0) = 4.0;
  D(1, 1) = 1.0;
  CHECK(step_size_limit(D, Eigen::VectorXd::Ones(2), DescentMethod::kgd) ==
        doctest::Approx(0.5));

  Eigen::VectorXd residual(3);
  residual << 0.3, -0.1, 2.0;
  CHECK(step_size_limit(D, residual.head(2), DescentMethod::ksgd) ==
        doctest::Approx(0.1));
  CHECK(step_size_limit(Eigen::MatrixXd::Identity(3, 3), residual,
                        DescentMethod::kcd) == doctest::Approx(0.1));

  // kegd restricts the minimum to the admitted set.
  CHECK(step_size_limit(Eigen::MatrixXd::Identity(3, 3), residual,
                        DescentMethod::kegd, 0.9) == doctest::Approx(2.0));
  CHECK(step_size_limit(Eigen::MatrixXd::Identity(3, 3), residual,
                        DescentMethod::kegd, 0.0) == doctest::Approx(0.1));

  CHECK(step_size_limit(D, Eigen::VectorXd::Zero(2), DescentMethod::ksgd) == 0.0);
}

TEST_CASE("one safe step strictly decreases the method's residual norm") {
  // Narrow bandwidth: the sign-method bounds need the residual sign pattern
  // to survive the step, which holds when K is diagonally dominant.
  RandomStream stream(1234);
  for (int instance = 0; instance < 30; ++instance) {
    const int n = 5 + static_cast<int>(stream.next_u64() % 26);
    RandomStream xs(2000 + instance);
    Eigen::MatrixXd X(n, 1);
    for (int i = 0; i < n; ++i) X(i, 0) = -3.0 + 6.0 * xs.next_uniform();
    const Eigen::MatrixXd K =
        kernel_matrix(KernelSpec(KernelFamily::gaussian, 0.3), X, 1e-10).matrix();
    Eigen::VectorXd alpha(n), y(n);
    for (int i = 0; i < n; ++i) {
      alpha[i] = 0.5 * stream.next_normal();
      y[i] = stream.next_normal();
    }
    const Eigen::VectorXd residual = y - K * alpha;

    for (DescentMethod method :
         {DescentMethod::kgd, DescentMethod::kcd, DescentMethod::ksgd}) {
      const double limit = step_size_limit(K, residual, method);
      REQUIRE(limit > 0.0);
      const double eta = 0.99 * limit;
      Eigen::VectorXd next = alpha;
      if (method == DescentMethod::kgd) {
        next += eta * residual;
      } else if (method == DescentMethod::ksgd) {
        for (int i = 0; i < n; ++i) {
          next[i] += eta * (residual[i] > 0 ? 1.0 : (residual[i] < 0 ? -1.0 : 0.0));
        }
      } else {
        Eigen::Index m = 0;
        residual.array().abs().maxCoeff(&m);
        next[m] += eta * (residual[m] > 0 ? 1.0 : -1.0);
      }
      const Eigen::VectorXd new_residual = y - K * next;
      if (method == DescentMethod::kgd) {
        CHECK(new_residual.norm() < residual.norm());
      } else if (method == DescentMethod::ksgd) {
        CHECK(new_residual.lpNorm<1>() < residual.lpNorm<1>());
      } else {
        CHECK(new_residual.lpNorm<Eigen::Infinity>() <
              residual.lpNorm<Eigen::Infinity>());
      }
    }
  }
}

TEST_CASE("path CSV export carries the residual norms and support size") {
  Eigen::MatrixXd K(2, 2);
  K << 1.0, 0.2, 0.2, 1.0;
  Eigen::VectorXd y(2);
  y << 1.0, -1.0;
  DescentConfig config;
  config.method = DescentMethod::kcd;
  config.step_size = 0.25;
  config.max_steps = 2;
  config.checkpoint_stride = 1;
  const SolutionPath path = run_descent(K, y, config);

  std::ostringstream os;
  write_path_csv(path, os);
  const std::string text = os.str();
  CHECK(text.find("step,time,l1_residual,l2_residual,linf_residual,nnz_alpha") !=
        std::string::npos);
  CHECK(text.find("\n0,0,") != std::string::npos);
}

TEST_CASE("checkpoints convert to step-tagged dual coefficients") {
  Eigen::VectorXd alpha(2);
  alpha << 0.25, -0.5;
  const PathCheckpoint checkpoint{40, 0.04, alpha, 1.0, 1.0, 1.0};
  const DualCoefficients dual = checkpoint_coefficients(checkpoint, 1e-3);
  CHECK(dual.alpha == alpha);
  REQUIRE(std::holds_alternative<reg::Steps>(dual.regularizer));
  CHECK(std::get<reg::Steps>(dual.regularizer).count == 40);
  CHECK(std::get<reg::Steps>(dual.regularizer).step_size == 1e-3);
}

TEST_CASE("config validation") {
  const Eigen::MatrixXd K = Eigen::MatrixXd::Identity(2, 2);
  const Eigen::VectorXd y = Eigen::VectorXd::Ones(2);
  DescentConfig config;
  config.step_size = 0.0;
  CHECK_THROWS_AS(run_descent(K, y, config), input_error);
  config.step_size = 0.1;
  config.momentum = 1.0;
  CHECK_THROWS_AS(run_descent(K, y, config), input_error);
}
