#include <Eigen/Eigenvalues>
#include <cmath>

#include "doctest.h"
#include "kernelflow/errors.hpp"
#include "kernelflow/kernels.hpp"
#include "kernelflow/rng.hpp"

using namespace kernelflow;

namespace {

Eigen::VectorXd vec1(double x) {
  Eigen::VectorXd v(1);
  v << x;
  return v;
}

Eigen::MatrixXd random_inputs(int n, int p, std::uint64_t seed) {
  RandomStream stream(seed);
  Eigen::MatrixXd X(n, p);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < p; ++j) X(i, j) = -2.0 + 4.0 * stream.next_uniform();
  }
  return X;
}

}  // namespace

TEST_CASE("eval_kernel matches the closed-form families") {
  const KernelSpec gaussian(KernelFamily::gaussian, 1.0);
  CHECK(eval_kernel(gaussian, vec1(0.3), vec1(0.3)) == doctest::Approx(1.0));
  CHECK(eval_kernel(gaussian, vec1(0.0), vec1(1.0)) ==
        doctest::Approx(std::exp(-0.5)).epsilon(1e-12));

  const KernelSpec cauchy(KernelFamily::cauchy, 1.0);
  CHECK(eval_kernel(cauchy, vec1(0.0), vec1(1.0)) == doctest::Approx(0.5));

  const KernelSpec laplace(KernelFamily::matern12, 2.0);
  CHECK(eval_kernel(laplace, vec1(0.0), vec1(2.0)) ==
        doctest::Approx(std::exp(-1.0)).epsilon(1e-12));

  // Matern 3/2 and 5/2 at r = sigma.
  const double u3 = std::sqrt(3.0);
  const KernelSpec m32(KernelFamily::matern32, 1.0);
  CHECK(eval_kernel(m32, vec1(0.0), vec1(1.0)) ==
        doctest::Approx((1.0 + u3) * std::exp(-u3)).epsilon(1e-12));
  const double u5 = std::sqrt(5.0);
  const KernelSpec m52(KernelFamily::matern52, 1.0);
  CHECK(eval_kernel(m52, vec1(0.0), vec1(1.0)) ==
        doctest::Approx((1.0 + u5 + 5.0 / 3.0) * std::exp(-u5)).epsilon(1e-12));
}

TEST_CASE("eval_kernel rejects dimension mismatch") {
  Eigen::VectorXd a(2), b(3);
  a.setZero();
  b.setZero();
  CHECK_THROWS_AS(eval_kernel(KernelSpec{}, a, b), input_error);
}

TEST_CASE("kernel spec validation") {
  CHECK_THROWS_AS(KernelSpec(KernelFamily::gaussian, 0.0), input_error);
  CHECK_THROWS_AS(KernelSpec(KernelFamily::gaussian, -1.0), input_error);
}

TEST_CASE("kernel_matrix on duplicate points is all ones") {
  Eigen::MatrixXd X(2, 3);
  X.row(0) << 1.0, 2.0, 3.0;
  X.row(1) << 1.0, 2.0, 3.0;
  for (KernelFamily family :
       {KernelFamily::gaussian, KernelFamily::matern12, KernelFamily::matern32,
        KernelFamily::matern52, KernelFamily::cauchy}) {
    const KernelMatrix K = kernel_matrix(KernelSpec(family, 0.7), X, 0.0);
    CHECK(K.matrix().isApprox(Eigen::MatrixXd::Ones(2, 2)));
  }
}

TEST_CASE("kernel_matrix closed-form 2x2 and jitter") {
  Eigen::MatrixXd X(2, 1);
  X << 0.0, 1.0;
  const KernelMatrix K = kernel_matrix(KernelSpec{}, X, 0.0);
  CHECK(K.matrix()(0, 0) == doctest::Approx(1.0));
  CHECK(K.matrix()(0, 1) == doctest::Approx(std::exp(-0.5)).epsilon(1e-14));
  CHECK(K.matrix()(1, 0) == K.matrix()(0, 1));

  const KernelMatrix J = kernel_matrix(KernelSpec{}, X, 1e-10);
  CHECK(J.matrix()(0, 0) == 1.0 + 1e-10);
  CHECK(J.matrix()(1, 1) == 1.0 + 1e-10);
  CHECK(J.jitter() == 1e-10);
}

TEST_CASE("kernel_matrix is bit-exactly symmetric and PSD") {
  const Eigen::MatrixXd X = random_inputs(37, 3, 99);
  for (KernelFamily family :
       {KernelFamily::gaussian, KernelFamily::matern12, KernelFamily::matern32,
        KernelFamily::matern52, KernelFamily::cauchy}) {
    const KernelMatrix K = kernel_matrix(KernelSpec(family, 1.3), X, 0.0);
    CHECK(K.matrix() == K.matrix().transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(K.matrix(),
                                                          Eigen::EigenvaluesOnly);
    CHECK(solver.eigenvalues().minCoeff() >= -1e-8);
  }
}

TEST_CASE("kernel values stay in (0,1] and decay with distance") {
  const Eigen::VectorXd origin = vec1(0.0);
  for (KernelFamily family :
       {KernelFamily::gaussian, KernelFamily::matern12, KernelFamily::matern32,
        KernelFamily::matern52, KernelFamily::cauchy}) {
    const KernelSpec spec(family, 0.9);
    double previous = 1.0;
    for (double r = 0.25; r < 8.0; r += 0.25) {
      const double k = eval_kernel(spec, origin, vec1(r));
      CHECK(k > 0.0);
      CHECK(k <= 1.0);
      CHECK(k < previous);
      previous = k;
    }
  }
}

TEST_CASE("cross_kernel_matrix") {
  Eigen::MatrixXd X(2, 1);
  X << 0.0, 1.0;

  SUBCASE("equals kernel_matrix when Xstar == X") {
    const CrossKernelMatrix C = cross_kernel_matrix(KernelSpec{}, X, X);
    CHECK(C.isApprox(kernel_matrix(KernelSpec{}, X, 0.0).matrix()));
  }
  SUBCASE("test point at a training point gives a unit entry") {
    Eigen::MatrixXd Xstar(1, 1);
    Xstar << 1.0;
    const CrossKernelMatrix C = cross_kernel_matrix(KernelSpec{}, Xstar, X);
    CHECK(C(0, 1) == doctest::Approx(1.0));
  }
  SUBCASE("midpoint row") {
    Eigen::MatrixXd Xstar(1, 1);
    Xstar << 0.5;
    const CrossKernelMatrix C = cross_kernel_matrix(KernelSpec{}, Xstar, X);
    CHECK(C(0, 0) == doctest::Approx(std::exp(-0.125)).epsilon(1e-14));
    CHECK(C(0, 1) == doctest::Approx(std::exp(-0.125)).epsilon(1e-14));
  }
  SUBCASE("dimension mismatch throws") {
    Eigen::MatrixXd Xstar(1, 2);
    Xstar.setZero();
    CHECK_THROWS_AS(cross_kernel_matrix(KernelSpec{}, Xstar, X), input_error);
  }
}

TEST_CASE("family names round-trip through their serialized form") {
  for (KernelFamily family :
       {KernelFamily::gaussian, KernelFamily::matern12, KernelFamily::matern32,
        KernelFamily::matern52, KernelFamily::cauchy}) {
    CHECK(family_from_string(family_name(family)) == family);
  }
  CHECK_THROWS_AS(family_from_string("rbf"), input_error);
}

TEST_CASE("median_pairwise_distance on a fixed configuration") {
  Eigen::MatrixXd X(3, 1);
  X << 0.0, 1.0, 3.0;
  // pairwise distances 1, 2, 3
  CHECK(median_pairwise_distance(X) == doctest::Approx(2.0));
}
