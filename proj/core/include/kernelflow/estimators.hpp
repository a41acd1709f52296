#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <variant>

#include "kernelflow/kernels.hpp"
#include "kernelflow/spectral.hpp"

namespace kernelflow {

/// Which regularization coordinate produced a set of dual coefficients.
namespace reg {
struct Ridge {
  double lambda;
};
struct FlowTime {
  double t;
  double momentum = 0.0;
};
struct ProxPenalty {
  double lambda;
  bool l1;  // false: l-infinity
};
struct Steps {
  std::size_t count;
  double step_size;
};
}  // namespace reg

using Regularizer =
    std::variant<reg::Ridge, reg::FlowTime, reg::ProxPenalty, reg::Steps>;

/// Dual weight vector alpha together with the regularizer that produced it and
/// a snapshot of the kernel it was fitted under.
struct DualCoefficients {
  Eigen::VectorXd alpha;
  Regularizer regularizer;
  KernelSpec kernel;
};

/// A fitted model keeps the training inputs so new points can be scored via
/// the cross-kernel matrix.
struct FitModel {
  DualCoefficients dual;
  Eigen::MatrixXd training_inputs;
};

/// Ridge solution (K + lambda I)^{-1} y, computed through the spectral filter.
DualCoefficients fit_krr(const SpectralDecomposition& decomp,
                         const Eigen::VectorXd& y, double lambda,
                         const KernelSpec& spec = {});
DualCoefficients fit_krr(const KernelMatrix& K, const Eigen::VectorXd& y,
                         double lambda, const KernelSpec& spec = {});

/// Gradient-flow solution (I - exp(-tK/(1-gamma))) K^{-1} y; alpha(0) = 0.
DualCoefficients fit_kgf(const SpectralDecomposition& decomp,
                         const Eigen::VectorXd& y, double t, double gamma = 0.0,
                         const KernelSpec& spec = {});
DualCoefficients fit_kgf(const KernelMatrix& K, const Eigen::VectorXd& y,
                         double t, double gamma = 0.0,
                         const KernelSpec& spec = {});

/// k(x*, X_train) alpha for each row of Xstar.
Eigen::VectorXd predict(const FitModel& model, const KernelSpec& spec,
                        const Eigen::MatrixXd& Xstar);
Eigen::VectorXd predict(const FitModel& model, const Eigen::MatrixXd& Xstar);

}  // namespace kernelflow
