#include "kernelflow/estimators.hpp"

#include "kernelflow/errors.hpp"

namespace kernelflow {

DualCoefficients fit_krr(const SpectralDecomposition& decomp,
                         const Eigen::VectorXd& y, double lambda,
                         const KernelSpec& spec) {
  if (!y.allFinite()) throw input_error("fit_krr: non-finite response");
  DualCoefficients dual;
  dual.alpha = apply_filter(decomp, Filter::krr(lambda), y);
  dual.regularizer = reg::Ridge{lambda};
  dual.kernel = spec;
  return dual;
}

DualCoefficients fit_krr(const KernelMatrix& K, const Eigen::VectorXd& y,
                         double lambda, const KernelSpec& spec) {
  return fit_krr(eig_sym(K), y, lambda, spec);
}

DualCoefficients fit_kgf(const SpectralDecomposition& decomp,
                         const Eigen::VectorXd& y, double t, double gamma,
                         const KernelSpec& spec) {
  if (!y.allFinite()) throw input_error("fit_kgf: non-finite response");
  DualCoefficients dual;
  dual.alpha = apply_filter(decomp, Filter::kgf(t, gamma), y);
  dual.regularizer = reg::FlowTime{t, gamma};
  dual.kernel = spec;
  return dual;
}

DualCoefficients fit_kgf(const KernelMatrix& K, const Eigen::VectorXd& y,
                         double t, double gamma, const KernelSpec& spec) {
  return fit_kgf(eig_sym(K), y, t, gamma, spec);
}

Eigen::VectorXd predict(const FitModel& model, const KernelSpec& spec,
                        const Eigen::MatrixXd& Xstar) {
  if (Xstar.cols() != model.training_inputs.cols()) {
    throw input_error("predict: feature dimension mismatch");
  }
  if (model.dual.alpha.size() != model.training_inputs.rows()) {
    throw input_error("predict: alpha length does not match training inputs");
  }
  return cross_kernel_matrix(spec, Xstar, model.training_inputs) * model.dual.alpha;
}

Eigen::VectorXd predict(const FitModel& model, const Eigen::MatrixXd& Xstar) {
  return predict(model, model.dual.kernel, Xstar);
}

}  // namespace kernelflow
