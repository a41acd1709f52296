#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <iosfwd>
#include <vector>

#include "kernelflow/kernels.hpp"

namespace kernelflow {

enum class DescentMethod { kgd, ksgd, kcd, kegd };

std::string descent_method_name(DescentMethod method);
DescentMethod descent_method_from_string(const std::string& name);

struct DescentConfig {
  DescentMethod method = DescentMethod::kgd;
  double step_size = 1e-4;
  double momentum = 0.0;     // gamma in [0,1)
  double elastic_mix = 0.9;  // kegd only: coordinate admitted if |g_i| >= mix * ||g||_inf
  std::size_t max_steps = 1000000;
  std::size_t checkpoint_stride = 100;
  // Effective times at which a checkpoint is forced (rounded up to the next step).
  std::vector<double> record_times;
};

struct PathCheckpoint {
  std::size_t step;
  double time;  // effective time k * eta
  Eigen::VectorXd alpha;
  double residual_l1;
  double residual_l2;
  double residual_linf;
};

/// Time-stamped alpha snapshots of one descent run. The first checkpoint is
/// always (step 0, alpha = 0, residual norms of y).
class SolutionPath {
 public:
  explicit SolutionPath(std::vector<PathCheckpoint> checkpoints);

  const std::vector<PathCheckpoint>& checkpoints() const { return checkpoints_; }
  const PathCheckpoint& front() const { return checkpoints_.front(); }
  const PathCheckpoint& back() const { return checkpoints_.back(); }

  /// Alpha at an effective time, linearly interpolated between the two
  /// neighboring checkpoints; clamped to the path's endpoints.
  Eigen::VectorXd alpha_at(double time) const;

 private:
  std::vector<PathCheckpoint> checkpoints_;
};

/// Columns: step, time, l1_residual, l2_residual, linf_residual, nnz_alpha.
void write_path_csv(const SolutionPath& path, std::ostream& out,
                    double nnz_threshold = 1e-10);

/// Iterate alpha from zero with residual g = y - K alpha:
///   kgd:  v <- gamma v + eta g,        alpha += v
///   ksgd: v <- gamma v + sign(g),      alpha += eta v
///   kcd:  single coordinate argmax|g| moves by eta sign(g_m)
///   kegd: coordinates with |g_i| >= mix ||g||_inf move by eta sign(g_i)
/// Stops at max_steps or when ||g||_inf < 1e-10 (1 + ||y||_inf). Throws
/// divergence_error if ||g||_2 exceeds 1e3 ||y||_2.
SolutionPath run_descent(const KernelMatrix& K, const Eigen::VectorXd& y,
                         const DescentConfig& config);
SolutionPath run_descent(const Eigen::MatrixXd& K, const Eigen::VectorXd& y,
                         const DescentConfig& config);

/// Largest provably safe step size at the current residual:
/// 2/s_max(K) for kgd; min_i |residual_i| for ksgd and kcd; for kegd the same
/// minimum over the admitted coordinate set. Returns 0 for sign methods once
/// the residual is exactly zero (converged).
double step_size_limit(const Eigen::MatrixXd& K, const Eigen::VectorXd& residual,
                       DescentMethod method, double elastic_mix = 0.9);

/// Package a path checkpoint as dual coefficients tagged with its step count.
struct DualCoefficients checkpoint_coefficients(const PathCheckpoint& checkpoint,
                                                double step_size,
                                                const KernelSpec& spec = {});

}  // namespace kernelflow
