#include "kernelflow/descent.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <set>

#include "kernelflow/errors.hpp"
#include "kernelflow/estimators.hpp"

namespace kernelflow {

namespace {

double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

PathCheckpoint make_checkpoint(std::size_t step, double time,
                               const Eigen::VectorXd& alpha,
                               const Eigen::VectorXd& residual) {
  return PathCheckpoint{step,
                        time,
                        alpha,
                        residual.lpNorm<1>(),
                        residual.norm(),
                        residual.lpNorm<Eigen::Infinity>()};
}

}  // namespace

std::string descent_method_name(DescentMethod method) {
  switch (method) {
    case DescentMethod::kgd: return "kgd";
    case DescentMethod::ksgd: return "ksgd";
    case DescentMethod::kcd: return "kcd";
    case DescentMethod::kegd: return "kegd";
  }
  throw input_error("unknown descent method");
}

DescentMethod descent_method_from_string(const std::string& name) {
  if (name == "kgd") return DescentMethod::kgd;
  if (name == "ksgd") return DescentMethod::ksgd;
  if (name == "kcd") return DescentMethod::kcd;
  if (name == "kegd") return DescentMethod::kegd;
  throw input_error("unknown descent method: " + name);
}

SolutionPath::SolutionPath(std::vector<PathCheckpoint> checkpoints)
    : checkpoints_(std::move(checkpoints)) {
  if (checkpoints_.empty()) throw input_error("solution path must be nonempty");
}

Eigen::VectorXd SolutionPath::alpha_at(double time) const {
  if (time <= checkpoints_.front().time) return checkpoints_.front().alpha;
  if (time >= checkpoints_.back().time) return checkpoints_.back().alpha;
  auto it = std::lower_bound(
      checkpoints_.begin(), checkpoints_.end(), time,
      [](const PathCheckpoint& c, double t) { return c.time < t; });
  const PathCheckpoint& hi = *it;
  if (hi.time == time) return hi.alpha;
  const PathCheckpoint& lo = *(it - 1);
  const double w = (time - lo.time) / (hi.time - lo.time);
  return lo.alpha + w * (hi.alpha - lo.alpha);
}

void write_path_csv(const SolutionPath& path, std::ostream& out,
                    double nnz_threshold) {
  out << "step,time,l1_residual,l2_residual,linf_residual,nnz_alpha\n";
  const auto previous = out.precision(17);
  for (const PathCheckpoint& c : path.checkpoints()) {
    const Eigen::Index nnz =
        (c.alpha.array().abs() > nnz_threshold).count();
    out << c.step << ',' << c.time << ',' << c.residual_l1 << ','
        << c.residual_l2 << ',' << c.residual_linf << ',' << nnz << '\n';
  }
  out.precision(previous);
}

SolutionPath run_descent(const KernelMatrix& K, const Eigen::VectorXd& y,
                         const DescentConfig& config) {
  return run_descent(K.matrix(), y, config);
}

SolutionPath run_descent(const Eigen::MatrixXd& K, const Eigen::VectorXd& y,
                         const DescentConfig& config) {
  const Eigen::Index n = y.size();
  if (K.rows() != n || K.cols() != n) throw input_error("run_descent: size mismatch");
  if (!(config.step_size > 0.0)) throw input_error("run_descent: step size must be positive");
  if (config.momentum < 0.0 || config.momentum >= 1.0)
    throw input_error("run_descent: momentum must be in [0,1)");
  if (config.elastic_mix < 0.0 || config.elastic_mix > 1.0)
    throw input_error("run_descent: elastic_mix must be in [0,1]");
  if (config.max_steps < 1) throw input_error("run_descent: max_steps must be positive");
  if (config.checkpoint_stride < 1)
    throw input_error("run_descent: checkpoint_stride must be positive");

  const double eta = config.step_size;
  const double gamma = config.momentum;
  const double stop_tol = 1e-10 * (1.0 + y.lpNorm<Eigen::Infinity>());
  const double diverge_limit = 1e3 * y.norm();

  std::set<std::size_t> forced_steps;
  for (double t : config.record_times) {
    if (t <= 0.0) continue;
    const double s = std::ceil(t / eta - 1e-12);
    if (s >= 1.0 && s <= static_cast<double>(config.max_steps)) {
      forced_steps.insert(static_cast<std::size_t>(s));
    }
  }

  Eigen::VectorXd alpha = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd velocity = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd g = y;

  // kcd without momentum touches one coordinate per step, so the residual can
  // be maintained incrementally; refresh periodically to cap rounding drift.
  const bool incremental =
      config.method == DescentMethod::kcd && gamma == 0.0;
  constexpr std::size_t kRefreshStride = 512;

  std::vector<PathCheckpoint> checkpoints;
  checkpoints.push_back(make_checkpoint(0, 0.0, alpha, g));

  std::size_t step = 0;
  while (step < config.max_steps) {
    if (g.lpNorm<Eigen::Infinity>() < stop_tol) break;
    ++step;

    switch (config.method) {
      case DescentMethod::kgd:
        velocity = gamma * velocity + eta * g;
        alpha += velocity;
        break;
      case DescentMethod::ksgd: {
        velocity = gamma * velocity + g.unaryExpr([](double v) { return sign(v); });
        alpha += eta * velocity;
        break;
      }
      case DescentMethod::kcd: {
        Eigen::Index m = 0;
        g.array().abs().maxCoeff(&m);
        const double dir = sign(g[m]);
        if (gamma == 0.0) {
          alpha[m] += eta * dir;
          g -= (eta * dir) * K.col(m);
        } else {
          Eigen::VectorXd move = Eigen::VectorXd::Zero(n);
          move[m] = dir;
          velocity = gamma * velocity + move;
          alpha += eta * velocity;
        }
        break;
      }
      case DescentMethod::kegd: {
        const double threshold = config.elastic_mix * g.lpNorm<Eigen::Infinity>();
        Eigen::VectorXd move(n);
        for (Eigen::Index i = 0; i < n; ++i) {
          move[i] = std::abs(g[i]) >= threshold ? sign(g[i]) : 0.0;
        }
        velocity = gamma * velocity + move;
        alpha += eta * velocity;
        break;
      }
    }

    if (!incremental || step % kRefreshStride == 0) {
      g.noalias() = y - K * alpha;
    }

    const double gnorm = g.norm();
    if (gnorm > diverge_limit) throw divergence_error(step, gnorm);

    const bool converged = g.lpNorm<Eigen::Infinity>() < stop_tol;
    if (step % config.checkpoint_stride == 0 || forced_steps.count(step) ||
        converged || step == config.max_steps) {
      if (incremental) g.noalias() = y - K * alpha;
      checkpoints.push_back(make_checkpoint(step, step * eta, alpha, g));
      if (converged) break;
    }
  }

  if (checkpoints.back().step != step) {
    if (incremental) g.noalias() = y - K * alpha;
    checkpoints.push_back(make_checkpoint(step, step * eta, alpha, g));
  }
  return SolutionPath(std::move(checkpoints));
}

DualCoefficients checkpoint_coefficients(const PathCheckpoint& checkpoint,
                                         double step_size, const KernelSpec& spec) {
  DualCoefficients dual;
  dual.alpha = checkpoint.alpha;
  dual.regularizer = reg::Steps{checkpoint.step, step_size};
  dual.kernel = spec;
  return dual;
}

double step_size_limit(const Eigen::MatrixXd& K, const Eigen::VectorXd& residual,
                       DescentMethod method, double elastic_mix) {
  if (!residual.allFinite()) throw input_error("step_size_limit: non-finite residual");
  switch (method) {
    case DescentMethod::kgd: {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(
          K, Eigen::EigenvaluesOnly);
      return 2.0 / solver.eigenvalues().maxCoeff();
    }
    case DescentMethod::ksgd:
    case DescentMethod::kcd:
      return residual.array().abs().minCoeff();
    case DescentMethod::kegd: {
      const double threshold =
          elastic_mix * residual.lpNorm<Eigen::Infinity>();
      double limit = std::numeric_limits<double>::infinity();
      for (Eigen::Index i = 0; i < residual.size(); ++i) {
        if (std::abs(residual[i]) >= threshold) {
          limit = std::min(limit, std::abs(residual[i]));
        }
      }
      return std::isfinite(limit) ? limit : 0.0;
    }
  }
  throw input_error("unknown descent method");
}

}  // namespace kernelflow
