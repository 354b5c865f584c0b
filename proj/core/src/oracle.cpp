#include "dgtd/oracle.hpp"

#include <algorithm>
#include <cmath>

#include "dgtd/engine.hpp"

namespace dgtd {

VectorXd flatten(const StackedIterate& it) {
  const Eigen::Index n = it.size();
  it.check_size(n);
  VectorXd x(4 * n);
  x << it.theta, it.v, it.mu, it.w;
  return x;
}

StackedIterate unflatten(const VectorXd& x, Eigen::Index block_size) {
  require(x.size() == 4 * block_size, ErrorKind::DimensionMismatch,
          "flat iterate must have length 4 N q");
  return {x.segment(0, block_size), x.segment(block_size, block_size),
          x.segment(2 * block_size, block_size), x.segment(3 * block_size, block_size)};
}

DeterministicResult deterministic_primal_dual(const SaddleProblem& p,
                                              const DeterministicOptions& options) {
  require(options.alpha > 0.0, ErrorKind::DomainError, "step size must be positive");
  require(options.iterations >= 1 && options.first_checkpoint >= 1, ErrorKind::DomainError,
          "iteration counts must be positive");

  StackedIterate x = options.initial ? *options.initial
                                     : StackedIterate::zeros(p.num_agents(), p.dim());
  x.check_size(p.stacked_size());
  x = project_boxes(p.boxes, x);

  DeterministicResult out;
  StackedIterate epoch_sum = StackedIterate::zeros(p.num_agents(), p.dim());
  long epoch_start = 0;
  long next_checkpoint = std::min(options.first_checkpoint, options.iterations);
  out.averaged = x;
  for (long k = 0; k < options.iterations; ++k) {
    epoch_sum += x;
    x = primal_dual_update(p.boxes, x, exact_gradients(p, x), options.alpha);
    if (k + 1 == next_checkpoint) {
      out.averaged = (1.0 / static_cast<double>(k + 1 - epoch_start)) * epoch_sum;
      out.checkpoints.push_back({k + 1, saddle_gap(p, out.averaged).gap});
      epoch_sum = StackedIterate::zeros(p.num_agents(), p.dim());
      epoch_start = k + 1;
      next_checkpoint = std::min(2 * next_checkpoint, options.iterations);
    }
  }
  out.last = x;
  out.final_gap = out.checkpoints.back().gap;
  if (options.require_convergence) {
    require(out.final_gap <= options.gap_tolerance, ErrorKind::NoConvergence,
            "deterministic primal-dual gap " + std::to_string(out.final_gap) + " after " +
                std::to_string(options.iterations) + " iterations");
  }
  return out;
}

StackedIterate brute_force_kkt(const SaddleProblem& p) {
  const Eigen::Index nq = p.stacked_size();
  require(nq <= kBruteForceLimit, ErrorKind::DimensionMismatch,
          "brute-force KKT is limited to N q <= " + std::to_string(kBruteForceLimit));
  const int n = p.num_agents();
  const int q = p.dim();
  const MatrixXd L = p.mean_block.dense();
  const MatrixXd I = MatrixXd::Identity(nq, nq);
  MatrixXd G = MatrixXd::Zero(nq, nq);
  MatrixXd B = MatrixXd::Zero(nq, nq);
  for (int i = 0; i < n; ++i) {
    G.block(i * q, i * q, q, q) = p.mats.gram;
    B.block(i * q, i * q, q, q) = p.mats.B;
  }

  // Unknown order (theta, v, mu, w); one block row per gradient.
  MatrixXd K = MatrixXd::Zero(4 * nq, 4 * nq);
  VectorXd rhs = VectorXd::Zero(4 * nq);
  K.block(0, 0, nq, nq) = G;
  K.block(0, 3 * nq, nq, nq) = B;
  rhs.head(nq) = p.phi_d_rewards;
  K.block(nq, nq, nq, nq) = I;
  K.block(nq, 3 * nq, nq, nq) = -L;
  K.block(2 * nq, 2 * nq, nq, nq) = p.rho * I;
  K.block(2 * nq, 3 * nq, nq, nq) = -L;
  K.block(3 * nq, 0, nq, nq) = B.transpose();
  K.block(3 * nq, nq, nq, nq) = -L;
  K.block(3 * nq, 2 * nq, nq, nq) = -L;
  K.block(3 * nq, 3 * nq, nq, nq) = -p.kappa * L - p.rho * I;

  Eigen::CompleteOrthogonalDecomposition<MatrixXd> cod(K);
  cod.setThreshold(1e-11);
  // With rho = 0 the multiplier is free along the consensus subspace, which
  // has dimension q on a connected graph; nothing else may be singular.
  const Eigen::Index expected_rank = 4 * nq - (p.rho == 0.0 ? q : 0);
  require(cod.rank() == expected_rank, ErrorKind::SingularSystem,
          "stationarity system has rank " + std::to_string(cod.rank()) + ", expected " +
              std::to_string(expected_rank));
  const VectorXd x = cod.solve(rhs);
  const double residual = (K * x - rhs).cwiseAbs().maxCoeff();
  require(residual <= 1e-8 * std::max(1.0, rhs.cwiseAbs().maxCoeff()), ErrorKind::SingularSystem,
          "stationarity system is inconsistent (residual " + std::to_string(residual) + ")");
  return unflatten(x, nq);
}

VectorXd finite_difference_gradient(const std::function<double(const VectorXd&)>& f,
                                    const VectorXd& point, double step) {
  require(step > 0.0, ErrorKind::DomainError, "finite-difference step must be positive");
  VectorXd grad(point.size());
  VectorXd x = point;
  for (Eigen::Index j = 0; j < point.size(); ++j) {
    x(j) = point(j) + step;
    const double up = f(x);
    x(j) = point(j) - step;
    const double down = f(x);
    x(j) = point(j);
    grad(j) = (up - down) / (2.0 * step);
  }
  return grad;
}

}  // namespace dgtd
