#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "dgtd/saddle.hpp"

namespace dgtd {

struct DeterministicOptions {
  double alpha = 0.05;
  long iterations = 200'000;
  /// Averages restart at each checkpoint first, 2 first, 4 first, ...
  long first_checkpoint = 1000;
  double gap_tolerance = 1e-6;
  /// Throw NoConvergence when the final gap exceeds the tolerance.
  bool require_convergence = true;
  std::optional<StackedIterate> initial;
};

struct Checkpoint {
  long k = 0;
  double gap = 0.0;
};

struct DeterministicResult {
  StackedIterate averaged;  ///< mean over the last completed epoch
  StackedIterate last;
  std::vector<Checkpoint> checkpoints;
  double final_gap = 0.0;
};

/// Noise-free projected primal-dual recursion on the mean graph, with a
/// constant step and epoch averages that restart at every checkpoint.
DeterministicResult deterministic_primal_dual(const SaddleProblem& p,
                                              const DeterministicOptions& options = {});

/// Largest N q accepted by brute_force_kkt.
inline constexpr Eigen::Index kBruteForceLimit = 64;

/// Dense stationarity system in (theta, v, mu, w), solved in the
/// minimum-norm least-squares sense.
StackedIterate brute_force_kkt(const SaddleProblem& p);

/// Central differences with spacing `step` in every coordinate.
VectorXd finite_difference_gradient(const std::function<double(const VectorXd&)>& f,
                                    const VectorXd& point, double step);

/// Flatten (theta, v, mu, w) into one vector and back.
VectorXd flatten(const StackedIterate& it);
StackedIterate unflatten(const VectorXd& x, Eigen::Index block_size);

}  // namespace dgtd
