#pragma once

#include <Eigen/Dense>
#include <vector>

#include "dgtd/error.hpp"

namespace dgtd {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Policy-evaluated multi-agent Markov chain. Actions are already
/// marginalized under the fixed joint policy, so only P^pi and the
/// state-indexed expected rewards of each agent remain.
struct MdpModel {
  MatrixXd transition;                 ///< row-stochastic |S| x |S|
  std::vector<VectorXd> agent_rewards; ///< one |S| vector per agent, entries in [0, sigma]
  double sigma = 1.0;
  double gamma = 0.9;

  int num_states() const { return static_cast<int>(transition.rows()); }
  int num_agents() const { return static_cast<int>(agent_rewards.size()); }

  /// (1/N) sum_i r_i.
  VectorXd average_reward() const;

  /// Throws InvalidModel when any invariant fails.
  void validate() const;
};

/// |S| x q feature matrix; row s is phi(s).
struct FeatureMap {
  MatrixXd phi;

  int dim() const { return static_cast<int>(phi.cols()); }
  int num_states() const { return static_cast<int>(phi.rows()); }

  /// Throws SingularGram when phi is not of full column rank.
  void validate() const;
};

struct BellmanMatrices {
  MatrixXd phi;
  VectorXd d;   ///< stationary distribution
  MatrixXd D;   ///< diag(d)
  double xi = 0.0;  ///< min_s d(s)
  MatrixXd gram;  ///< Phi^T D Phi
  MatrixXd Pi;    ///< Phi (Phi^T D Phi)^{-1} Phi^T D
  MatrixXd B;     ///< Phi^T D (I - gamma P) Phi
};

struct StationaryOptions {
  long max_iterations = 1'000'000;
  double tolerance = 1e-12;
};

/// Stationary distribution of an ergodic chain by damped power iteration on
/// (P + I)/2, with a direct null-space solve as fallback.
VectorXd stationary_distribution(const MdpModel& model, const StationaryOptions& options = {});

BellmanMatrices assemble_bellman(const MdpModel& model, const FeatureMap& features);

/// 1/2 || Pi (r_i + gamma P Phi w) - Phi w ||_D^2 for agent `agent`.
double mspbe(const VectorXd& w, int agent, const BellmanMatrices& mats, const MdpModel& model);

/// sum_i MSPBE_i(w_i) for the stacked per-agent weights.
double distributed_objective(const VectorXd& w_stacked, const BellmanMatrices& mats,
                             const MdpModel& model);

/// w* = B^{-1} Phi^T D (1/N) sum_i r_i, the fixed point of the projected
/// Bellman equation for the averaged reward.
VectorXd exact_global_solution(const BellmanMatrices& mats, const MdpModel& model);

/// Pi(r_avg + gamma P Phi w) - Phi w.
VectorXd projected_bellman_residual(const VectorXd& w, const BellmanMatrices& mats,
                                    const MdpModel& model);

/// J = (I - gamma P)^{-1} r_avg, the exact value of the averaged reward.
VectorXd true_value(const MdpModel& model);

}  // namespace dgtd
