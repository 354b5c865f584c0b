#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <optional>

#include "dgtd/graph.hpp"
#include "dgtd/mdp.hpp"

namespace dgtd {

/// (theta, v, mu, w), each holding N blocks of dimension q.
struct StackedIterate {
  VectorXd theta;
  VectorXd v;
  VectorXd mu;
  VectorXd w;

  static StackedIterate zeros(int num_agents, int q);

  Eigen::Index size() const { return w.size(); }
  /// Throws DimensionMismatch unless all four vectors have length `expected`.
  void check_size(Eigen::Index expected) const;

  StackedIterate& operator+=(const StackedIterate& other);
  StackedIterate& operator-=(const StackedIterate& other);
  StackedIterate& operator*=(double s);
  friend StackedIterate operator+(StackedIterate a, const StackedIterate& b) { return a += b; }
  friend StackedIterate operator-(StackedIterate a, const StackedIterate& b) { return a -= b; }
  friend StackedIterate operator*(double s, StackedIterate a) { return a *= s; }

  /// Largest absolute entry over all four vectors.
  double max_abs() const;
};

using SaddleGradient = StackedIterate;

/// Infinity-norm boxes for the four variable groups.
struct BoxConstraints {
  double radius_theta = 1.0;
  double radius_v = 1.0;
  double radius_mu = 1.0;
  double radius_w = 1.0;
  /// Set when every radius dominates the corresponding solution bound.
  bool audited = false;

  void validate() const;
};

/// Infinity-norm bounds on the saddle components (w, v, theta, mu).
struct SolutionBounds {
  double w = 0.0;
  double v = 0.0;
  double theta = 0.0;
  double mu = 0.0;
};

struct ProblemOptions {
  double kappa = 1.0;
  double rho = 0.0;
  /// Radii are box_scale * bound + box_margin unless `boxes` is given.
  double box_scale = 2.0;
  double box_margin = 1.0;
  /// Bound used for v; defaults to the theta bound.
  std::optional<double> v_bound;
  std::optional<BoxConstraints> boxes;
};

/// Everything the Lagrangian needs: per-agent MSPBE data shared across
/// agents, the mean communication graph and the two design weights.
struct SaddleProblem {
  MdpModel model;
  FeatureMap features;
  BellmanMatrices mats;
  LaplacianView mean_graph;
  StackedLaplacian mean_block;
  MatrixXd mean_pinv;
  double kappa = 1.0;
  double rho = 0.0;
  BoxConstraints boxes;
  SolutionBounds bounds;

  /// Stacked Phi^T D r_i.
  VectorXd phi_d_rewards;
  Eigen::SparseMatrix<double> gram_sparse;
  Eigen::SparseMatrix<double> b_sparse;
  Eigen::SparseMatrix<double> bt_sparse;

  int num_agents() const { return model.num_agents(); }
  int dim() const { return features.dim(); }
  Eigen::Index stacked_size() const { return static_cast<Eigen::Index>(num_agents()) * dim(); }
};

SaddleProblem make_saddle_problem(const MdpModel& model, const FeatureMap& features,
                                  const GraphDistribution& graph, const ProblemOptions& options = {});

/// psi(theta, v, mu) + [B^T theta - L v - L mu]^T w - kappa/2 w^T L w
///   + rho/2 |mu|^2 - rho/2 |w|^2, with block operators stacked over agents.
double lagrangian_value(const SaddleProblem& p, const StackedIterate& it);

SaddleGradient exact_gradients(const SaddleProblem& p, const StackedIterate& it);

/// Saddle point of the Lagrangian. For rho = 0 this is the closed form with
/// the pseudo-inverse multiplier; for rho > 0 the perturbed stationarity
/// system is solved in the eigenbasis of the mean Laplacian.
StackedIterate kkt_point(const SaddleProblem& p);

/// L mu - (I (x) B^T) theta, the residual of the multiplier equation.
VectorXd multiplier_residual(const SaddleProblem& p, const StackedIterate& it);

/// Residual of the equality-constrained primal problem after reconstructing
/// the eliminated auxiliaries as eps = (Phi^T D Phi) theta and h = v.
double auxiliary_constraint_residual(const SaddleProblem& p, const StackedIterate& it);

/// Infinity-norm bounds on the saddle components. `v_bound` is passed through.
SolutionBounds solution_bounds(const MdpModel& model, const BellmanMatrices& mats,
                               const LaplacianView& mean_graph, double v_bound);
SolutionBounds solution_bounds(const SaddleProblem& p);

/// Boxes of radius scale * bound + margin, with the audit flag set.
BoxConstraints boxes_from_bounds(const SolutionBounds& bounds, double scale, double margin);

/// Clamp every component to its box.
StackedIterate project_boxes(const BoxConstraints& boxes, const StackedIterate& it);

struct GapResult {
  double gap = 0.0;
  double sup_over_w = 0.0;  ///< sup_w L(x_hat, w)
  double inf_over_x = 0.0;  ///< inf_x L(x, w_hat)
  StackedIterate best_response;  ///< theta, v, mu from the x-problem; w from the w-problem
};

/// sup over the boxes of L(x_hat, w) - L(x, w_hat).
GapResult saddle_gap(const SaddleProblem& p, const StackedIterate& candidate);

/// L(x_hat, w*) - L(x*, w_hat): a cheap lower bound on the gap.
double gap_proxy(const SaddleProblem& p, const StackedIterate& candidate,
                 const StackedIterate& saddle);

struct ComplexityResult {
  double omega1 = 0.0;
  double omega2 = 0.0;
  double t_required = 0.0;
};

/// Iteration counts that place the averaged iterate in the epsilon-saddle
/// set with probability at least 1 - delta.
ComplexityResult sample_complexity(double epsilon, double delta, double alpha0, double C);

/// Iterations for w^T L w <= epsilon: the count above at kappa * epsilon / 2.
ComplexityResult consensus_complexity(double epsilon, double delta, double alpha0, double C,
                                      double kappa);

/// Iterations for |theta - theta*|^2 + |v|^2 <= epsilon, rescaled by the
/// spectrum of (Phi^T D Phi)^2.
ComplexityResult primal_error_complexity(double epsilon, double delta, double alpha0, double C,
                                         const MatrixXd& gram);

}  // namespace dgtd
