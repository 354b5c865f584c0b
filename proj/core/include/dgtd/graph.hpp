#pragma once

#include <Eigen/Dense>
#include <istream>
#include <vector>

#include "dgtd/error.hpp"
#include "dgtd/rng.hpp"

namespace dgtd {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Weighted undirected edge between agents i < j (0-based).
struct Edge {
  int i = 0;
  int j = 0;
  double weight = 1.0;

  friend bool operator==(const Edge&, const Edge&) = default;
};

/// Laplacian L = H - W of a weighted undirected graph, kept both as an edge
/// list (for matrix-free products) and as a dense N x N matrix.
class LaplacianView {
 public:
  LaplacianView(int num_agents, std::vector<Edge> edges);

  int num_agents() const { return n_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const MatrixXd& laplacian() const { return laplacian_; }

  /// Second-smallest eigenvalue of L; +infinity when N = 1.
  double algebraic_connectivity() const;

  /// y = L x for x in R^N.
  VectorXd apply(const VectorXd& x) const;

 private:
  int n_;
  std::vector<Edge> edges_;
  MatrixXd laplacian_;
};

/// Block operator L (x) I_q on stacked per-agent vectors of length N q.
class StackedLaplacian {
 public:
  static constexpr Eigen::Index kDenseLimit = 512;

  StackedLaplacian(const LaplacianView& base, int block_dim);

  int num_agents() const { return n_; }
  int block_dim() const { return q_; }

  /// (L (x) I_q) x, computed edge by edge.
  VectorXd apply(const VectorXd& x) const;
  void apply_into(const VectorXd& x, VectorXd& out) const;

  /// x^T (L (x) I_q) x.
  double quadratic(const VectorXd& x) const;

  /// Dense Kronecker product; refuses N q > kDenseLimit.
  MatrixXd dense() const;

 private:
  int n_;
  int q_;
  std::vector<Edge> edges_;
  MatrixXd base_;
};

/// I.i.d. random undirected graph model. Either every base edge switches on
/// independently with its own probability, or one of a finite set of fixed
/// graphs is drawn by weight.
class GraphDistribution {
 public:
  struct Component {
    double weight = 1.0;
    std::vector<Edge> edges;  ///< Edge::weight ignored; each present edge has weight 1
  };

  /// Independent Bernoulli activation; Edge::weight is the probability.
  static GraphDistribution bernoulli(int num_agents, std::vector<Edge> edges);
  static GraphDistribution uniform_bernoulli(int num_agents,
                                             const std::vector<std::pair<int, int>>& pairs,
                                             double probability);
  static GraphDistribution mixture(int num_agents, std::vector<Component> components);

  /// Reads `i j p` lines (1-based agent labels; `#` starts a comment).
  static GraphDistribution parse_edge_list(int num_agents, std::istream& in);

  int num_agents() const { return n_; }
  bool is_mixture() const { return !components_.empty(); }
  const std::vector<Edge>& base_edges() const { return edges_; }
  const std::vector<Component>& components() const { return components_; }

  /// Writes `i j p` lines; only valid for Bernoulli distributions.
  void write_edge_list(std::ostream& out) const;

 private:
  GraphDistribution() = default;
  int n_ = 0;
  std::vector<Edge> edges_;
  std::vector<Component> components_;
  std::vector<double> component_cdf_;

  friend LaplacianView sample_graph(const GraphDistribution&, Rng&);
};

/// Laplacian of one i.i.d. draw. Edge weights of the draw are 1.
LaplacianView sample_graph(const GraphDistribution& dist, Rng& rng);

/// E[L(k)] in closed form: edge weights are activation probabilities.
LaplacianView mean_laplacian(const GraphDistribution& dist);

/// lambda_2 of the mean Laplacian; throws NotConnected when <= 1e-10.
double assert_mean_connectivity(const GraphDistribution& dist);

/// (L + 1 1^T / N)^{-1} - 1 1^T / N; throws NotConnected when the graph is not.
MatrixXd laplacian_pseudoinverse(const LaplacianView& L);

StackedLaplacian stacked_laplacian(const LaplacianView& L, int block_dim);

}  // namespace dgtd
