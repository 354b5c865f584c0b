#include "dgtd/graph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>
#include <string>

namespace dgtd {

namespace {

std::vector<Edge> normalize_edges(int n, std::vector<Edge> edges) {
  std::set<std::pair<int, int>> seen;
  for (auto& e : edges) {
    require(e.i != e.j, ErrorKind::InvalidModel, "self-loops are not allowed");
    if (e.i > e.j) std::swap(e.i, e.j);
    require(e.i >= 0 && e.j < n, ErrorKind::InvalidModel, "edge endpoint out of range");
    require(seen.emplace(e.i, e.j).second, ErrorKind::InvalidModel,
            "duplicate edge (" + std::to_string(e.i + 1) + ", " + std::to_string(e.j + 1) + ")");
  }
  return edges;
}

}  // namespace

LaplacianView::LaplacianView(int num_agents, std::vector<Edge> edges)
    : n_(num_agents), edges_(normalize_edges(num_agents, std::move(edges))),
      laplacian_(MatrixXd::Zero(num_agents, num_agents)) {
  require(num_agents >= 1, ErrorKind::InvalidModel, "graph needs at least one agent");
  // Diagonal entries are accumulated from the same weights as the
  // off-diagonals, so every row sums to exactly zero.
  for (const auto& e : edges_) {
    laplacian_(e.i, e.j) -= e.weight;
    laplacian_(e.j, e.i) -= e.weight;
  }
  for (int r = 0; r < n_; ++r) {
    double off = 0.0;
    for (int c = 0; c < n_; ++c) {
      if (c != r) off += laplacian_(r, c);
    }
    laplacian_(r, r) = -off;
  }
}

double LaplacianView::algebraic_connectivity() const {
  if (n_ == 1) return std::numeric_limits<double>::infinity();
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(laplacian_, Eigen::EigenvaluesOnly);
  return eig.eigenvalues()(1);
}

VectorXd LaplacianView::apply(const VectorXd& x) const {
  require(x.size() == n_, ErrorKind::DimensionMismatch, "vector length must equal N");
  VectorXd y = VectorXd::Zero(n_);
  for (const auto& e : edges_) {
    const double diff = e.weight * (x(e.i) - x(e.j));
    y(e.i) += diff;
    y(e.j) -= diff;
  }
  return y;
}

StackedLaplacian::StackedLaplacian(const LaplacianView& base, int block_dim)
    : n_(base.num_agents()), q_(block_dim), edges_(base.edges()), base_(base.laplacian()) {
  require(block_dim >= 1, ErrorKind::DimensionMismatch, "block dimension must be >= 1");
}

void StackedLaplacian::apply_into(const VectorXd& x, VectorXd& out) const {
  require(x.size() == static_cast<Eigen::Index>(n_) * q_, ErrorKind::DimensionMismatch,
          "stacked vector length must equal N q");
  out.setZero(x.size());
  for (const auto& e : edges_) {
    const auto xi = x.segment(static_cast<Eigen::Index>(e.i) * q_, q_);
    const auto xj = x.segment(static_cast<Eigen::Index>(e.j) * q_, q_);
    const VectorXd diff = e.weight * (xi - xj);
    out.segment(static_cast<Eigen::Index>(e.i) * q_, q_) += diff;
    out.segment(static_cast<Eigen::Index>(e.j) * q_, q_) -= diff;
  }
}

VectorXd StackedLaplacian::apply(const VectorXd& x) const {
  VectorXd y;
  apply_into(x, y);
  return y;
}

double StackedLaplacian::quadratic(const VectorXd& x) const {
  require(x.size() == static_cast<Eigen::Index>(n_) * q_, ErrorKind::DimensionMismatch,
          "stacked vector length must equal N q");
  double total = 0.0;
  for (const auto& e : edges_) {
    total += e.weight * (x.segment(static_cast<Eigen::Index>(e.i) * q_, q_) -
                         x.segment(static_cast<Eigen::Index>(e.j) * q_, q_))
                            .squaredNorm();
  }
  return total;
}

MatrixXd StackedLaplacian::dense() const {
  const Eigen::Index size = static_cast<Eigen::Index>(n_) * q_;
  require(size <= kDenseLimit, ErrorKind::DimensionMismatch,
          "refusing to materialize a " + std::to_string(size) + "-dimensional block Laplacian");
  MatrixXd out = MatrixXd::Zero(size, size);
  for (int r = 0; r < n_; ++r) {
    for (int c = 0; c < n_; ++c) {
      out.block(static_cast<Eigen::Index>(r) * q_, static_cast<Eigen::Index>(c) * q_, q_, q_) =
          base_(r, c) * MatrixXd::Identity(q_, q_);
    }
  }
  return out;
}

GraphDistribution GraphDistribution::bernoulli(int num_agents, std::vector<Edge> edges) {
  require(num_agents >= 1, ErrorKind::InvalidModel, "graph needs at least one agent");
  GraphDistribution dist;
  dist.n_ = num_agents;
  dist.edges_ = normalize_edges(num_agents, std::move(edges));
  for (const auto& e : dist.edges_) {
    require(e.weight > 0.0 && e.weight <= 1.0, ErrorKind::InvalidModel,
            "edge probability must lie in (0, 1]");
  }
  return dist;
}

GraphDistribution GraphDistribution::uniform_bernoulli(
    int num_agents, const std::vector<std::pair<int, int>>& pairs, double probability) {
  std::vector<Edge> edges;
  edges.reserve(pairs.size());
  for (const auto& [i, j] : pairs) edges.push_back({i, j, probability});
  return bernoulli(num_agents, std::move(edges));
}

GraphDistribution GraphDistribution::mixture(int num_agents, std::vector<Component> components) {
  require(num_agents >= 1, ErrorKind::InvalidModel, "graph needs at least one agent");
  require(!components.empty(), ErrorKind::InvalidModel, "mixture needs at least one graph");
  GraphDistribution dist;
  dist.n_ = num_agents;
  double total = 0.0;
  for (auto& c : components) {
    require(c.weight > 0.0, ErrorKind::InvalidModel, "mixture weights must be positive");
    for (auto& e : c.edges) e.weight = 1.0;
    c.edges = normalize_edges(num_agents, std::move(c.edges));
    total += c.weight;
  }
  double acc = 0.0;
  for (auto& c : components) {
    c.weight /= total;
    acc += c.weight;
    dist.component_cdf_.push_back(acc);
  }
  dist.components_ = std::move(components);
  return dist;
}

GraphDistribution GraphDistribution::parse_edge_list(int num_agents, std::istream& in) {
  std::vector<Edge> edges;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    int i = 0;
    int j = 0;
    double p = 0;
    if (!(fields >> i)) continue;
    if (!(fields >> j >> p)) {
      throw Error(ErrorKind::Config, "edge list line " + std::to_string(line_no) +
                                         ": expected `i j p`");
    }
    std::string extra;
    if (fields >> extra) {
      throw Error(ErrorKind::Config,
                  "edge list line " + std::to_string(line_no) + ": trailing content");
    }
    require(i >= 1 && j >= 1 && i <= num_agents && j <= num_agents, ErrorKind::Config,
            "edge list line " + std::to_string(line_no) + ": agent label out of range");
    edges.push_back({i - 1, j - 1, p});
  }
  return bernoulli(num_agents, std::move(edges));
}

void GraphDistribution::write_edge_list(std::ostream& out) const {
  require(!is_mixture(), ErrorKind::Config, "mixture distributions have no edge-list form");
  const auto old_precision = out.precision(17);
  for (const auto& e : edges_) out << e.i + 1 << ' ' << e.j + 1 << ' ' << e.weight << '\n';
  out.precision(old_precision);
}

LaplacianView sample_graph(const GraphDistribution& dist, Rng& rng) {
  if (dist.is_mixture()) {
    const int pick = rng.categorical(dist.component_cdf_);
    return LaplacianView(dist.n_, dist.components_[static_cast<std::size_t>(pick)].edges);
  }
  std::vector<Edge> active;
  active.reserve(dist.edges_.size());
  for (const auto& e : dist.edges_) {
    // One draw per base edge, even when p = 1, keeps the stream aligned.
    if (rng.bernoulli(e.weight)) active.push_back({e.i, e.j, 1.0});
  }
  return LaplacianView(dist.n_, std::move(active));
}

LaplacianView mean_laplacian(const GraphDistribution& dist) {
  if (!dist.is_mixture()) return LaplacianView(dist.num_agents(), dist.base_edges());
  std::vector<Edge> merged;
  for (const auto& c : dist.components()) {
    for (const auto& e : c.edges) {
      auto it = std::find_if(merged.begin(), merged.end(),
                             [&](const Edge& m) { return m.i == e.i && m.j == e.j; });
      if (it == merged.end()) {
        merged.push_back({e.i, e.j, c.weight});
      } else {
        it->weight += c.weight;
      }
    }
  }
  return LaplacianView(dist.num_agents(), std::move(merged));
}

double assert_mean_connectivity(const GraphDistribution& dist) {
  const double lambda2 = mean_laplacian(dist).algebraic_connectivity();
  require(lambda2 > 1e-10, ErrorKind::NotConnected,
          "mean connectivity graph is disconnected (lambda_2 = " + std::to_string(lambda2) + ")");
  return lambda2;
}

MatrixXd laplacian_pseudoinverse(const LaplacianView& L) {
  const int n = L.num_agents();
  const MatrixXd averaging = MatrixXd::Constant(n, n, 1.0 / n);
  const MatrixXd shifted = L.laplacian() + averaging;
  Eigen::FullPivLU<MatrixXd> lu(shifted);
  lu.setThreshold(1e-10);
  require(lu.isInvertible(), ErrorKind::NotConnected,
          "Laplacian pseudo-inverse requires a connected graph");
  return lu.inverse() - averaging;
}

StackedLaplacian stacked_laplacian(const LaplacianView& L, int block_dim) {
  return StackedLaplacian(L, block_dim);
}

}  // namespace dgtd
