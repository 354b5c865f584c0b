#include "dgtd/mdp.hpp"

#include <Eigen/SparseCore>
#include <cmath>
#include <queue>
#include <sstream>

namespace dgtd {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidModel: return "InvalidModel";
    case ErrorKind::NonErgodic: return "NonErgodic";
    case ErrorKind::SingularGram: return "SingularGram";
    case ErrorKind::SingularB: return "SingularB";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::NotConnected: return "NotConnected";
    case ErrorKind::DomainError: return "DomainError";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::SingularSystem: return "SingularSystem";
    case ErrorKind::UnknownPreset: return "UnknownPreset";
    case ErrorKind::Config: return "Config";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

namespace {

void validate_transition(const MatrixXd& P) {
  require(P.rows() > 0 && P.rows() == P.cols(), ErrorKind::InvalidModel,
          "transition matrix must be square and non-empty");
  for (Eigen::Index s = 0; s < P.rows(); ++s) {
    require(P.row(s).minCoeff() >= 0.0, ErrorKind::InvalidModel,
            "transition row " + std::to_string(s) + " has a negative entry");
    require(std::abs(P.row(s).sum() - 1.0) <= 1e-12, ErrorKind::InvalidModel,
            "transition row " + std::to_string(s) + " does not sum to 1");
  }
}

// Every state reaches every other state along positive-probability edges.
bool is_irreducible(const MatrixXd& P) {
  const Eigen::Index n = P.rows();
  auto reaches_all = [&](bool forward) {
    std::vector<char> seen(static_cast<std::size_t>(n), 0);
    std::queue<Eigen::Index> frontier;
    frontier.push(0);
    seen[0] = 1;
    Eigen::Index count = 1;
    while (!frontier.empty()) {
      const Eigen::Index s = frontier.front();
      frontier.pop();
      for (Eigen::Index t = 0; t < n; ++t) {
        const double p = forward ? P(s, t) : P(t, s);
        if (p > 0.0 && !seen[static_cast<std::size_t>(t)]) {
          seen[static_cast<std::size_t>(t)] = 1;
          ++count;
          frontier.push(t);
        }
      }
    }
    return count == n;
  };
  return reaches_all(true) && reaches_all(false);
}

VectorXd null_space_stationary(const MatrixXd& P) {
  const Eigen::Index n = P.rows();
  MatrixXd A(n + 1, n);
  A.topRows(n) = P.transpose() - MatrixXd::Identity(n, n);
  A.row(n).setOnes();
  VectorXd rhs = VectorXd::Zero(n + 1);
  rhs(n) = 1.0;
  return A.colPivHouseholderQr().solve(rhs);
}

}  // namespace

VectorXd MdpModel::average_reward() const {
  require(!agent_rewards.empty(), ErrorKind::InvalidModel, "model has no agents");
  VectorXd avg = VectorXd::Zero(num_states());
  for (const auto& r : agent_rewards) avg += r;
  return avg / static_cast<double>(agent_rewards.size());
}

void MdpModel::validate() const {
  validate_transition(transition);
  require(!agent_rewards.empty(), ErrorKind::InvalidModel, "model has no agents");
  require(sigma > 0.0, ErrorKind::InvalidModel, "sigma must be positive");
  require(gamma > 0.0 && gamma < 1.0, ErrorKind::InvalidModel, "gamma must lie in (0, 1)");
  for (std::size_t i = 0; i < agent_rewards.size(); ++i) {
    const auto& r = agent_rewards[i];
    require(r.size() == transition.rows(), ErrorKind::InvalidModel,
            "reward vector of agent " + std::to_string(i + 1) + " has wrong length");
    require(r.minCoeff() >= 0.0 && r.maxCoeff() <= sigma, ErrorKind::InvalidModel,
            "reward of agent " + std::to_string(i + 1) + " leaves [0, sigma]");
  }
}

void FeatureMap::validate() const {
  require(phi.rows() > 0 && phi.cols() > 0, ErrorKind::SingularGram, "empty feature matrix");
  require(phi.cols() <= phi.rows(), ErrorKind::SingularGram,
          "more features than states cannot be full column rank");
  Eigen::BDCSVD<MatrixXd> svd(phi);
  const auto& sv = svd.singularValues();
  require(sv(sv.size() - 1) > 1e-10 * sv(0), ErrorKind::SingularGram,
          "feature matrix is not of full column rank");
}

VectorXd stationary_distribution(const MdpModel& model, const StationaryOptions& options) {
  const MatrixXd& P = model.transition;
  validate_transition(P);
  require(is_irreducible(P), ErrorKind::NonErgodic, "transition matrix is reducible");

  const Eigen::Index n = P.rows();
  const Eigen::SparseMatrix<double> lazy_t =
      (0.5 * (P + MatrixXd::Identity(n, n))).transpose().sparseView();
  VectorXd d = VectorXd::Constant(n, 1.0 / static_cast<double>(n));
  bool converged = false;
  for (long it = 0; it < options.max_iterations; ++it) {
    VectorXd next = lazy_t * d;
    next /= next.sum();
    const double change = (next - d).lpNorm<1>();
    d.swap(next);
    if (change <= options.tolerance) {
      converged = true;
      break;
    }
  }
  if (!converged) d = null_space_stationary(P);

  require(d.minCoeff() > 1e-12, ErrorKind::NonErgodic,
          "stationary distribution has a non-positive entry");
  d /= d.sum();
  return d;
}

BellmanMatrices assemble_bellman(const MdpModel& model, const FeatureMap& features) {
  model.validate();
  features.validate();
  require(features.num_states() == model.num_states(), ErrorKind::DimensionMismatch,
          "feature matrix rows must equal the number of states");

  BellmanMatrices m;
  m.phi = features.phi;
  m.d = stationary_distribution(model);
  m.D = m.d.asDiagonal();
  m.xi = m.d.minCoeff();

  const MatrixXd& phi = features.phi;
  const Eigen::Index n = model.num_states();
  m.gram = phi.transpose() * m.D * phi;
  Eigen::SelfAdjointEigenSolver<MatrixXd> gram_eig(m.gram);
  const auto& ev = gram_eig.eigenvalues();
  require(ev(0) > 1e-12 * ev(ev.size() - 1), ErrorKind::SingularGram,
          "Phi^T D Phi is numerically singular");

  m.Pi = phi * m.gram.ldlt().solve(phi.transpose() * m.D);
  m.B = phi.transpose() * m.D * (MatrixXd::Identity(n, n) - model.gamma * model.transition) * phi;
  Eigen::BDCSVD<MatrixXd> b_svd(m.B);
  const auto& sv = b_svd.singularValues();
  require(sv(sv.size() - 1) > 1e-12, ErrorKind::SingularB, "B is numerically singular");
  return m;
}

VectorXd projected_bellman_residual(const VectorXd& w, const BellmanMatrices& mats,
                                    const MdpModel& model) {
  require(w.size() == mats.phi.cols(), ErrorKind::DimensionMismatch, "weight has wrong length");
  const VectorXd phi_w = mats.phi * w;
  return mats.Pi * (model.average_reward() + model.gamma * (model.transition * phi_w)) - phi_w;
}

double mspbe(const VectorXd& w, int agent, const BellmanMatrices& mats, const MdpModel& model) {
  require(w.size() == mats.phi.cols(), ErrorKind::DimensionMismatch, "weight has wrong length");
  require(agent >= 0 && agent < model.num_agents(), ErrorKind::DimensionMismatch,
          "agent index out of range");
  const VectorXd phi_w = mats.phi * w;
  const VectorXd target =
      mats.Pi * (model.agent_rewards[static_cast<std::size_t>(agent)] +
                 model.gamma * (model.transition * phi_w));
  const VectorXd residual = target - phi_w;
  return 0.5 * residual.dot(mats.d.cwiseProduct(residual));
}

double distributed_objective(const VectorXd& w_stacked, const BellmanMatrices& mats,
                             const MdpModel& model) {
  const Eigen::Index q = mats.phi.cols();
  require(w_stacked.size() == q * model.num_agents(), ErrorKind::DimensionMismatch,
          "stacked weight has wrong length");
  double total = 0.0;
  for (int i = 0; i < model.num_agents(); ++i) total += mspbe(w_stacked.segment(i * q, q), i, mats, model);
  return total;
}

VectorXd exact_global_solution(const BellmanMatrices& mats, const MdpModel& model) {
  Eigen::ColPivHouseholderQR<MatrixXd> qr(mats.B);
  qr.setThreshold(1e-14);
  require(qr.isInvertible(), ErrorKind::SingularB, "B is singular");
  return qr.solve(mats.phi.transpose() * mats.D * model.average_reward());
}

VectorXd true_value(const MdpModel& model) {
  const Eigen::Index n = model.num_states();
  return (MatrixXd::Identity(n, n) - model.gamma * model.transition)
      .partialPivLu()
      .solve(model.average_reward());
}

}  // namespace dgtd
