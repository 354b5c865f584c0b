#include "dgtd/presets.hpp"

#include <cmath>

namespace dgtd {

MdpModel chain4_model(int num_agents) {
  MdpModel m;
  m.transition.resize(4, 4);
  m.transition << 0.1, 0.5, 0.2, 0.2,
                  0.5, 0.0, 0.1, 0.4,
                  0.0, 0.9, 0.1, 0.0,
                  0.2, 0.1, 0.1, 0.6;
  m.gamma = 0.8;
  m.sigma = 50.0;
  VectorXd first(4);
  first << 0.0, 0.0, 0.0, 50.0;
  m.agent_rewards.assign(static_cast<std::size_t>(num_agents), VectorXd::Zero(4));
  m.agent_rewards.front() = first;
  return m;
}

FeatureMap chain4_features() {
  FeatureMap f;
  f.phi.resize(4, 2);
  for (int s = 1; s <= 4; ++s) {
    f.phi(s - 1, 0) = std::exp(-static_cast<double>(s * s));
    f.phi(s - 1, 1) = std::exp(-static_cast<double>((s - 4) * (s - 4)));
  }
  return f;
}

MatrixXd grid_random_walk(int rows, int cols) {
  require(rows >= 1 && cols >= 1, ErrorKind::InvalidModel, "grid needs positive dimensions");
  const int n = rows * cols;
  MatrixXd P = MatrixXd::Zero(n, n);
  constexpr int dr[] = {-1, 1, 0, 0};
  constexpr int dc[] = {0, 0, -1, 1};
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const int s = r * cols + c;
      for (int m = 0; m < 4; ++m) {
        const int nr = r + dr[m];
        const int nc = c + dc[m];
        const bool inside = nr >= 0 && nr < rows && nc >= 0 && nc < cols;
        P(s, inside ? nr * cols + nc : s) += 0.25;
      }
    }
  }
  return P;
}

namespace {

RunConfig chain4_defaults(double kappa) {
  RunConfig cfg;
  cfg.total_iterations = 50'000;
  cfg.kappa = kappa;
  cfg.schedule = {StepSizeSchedule::Kind::InverseSqrt, 10.0, 100.0};
  return cfg;
}

Scenario make_chain4() {
  // Path 1-2-3-4-5 with every link always up.
  auto graph = GraphDistribution::uniform_bernoulli(5, {{0, 1}, {1, 2}, {2, 3}, {3, 4}}, 1.0);
  return {"chain4", chain4_model(5), chain4_features(), std::move(graph), chain4_defaults(1.0),
          std::nullopt};
}

Scenario make_single_agent() {
  return {"single-agent", chain4_model(1), chain4_features(),
          GraphDistribution::bernoulli(1, {}), chain4_defaults(0.0), std::nullopt};
}

Scenario make_toy2x2() {
  MdpModel m;
  m.transition.resize(2, 2);
  m.transition << 0.5, 0.5,
                  0.25, 0.75;
  m.gamma = 0.5;
  m.sigma = 2.0;
  VectorXd r1(2), r2(2);
  r1 << 1.0, 0.0;
  r2 << 0.0, 2.0;
  m.agent_rewards = {r1, r2};
  FeatureMap f;
  f.phi.resize(2, 1);
  f.phi << 1.0, 0.5;
  RunConfig cfg;
  cfg.total_iterations = 1000;
  cfg.schedule = {StepSizeSchedule::Kind::InverseSqrt, 1.0, 1.0};
  return {"toy2x2", std::move(m), std::move(f), GraphDistribution::uniform_bernoulli(2, {{0, 1}}, 1.0),
          cfg, std::nullopt};
}

Scenario make_gridworld() {
  constexpr int kSide = 20;
  constexpr double kReward = 100.0;
  constexpr double kRange = 5.0;
  const int n = kSide * kSide;

  MdpModel m;
  m.transition = grid_random_walk(kSide, kSide);
  m.gamma = 0.5;
  m.sigma = kReward;
  // Each agent is rewarded on a 3 x 3 patch around its home cell.
  const int homes[3][2] = {{6, 6}, {6, 12}, {11, 9}};
  for (const auto& h : homes) {
    VectorXd r = VectorXd::Zero(n);
    for (int dr = -1; dr <= 1; ++dr) {
      for (int dc = -1; dc <= 1; ++dc) r((h[0] + dr) * kSide + h[1] + dc) = kReward;
    }
    m.agent_rewards.push_back(r);
  }

  // A link between two agents is up with probability min(1, range / distance
  // between their home cells).
  std::vector<Edge> edges;
  for (int i = 0; i < 3; ++i) {
    for (int j = i + 1; j < 3; ++j) {
      const double dist = std::hypot(homes[i][0] - homes[j][0], homes[i][1] - homes[j][1]);
      edges.push_back({i, j, std::min(1.0, kRange / dist)});
    }
  }

  RunConfig cfg;
  cfg.total_iterations = 200'000;
  cfg.schedule = {StepSizeSchedule::Kind::InverseSqrt, 3.0, 10.0};
  return {"gridworld", std::move(m), FeatureMap{MatrixXd::Identity(n, n)},
          GraphDistribution::bernoulli(3, std::move(edges)), cfg, GridShape{kSide, kSide}};
}

}  // namespace

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names{"chain4", "gridworld", "single-agent", "toy2x2"};
  return names;
}

Scenario preset(std::string_view name) {
  if (name == "chain4") return make_chain4();
  if (name == "gridworld") return make_gridworld();
  if (name == "single-agent") return make_single_agent();
  if (name == "toy2x2") return make_toy2x2();
  throw Error(ErrorKind::UnknownPreset, "unknown preset '" + std::string(name) +
                                            "' (expected chain4, gridworld, single-agent or toy2x2)");
}

}  // namespace dgtd
