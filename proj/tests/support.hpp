#pragma once

#include <vector>

#include "dgtd/presets.hpp"
#include "dgtd/rng.hpp"
#include "dgtd/saddle.hpp"

namespace dgtd::testing {

struct RandomInstance {
  MdpModel model;
  FeatureMap features;
  GraphDistribution graph;
};

/// Dense-row chain, random features and rewards, and a random connected graph
/// (a spanning path plus extra edges, all with random probabilities).
inline RandomInstance random_instance(Rng& rng, int max_states = 6, int max_q = 3,
                                      int max_agents = 4) {
  const int n_states = 2 + static_cast<int>(rng.uniform() * (max_states - 1));
  const int q = 1 + static_cast<int>(rng.uniform() * std::min(max_q, n_states));
  const int n_agents = 1 + static_cast<int>(rng.uniform() * max_agents);

  MdpModel m;
  m.transition.resize(n_states, n_states);
  for (int s = 0; s < n_states; ++s) {
    for (int t = 0; t < n_states; ++t) m.transition(s, t) = 0.05 + rng.uniform();
    m.transition.row(s) /= m.transition.row(s).sum();
  }
  m.gamma = rng.uniform(0.3, 0.95);
  m.sigma = rng.uniform(1.0, 20.0);
  for (int i = 0; i < n_agents; ++i) {
    VectorXd r(n_states);
    for (int s = 0; s < n_states; ++s) r(s) = rng.uniform(0.0, m.sigma);
    m.agent_rewards.push_back(r);
  }

  FeatureMap f;
  f.phi.resize(n_states, q);
  for (int s = 0; s < n_states; ++s) {
    for (int j = 0; j < q; ++j) f.phi(s, j) = rng.uniform(-1.0, 1.0);
  }

  std::vector<Edge> edges;
  for (int i = 0; i + 1 < n_agents; ++i) edges.push_back({i, i + 1, rng.uniform(0.2, 1.0)});
  for (int i = 0; i < n_agents; ++i) {
    for (int j = i + 2; j < n_agents; ++j) {
      if (rng.bernoulli(0.5)) edges.push_back({i, j, rng.uniform(0.2, 1.0)});
    }
  }
  return {std::move(m), std::move(f), GraphDistribution::bernoulli(n_agents, std::move(edges))};
}

/// Point drawn uniformly from `fraction` times each box.
inline StackedIterate random_iterate(const SaddleProblem& p, Rng& rng, double fraction) {
  StackedIterate it = StackedIterate::zeros(p.num_agents(), p.dim());
  auto fill = [&](VectorXd& x, double radius) {
    for (Eigen::Index j = 0; j < x.size(); ++j) x(j) = rng.uniform(-1.0, 1.0) * fraction * radius;
  };
  fill(it.theta, p.boxes.radius_theta);
  fill(it.v, p.boxes.radius_v);
  fill(it.mu, p.boxes.radius_mu);
  fill(it.w, p.boxes.radius_w);
  return it;
}

/// Random point at unit scale around a reference, clamped to the boxes.
inline StackedIterate perturb(const SaddleProblem& p, const StackedIterate& ref, Rng& rng,
                              double scale) {
  StackedIterate it = ref;
  for (VectorXd* x : {&it.theta, &it.v, &it.mu, &it.w}) {
    for (Eigen::Index j = 0; j < x->size(); ++j) (*x)(j) += rng.uniform(-scale, scale);
  }
  return project_boxes(p.boxes, it);
}

inline SaddleProblem preset_problem(const std::string& name) {
  const Scenario s = preset(name);
  ProblemOptions o;
  o.kappa = s.defaults.kappa;
  o.rho = s.defaults.rho;
  return make_saddle_problem(s.model, s.features, s.graph, o);
}

}  // namespace dgtd::testing
