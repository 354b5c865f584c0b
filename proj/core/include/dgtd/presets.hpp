#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dgtd/engine.hpp"

namespace dgtd {

/// Row-major cell layout of a grid scenario (state = row * cols + col).
struct GridShape {
  int rows = 0;
  int cols = 0;
};

struct Scenario {
  std::string name;
  MdpModel model;
  FeatureMap features;
  GraphDistribution graph;
  RunConfig defaults;
  std::optional<GridShape> grid;
};

/// chain4, gridworld, single-agent or toy2x2; throws UnknownPreset otherwise.
Scenario preset(std::string_view name);
const std::vector<std::string>& preset_names();

/// 4-state chain with Gaussian-bump features on states 1 and 4.
MdpModel chain4_model(int num_agents);
FeatureMap chain4_features();

/// Lazy random walk on a rows x cols grid: each compass move has
/// probability 1/4 and moves off the grid leave the walker in place.
MatrixXd grid_random_walk(int rows, int cols);

}  // namespace dgtd
