#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "dgtd/graph.hpp"
#include "dgtd/rng.hpp"
#include "dgtd/saddle.hpp"

namespace dgtd {

struct StepSizeSchedule {
  enum class Kind { InverseSqrt, RobbinsMonro };

  Kind kind = Kind::InverseSqrt;
  double alpha0 = 1.0;
  double beta = 1.0;

  /// alpha0 / sqrt(k + beta) or alpha0 / (k + beta).
  double at(long k) const;
  void validate() const;
};

struct RewardNoise {
  enum class Kind { None, BoundedUniform };

  Kind kind = Kind::None;
  double half_width = 0.0;
};

enum class OutputMode { Averaged, Last, Both };

struct RunConfig {
  long total_iterations = 1000;
  double kappa = 1.0;
  double rho = 0.0;
  StepSizeSchedule schedule;
  std::uint64_t seed = 0;
  RewardNoise reward_noise;
  OutputMode output = OutputMode::Averaged;
  /// Each agent draws its own (s, s') instead of sharing one transition.
  bool independent_samples = false;
  /// Per-agent w blocks are kept in the trace only when N q is at most this.
  Eigen::Index max_traced_blocks = 256;
  std::optional<StackedIterate> initial;

  void validate() const;
};

/// One agent's observation: s ~ d, s' ~ P(s, .), and its reward realization.
struct AgentSample {
  int s = 0;
  int s_next = 0;
  double reward = 0.0;
};

/// Draws transitions and reward realizations for a fixed chain.
class TransitionSampler {
 public:
  TransitionSampler(const MdpModel& model, const BellmanMatrices& mats, RewardNoise noise = {});

  /// A common (s, s') and one reward per agent.
  std::vector<AgentSample> sample(Rng& rng) const;
  /// Independent (s, s') per agent.
  std::vector<AgentSample> sample_independent(Rng& rng) const;

  AgentSample draw(Rng& rng, int agent) const;

 private:
  double realize_reward(Rng& rng, int agent, int s) const;
  int draw_state(Rng& rng) const;
  int draw_next(Rng& rng, int s) const;

  const MdpModel* model_;
  RewardNoise noise_;
  std::vector<double> state_cdf_;
  std::vector<std::vector<double>> row_cdf_;
};

std::vector<AgentSample> sample_transition(const MdpModel& model, const BellmanMatrices& mats,
                                           Rng& rng, RewardNoise noise = {});

/// Stochastic counterpart of exact_gradients: same sign convention, built
/// from one sample per agent and one realization of the graph.
SaddleGradient stochastic_direction(const SaddleProblem& p, const StackedIterate& it,
                                    const std::vector<AgentSample>& samples,
                                    const LaplacianView& graph);

/// Primal descent, dual ascent from the pre-step values, then projection.
StackedIterate dgtd_step(const SaddleProblem& p, const StackedIterate& it,
                         const std::vector<AgentSample>& samples, const LaplacianView& graph,
                         double alpha);

/// Shared by the stochastic and deterministic recursions.
StackedIterate primal_dual_update(const BoxConstraints& boxes, const StackedIterate& it,
                                  const SaddleGradient& direction, double alpha);

struct TraceRecord {
  long k = 0;
  double consensus_penalty = 0.0;
  double theta_err = 0.0;
  double v_norm = 0.0;
  double w_err = 0.0;
  double gap_proxy = 0.0;
  VectorXd w_blocks;
};

/// Metrics of one iterate against the saddle point.
TraceRecord measure(const SaddleProblem& p, const StackedIterate& it, const StackedIterate& saddle,
                    long k, bool keep_blocks);

struct RunTrace {
  int num_agents = 0;
  int dim = 0;
  long stride = 1;
  std::vector<TraceRecord> averaged;
  std::vector<TraceRecord> last;
  StackedIterate final_averaged;
  StackedIterate final_last;
  StackedIterate saddle;
  /// Largest stochastic direction norm observed.
  double empirical_c = 0.0;
};

/// Algorithm loop: draw a graph and transitions, step, project, average.
/// Row k of the trace describes the mean of x_0 .. x_{k-1} (or x_k itself
/// for the last-iterate trace).
RunTrace run(const SaddleProblem& p, const GraphDistribution& dist, const RunConfig& cfg);

/// Largest infinity-norm distance between two agents' w blocks.
double max_pairwise_block_distance(const VectorXd& w, int num_agents, int q);

}  // namespace dgtd
