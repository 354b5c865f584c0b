#include "dgtd/engine.hpp"

#include <algorithm>
#include <cmath>

namespace dgtd {

double StepSizeSchedule::at(long k) const {
  const double x = static_cast<double>(k) + beta;
  return kind == Kind::InverseSqrt ? alpha0 / std::sqrt(x) : alpha0 / x;
}

void StepSizeSchedule::validate() const {
  require(alpha0 > 0.0 && std::isfinite(alpha0), ErrorKind::Config, "alpha0 must be > 0");
  require(beta > 0.0, ErrorKind::Config, "step-size offset beta must be > 0 (alpha_0 is alpha0 / beta)");
}

void RunConfig::validate() const {
  require(total_iterations >= 1, ErrorKind::Config, "total_iterations must be >= 1");
  require(kappa >= 0.0, ErrorKind::Config, "kappa must be >= 0");
  require(rho >= 0.0, ErrorKind::Config, "rho must be >= 0");
  require(reward_noise.half_width >= 0.0, ErrorKind::Config, "noise half-width must be >= 0");
  schedule.validate();
}

namespace {

std::vector<double> cumulative(const VectorXd& p) {
  std::vector<double> cdf(static_cast<std::size_t>(p.size()));
  double acc = 0.0;
  for (Eigen::Index s = 0; s < p.size(); ++s) {
    acc += p(s);
    cdf[static_cast<std::size_t>(s)] = acc;
  }
  // Guards the last state against sums like 0.9999999999999999.
  if (!cdf.empty()) cdf.back() = 1.0;
  return cdf;
}

auto seg(const VectorXd& x, int i, int q) { return x.segment(static_cast<Eigen::Index>(i) * q, q); }
auto seg(VectorXd& x, int i, int q) { return x.segment(static_cast<Eigen::Index>(i) * q, q); }

}  // namespace

TransitionSampler::TransitionSampler(const MdpModel& model, const BellmanMatrices& mats,
                                     RewardNoise noise)
    : model_(&model), noise_(noise), state_cdf_(cumulative(mats.d)) {
  require(noise.half_width >= 0.0, ErrorKind::Config, "noise half-width must be >= 0");
  row_cdf_.reserve(static_cast<std::size_t>(model.num_states()));
  for (int s = 0; s < model.num_states(); ++s) {
    row_cdf_.push_back(cumulative(model.transition.row(s).transpose()));
  }
}

int TransitionSampler::draw_state(Rng& rng) const { return rng.categorical(state_cdf_); }

int TransitionSampler::draw_next(Rng& rng, int s) const {
  return rng.categorical(row_cdf_[static_cast<std::size_t>(s)]);
}

double TransitionSampler::realize_reward(Rng& rng, int agent, int s) const {
  const double mean = model_->agent_rewards[static_cast<std::size_t>(agent)](s);
  if (noise_.kind == RewardNoise::Kind::None) return mean;
  // Shrinking the half-width keeps the support inside [0, sigma] without
  // clamping, so the conditional mean stays exact.
  const double h = std::min({noise_.half_width, mean, model_->sigma - mean});
  return mean + rng.uniform(-h, h);
}

AgentSample TransitionSampler::draw(Rng& rng, int agent) const {
  AgentSample out;
  out.s = draw_state(rng);
  out.s_next = draw_next(rng, out.s);
  out.reward = realize_reward(rng, agent, out.s);
  return out;
}

std::vector<AgentSample> TransitionSampler::sample(Rng& rng) const {
  const int s = draw_state(rng);
  const int s_next = draw_next(rng, s);
  std::vector<AgentSample> out(static_cast<std::size_t>(model_->num_agents()));
  for (int i = 0; i < model_->num_agents(); ++i) {
    out[static_cast<std::size_t>(i)] = {s, s_next, realize_reward(rng, i, s)};
  }
  return out;
}

std::vector<AgentSample> TransitionSampler::sample_independent(Rng& rng) const {
  std::vector<AgentSample> out;
  out.reserve(static_cast<std::size_t>(model_->num_agents()));
  for (int i = 0; i < model_->num_agents(); ++i) out.push_back(draw(rng, i));
  return out;
}

std::vector<AgentSample> sample_transition(const MdpModel& model, const BellmanMatrices& mats,
                                           Rng& rng, RewardNoise noise) {
  return TransitionSampler(model, mats, noise).sample(rng);
}

SaddleGradient stochastic_direction(const SaddleProblem& p, const StackedIterate& it,
                                    const std::vector<AgentSample>& samples,
                                    const LaplacianView& graph) {
  const int n = p.num_agents();
  const int q = p.dim();
  it.check_size(p.stacked_size());
  require(static_cast<int>(samples.size()) == n, ErrorKind::DimensionMismatch,
          "need one sample per agent");
  require(graph.num_agents() == n, ErrorKind::DimensionMismatch,
          "sampled graph has the wrong number of agents");

  const StackedLaplacian lk(graph, q);
  const VectorXd lw = lk.apply(it.w);
  const VectorXd lv = lk.apply(it.v);
  const VectorXd lmu = lk.apply(it.mu);
  const MatrixXd& phi = p.mats.phi;
  const double gamma = p.model.gamma;

  SaddleGradient g = StackedIterate::zeros(n, q);
  for (int i = 0; i < n; ++i) {
    const auto& smp = samples[static_cast<std::size_t>(i)];
    const VectorXd f = phi.row(smp.s).transpose();
    const VectorXd td = f - gamma * phi.row(smp.s_next).transpose();
    const double f_theta = f.dot(seg(it.theta, i, q));
    seg(g.theta, i, q) = f * (f_theta + td.dot(seg(it.w, i, q)) - smp.reward);
    seg(g.w, i, q) = td * f_theta - seg(lv, i, q) - seg(lmu, i, q) - p.kappa * seg(lw, i, q) -
                     p.rho * seg(it.w, i, q);
  }
  g.v = it.v - lw;
  g.mu = -lw + p.rho * it.mu;
  return g;
}

StackedIterate primal_dual_update(const BoxConstraints& boxes, const StackedIterate& it,
                                  const SaddleGradient& direction, double alpha) {
  require(alpha > 0.0, ErrorKind::DomainError, "step size must be positive");
  StackedIterate next{it.theta - alpha * direction.theta, it.v - alpha * direction.v,
                      it.mu - alpha * direction.mu, it.w + alpha * direction.w};
  return project_boxes(boxes, next);
}

StackedIterate dgtd_step(const SaddleProblem& p, const StackedIterate& it,
                         const std::vector<AgentSample>& samples, const LaplacianView& graph,
                         double alpha) {
  return primal_dual_update(p.boxes, it, stochastic_direction(p, it, samples, graph), alpha);
}

TraceRecord measure(const SaddleProblem& p, const StackedIterate& it, const StackedIterate& saddle,
                    long k, bool keep_blocks) {
  TraceRecord r;
  r.k = k;
  r.consensus_penalty = p.mean_block.quadratic(it.w);
  r.theta_err = (it.theta - saddle.theta).squaredNorm();
  r.v_norm = it.v.squaredNorm();
  r.w_err = (it.w - saddle.w).squaredNorm();
  r.gap_proxy = gap_proxy(p, it, saddle);
  if (keep_blocks) r.w_blocks = it.w;
  return r;
}

double max_pairwise_block_distance(const VectorXd& w, int num_agents, int q) {
  require(w.size() == static_cast<Eigen::Index>(num_agents) * q, ErrorKind::DimensionMismatch,
          "stacked w has the wrong length");
  double worst = 0.0;
  for (int i = 0; i < num_agents; ++i) {
    for (int j = i + 1; j < num_agents; ++j) {
      worst = std::max(worst, (seg(w, i, q) - seg(w, j, q)).cwiseAbs().maxCoeff());
    }
  }
  return worst;
}

RunTrace run(const SaddleProblem& p, const GraphDistribution& dist, const RunConfig& cfg) {
  cfg.validate();
  require(dist.num_agents() == p.num_agents(), ErrorKind::DimensionMismatch,
          "graph distribution and problem disagree on N");
  require(cfg.kappa == p.kappa && cfg.rho == p.rho, ErrorKind::Config,
          "run config kappa/rho differ from the problem's");

  constexpr long kFullTraceLimit = 100'000;
  const long T = cfg.total_iterations;
  const int n = p.num_agents();
  const int q = p.dim();

  RunTrace trace;
  trace.num_agents = n;
  trace.dim = q;
  trace.stride = T <= kFullTraceLimit ? 1 : (T + kFullTraceLimit - 1) / kFullTraceLimit;
  trace.saddle = kkt_point(p);
  const bool keep_blocks = p.stacked_size() <= cfg.max_traced_blocks;
  const bool want_avg = cfg.output != OutputMode::Last;
  const bool want_last = cfg.output != OutputMode::Averaged;

  StackedIterate x = cfg.initial ? *cfg.initial : StackedIterate::zeros(n, q);
  x.check_size(p.stacked_size());
  x = project_boxes(p.boxes, x);
  StackedIterate avg = x;

  Rng rng(cfg.seed);
  const TransitionSampler sampler(p.model, p.mats, cfg.reward_noise);
  for (long k = 0; k < T; ++k) {
    if (k > 0) {
      const double inv = 1.0 / static_cast<double>(k + 1);
      avg.theta += inv * (x.theta - avg.theta);
      avg.v += inv * (x.v - avg.v);
      avg.mu += inv * (x.mu - avg.mu);
      avg.w += inv * (x.w - avg.w);
    }
    const LaplacianView graph = sample_graph(dist, rng);
    const auto samples = cfg.independent_samples ? sampler.sample_independent(rng)
                                                 : sampler.sample(rng);
    const SaddleGradient g = stochastic_direction(p, x, samples, graph);
    trace.empirical_c = std::max(
        trace.empirical_c,
        std::sqrt(g.theta.squaredNorm() + g.v.squaredNorm() + g.mu.squaredNorm() +
                  g.w.squaredNorm()));
    x = primal_dual_update(p.boxes, x, g, cfg.schedule.at(k));

    const long row = k + 1;
    if (row % trace.stride == 0 || row == T) {
      if (want_avg) trace.averaged.push_back(measure(p, avg, trace.saddle, row, keep_blocks));
      if (want_last) trace.last.push_back(measure(p, x, trace.saddle, row, keep_blocks));
    }
  }
  trace.final_averaged = std::move(avg);
  trace.final_last = std::move(x);
  return trace;
}

}  // namespace dgtd
