#include <benchmark/benchmark.h>

#include "dgtd/engine.hpp"
#include "dgtd/presets.hpp"

namespace {

dgtd::SaddleProblem problem(const dgtd::Scenario& s) {
  dgtd::ProblemOptions o;
  o.kappa = s.defaults.kappa;
  return dgtd::make_saddle_problem(s.model, s.features, s.graph, o);
}

const char* name_of(int index) {
  static const char* names[] = {"toy2x2", "chain4", "gridworld"};
  return names[index];
}

void BM_Step(benchmark::State& state) {
  const dgtd::Scenario s = dgtd::preset(name_of(static_cast<int>(state.range(0))));
  const dgtd::SaddleProblem p = problem(s);
  const dgtd::TransitionSampler sampler(p.model, p.mats);
  dgtd::Rng rng(1);
  dgtd::StackedIterate x = dgtd::StackedIterate::zeros(p.num_agents(), p.dim());
  long k = 0;
  for (auto _ : state) {
    const dgtd::LaplacianView g = dgtd::sample_graph(s.graph, rng);
    x = dgtd::dgtd_step(p, x, sampler.sample(rng), g, s.defaults.schedule.at(k++));
    benchmark::DoNotOptimize(x.w.data());
  }
  state.SetLabel(s.name);
}
BENCHMARK(BM_Step)->DenseRange(0, 2);

void BM_SaddleGap(benchmark::State& state) {
  const dgtd::Scenario s = dgtd::preset(name_of(static_cast<int>(state.range(0))));
  const dgtd::SaddleProblem p = problem(s);
  dgtd::StackedIterate x = dgtd::StackedIterate::zeros(p.num_agents(), p.dim());
  x.w.setConstant(1.0);
  for (auto _ : state) benchmark::DoNotOptimize(dgtd::saddle_gap(p, x).gap);
  state.SetLabel(s.name);
}
BENCHMARK(BM_SaddleGap)->DenseRange(0, 1);

void BM_Run(benchmark::State& state) {
  const dgtd::Scenario s = dgtd::preset("chain4");
  const dgtd::SaddleProblem p = problem(s);
  dgtd::RunConfig cfg = s.defaults;
  cfg.total_iterations = state.range(0);
  for (auto _ : state) benchmark::DoNotOptimize(dgtd::run(p, s.graph, cfg).empirical_c);
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Run)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
