#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "dgtd/experiment.hpp"
#include "dgtd/trace_io.hpp"

using namespace dgtd;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("dgtd_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

constexpr const char* kInline = R"({
  "scenario": {
    "transition": [[0.5, 0.5], [0.25, 0.75]],
    "rewards": [[1, 0], [0, 2]],
    "sigma": 2,
    "gamma": 0.5,
    "features": [[1], [0.5]],
    "agents": 2,
    "edges": [[1, 2, 0.75]]
  },
  "run": {"iterations": 200, "kappa": 0.5,
          "schedule": {"kind": "robbins-monro", "alpha0": 0.5, "beta": 2},
          "reward_noise": {"kind": "bounded-uniform", "half_width": 0.25},
          "output": "both"},
  "boxes": {"scale": 3, "margin": 0.5},
  "seeds": [3, 4],
  "report": {"heatmap": false, "complexity": {"epsilon": 0.5, "delta": 0.05}},
  "acceptance": {"consensus_fraction": 0.5, "min_passing_seeds": 1}
})";

}  // namespace

TEST_CASE("presets") {
  for (const auto& name : preset_names()) {
    const Scenario s = preset(name);
    CHECK(s.name == name);
    const VectorXd rows = s.model.transition.rowwise().sum();
    CHECK((rows.array() - 1.0).abs().maxCoeff() <= 1e-12);
    CHECK_NOTHROW(s.model.validate());
    CHECK(s.graph.num_agents() == s.model.num_agents());
  }
  try {
    preset("chain5");
    FAIL("expected UnknownPreset");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::UnknownPreset);
  }
  const Scenario grid = preset("gridworld");
  REQUIRE(grid.grid.has_value());
  CHECK(grid.features.dim() == 400);
  CHECK(grid.model.num_agents() == 3);
}

TEST_CASE("spec parsing and round trip") {
  const ExperimentSpec spec = parse_spec(kInline);
  REQUIRE(spec.inline_scenario.has_value());
  CHECK(spec.inline_scenario->edges.size() == 1);
  CHECK(spec.inline_scenario->edges[0] == Edge{0, 1, 0.75});
  CHECK(spec.run.schedule.kind == StepSizeSchedule::Kind::RobbinsMonro);
  CHECK(spec.run.output == OutputMode::Both);
  CHECK(spec.box_scale == 3.0);
  CHECK(parse_spec(serialize_spec(spec)) == spec);

  const ExperimentSpec named = parse_spec(R"({"scenario": "chain4", "seeds": [1, 2],
    "acceptance": {"w_error_fraction": 0.1, "min_passing_seeds": 2,
                   "require_consensus_decrease": true}})");
  CHECK(named.preset == "chain4");
  CHECK(named.run.total_iterations == preset("chain4").defaults.total_iterations);
  CHECK(named.run.schedule.alpha0 == 10.0);
  CHECK(parse_spec(serialize_spec(named)) == named);

  CHECK_THROWS_AS(parse_spec(R"({"scenario": "chain4", "seeds": [1], "runn": {}})"), Error);
  CHECK_THROWS_AS(parse_spec(R"({"scenario": "chain4", "seeds": [1], "run": {"kapa": 1}})"), Error);
  CHECK_THROWS_AS(parse_spec(R"({"scenario": "chain4", "seeds": []})"), Error);
  CHECK_THROWS_AS(parse_spec("{not json"), Error);
  CHECK_THROWS_AS(resolve_scenario(parse_spec(R"({"scenario": "nope", "seeds": [1]})")), Error);
}

TEST_CASE("trace export round trip") {
  const Scenario s = preset("toy2x2");
  const SaddleProblem p = make_saddle_problem(s.model, s.features, s.graph);
  RunConfig cfg = s.defaults;
  cfg.total_iterations = 3;
  cfg.seed = 9;
  const RunTrace t = run(p, s.graph, cfg);
  const fs::path dir = scratch("export");
  export_trace(t.averaged, 2, 1, dir / "t.csv");
  const TraceTable table = read_trace_csv(dir / "t.csv");
  REQUIRE(table.rows.size() == 3);
  CHECK(table.columns.size() == 8);
  CHECK(table.columns.back() == "w_agent_2_1");
  for (std::size_t k = 0; k < 3; ++k) {
    const auto& r = t.averaged[k];
    const auto& row = table.rows[k];
    CHECK(row[0] == static_cast<double>(r.k));
    CHECK(row[1] == r.consensus_penalty);
    CHECK(row[2] == r.theta_err);
    CHECK(row[5] == r.gap_proxy);
    CHECK(row[6] == r.w_blocks(0));
    CHECK(row[7] == r.w_blocks(1));
  }
  CHECK(std::strtod(format_double(0.1).c_str(), nullptr) == 0.1);
  CHECK(trace_header(2, 1, false) == "k,consensus_penalty,theta_err,v_norm,w_err,gap_proxy");
}

TEST_CASE("experiments are reproducible and write their reports") {
  ExperimentSpec spec = parse_spec(kInline);
  spec.seeds = {42};
  const fs::path a = scratch("run_a");
  const fs::path b = scratch("run_b");
  const ExperimentSummary sa = run_experiment(spec, a, 1);
  const ExperimentSummary sb = run_experiment(spec, b, 2);
  CHECK(slurp(a / "trace_seed_42.csv") == slurp(b / "trace_seed_42.csv"));
  CHECK(slurp(a / "trace_last_seed_42.csv") == slurp(b / "trace_last_seed_42.csv"));
  CHECK(slurp(a / "summary.json") == slurp(b / "summary.json"));
  CHECK(summary_json(sa) == summary_json(sb));

  REQUIRE(sa.complexity.has_value());
  const double c = sa.seeds[0].empirical_c;
  const ComplexityResult direct = sample_complexity(0.5, 0.05, 0.5, c);
  CHECK(sa.complexity->omega1 == direct.omega1);
  CHECK(sa.complexity->omega2 == direct.omega2);
  REQUIRE(sa.consensus_complexity.has_value());
  CHECK(sa.consensus_complexity->t_required ==
        consensus_complexity(0.5, 0.05, 0.5, c, 0.5).t_required);

  // Multiple seeds in parallel match the same seeds run one at a time.
  spec.seeds = {1, 2, 3};
  const ExperimentSummary par = run_experiment(spec, std::nullopt, 3);
  for (std::size_t k = 0; k < 3; ++k) {
    ExperimentSpec one = spec;
    one.seeds = {spec.seeds[k]};
    const auto solo = run_experiment(one, std::nullopt, 1);
    CHECK(solo.seeds[0].w_error_inf == par.seeds[k].w_error_inf);
  }
}

TEST_CASE("gridworld heatmaps") {
  ExperimentSpec spec = parse_spec(R"({"scenario": "gridworld", "seeds": [5],
    "run": {"iterations": 50}, "report": {"heatmap": true, "trace_csv": false}})");
  const fs::path dir = scratch("heat");
  run_experiment(spec, dir, 1);
  for (int i = 1; i <= 3; ++i) {
    const fs::path f = dir / ("seed_5_heatmap_agent_" + std::to_string(i) + ".csv");
    REQUIRE(fs::exists(f));
    std::ifstream in(f);
    int lines = 0;
    std::string line;
    while (std::getline(in, line)) {
      ++lines;
      CHECK(std::count(line.begin(), line.end(), ',') == 19);
    }
    CHECK(lines == 20);
  }
  CHECK_FALSE(fs::exists(dir / "trace_seed_5.csv"));
}

TEST_CASE("thresholds decide the pass flag") {
  ExperimentSpec spec = parse_spec(kInline);
  spec.acceptance.w_error_fraction = 0.0;
  spec.acceptance.min_passing_seeds = 1;
  const ExperimentSummary s = run_experiment(spec, std::nullopt, 1);
  CHECK_FALSE(s.passed);
  CHECK_FALSE(s.failures.empty());

  spec.acceptance = {};
  CHECK(run_experiment(spec, std::nullopt, 1).passed);
}

#ifdef DGTD_CLI_PATH
TEST_CASE("command-line exit codes") {
  const fs::path dir = scratch("cli");
  const std::string cli = DGTD_CLI_PATH;
  auto status = [](const std::string& cmd) {
    const int rc = std::system((cmd + " > /dev/null 2>&1").c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  };
  {
    std::ofstream(dir / "ok.json") << kInline;
    ExperimentSpec strict = parse_spec(kInline);
    strict.acceptance.w_error_fraction = 0.0;
    std::ofstream(dir / "strict.json") << serialize_spec(strict);
    std::ofstream(dir / "bad.json") << R"({"scenario": "chain4", "seeds": [1], "extra": 1})";
  }
  CHECK(status(cli + " run " + (dir / "ok.json").string() + " --out " + (dir / "o").string()) == 0);
  CHECK(fs::exists(dir / "o" / "summary.json"));
  CHECK(status(cli + " run " + (dir / "strict.json").string() + " --out " +
               (dir / "s").string()) == 1);
  CHECK(status(cli + " run " + (dir / "bad.json").string()) == 2);
  CHECK(status(cli + " verify --preset toy2x2") == 0);
  CHECK(status(cli + " complexity --epsilon 0.1 --delta 0.1 --alpha0 1 --c 2") == 0);
}
#endif
