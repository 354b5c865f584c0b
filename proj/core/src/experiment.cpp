#include "dgtd/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "dgtd/oracle.hpp"
#include "dgtd/trace_io.hpp"

namespace dgtd {

using nlohmann::json;

bool operator==(const InlineScenario& a, const InlineScenario& b) {
  auto same = [](const MatrixXd& x, const MatrixXd& y) {
    return x.rows() == y.rows() && x.cols() == y.cols() && x == y;
  };
  if (!same(a.transition, b.transition) || !same(a.features, b.features)) return false;
  if (a.rewards.size() != b.rewards.size()) return false;
  for (std::size_t i = 0; i < a.rewards.size(); ++i) {
    if (!same(a.rewards[i], b.rewards[i])) return false;
  }
  return a.sigma == b.sigma && a.gamma == b.gamma && a.num_agents == b.num_agents &&
         a.edges == b.edges;
}

namespace {

bool same_run(const RunConfig& a, const RunConfig& b) {
  return a.total_iterations == b.total_iterations && a.kappa == b.kappa && a.rho == b.rho &&
         a.schedule.kind == b.schedule.kind && a.schedule.alpha0 == b.schedule.alpha0 &&
         a.schedule.beta == b.schedule.beta && a.reward_noise.kind == b.reward_noise.kind &&
         a.reward_noise.half_width == b.reward_noise.half_width && a.output == b.output &&
         a.independent_samples == b.independent_samples;
}

}  // namespace

bool operator==(const ExperimentSpec& a, const ExperimentSpec& b) {
  return a.preset == b.preset && a.inline_scenario == b.inline_scenario && same_run(a.run, b.run) &&
         a.box_scale == b.box_scale && a.box_margin == b.box_margin && a.seeds == b.seeds &&
         a.report == b.report && a.acceptance == b.acceptance;
}

void ExperimentSpec::validate() const {
  require(!seeds.empty(), ErrorKind::Config, "spec needs at least one seed");
  require(preset.empty() != !inline_scenario.has_value(), ErrorKind::Config,
          "spec needs exactly one of a preset name or an inline scenario");
  require(acceptance.min_passing_seeds >= 0 &&
              acceptance.min_passing_seeds <= static_cast<int>(seeds.size()),
          ErrorKind::Config, "acceptance.min_passing_seeds exceeds the number of seeds");
  run.validate();
}

namespace {

// ---------------------------------------------------------------------------
// JSON helpers. Every lookup reports the offending key path.

void check_keys(const json& obj, const std::string& where,
                std::initializer_list<const char*> allowed) {
  require(obj.is_object(), ErrorKind::Config, where + " must be a table");
  for (const auto& [key, _] : obj.items()) {
    const bool known = std::any_of(allowed.begin(), allowed.end(),
                                   [&](const char* a) { return key == a; });
    require(known, ErrorKind::Config, "unknown key '" + key + "' in " + where);
  }
}

double get_number(const json& obj, const char* key, const std::string& where, double fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  require(v.is_number(), ErrorKind::Config, where + "." + key + " must be a number");
  return v.get<double>();
}

bool get_bool(const json& obj, const char* key, const std::string& where, bool fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  require(v.is_boolean(), ErrorKind::Config, where + "." + key + " must be true or false");
  return v.get<bool>();
}

std::string get_string(const json& obj, const char* key, const std::string& where,
                       const std::string& fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  require(v.is_string(), ErrorKind::Config, where + "." + key + " must be a string");
  return v.get<std::string>();
}

MatrixXd to_matrix(const json& rows, const std::string& where) {
  require(rows.is_array() && !rows.empty(), ErrorKind::Config,
          where + " must be a non-empty array of rows");
  const auto n_rows = static_cast<Eigen::Index>(rows.size());
  require(rows.front().is_array() && !rows.front().empty(), ErrorKind::Config,
          where + " rows must be non-empty arrays");
  const auto n_cols = static_cast<Eigen::Index>(rows.front().size());
  MatrixXd m(n_rows, n_cols);
  for (Eigen::Index r = 0; r < n_rows; ++r) {
    const auto& row = rows.at(static_cast<std::size_t>(r));
    require(row.is_array() && static_cast<Eigen::Index>(row.size()) == n_cols, ErrorKind::Config,
            where + " row " + std::to_string(r + 1) + " has the wrong length");
    for (Eigen::Index c = 0; c < n_cols; ++c) {
      const auto& x = row.at(static_cast<std::size_t>(c));
      require(x.is_number(), ErrorKind::Config, where + " entries must be numbers");
      m(r, c) = x.get<double>();
    }
  }
  return m;
}

json from_matrix(const MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

InlineScenario parse_inline(const json& s) {
  check_keys(s, "scenario",
             {"transition", "rewards", "sigma", "gamma", "features", "agents", "edges"});
  for (const char* key : {"transition", "rewards", "sigma", "gamma", "features", "agents"}) {
    require(s.contains(key), ErrorKind::Config, std::string("scenario.") + key + " is required");
  }
  InlineScenario out;
  out.transition = to_matrix(s.at("transition"), "scenario.transition");
  const MatrixXd rewards = to_matrix(s.at("rewards"), "scenario.rewards");
  for (Eigen::Index i = 0; i < rewards.rows(); ++i) out.rewards.push_back(rewards.row(i).transpose());
  out.sigma = get_number(s, "sigma", "scenario", 0.0);
  out.gamma = get_number(s, "gamma", "scenario", 0.0);
  out.features = to_matrix(s.at("features"), "scenario.features");
  const auto& agents = s.at("agents");
  require(agents.is_number_integer() && agents.get<long>() >= 1, ErrorKind::Config,
          "scenario.agents must be a positive integer");
  out.num_agents = agents.get<int>();
  if (s.contains("edges")) {
    const auto& edges = s.at("edges");
    require(edges.is_array(), ErrorKind::Config, "scenario.edges must be an array of [i, j, p]");
    for (const auto& e : edges) {
      require(e.is_array() && e.size() == 3 && e[0].is_number_integer() &&
                  e[1].is_number_integer() && e[2].is_number(),
              ErrorKind::Config, "scenario.edges entries must be [i, j, p] with 1-based labels");
      const int i = e[0].get<int>();
      const int j = e[1].get<int>();
      require(i >= 1 && j >= 1 && i <= out.num_agents && j <= out.num_agents, ErrorKind::Config,
              "scenario.edges label out of range 1.." + std::to_string(out.num_agents));
      out.edges.push_back({i - 1, j - 1, e[2].get<double>()});
    }
  }
  return out;
}

json inline_to_json(const InlineScenario& s) {
  MatrixXd rewards(static_cast<Eigen::Index>(s.rewards.size()),
                   s.rewards.empty() ? 0 : s.rewards.front().size());
  for (std::size_t i = 0; i < s.rewards.size(); ++i) {
    rewards.row(static_cast<Eigen::Index>(i)) = s.rewards[i].transpose();
  }
  json edges = json::array();
  for (const auto& e : s.edges) edges.push_back({e.i + 1, e.j + 1, e.weight});
  return {{"transition", from_matrix(s.transition)},
          {"rewards", from_matrix(rewards)},
          {"sigma", s.sigma},
          {"gamma", s.gamma},
          {"features", from_matrix(s.features)},
          {"agents", s.num_agents},
          {"edges", edges}};
}

const char* schedule_name(StepSizeSchedule::Kind k) {
  return k == StepSizeSchedule::Kind::InverseSqrt ? "inverse-sqrt" : "robbins-monro";
}

const char* output_name(OutputMode m) {
  switch (m) {
    case OutputMode::Averaged: return "averaged";
    case OutputMode::Last: return "last";
    case OutputMode::Both: return "both";
  }
  return "averaged";
}

void parse_run(const json& r, RunConfig& cfg) {
  check_keys(r, "run", {"iterations", "kappa", "rho", "schedule", "reward_noise", "output",
                        "independent_samples"});
  if (r.contains("iterations")) {
    require(r.at("iterations").is_number_integer(), ErrorKind::Config,
            "run.iterations must be an integer");
    cfg.total_iterations = r.at("iterations").get<long>();
  }
  cfg.kappa = get_number(r, "kappa", "run", cfg.kappa);
  cfg.rho = get_number(r, "rho", "run", cfg.rho);
  if (r.contains("schedule")) {
    const auto& s = r.at("schedule");
    check_keys(s, "run.schedule", {"kind", "alpha0", "beta"});
    const std::string kind =
        get_string(s, "kind", "run.schedule", schedule_name(cfg.schedule.kind));
    if (kind == "inverse-sqrt") {
      cfg.schedule.kind = StepSizeSchedule::Kind::InverseSqrt;
    } else if (kind == "robbins-monro") {
      cfg.schedule.kind = StepSizeSchedule::Kind::RobbinsMonro;
    } else {
      throw Error(ErrorKind::Config, "run.schedule.kind must be inverse-sqrt or robbins-monro");
    }
    cfg.schedule.alpha0 = get_number(s, "alpha0", "run.schedule", cfg.schedule.alpha0);
    cfg.schedule.beta = get_number(s, "beta", "run.schedule", cfg.schedule.beta);
  }
  if (r.contains("reward_noise")) {
    const auto& n = r.at("reward_noise");
    check_keys(n, "run.reward_noise", {"kind", "half_width"});
    const std::string kind = get_string(n, "kind", "run.reward_noise", "none");
    if (kind == "none") {
      cfg.reward_noise.kind = RewardNoise::Kind::None;
    } else if (kind == "bounded-uniform") {
      cfg.reward_noise.kind = RewardNoise::Kind::BoundedUniform;
    } else {
      throw Error(ErrorKind::Config, "run.reward_noise.kind must be none or bounded-uniform");
    }
    cfg.reward_noise.half_width = get_number(n, "half_width", "run.reward_noise", 0.0);
  }
  const std::string out = get_string(r, "output", "run", output_name(cfg.output));
  if (out == "averaged") {
    cfg.output = OutputMode::Averaged;
  } else if (out == "last") {
    cfg.output = OutputMode::Last;
  } else if (out == "both") {
    cfg.output = OutputMode::Both;
  } else {
    throw Error(ErrorKind::Config, "run.output must be averaged, last or both");
  }
  cfg.independent_samples =
      get_bool(r, "independent_samples", "run", cfg.independent_samples);
}

}  // namespace

ExperimentSpec parse_spec(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::Config, std::string("spec is not valid JSON: ") + e.what());
  }
  check_keys(doc, "spec", {"scenario", "run", "boxes", "seeds", "report", "acceptance"});
  require(doc.contains("scenario"), ErrorKind::Config, "spec.scenario is required");

  ExperimentSpec spec;
  const auto& scenario = doc.at("scenario");
  if (scenario.is_string()) {
    spec.preset = scenario.get<std::string>();
    spec.run = preset(spec.preset).defaults;
  } else {
    spec.inline_scenario = parse_inline(scenario);
  }
  if (doc.contains("run")) parse_run(doc.at("run"), spec.run);

  if (doc.contains("boxes")) {
    const auto& b = doc.at("boxes");
    check_keys(b, "boxes", {"scale", "margin"});
    spec.box_scale = get_number(b, "scale", "boxes", spec.box_scale);
    spec.box_margin = get_number(b, "margin", "boxes", spec.box_margin);
  }

  require(doc.contains("seeds") && doc.at("seeds").is_array(), ErrorKind::Config,
          "spec.seeds must be an array of non-negative integers");
  for (const auto& s : doc.at("seeds")) {
    require(s.is_number_unsigned(), ErrorKind::Config,
            "spec.seeds entries must be non-negative integers");
    spec.seeds.push_back(s.get<std::uint64_t>());
  }

  if (doc.contains("report")) {
    const auto& r = doc.at("report");
    check_keys(r, "report", {"trace_csv", "summary_json", "heatmap", "complexity"});
    spec.report.trace_csv = get_bool(r, "trace_csv", "report", spec.report.trace_csv);
    spec.report.summary_json = get_bool(r, "summary_json", "report", spec.report.summary_json);
    spec.report.heatmap = get_bool(r, "heatmap", "report", spec.report.heatmap);
    if (r.contains("complexity")) {
      const auto& c = r.at("complexity");
      check_keys(c, "report.complexity", {"epsilon", "delta"});
      ComplexityRequest req;
      req.epsilon = get_number(c, "epsilon", "report.complexity", req.epsilon);
      req.delta = get_number(c, "delta", "report.complexity", req.delta);
      spec.report.complexity = req;
    }
  }

  if (doc.contains("acceptance")) {
    const auto& a = doc.at("acceptance");
    check_keys(a, "acceptance", {"consensus_fraction", "w_error_fraction", "min_passing_seeds",
                                 "require_consensus_decrease"});
    if (a.contains("consensus_fraction")) {
      spec.acceptance.consensus_fraction = get_number(a, "consensus_fraction", "acceptance", 0.0);
    }
    if (a.contains("w_error_fraction")) {
      spec.acceptance.w_error_fraction = get_number(a, "w_error_fraction", "acceptance", 0.0);
    }
    if (a.contains("min_passing_seeds")) {
      require(a.at("min_passing_seeds").is_number_integer(), ErrorKind::Config,
              "acceptance.min_passing_seeds must be an integer");
      spec.acceptance.min_passing_seeds = a.at("min_passing_seeds").get<int>();
    }
    spec.acceptance.require_consensus_decrease =
        get_bool(a, "require_consensus_decrease", "acceptance", false);
  }
  spec.validate();
  return spec;
}

ExperimentSpec load_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  require(in.good(), ErrorKind::Io, "cannot open spec file '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_spec(buf.str());
}

std::string serialize_spec(const ExperimentSpec& spec) {
  json doc;
  if (spec.inline_scenario) {
    doc["scenario"] = inline_to_json(*spec.inline_scenario);
  } else {
    doc["scenario"] = spec.preset;
  }
  const auto& r = spec.run;
  doc["run"] = {{"iterations", r.total_iterations},
                {"kappa", r.kappa},
                {"rho", r.rho},
                {"schedule",
                 {{"kind", schedule_name(r.schedule.kind)},
                  {"alpha0", r.schedule.alpha0},
                  {"beta", r.schedule.beta}}},
                {"reward_noise",
                 {{"kind", r.reward_noise.kind == RewardNoise::Kind::None ? "none"
                                                                          : "bounded-uniform"},
                  {"half_width", r.reward_noise.half_width}}},
                {"output", output_name(r.output)},
                {"independent_samples", r.independent_samples}};
  doc["boxes"] = {{"scale", spec.box_scale}, {"margin", spec.box_margin}};
  doc["seeds"] = spec.seeds;
  doc["report"] = {{"trace_csv", spec.report.trace_csv},
                   {"summary_json", spec.report.summary_json},
                   {"heatmap", spec.report.heatmap}};
  if (spec.report.complexity) {
    doc["report"]["complexity"] = {{"epsilon", spec.report.complexity->epsilon},
                                   {"delta", spec.report.complexity->delta}};
  }
  json acc = {{"min_passing_seeds", spec.acceptance.min_passing_seeds},
              {"require_consensus_decrease", spec.acceptance.require_consensus_decrease}};
  if (spec.acceptance.consensus_fraction) {
    acc["consensus_fraction"] = *spec.acceptance.consensus_fraction;
  }
  if (spec.acceptance.w_error_fraction) acc["w_error_fraction"] = *spec.acceptance.w_error_fraction;
  doc["acceptance"] = acc;
  return doc.dump(2) + "\n";
}

Scenario resolve_scenario(const ExperimentSpec& spec) {
  if (!spec.inline_scenario) return preset(spec.preset);
  const auto& s = *spec.inline_scenario;
  MdpModel model{s.transition, s.rewards, s.sigma, s.gamma};
  require(model.num_agents() == s.num_agents, ErrorKind::Config,
          "scenario.rewards has " + std::to_string(model.num_agents()) + " rows but agents = " +
              std::to_string(s.num_agents));
  return {"inline", std::move(model), FeatureMap{s.features},
          GraphDistribution::bernoulli(s.num_agents, s.edges), spec.run, std::nullopt};
}

namespace {

double record_penalty_at(const std::vector<TraceRecord>& records, long k) {
  const TraceRecord* best = &records.front();
  for (const auto& r : records) {
    if (r.k <= k) best = &r;
  }
  return best->consensus_penalty;
}

SeedResult measure_seed(const SaddleProblem& p, const StackedIterate& saddle, const RunTrace& trace,
                        const RunConfig& cfg) {
  const bool averaged = cfg.output != OutputMode::Last;
  const StackedIterate& x = averaged ? trace.final_averaged : trace.final_last;
  const auto& records = averaged ? trace.averaged : trace.last;
  const int n = p.num_agents();
  const int q = p.dim();
  SeedResult r;
  r.ok = true;
  r.consensus_penalty = p.mean_block.quadratic(x.w);
  r.consensus_penalty_tenth = record_penalty_at(records, cfg.total_iterations / 10);
  r.primal_error = (x.theta - saddle.theta).squaredNorm() + x.v.squaredNorm();
  r.max_block_distance = max_pairwise_block_distance(x.w, n, q);
  r.w_error_inf = (x.w - saddle.w).cwiseAbs().maxCoeff();
  r.empirical_c = trace.empirical_c;
  return r;
}

}  // namespace

ExperimentSummary run_experiment(const ExperimentSpec& spec,
                                 const std::optional<std::filesystem::path>& out_dir,
                                 unsigned threads) {
  spec.validate();
  const Scenario scenario = resolve_scenario(spec);
  ProblemOptions options;
  options.kappa = spec.run.kappa;
  options.rho = spec.run.rho;
  options.box_scale = spec.box_scale;
  options.box_margin = spec.box_margin;
  const SaddleProblem p = make_saddle_problem(scenario.model, scenario.features, scenario.graph,
                                              options);
  require(p.boxes.audited, ErrorKind::Config,
          "box radii do not dominate the solution bounds; raise boxes.scale or boxes.margin");
  const StackedIterate saddle = kkt_point(p);

  if (out_dir) {
    std::error_code ec;
    std::filesystem::create_directories(*out_dir, ec);
    require(!ec, ErrorKind::Io, "cannot create output directory '" + out_dir->string() +
                                    "': " + ec.message());
  }

  ExperimentSummary summary;
  summary.scenario = scenario.name;
  summary.iterations = spec.run.total_iterations;
  summary.w_star_inf = saddle.w.cwiseAbs().maxCoeff();
  summary.seeds.resize(spec.seeds.size());

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t idx = next++; idx < spec.seeds.size(); idx = next++) {
      SeedResult& result = summary.seeds[idx];
      result.seed = spec.seeds[idx];
      try {
        RunConfig cfg = spec.run;
        cfg.seed = result.seed;
        const RunTrace trace = run(p, scenario.graph, cfg);
        result = measure_seed(p, saddle, trace, cfg);
        result.seed = spec.seeds[idx];
        if (out_dir && spec.report.trace_csv) {
          const std::string tag = "seed_" + std::to_string(result.seed);
          if (!trace.averaged.empty()) {
            export_trace(trace.averaged, p.num_agents(), p.dim(),
                         *out_dir / ("trace_" + tag + ".csv"));
          }
          if (!trace.last.empty()) {
            export_trace(trace.last, p.num_agents(), p.dim(),
                         *out_dir / ("trace_last_" + tag + ".csv"));
          }
        }
        if (out_dir && spec.report.heatmap && scenario.grid) {
          const auto& x = cfg.output == OutputMode::Last ? trace.final_last : trace.final_averaged;
          export_value_heatmaps(p.features, x.w, p.num_agents(), *scenario.grid, *out_dir,
                                "seed_" + std::to_string(result.seed) + "_");
        }
      } catch (const std::exception& e) {
        result.ok = false;
        result.error = e.what();
      }
    }
  };
  unsigned workers = threads ? threads : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, static_cast<unsigned>(spec.seeds.size()));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < workers; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  // Thresholds and complexity figures are evaluated after every run is done.
  const double scale = 1.0 + summary.w_star_inf;
  const auto& acc = spec.acceptance;
  int consensus_ok = 0;
  int w_ok = 0;
  double c_max = 0.0;
  for (auto& r : summary.seeds) {
    if (!r.ok) {
      summary.failures.push_back("seed " + std::to_string(r.seed) + " failed: " + r.error);
      continue;
    }
    c_max = std::max(c_max, r.empirical_c);
    if (acc.consensus_fraction) {
      r.consensus_pass = r.max_block_distance <= *acc.consensus_fraction * scale;
    }
    if (acc.w_error_fraction) r.w_error_pass = r.w_error_inf <= *acc.w_error_fraction * scale;
    consensus_ok += r.consensus_pass;
    w_ok += r.w_error_pass;
    if (acc.require_consensus_decrease && !(r.consensus_penalty < r.consensus_penalty_tenth)) {
      summary.failures.push_back("seed " + std::to_string(r.seed) +
                                 ": consensus penalty did not decrease from T/10 to T");
    }
  }
  if (acc.consensus_fraction && consensus_ok < acc.min_passing_seeds) {
    summary.failures.push_back("consensus threshold met on " + std::to_string(consensus_ok) +
                               " seeds, need " + std::to_string(acc.min_passing_seeds));
  }
  if (acc.w_error_fraction && w_ok < acc.min_passing_seeds) {
    summary.failures.push_back("w error threshold met on " + std::to_string(w_ok) +
                               " seeds, need " + std::to_string(acc.min_passing_seeds));
  }
  if (spec.report.complexity && c_max > 0.0) {
    const auto& req = *spec.report.complexity;
    const double a0 = spec.run.schedule.alpha0;
    summary.complexity = sample_complexity(req.epsilon, req.delta, a0, c_max);
    if (spec.run.kappa > 0.0) {
      summary.consensus_complexity =
          consensus_complexity(req.epsilon, req.delta, a0, c_max, spec.run.kappa);
    }
    summary.primal_error_complexity =
        primal_error_complexity(req.epsilon, req.delta, a0, c_max, p.mats.gram);
  }
  summary.passed = summary.failures.empty();

  if (out_dir && spec.report.summary_json) {
    std::ofstream out(*out_dir / "summary.json", std::ios::binary | std::ios::trunc);
    require(out.good(), ErrorKind::Io, "cannot write summary.json in '" + out_dir->string() + "'");
    out << summary_json(summary);
  }
  return summary;
}

std::string summary_json(const ExperimentSummary& s) {
  json seeds = json::array();
  for (const auto& r : s.seeds) {
    json j = {{"seed", r.seed}, {"ok", r.ok}};
    if (r.ok) {
      j["consensus_penalty"] = r.consensus_penalty;
      j["consensus_penalty_at_tenth"] = r.consensus_penalty_tenth;
      j["primal_error"] = r.primal_error;
      j["max_block_distance"] = r.max_block_distance;
      j["w_error_inf"] = r.w_error_inf;
      j["empirical_c"] = r.empirical_c;
      j["consensus_pass"] = r.consensus_pass;
      j["w_error_pass"] = r.w_error_pass;
    } else {
      j["error"] = r.error;
    }
    seeds.push_back(std::move(j));
  }
  auto complexity = [](const ComplexityResult& c) {
    return json{{"omega1", c.omega1}, {"omega2", c.omega2}, {"t_required", c.t_required}};
  };
  json doc = {{"scenario", s.scenario},
              {"iterations", s.iterations},
              {"w_star_inf", s.w_star_inf},
              {"seeds", seeds},
              {"passed", s.passed},
              {"failures", s.failures}};
  if (s.complexity) doc["complexity"]["saddle"] = complexity(*s.complexity);
  if (s.consensus_complexity) doc["complexity"]["consensus"] = complexity(*s.consensus_complexity);
  if (s.primal_error_complexity) {
    doc["complexity"]["primal_error"] = complexity(*s.primal_error_complexity);
  }
  return doc.dump(2) + "\n";
}

VerifyReport verify_scenario(const ExperimentSpec& spec) {
  const Scenario scenario = resolve_scenario(spec);
  ProblemOptions options;
  options.kappa = spec.run.kappa;
  options.rho = spec.run.rho;
  options.box_scale = spec.box_scale;
  options.box_margin = spec.box_margin;
  const SaddleProblem p = make_saddle_problem(scenario.model, scenario.features, scenario.graph,
                                              options);
  VerifyReport report;
  report.passed = true;
  auto check = [&](const std::string& name, bool ok, const std::string& detail) {
    report.lines.push_back((ok ? "PASS " : "FAIL ") + name + ": " + detail);
    report.passed = report.passed && ok;
  };

  const StackedIterate kkt = kkt_point(p);
  const double grad = exact_gradients(p, kkt).max_abs();
  check("kkt-gradients", grad <= 1e-8, "max |grad| = " + format_double(grad));
  if (p.rho == 0.0) {
    check("kkt-v-zero", kkt.v.cwiseAbs().maxCoeff() == 0.0, "v* is exactly zero");
    const double mres = multiplier_residual(p, kkt).cwiseAbs().maxCoeff();
    check("multiplier-residual", mres <= 1e-8, format_double(mres));
  }

  const SolutionBounds& b = p.bounds;
  const bool bounds_ok = kkt.w.cwiseAbs().maxCoeff() <= b.w &&
                         kkt.theta.cwiseAbs().maxCoeff() <= b.theta &&
                         kkt.mu.cwiseAbs().maxCoeff() <= b.mu && kkt.v.cwiseAbs().maxCoeff() <= b.v;
  check("bound-audit", bounds_ok && p.boxes.audited,
        "bounds w " + format_double(b.w) + ", theta " + format_double(b.theta) + ", mu " +
            format_double(b.mu));

  if (p.stacked_size() <= kBruteForceLimit && p.rho == 0.0) {
    const StackedIterate brute = brute_force_kkt(p);
    const DeterministicResult det = deterministic_primal_dual(p);
    VectorXd formula(p.stacked_size());
    const VectorXd w_star = exact_global_solution(p.mats, p.model);
    for (int i = 0; i < p.num_agents(); ++i) formula.segment(i * p.dim(), p.dim()) = w_star;
    const double d1 = (brute.w - formula).cwiseAbs().maxCoeff();
    const double d2 = (det.averaged.w - formula).cwiseAbs().maxCoeff();
    check("triple-agreement", std::max(d1, d2) <= 1e-5,
          "|kkt solve - formula| = " + format_double(d1) + ", |primal-dual - formula| = " +
              format_double(d2) + ", final gap " + format_double(det.final_gap));
  } else {
    report.lines.push_back("SKIP triple-agreement: N q = " + std::to_string(p.stacked_size()) +
                           " is beyond the dense oracle");
  }
  return report;
}

}  // namespace dgtd
