#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "dgtd/presets.hpp"

namespace dgtd {

/// A scenario written out in full instead of named.
struct InlineScenario {
  MatrixXd transition;
  std::vector<VectorXd> rewards;
  double sigma = 1.0;
  double gamma = 0.9;
  MatrixXd features;
  int num_agents = 1;
  std::vector<Edge> edges;  ///< weight = activation probability

  friend bool operator==(const InlineScenario&, const InlineScenario&);
};

struct ComplexityRequest {
  double epsilon = 0.1;
  double delta = 0.1;

  friend bool operator==(const ComplexityRequest&, const ComplexityRequest&) = default;
};

struct ReportOptions {
  bool trace_csv = true;
  bool summary_json = true;
  bool heatmap = false;
  std::optional<ComplexityRequest> complexity;

  friend bool operator==(const ReportOptions&, const ReportOptions&) = default;
};

/// Per-seed thresholds, relative to 1 + |w*|_inf, and how many seeds must meet them.
struct AcceptanceThresholds {
  std::optional<double> consensus_fraction;
  std::optional<double> w_error_fraction;
  int min_passing_seeds = 0;
  /// Consensus penalty at T must be below its value at T / 10 on every seed.
  bool require_consensus_decrease = false;

  friend bool operator==(const AcceptanceThresholds&, const AcceptanceThresholds&) = default;
};

struct ExperimentSpec {
  std::string preset;  ///< empty when `inline_scenario` is set
  std::optional<InlineScenario> inline_scenario;
  RunConfig run;
  double box_scale = 2.0;
  double box_margin = 1.0;
  std::vector<std::uint64_t> seeds;
  ReportOptions report;
  AcceptanceThresholds acceptance;

  void validate() const;
  friend bool operator==(const ExperimentSpec&, const ExperimentSpec&);
};

/// Parses the JSON experiment document. Fields under "run" fall back to the
/// preset's defaults.
ExperimentSpec parse_spec(const std::string& text);
ExperimentSpec load_spec(const std::filesystem::path& path);
std::string serialize_spec(const ExperimentSpec& spec);

/// The scenario named or described by a spec.
Scenario resolve_scenario(const ExperimentSpec& spec);

struct SeedResult {
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  double consensus_penalty = 0.0;
  double consensus_penalty_tenth = 0.0;  ///< at T / 10
  double primal_error = 0.0;
  double max_block_distance = 0.0;
  double w_error_inf = 0.0;
  double empirical_c = 0.0;
  bool consensus_pass = true;
  bool w_error_pass = true;
};

struct ExperimentSummary {
  std::string scenario;
  long iterations = 0;
  double w_star_inf = 0.0;
  std::vector<SeedResult> seeds;
  std::optional<ComplexityResult> complexity;
  std::optional<ComplexityResult> consensus_complexity;
  std::optional<ComplexityResult> primal_error_complexity;
  bool passed = false;
  std::vector<std::string> failures;
};

/// One run per seed, on up to `threads` workers (0 picks the hardware
/// count). Files go under `out_dir` when it is set.
ExperimentSummary run_experiment(const ExperimentSpec& spec,
                                 const std::optional<std::filesystem::path>& out_dir,
                                 unsigned threads = 0);

std::string summary_json(const ExperimentSummary& summary);

struct VerifyReport {
  std::vector<std::string> lines;
  bool passed = false;
};

/// Oracle checks on the spec's scenario: KKT certificate, bound audit and,
/// when small enough, the three-way agreement on w*.
VerifyReport verify_scenario(const ExperimentSpec& spec);

}  // namespace dgtd
