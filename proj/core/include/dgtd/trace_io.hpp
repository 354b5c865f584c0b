#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "dgtd/engine.hpp"
#include "dgtd/presets.hpp"

namespace dgtd {

/// k,consensus_penalty,theta_err,v_norm,w_err,gap_proxy,w_agent_1_1,...
std::string trace_header(int num_agents, int q, bool with_blocks);

/// Writes one row per record with 17 significant digits.
void export_trace(const std::vector<TraceRecord>& records, int num_agents, int q,
                  const std::filesystem::path& path);

struct TraceTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

TraceTable read_trace_csv(const std::filesystem::path& path);

/// Phi w_i reshaped to the grid, one CSV per agent: heatmap_agent_<i>.csv.
void export_value_heatmaps(const FeatureMap& features, const VectorXd& w, int num_agents,
                           const GridShape& grid, const std::filesystem::path& dir,
                           const std::string& prefix);

/// %.17g formatting, which round-trips through strtod.
std::string format_double(double x);

}  // namespace dgtd
