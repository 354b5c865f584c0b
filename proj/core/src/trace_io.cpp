#include "dgtd/trace_io.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace dgtd {

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string trace_header(int num_agents, int q, bool with_blocks) {
  std::string h = "k,consensus_penalty,theta_err,v_norm,w_err,gap_proxy";
  if (with_blocks) {
    for (int i = 1; i <= num_agents; ++i) {
      for (int j = 1; j <= q; ++j) h += ",w_agent_" + std::to_string(i) + "_" + std::to_string(j);
    }
  }
  return h;
}

namespace {

std::ofstream open_for_write(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(out.good(), ErrorKind::Io, "cannot open '" + path.string() + "' for writing");
  return out;
}

}  // namespace

void export_trace(const std::vector<TraceRecord>& records, int num_agents, int q,
                  const std::filesystem::path& path) {
  const bool with_blocks = !records.empty() && records.front().w_blocks.size() > 0;
  auto out = open_for_write(path);
  out << trace_header(num_agents, q, with_blocks) << '\n';
  std::string line;
  for (const auto& r : records) {
    line = std::to_string(r.k);
    for (double x : {r.consensus_penalty, r.theta_err, r.v_norm, r.w_err, r.gap_proxy}) {
      line += ',';
      line += format_double(x);
    }
    for (Eigen::Index j = 0; j < r.w_blocks.size(); ++j) {
      line += ',';
      line += format_double(r.w_blocks(j));
    }
    out << line << '\n';
  }
  require(out.good(), ErrorKind::Io, "failed writing '" + path.string() + "'");
}

TraceTable read_trace_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  require(in.good(), ErrorKind::Io, "cannot open '" + path.string() + "'");
  TraceTable table;
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), ErrorKind::Io,
          "'" + path.string() + "' is empty");
  std::stringstream header(line);
  for (std::string col; std::getline(header, col, ',');) table.columns.push_back(col);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream fields(line);
    for (std::string cell; std::getline(fields, cell, ',');) {
      char* end = nullptr;
      errno = 0;
      const double x = std::strtod(cell.c_str(), &end);
      require(end != cell.c_str() && *end == '\0' && errno == 0, ErrorKind::Io,
              "bad number '" + cell + "' in '" + path.string() + "'");
      row.push_back(x);
    }
    require(row.size() == table.columns.size(), ErrorKind::Io,
            "row width differs from header in '" + path.string() + "'");
    table.rows.push_back(std::move(row));
  }
  return table;
}

void export_value_heatmaps(const FeatureMap& features, const VectorXd& w, int num_agents,
                           const GridShape& grid, const std::filesystem::path& dir,
                           const std::string& prefix) {
  const int q = features.dim();
  require(features.num_states() == grid.rows * grid.cols, ErrorKind::DimensionMismatch,
          "grid shape does not match the number of states");
  require(w.size() == static_cast<Eigen::Index>(num_agents) * q, ErrorKind::DimensionMismatch,
          "stacked w has the wrong length");
  for (int i = 0; i < num_agents; ++i) {
    const VectorXd value = features.phi * w.segment(static_cast<Eigen::Index>(i) * q, q);
    auto out = open_for_write(dir / (prefix + "heatmap_agent_" + std::to_string(i + 1) + ".csv"));
    for (int r = 0; r < grid.rows; ++r) {
      for (int c = 0; c < grid.cols; ++c) {
        if (c) out << ',';
        out << format_double(value(r * grid.cols + c));
      }
      out << '\n';
    }
  }
}

}  // namespace dgtd
