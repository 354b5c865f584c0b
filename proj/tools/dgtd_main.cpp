#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <optional>

#include "dgtd/experiment.hpp"
#include "dgtd/trace_io.hpp"

namespace {

// Output directory when --out is not given.
constexpr const char* kOutDirEnv = "DGTD_OUT_DIR";

dgtd::ExperimentSpec spec_from_args(const std::string& file, const std::string& preset_name) {
  if (!file.empty()) {
    auto spec = dgtd::load_spec(file);
    if (!preset_name.empty()) {
      spec.preset = preset_name;
      spec.inline_scenario.reset();
    }
    return spec;
  }
  dgtd::require(!preset_name.empty(), dgtd::ErrorKind::Config,
                "give a spec file or --preset NAME");
  dgtd::ExperimentSpec spec;
  spec.preset = preset_name;
  spec.run = dgtd::preset(preset_name).defaults;
  spec.seeds = {1};
  return spec;
}

void print_complexity(const char* label, const dgtd::ComplexityResult& c) {
  std::printf("%-13s omega1 %.6e  omega2 %.6e  T_required %.6e\n", label, c.omega1, c.omega2,
              c.t_required);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distributed gradient temporal-difference experiments"};
  app.require_subcommand(1);

  std::string spec_file, preset_name, out_dir;
  std::vector<std::uint64_t> seeds;
  long iterations = 0;
  unsigned threads = 0;
  auto* run = app.add_subcommand("run", "Run every seed of an experiment spec");
  run->add_option("spec-file", spec_file, "JSON experiment spec")->check(CLI::ExistingFile);
  run->add_option("--out", out_dir, std::string("Output directory (default: $") + kOutDirEnv +
                                        ", else ./dgtd-out)");
  run->add_option("--seeds", seeds, "Seeds replacing the spec's list");
  run->add_option("--iterations", iterations, "Iteration count T")->check(CLI::PositiveNumber);
  run->add_option("--preset", preset_name, "Preset replacing the spec's scenario");
  run->add_option("--threads", threads, "Worker threads (0 = hardware concurrency)");

  std::string verify_file, verify_preset;
  auto* verify = app.add_subcommand("verify", "Run the oracle checks on a spec's scenario");
  verify->add_option("spec-file", verify_file, "JSON experiment spec")->check(CLI::ExistingFile);
  verify->add_option("--preset", verify_preset, "Preset replacing the spec's scenario");

  double epsilon = 0, delta = 0, alpha0 = 0, c = 0;
  auto* complexity = app.add_subcommand("complexity", "Iteration counts for an epsilon-saddle");
  complexity->add_option("--epsilon", epsilon)->required();
  complexity->add_option("--delta", delta)->required();
  complexity->add_option("--alpha0", alpha0)->required();
  complexity->add_option("--c", c, "Bound on the stochastic gradient norm")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      auto spec = spec_from_args(spec_file, preset_name);
      if (!seeds.empty()) spec.seeds = seeds;
      if (iterations > 0) spec.run.total_iterations = iterations;
      if (out_dir.empty()) {
        const char* env = std::getenv(kOutDirEnv);
        out_dir = env && *env ? env : "dgtd-out";
      }
      const auto summary = dgtd::run_experiment(spec, out_dir, threads);
      std::cout << dgtd::summary_json(summary);
      for (const auto& f : summary.failures) std::cerr << "dgtd: " << f << '\n';
      return summary.passed ? 0 : 1;
    }
    if (*verify) {
      const auto spec = spec_from_args(verify_file, verify_preset);
      const auto report = dgtd::verify_scenario(spec);
      for (const auto& line : report.lines) std::cout << line << '\n';
      return report.passed ? 0 : 1;
    }
    const auto r = dgtd::sample_complexity(epsilon, delta, alpha0, c);
    print_complexity("saddle", r);
    return 0;
  } catch (const dgtd::Error& e) {
    std::cerr << "dgtd: " << e.what() << '\n';
    return 2;
  }
}
