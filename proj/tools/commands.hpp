#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "config.hpp"

namespace hotwall::cli {

struct RunContext {
  ExperimentConfig config;
  std::uint64_t seed = 0;
  std::filesystem::path out_dir;
};

struct RunResult {
  bool checks_passed = true;
  std::vector<std::string> files;  // relative to the output directory
  std::vector<std::string> lines;  // human-readable summary
};

/// Trajectory, histogram and law-of-large-numbers distance curve.
RunResult run_simulate(const RunContext& ctx);
/// Tail exponents and rate tables; checks xi <= xi-bar and I <= I-bar.
RunResult run_rates(const RunContext& ctx);
/// Probability estimates, slopes, entropy costs, tightness and free energy.
RunResult run_rare(const RunContext& ctx);
/// Paired matched/mismatched subsequence experiment.
RunResult run_nonldp(const RunContext& ctx);

/// Runs one of simulate | rates | rare | nonldp, then writes config.yaml and
/// manifest.json next to the outputs.
RunResult run_subcommand(const std::string& name, const RunContext& ctx);

/// Fixed 17-significant-digit formatting for numeric outputs.
std::string num(double x);

}  // namespace hotwall::cli
