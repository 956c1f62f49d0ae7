#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "commands.hpp"
#include "config.hpp"
#include "hotwall/acceptance.hpp"
#include "hotwall/errors.hpp"
#include "hotwall/random.hpp"

namespace {

constexpr int kChecksFailed = 1;
constexpr int kUsageError = 2;

using namespace hotwall;

int run_verify(const std::optional<std::uint64_t>& seed, const std::vector<int>& only,
               const std::string& out, bool verbose) {
  AcceptanceOptions options;
  if (seed) options.seed = *seed;
  options.only = only;
  std::vector<std::string> lines;
  bool all = true;
  run_acceptance(options, [&](const CriterionResult& r) {
    lines.push_back(format_line(r));
    std::cout << lines.back() << '\n';
    if (verbose) {
      for (const auto& d : r.details) std::cout << "      " << d << '\n';
    }
    std::cout.flush();
    all = all && r.passed();
  });
  if (!out.empty()) {
    std::filesystem::create_directories(out);
    std::ofstream os(std::filesystem::path(out) / "acceptance.txt");
    for (const auto& l : lines) os << l << '\n';
  }
  return all ? 0 : kChecksFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hard-wall particle: simulation, rate functions and rare-event experiments"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out;
  int threads = 0;
  app.add_option("--config", config_path, "Experiment config (YAML)");
  app.add_option("--seed", seed, "Random seed; overrides the config");
  app.add_option("--out", out, "Output directory; overrides the config");
  app.add_option("--threads", threads, "Worker threads; overrides the config")->check(CLI::PositiveNumber);

  std::vector<CLI::App*> runs;
  for (const char* name : {"simulate", "rates", "rare", "nonldp"}) {
    runs.push_back(app.add_subcommand(name)->fallthrough());
  }
  runs[0]->description("Trajectory, empirical histogram and law-of-large-numbers distance curve");
  runs[1]->description("Tail exponents and rate tables over a list of measures");
  runs[2]->description("Probability estimates, slopes, entropy costs, tightness and free energy");
  runs[3]->description("Matched versus mismatched subsequences for a law without a large deviation principle");
  auto* verify = app.add_subcommand("verify", "Run the acceptance suite")->fallthrough();
  std::vector<int> only;
  bool verbose = false;
  verify->add_option("--only", only, "Run only these criteria")->check(CLI::Range(1, 10));
  verify->add_flag("-v,--verbose", verbose, "Print per-item diagnostics");

  CLI11_PARSE(app, argc, argv);

  try {
    if (verify->parsed()) {
      hotwall::set_thread_count(threads > 0 ? threads : 1);
      return run_verify(seed, only, out, verbose);
    }
    const std::string name = app.get_subcommands().front()->get_name();
    if (config_path.empty()) throw ConfigError("--config is required for " + name, 0);

    cli::RunContext ctx;
    ctx.config = cli::load_config(config_path);
    if (seed) ctx.config.seed = seed;
    if (!ctx.config.seed) throw ConfigError("a seed is required: set 'seed' in the config or pass --seed", 0);
    ctx.seed = *ctx.config.seed;
    if (!out.empty()) {
      ctx.out_dir = out;
    } else if (!ctx.config.output.empty()) {
      ctx.out_dir = ctx.config.output;
    } else {
      throw ConfigError("no output directory: set 'output' in the config or pass --out", 0);
    }
    hotwall::set_thread_count(threads > 0 ? threads : ctx.config.threads);

    const auto result = cli::run_subcommand(name, ctx);
    for (const auto& l : result.lines) std::cout << l << '\n';
    std::cout << (result.checks_passed ? "checks passed" : "checks FAILED") << "; outputs in "
              << ctx.out_dir.string() << '\n';
    return result.checks_passed ? 0 : kChecksFailed;
  } catch (const ConfigError& e) {
    std::cerr << (config_path.empty() ? "config" : config_path) << ": " << e.what() << '\n';
    return kUsageError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsageError;
  }
}
