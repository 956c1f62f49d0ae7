#include <cstdint>
#include <iostream>
#include <vector>

#include <CLI11.hpp>

#include "hotwall/acceptance.hpp"
#include "hotwall/random.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Acceptance suite: one pass/fail line per criterion"};
  hotwall::AcceptanceOptions options;
  int threads = 1;
  bool verbose = false;
  app.add_option("--seed", options.seed, "Base seed");
  app.add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
  app.add_option("--only", options.only, "Run only these criteria")->check(CLI::Range(1, 10));
  app.add_flag("-v,--verbose", verbose, "Print per-item diagnostics");
  CLI11_PARSE(app, argc, argv);
  hotwall::set_thread_count(threads);

  bool all = true;
  hotwall::run_acceptance(options, [&](const hotwall::CriterionResult& r) {
    std::cout << hotwall::format_line(r) << '\n';
    if (verbose) {
      for (const auto& d : r.details) std::cout << "      " << d << '\n';
    }
    std::cout.flush();
    all = all && r.passed();
  });
  return all ? 0 : 1;
}
