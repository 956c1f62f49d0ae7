#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "commands.hpp"
#include "config.hpp"
#include "hotwall/errors.hpp"
#include "hotwall/random.hpp"

using namespace hotwall;
using namespace hotwall::cli;
namespace fs = std::filesystem;

namespace {

const fs::path kConfigs = fs::path(HOTWALL_SOURCE_DIR) / "configs";

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "hotwall_cli_test" / name;
  fs::remove_all(dir);
  return dir;
}

int error_line(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.line();
  }
  return -1;
}

RunContext context(const ExperimentConfig& c, const fs::path& out) {
  return {c, c.seed.value(), out};
}

const char* kRich = R"(seed: 42
output: out/rich
threads: 2
laws:
  two: {kind: atomic, atoms: [[0.5, 0.25], [2, 0.75]]}
  gaps: {kind: atomic, role: interarrival, atoms: [[1, 0.5], [3, 0.5]]}
  ex: exp_interarrival(1.5)
  poly: {kind: density, builtin: polynomial, kappa: 2}
  mix: {kind: mixture, parts: [[0.3, two], [0.7, ex]]}
  dy: dyadic
simulate: {law: mix, q0: 0.1, p0: 2, horizon: 50, checkpoints: [5, 50], histogram: {q_bins: 4, p_edges: [0.5, 1, 2]}}
rates:
  law: dy
  measures:
    - {alpha1: 0.6, pi: two, alpha2: 0.4}
    - {name: stuck, alpha1: 0, alpha3: 1, ell: 0.25}
rare:
  law: two
  event: {kind: mean_momentum_exceeds, threshold: 1.6}
  scheme: {kind: tilted, alpha: 0.2, ell: 0.3, delta: 0.05, pi_tilde: two}
  t_grid: [10, 20]
  n_paths: 100
  tightness: {m: [2], t_grid: [10], n_paths: 100}
  free_energy: {c: 0.1, g_a: -0.9, g_b: 0.1, m: 0.3, t_grid: [10], n_paths: 100}
nonldp: {law: dy, alpha: 0, ell: 0.5, delta1: 0.2, j_min: 5, j_max: 8, n_paths: 50}
)";

}  // namespace

TEST_CASE("config round-trips through the canonical form") {
  std::vector<std::string> texts{kRich};
  for (const auto& entry : fs::directory_iterator(kConfigs)) texts.push_back(slurp(entry.path()));
  REQUIRE(texts.size() >= 6);
  for (const auto& text : texts) {
    const auto a = parse_config(text);
    const auto emitted = emit_config(a);
    const auto b = parse_config(emitted);
    CHECK(a == b);
    CHECK(emit_config(b) == emitted);
    CHECK(config_hash(a) == config_hash(b));
  }
}

TEST_CASE("config parsing resolves shorthands and defaults") {
  const auto c = parse_config(kRich);
  CHECK(c.seed == 42u);
  CHECK(c.threads == 2);
  CHECK(c.laws.at("ex").builtin == "exp_interarrival");
  CHECK(c.laws.at("ex").param == 1.5);
  CHECK(c.laws.at("dy").kind == "atomic");
  CHECK(c.rates->measures[0].name == "mu1");
  CHECK(c.rare->direct);
  const auto laws = build_laws(c);
  CHECK(laws.size() == 6);
  CHECK(laws.at("mix").is_mixture());
  CHECK(laws.at("gaps").is_atomic());
  // Interarrival atoms 1 and 3 become speeds 1 and 1/3.
  CHECK(laws.at("gaps").atomic_part().atoms.front().location == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("config errors name the offending line") {
  CHECK(error_line("seed: 1\nlaws:\n  a: dyadic\nbogus: 3\n") == 4);
  CHECK(error_line("seed: x1\n") == 1);
  CHECK(error_line("seed: -4\n") == 1);
  CHECK(error_line("seed: 1\nlaws:\n  a: {kind: atomic, atoms: [[1, 0.5], [2, 0.4]]}\n") == 3);
  CHECK(error_line("seed: 1\nlaws:\n  a: {kind: atomic,\n      atoms: [[1, 0.5], [-2, 0.5]]}\n") == 4);
  CHECK(error_line("seed: 1\nlaws:\n  a: exp_interarrival\n") == 3);
  CHECK(error_line("seed: 1\nlaws:\n  a: weibull(2)\n") == 3);
  CHECK(error_line("seed: 1\nlaws:\n  a: dyadic\nsimulate:\n  law: b\n") == 5);
  CHECK(error_line("seed: 1\nlaws:\n  a: dyadic\nsimulate:\n  law: a\n  horizon: 10\n  checkpoints: [1, 20]\n") == 7);
  CHECK(error_line("seed: 1\nlaws:\n  a: {kind: mixture, parts: [[1, b]]}\n  b: {kind: mixture, parts: [[1, a]]}\n") >= 3);
  // A missing key is reported at the first line of its section.
  CHECK(error_line("seed: 1\nlaws:\n  a: dyadic\nrare:\n  law: a\n  event: {kind: always}\n") == 5);
  CHECK(error_line("seed: 1\nlaws:\n  a: dyadic\nrates:\n  law: a\n  measures:\n    - {alpha1: 0.5, alpha2: 0.4}\n") == 7);
  CHECK(error_line("seed: 1\nkey: [1, 2\n") >= 2);
  CHECK(error_line("seed: 1\noutput: /abs\n") == 2);
  CHECK(error_line("seed: 1\nlaws:\n  a: dyadic\nnonldp:\n  law: a\n  delta1: 0.1\n  calibrate: {law: a}\n") == 7);
}

TEST_CASE("single-atom simulation sits on its limit") {
  const auto c = load_config((kConfigs / "single_atom_simulate.yaml").string());
  const auto dir = scratch("single_atom");
  const auto r = run_subcommand("simulate", context(c, dir));
  CHECK(r.checks_passed);
  std::ifstream in(dir / "lln.csv");
  std::string line;
  std::getline(in, line);
  CHECK(line == "t,bl,tv,mean_momentum,target_mean_momentum");
  int rows = 0;
  while (std::getline(in, line)) {
    std::stringstream ss(line);
    std::string t, bl, tv, mm, target;
    std::getline(ss, t, ',');
    std::getline(ss, bl, ',');
    std::getline(ss, tv, ',');
    std::getline(ss, mm, ',');
    std::getline(ss, target, ',');
    CHECK(std::stod(bl) < 1e-12);
    CHECK(std::stod(tv) < 1e-12);
    CHECK(std::stod(mm) == doctest::Approx(1.0).epsilon(1e-12));
    ++rows;
  }
  CHECK(rows == 3);
  for (const char* f : {"trajectory.csv", "histogram.csv", "manifest.json", "config.yaml"})
    CHECK(fs::exists(dir / f));
}

TEST_CASE("same config and seed give byte-identical outputs for any thread count") {
  auto c = parse_config(kRich);
  for (const char* sub : {"simulate", "rates", "rare", "nonldp"}) {
    const auto a = scratch(std::string(sub) + "_a");
    const auto b = scratch(std::string(sub) + "_b");
    set_thread_count(1);
    const auto ra = run_subcommand(sub, context(c, a));
    set_thread_count(3);
    const auto rb = run_subcommand(sub, context(c, b));
    set_thread_count(1);
    REQUIRE(ra.files == rb.files);
    // The manifest records the thread count; everything else must match.
    for (const auto& f : ra.files) {
      if (f == "manifest.json") continue;
      const std::string where = std::string(sub) + "/" + f;
      INFO(where);
      CHECK(slurp(a / f) == slurp(b / f));
    }
  }
}

TEST_CASE("a different seed changes the outputs and the manifest hash") {
  auto c = parse_config(kRich);
  const auto a = scratch("seed_a");
  const auto b = scratch("seed_b");
  run_subcommand("simulate", context(c, a));
  c.seed = 43;
  run_subcommand("simulate", context(c, b));
  CHECK(slurp(a / "trajectory.csv") != slurp(b / "trajectory.csv"));
  CHECK(slurp(a / "manifest.json") != slurp(b / "manifest.json"));
}

TEST_CASE("written config reproduces the run") {
  const auto c = parse_config(kRich);
  const auto a = scratch("rewrite_a");
  const auto b = scratch("rewrite_b");
  run_subcommand("rare", context(c, a));
  const auto again = load_config((a / "config.yaml").string());
  CHECK(again == c);
  run_subcommand("rare", context(again, b));
  CHECK(slurp(a / "estimates.csv") == slurp(b / "estimates.csv"));
  CHECK(slurp(a / "manifest.json") == slurp(b / "manifest.json"));
}

TEST_CASE("missing section is a config error") {
  auto c = parse_config("seed: 1\n");
  CHECK_THROWS_AS(run_subcommand("simulate", context(c, scratch("missing"))), ConfigError);
}

TEST_CASE("shipped non-LDP config reproduces the acceptance demonstration") {
  const auto c = load_config((kConfigs / "dyadic_nonldp.yaml").string());
  set_thread_count(4);
  const auto r = run_subcommand("nonldp", context(c, scratch("dyadic_nonldp")));
  set_thread_count(1);
  for (const auto& l : r.lines) MESSAGE(l);
  CHECK(r.checks_passed);
}
