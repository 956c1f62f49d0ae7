#include "config.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <regex>
#include <set>
#include <sstream>

#include <boost/crc.hpp>
#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include "hotwall/errors.hpp"

namespace hotwall::cli {

namespace {

int line_of(const YAML::Node& n) {
  if (!n.IsDefined()) return 0;
  const int line = n.Mark().line;
  return line >= 0 ? line + 1 : 0;
}

[[noreturn]] void fail(const YAML::Node& at, const std::string& message) {
  throw ConfigError(message, line_of(at));
}

void require_map(const YAML::Node& n, const std::string& where) {
  if (!n.IsMap()) fail(n, where + ": expected a mapping");
}

void check_keys(const YAML::Node& map, const std::set<std::string>& allowed,
                const std::string& where) {
  for (const auto& kv : map) {
    const auto key = kv.first.as<std::string>();
    if (!allowed.count(key)) fail(kv.first, fmt::format("unknown key '{}' in {}", key, where));
  }
}

YAML::Node required(const YAML::Node& map, const std::string& key, const std::string& where) {
  const YAML::Node n = map[key];
  if (!n) fail(map, fmt::format("{}: missing required key '{}'", where, key));
  return n;
}

template <typename T>
T as(const YAML::Node& n, const std::string& what) {
  if (!n.IsScalar()) fail(n, what + ": expected a scalar");
  try {
    return n.as<T>();
  } catch (const YAML::BadConversion&) {
    fail(n, fmt::format("{}: cannot read '{}' as {}", what, n.Scalar(),
                        std::is_same_v<T, double>     ? "a number"
                        : std::is_same_v<T, bool>     ? "a boolean"
                        : std::is_same_v<T, int>      ? "an integer"
                        : std::is_same_v<T, std::uint64_t> ? "a nonnegative integer"
                                                       : "a string"));
  }
}

template <typename T>
T get(const YAML::Node& map, const std::string& key, T fallback) {
  const YAML::Node n = map[key];
  return n ? as<T>(n, key) : fallback;
}

double finite(const YAML::Node& map, const std::string& key, double fallback) {
  const double v = get<double>(map, key, fallback);
  if (!std::isfinite(v)) fail(map[key], key + ": must be finite");
  return v;
}

double positive(const YAML::Node& map, const std::string& key, double fallback) {
  const double v = finite(map, key, fallback);
  if (!(v > 0.0)) fail(map[key] ? map[key] : map, key + ": must be positive");
  return v;
}

double unit_interval(const YAML::Node& map, const std::string& key, double fallback) {
  const double v = finite(map, key, fallback);
  if (v < 0.0 || v > 1.0) fail(map[key], key + ": must lie in [0, 1]");
  return v;
}

std::uint64_t count(const YAML::Node& map, const std::string& key, std::uint64_t fallback) {
  const YAML::Node n = map[key];
  if (!n) return fallback;
  if (n.IsScalar() && !n.Scalar().empty() && n.Scalar()[0] == '-')
    fail(n, key + ": must be nonnegative");
  const auto v = as<std::uint64_t>(n, key);
  if (v == 0) fail(n, key + ": must be positive");
  return v;
}

std::vector<double> number_list(const YAML::Node& map, const std::string& key, bool positive_only,
                                std::vector<double> fallback = {}) {
  const YAML::Node n = map[key];
  if (!n) return fallback;
  if (!n.IsSequence()) fail(n, key + ": expected a list of numbers");
  std::vector<double> out;
  for (const auto& item : n) {
    const double v = as<double>(item, key);
    if (!std::isfinite(v) || (positive_only && !(v > 0.0)))
      fail(item, key + (positive_only ? ": entries must be positive" : ": entries must be finite"));
    out.push_back(v);
  }
  return out;
}

std::vector<double> t_grid(const YAML::Node& map, const std::string& where) {
  const auto grid = number_list(map, "t_grid", true);
  if (grid.empty()) fail(map["t_grid"] ? map["t_grid"] : map, where + ": t_grid must be nonempty");
  return grid;
}

// ---- laws ----

LawSpec builtin_law(const YAML::Node& at, const std::string& text) {
  static const std::regex pattern(R"(\s*(dyadic|exp_interarrival|polynomial)\s*(?:\(\s*([^)]*?)\s*\))?\s*)");
  std::smatch m;
  if (!std::regex_match(text, m, pattern)) fail(at, fmt::format("unknown law '{}'", text));
  LawSpec s;
  s.builtin = m[1];
  s.kind = s.builtin == "dyadic" ? "atomic" : "density";
  if (s.builtin == "dyadic") {
    if (m[2].matched) fail(at, "dyadic takes no parameter");
    return s;
  }
  if (!m[2].matched) fail(at, s.builtin + " needs a parameter, e.g. " + s.builtin + "(1)");
  try {
    std::size_t used = 0;
    s.param = std::stod(m[2].str(), &used);
    if (used != m[2].str().size()) throw std::invalid_argument("trailing");
  } catch (const std::exception&) {
    fail(at, fmt::format("{}: cannot read '{}' as a number", s.builtin, m[2].str()));
  }
  if (!(s.param > 0.0) || !std::isfinite(s.param)) fail(at, s.builtin + ": parameter must be positive");
  return s;
}

LawSpec parse_law(const YAML::Node& n, const std::string& name) {
  const std::string where = "law '" + name + "'";
  if (n.IsScalar()) return builtin_law(n, n.Scalar());
  require_map(n, where);
  check_keys(n, {"kind", "builtin", "xi0", "kappa", "atoms", "role", "parts"}, where);
  LawSpec s;
  s.kind = as<std::string>(required(n, "kind", where), "kind");
  if (s.kind != "atomic" && s.kind != "density" && s.kind != "mixture")
    fail(n["kind"], "kind must be atomic, density or mixture");
  if (n["builtin"]) {
    const YAML::Node b = n["builtin"];
    std::string text = as<std::string>(b, "builtin");
    if (n["xi0"]) text += "(" + as<std::string>(n["xi0"], "xi0") + ")";
    if (n["kappa"]) text += "(" + as<std::string>(n["kappa"], "kappa") + ")";
    LawSpec built = builtin_law(b, text);
    if (built.kind != s.kind) fail(b, fmt::format("{} is a {} law, not {}", built.builtin, built.kind, s.kind));
    if ((built.builtin == "exp_interarrival" && n["kappa"]) || (built.builtin == "polynomial" && n["xi0"]))
      fail(b, "parameter name does not match the built-in");
    if (n["atoms"] || n["parts"] || n["role"]) fail(b, "built-in laws take no atoms, parts or role");
    return built;
  }
  if (n["xi0"] || n["kappa"]) fail(n, where + ": xi0/kappa need a builtin");
  if (s.kind == "density") fail(n, where + ": density laws must name a builtin (exp_interarrival or polynomial)");
  if (s.kind == "atomic") {
    if (n["parts"]) fail(n["parts"], "atomic laws take atoms, not parts");
    s.role = get<std::string>(n, "role", "speed");
    if (s.role != "speed" && s.role != "interarrival") fail(n["role"], "role must be speed or interarrival");
    const YAML::Node atoms = required(n, "atoms", where);
    if (!atoms.IsSequence() || atoms.size() == 0) fail(atoms, "atoms: expected a nonempty list of [location, weight]");
    double total = 0.0;
    for (const auto& a : atoms) {
      if (!a.IsSequence() || a.size() != 2) fail(a, "atoms: each entry must be [location, weight]");
      const double x = as<double>(a[0], "atom location");
      const double w = as<double>(a[1], "atom weight");
      if (!(x > 0.0) || !std::isfinite(x)) fail(a, "atom location must be positive and finite");
      if (!(w > 0.0) || !std::isfinite(w)) fail(a, "atom weight must be positive");
      s.atoms.emplace_back(x, w);
      total += w;
    }
    if (std::abs(total - 1.0) > 1e-12) fail(atoms, fmt::format("atom weights sum to {:.17g}, not 1", total));
    return s;
  }
  if (n["atoms"] || n["role"]) fail(n, "mixtures take parts, not atoms or role");
  const YAML::Node parts = required(n, "parts", where);
  if (!parts.IsSequence() || parts.size() == 0) fail(parts, "parts: expected a nonempty list of [weight, law]");
  double total = 0.0;
  for (const auto& p : parts) {
    if (!p.IsSequence() || p.size() != 2) fail(p, "parts: each entry must be [weight, law]");
    const double w = as<double>(p[0], "part weight");
    if (!(w > 0.0) || !std::isfinite(w)) fail(p, "part weight must be positive");
    s.parts.emplace_back(w, as<std::string>(p[1], "part law"));
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-12) fail(parts, fmt::format("part weights sum to {:.17g}, not 1", total));
  return s;
}

// Law references are resolved against the laws section.
struct Resolver {
  const std::map<std::string, LawSpec>& laws;

  std::string operator()(const YAML::Node& map, const std::string& key, const std::string& where,
                         bool optional = false) const {
    if (optional && !map[key]) return {};
    const YAML::Node n = required(map, key, where);
    const auto name = as<std::string>(n, key);
    if (!laws.count(name)) fail(n, fmt::format("{}: unknown law '{}'", key, name));
    return name;
  }
};

void check_mixture_graph(const YAML::Node& laws_node, const std::map<std::string, LawSpec>& laws) {
  std::map<std::string, int> state;  // 1 visiting, 2 done
  std::function<void(const std::string&)> visit = [&](const std::string& name) {
    state[name] = 1;
    for (const auto& [w, part] : laws.at(name).parts) {
      if (!laws.count(part)) fail(laws_node[name], fmt::format("law '{}': unknown part '{}'", name, part));
      if (state[part] == 1) fail(laws_node[name], fmt::format("law '{}': mixture cycle through '{}'", name, part));
      if (state[part] == 0) visit(part);
    }
    state[name] = 2;
  };
  for (const auto& [name, spec] : laws)
    if (state[name] == 0) visit(name);
}

// ---- sections ----

SimulateSpec parse_simulate(const YAML::Node& n, const Resolver& law) {
  require_map(n, "simulate");
  check_keys(n, {"law", "q0", "p0", "horizon", "checkpoints", "histogram"}, "simulate");
  SimulateSpec s;
  s.law = law(n, "law", "simulate");
  s.q0 = finite(n, "q0", s.q0);
  if (s.q0 < 0.0 || s.q0 >= 1.0) fail(n["q0"], "q0 must lie in [0, 1)");
  s.p0 = positive(n, "p0", s.p0);
  s.horizon = positive(n, "horizon", s.horizon);
  s.checkpoints = number_list(n, "checkpoints", true);
  for (std::size_t i = 0; i < s.checkpoints.size(); ++i) {
    if (s.checkpoints[i] > s.horizon) fail(n["checkpoints"][i], "checkpoints must not exceed the horizon");
    if (i > 0 && s.checkpoints[i] <= s.checkpoints[i - 1]) fail(n["checkpoints"][i], "checkpoints must increase");
  }
  if (s.checkpoints.empty()) s.checkpoints = {s.horizon};
  if (const YAML::Node h = n["histogram"]) {
    require_map(h, "histogram");
    check_keys(h, {"q_bins", "p_edges"}, "histogram");
    s.histogram.q_bins = get<int>(h, "q_bins", s.histogram.q_bins);
    if (s.histogram.q_bins < 1) fail(h["q_bins"], "q_bins must be positive");
    s.histogram.p_edges = number_list(h, "p_edges", true);
    for (std::size_t i = 1; i < s.histogram.p_edges.size(); ++i)
      if (s.histogram.p_edges[i] <= s.histogram.p_edges[i - 1]) fail(h["p_edges"][i], "p_edges must increase");
  }
  if (s.histogram.p_edges.size() == 1) fail(n["histogram"]["p_edges"], "p_edges needs at least two edges");
  return s;
}

RatesSpec parse_rates(const YAML::Node& n, const Resolver& law) {
  require_map(n, "rates");
  check_keys(n, {"law", "measures"}, "rates");
  RatesSpec s;
  s.law = law(n, "law", "rates");
  const YAML::Node ms = required(n, "measures", "rates");
  if (!ms.IsSequence()) fail(ms, "measures: expected a list");
  for (const auto& m : ms) {
    require_map(m, "measure");
    check_keys(m, {"name", "alpha1", "pi", "alpha2", "alpha3", "ell"}, "measure");
    MeasureSpec x;
    x.name = get<std::string>(m, "name", fmt::format("mu{}", s.measures.size() + 1));
    x.alpha1 = unit_interval(m, "alpha1", x.alpha1);
    x.pi = law(m, "pi", "measure", true);
    x.alpha2 = unit_interval(m, "alpha2", x.alpha2);
    x.alpha3 = unit_interval(m, "alpha3", x.alpha3);
    x.ell = unit_interval(m, "ell", x.ell);
    if (std::abs(x.alpha1 + x.alpha2 + x.alpha3 - 1.0) > 1e-12) fail(m, "alpha1 + alpha2 + alpha3 must equal 1");
    s.measures.push_back(x);
  }
  return s;
}

EventConfig parse_event(const YAML::Node& n) {
  require_map(n, "event");
  check_keys(n, {"kind", "threshold", "radius", "alpha", "ell"}, "event");
  EventConfig e;
  e.kind = as<std::string>(required(n, "kind", "event"), "kind");
  if (e.kind == "always") {
    if (n["threshold"] || n["radius"]) fail(n, "event 'always' takes no parameters");
  } else if (e.kind == "mean_momentum_exceeds") {
    e.threshold = positive(n, "threshold", 0.0);
  } else if (e.kind == "bl_ball" || e.kind == "momentum_marginal_ball") {
    e.threshold = positive(n, "radius", 0.0);
    e.alpha = unit_interval(n, "alpha", e.alpha);
    e.ell = unit_interval(n, "ell", e.ell);
  } else {
    fail(n["kind"], "event kind must be always, mean_momentum_exceeds, bl_ball or momentum_marginal_ball");
  }
  return e;
}

SchemeConfig parse_scheme(const YAML::Node& n, const Resolver& law) {
  require_map(n, "scheme");
  check_keys(n, {"kind", "alpha", "ell", "delta", "pi_tilde"}, "scheme");
  SchemeConfig s;
  s.kind = as<std::string>(required(n, "kind", "scheme"), "kind");
  if (s.kind == "none") {
    if (n.size() > 1) fail(n, "scheme 'none' takes no parameters");
    return s;
  }
  if (s.kind != "tilted") fail(n["kind"], "scheme kind must be none or tilted");
  s.alpha = unit_interval(n, "alpha", s.alpha);
  if (s.alpha >= 1.0) fail(n["alpha"], "alpha must be below 1");
  s.ell = unit_interval(n, "ell", s.ell);
  s.delta = positive(n, "delta", s.delta);
  s.pi_tilde = law(n, "pi_tilde", "scheme", true);
  if (s.alpha > 0.0 && s.pi_tilde.empty()) fail(n, "scheme: alpha > 0 needs pi_tilde");
  return s;
}

RareSpec parse_rare(const YAML::Node& n, const Resolver& law) {
  require_map(n, "rare");
  check_keys(n, {"law", "event", "scheme", "t_grid", "n_paths", "direct", "tightness", "free_energy"}, "rare");
  RareSpec s;
  s.law = law(n, "law", "rare");
  s.event = parse_event(required(n, "event", "rare"));
  if (const YAML::Node sc = n["scheme"]) s.scheme = parse_scheme(sc, law);
  s.t_grid = t_grid(n, "rare");
  s.n_paths = count(n, "n_paths", s.n_paths);
  s.direct = get<bool>(n, "direct", s.direct);
  if (const YAML::Node t = n["tightness"]) {
    require_map(t, "tightness");
    check_keys(t, {"m", "t_grid", "n_paths"}, "tightness");
    TightnessSpec x;
    x.m = number_list(t, "m", true);
    if (x.m.empty()) fail(t, "tightness: m must be a nonempty list");
    x.t_grid = t_grid(t, "tightness");
    x.n_paths = count(t, "n_paths", x.n_paths);
    s.tightness = x;
  }
  if (const YAML::Node f = n["free_energy"]) {
    require_map(f, "free_energy");
    check_keys(f, {"c", "delta", "g_a", "g_b", "m", "t_grid", "n_paths"}, "free_energy");
    FreeEnergySpec x;
    x.c = finite(f, "c", x.c);
    if (x.c < 0.0) fail(f["c"], "c must be nonnegative");
    x.delta = finite(f, "delta", x.delta);
    if (x.delta < 0.0) fail(f["delta"], "delta must be nonnegative (0 picks one)");
    x.g_a = finite(f, "g_a", x.g_a);
    x.g_b = finite(f, "g_b", x.g_b);
    x.m = finite(f, "m", x.m);
    if (!(x.m > 0.0 && x.m < 1.0)) fail(f["m"], "m must lie in (0, 1)");
    x.t_grid = t_grid(f, "free_energy");
    x.n_paths = count(f, "n_paths", x.n_paths);
    s.free_energy = x;
  }
  return s;
}

NonLdpSpec parse_nonldp(const YAML::Node& n, const Resolver& law) {
  require_map(n, "nonldp");
  check_keys(n, {"law", "control", "alpha", "ell", "delta", "ball_radius", "delta1", "calibrate",
                 "j_min", "j_max", "n_paths"},
             "nonldp");
  NonLdpSpec s;
  s.law = law(n, "law", "nonldp");
  s.control = law(n, "control", "nonldp", true);
  s.alpha = unit_interval(n, "alpha", s.alpha);
  if (s.alpha >= 1.0) fail(n["alpha"], "alpha must be below 1");
  s.ell = unit_interval(n, "ell", s.ell);
  if (!(s.ell > 0.0)) fail(n["ell"], "ell must be positive");
  s.delta = positive(n, "delta", s.delta);
  s.ball_radius = positive(n, "ball_radius", s.ball_radius);
  s.delta1 = positive(n, "delta1", s.delta1);
  if (const YAML::Node c = n["calibrate"]) {
    if (n["delta1"]) fail(c, "give either delta1 or calibrate, not both");
    require_map(c, "calibrate");
    check_keys(c, {"law", "t_grid", "n_paths", "safety"}, "calibrate");
    CalibrationSpec x;
    x.law = law(c, "law", "calibrate");
    x.t_grid = number_list(c, "t_grid", true, x.t_grid);
    if (x.t_grid.empty()) fail(c["t_grid"], "t_grid must be nonempty");
    x.n_paths = count(c, "n_paths", x.n_paths);
    x.safety = positive(c, "safety", x.safety);
    s.calibrate = x;
  }
  s.j_min = get<int>(n, "j_min", s.j_min);
  s.j_max = get<int>(n, "j_max", s.j_max);
  if (s.j_min < 1) fail(n["j_min"], "j_min must be at least 1");
  if (s.j_max < s.j_min + 2) fail(n["j_max"] ? n["j_max"] : n, "j_max must be at least j_min + 2");
  s.n_paths = count(n, "n_paths", s.n_paths);
  return s;
}

// ---- emission ----

void emit_numbers(YAML::Emitter& out, const std::vector<double>& xs) {
  out << YAML::Flow << YAML::BeginSeq;
  for (double x : xs) out << x;
  out << YAML::EndSeq;
}

void emit_law(YAML::Emitter& out, const LawSpec& s) {
  out << YAML::BeginMap << YAML::Key << "kind" << YAML::Value << s.kind;
  if (!s.builtin.empty()) {
    out << YAML::Key << "builtin" << YAML::Value << s.builtin;
    if (s.builtin == "exp_interarrival") out << YAML::Key << "xi0" << YAML::Value << s.param;
    if (s.builtin == "polynomial") out << YAML::Key << "kappa" << YAML::Value << s.param;
  } else if (s.kind == "atomic") {
    out << YAML::Key << "role" << YAML::Value << s.role;
    out << YAML::Key << "atoms" << YAML::Value << YAML::BeginSeq;
    for (const auto& [x, w] : s.atoms) out << YAML::Flow << YAML::BeginSeq << x << w << YAML::EndSeq;
    out << YAML::EndSeq;
  } else {
    out << YAML::Key << "parts" << YAML::Value << YAML::BeginSeq;
    for (const auto& [w, name] : s.parts) out << YAML::Flow << YAML::BeginSeq << w << name << YAML::EndSeq;
    out << YAML::EndSeq;
  }
  out << YAML::EndMap;
}

template <typename T>
void kv(YAML::Emitter& out, const char* key, const T& value) {
  out << YAML::Key << key << YAML::Value << value;
}

void kv_list(YAML::Emitter& out, const char* key, const std::vector<double>& xs) {
  out << YAML::Key << key << YAML::Value;
  emit_numbers(out, xs);
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError(e.msg, e.mark.line >= 0 ? e.mark.line + 1 : 0);
  }
  if (!root || root.IsNull()) throw ConfigError("empty config", 0);
  require_map(root, "config");
  check_keys(root, {"seed", "output", "threads", "laws", "simulate", "rates", "rare", "nonldp"}, "config");
  ExperimentConfig c;
  if (const YAML::Node s = root["seed"]) {
    if (s.IsScalar() && !s.Scalar().empty() && s.Scalar()[0] == '-') fail(s, "seed must be nonnegative");
    c.seed = as<std::uint64_t>(s, "seed");
  }
  c.output = get<std::string>(root, "output", "");
  if (!c.output.empty() && c.output.front() == '/') fail(root["output"], "output must be a relative path");
  c.threads = get<int>(root, "threads", c.threads);
  if (c.threads < 1) fail(root["threads"], "threads must be positive");
  if (const YAML::Node laws = root["laws"]) {
    require_map(laws, "laws");
    for (const auto& kv : laws) {
      const auto name = kv.first.as<std::string>();
      c.laws[name] = parse_law(kv.second, name);
    }
    check_mixture_graph(laws, c.laws);
  }
  const Resolver law{c.laws};
  if (const YAML::Node n = root["simulate"]) c.simulate = parse_simulate(n, law);
  if (const YAML::Node n = root["rates"]) c.rates = parse_rates(n, law);
  if (const YAML::Node n = root["rare"]) c.rare = parse_rare(n, law);
  if (const YAML::Node n = root["nonldp"]) c.nonldp = parse_nonldp(n, law);
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'", 0);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string emit_config(const ExperimentConfig& c) {
  YAML::Emitter out;
  out.SetDoublePrecision(17);
  out << YAML::BeginMap;
  if (c.seed) kv(out, "seed", *c.seed);
  if (!c.output.empty()) kv(out, "output", c.output);
  kv(out, "threads", c.threads);
  if (!c.laws.empty()) {
    out << YAML::Key << "laws" << YAML::Value << YAML::BeginMap;
    for (const auto& [name, spec] : c.laws) {
      out << YAML::Key << name << YAML::Value;
      emit_law(out, spec);
    }
    out << YAML::EndMap;
  }
  if (const auto& s = c.simulate) {
    out << YAML::Key << "simulate" << YAML::Value << YAML::BeginMap;
    kv(out, "law", s->law);
    kv(out, "q0", s->q0);
    kv(out, "p0", s->p0);
    kv(out, "horizon", s->horizon);
    kv_list(out, "checkpoints", s->checkpoints);
    out << YAML::Key << "histogram" << YAML::Value << YAML::BeginMap;
    kv(out, "q_bins", s->histogram.q_bins);
    if (!s->histogram.p_edges.empty()) kv_list(out, "p_edges", s->histogram.p_edges);
    out << YAML::EndMap << YAML::EndMap;
  }
  if (const auto& s = c.rates) {
    out << YAML::Key << "rates" << YAML::Value << YAML::BeginMap;
    kv(out, "law", s->law);
    out << YAML::Key << "measures" << YAML::Value << YAML::BeginSeq;
    for (const auto& m : s->measures) {
      out << YAML::BeginMap;
      kv(out, "name", m.name);
      kv(out, "alpha1", m.alpha1);
      if (!m.pi.empty()) kv(out, "pi", m.pi);
      kv(out, "alpha2", m.alpha2);
      kv(out, "alpha3", m.alpha3);
      kv(out, "ell", m.ell);
      out << YAML::EndMap;
    }
    out << YAML::EndSeq << YAML::EndMap;
  }
  if (const auto& s = c.rare) {
    out << YAML::Key << "rare" << YAML::Value << YAML::BeginMap;
    kv(out, "law", s->law);
    out << YAML::Key << "event" << YAML::Value << YAML::BeginMap;
    kv(out, "kind", s->event.kind);
    if (s->event.kind == "mean_momentum_exceeds") kv(out, "threshold", s->event.threshold);
    if (s->event.kind == "bl_ball" || s->event.kind == "momentum_marginal_ball") {
      kv(out, "radius", s->event.threshold);
      kv(out, "alpha", s->event.alpha);
      kv(out, "ell", s->event.ell);
    }
    out << YAML::EndMap;
    out << YAML::Key << "scheme" << YAML::Value << YAML::BeginMap;
    kv(out, "kind", s->scheme.kind);
    if (s->scheme.kind == "tilted") {
      kv(out, "alpha", s->scheme.alpha);
      kv(out, "ell", s->scheme.ell);
      kv(out, "delta", s->scheme.delta);
      if (!s->scheme.pi_tilde.empty()) kv(out, "pi_tilde", s->scheme.pi_tilde);
    }
    out << YAML::EndMap;
    kv_list(out, "t_grid", s->t_grid);
    kv(out, "n_paths", s->n_paths);
    kv(out, "direct", s->direct);
    if (const auto& t = s->tightness) {
      out << YAML::Key << "tightness" << YAML::Value << YAML::BeginMap;
      kv_list(out, "m", t->m);
      kv_list(out, "t_grid", t->t_grid);
      kv(out, "n_paths", t->n_paths);
      out << YAML::EndMap;
    }
    if (const auto& f = s->free_energy) {
      out << YAML::Key << "free_energy" << YAML::Value << YAML::BeginMap;
      kv(out, "c", f->c);
      kv(out, "delta", f->delta);
      kv(out, "g_a", f->g_a);
      kv(out, "g_b", f->g_b);
      kv(out, "m", f->m);
      kv_list(out, "t_grid", f->t_grid);
      kv(out, "n_paths", f->n_paths);
      out << YAML::EndMap;
    }
    out << YAML::EndMap;
  }
  if (const auto& s = c.nonldp) {
    out << YAML::Key << "nonldp" << YAML::Value << YAML::BeginMap;
    kv(out, "law", s->law);
    if (!s->control.empty()) kv(out, "control", s->control);
    kv(out, "alpha", s->alpha);
    kv(out, "ell", s->ell);
    kv(out, "delta", s->delta);
    kv(out, "ball_radius", s->ball_radius);
    if (const auto& cal = s->calibrate) {
      out << YAML::Key << "calibrate" << YAML::Value << YAML::BeginMap;
      kv(out, "law", cal->law);
      kv_list(out, "t_grid", cal->t_grid);
      kv(out, "n_paths", cal->n_paths);
      kv(out, "safety", cal->safety);
      out << YAML::EndMap;
    } else {
      kv(out, "delta1", s->delta1);
    }
    kv(out, "j_min", s->j_min);
    kv(out, "j_max", s->j_max);
    kv(out, "n_paths", s->n_paths);
    out << YAML::EndMap;
  }
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

std::string config_hash(const ExperimentConfig& config) {
  const std::string text = emit_config(config);
  boost::crc_32_type crc;
  crc.process_bytes(text.data(), text.size());
  return fmt::format("{:08x}", crc.checksum());
}

std::map<std::string, ProbabilityLaw> build_laws(const ExperimentConfig& config) {
  std::map<std::string, ProbabilityLaw> built;
  std::function<ProbabilityLaw(const std::string&)> build = [&](const std::string& name) {
    if (auto it = built.find(name); it != built.end()) return it->second;
    const LawSpec& s = config.laws.at(name);
    ProbabilityLaw law;
    if (s.builtin == "dyadic") {
      law = ProbabilityLaw::dyadic();
    } else if (s.builtin == "exp_interarrival") {
      law = ProbabilityLaw::exp_interarrival(s.param);
    } else if (s.builtin == "polynomial") {
      law = ProbabilityLaw::polynomial(s.param);
    } else if (s.kind == "atomic") {
      law = ProbabilityLaw::atomic(s.atoms, s.role == "speed" ? LawRole::speed : LawRole::interarrival);
      if (s.role == "interarrival") law = interarrival_to_speed(law);
    } else {
      std::vector<std::pair<double, ProbabilityLaw>> parts;
      for (const auto& [w, part] : s.parts) parts.emplace_back(w, build(part));
      law = ProbabilityLaw::mixture(parts);
    }
    law = law.with_name(name);
    built.emplace(name, law);
    return law;
  };
  for (const auto& [name, spec] : config.laws) build(name);
  return built;
}

}  // namespace hotwall::cli
