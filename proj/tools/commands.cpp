#include "commands.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <boost/version.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "hotwall/empirical.hpp"
#include "hotwall/errors.hpp"
#include "hotwall/laws.hpp"
#include "hotwall/process.hpp"
#include "hotwall/random.hpp"
#include "hotwall/rare_event.hpp"
#include "hotwall/rate.hpp"

#ifndef HOTWALL_VERSION
#define HOTWALL_VERSION "0.0.0"
#endif

namespace hotwall::cli {

using nlohmann::json;

std::string num(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return fmt::format("{:.17g}", x);
}

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string yes(bool b) { return b ? "ok" : "FAIL"; }

// JSON has no infinities: non-finite values become strings.
json jnum(double x) {
  if (std::isfinite(x)) return x;
  return num(x);
}
json jnum(const ExtendedReal& x) { return jnum(x.to_double()); }

class Output {
 public:
  Output(const RunContext& ctx, RunResult& result) : dir_(ctx.out_dir), result_(result) {
    std::filesystem::create_directories(dir_);
  }

  std::ofstream open(const std::string& name) {
    std::ofstream os(dir_ / name, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + (dir_ / name).string());
    result_.files.push_back(name);
    return os;
  }

  void write_json(const std::string& name, const json& j) { open(name) << j.dump(2) << '\n'; }

 private:
  std::filesystem::path dir_;
  RunResult& result_;
};

const ProbabilityLaw& law_named(const std::map<std::string, ProbabilityLaw>& laws, const std::string& name) {
  return laws.at(name);
}

std::uint64_t sub_seed(std::uint64_t seed, std::uint64_t k) { return seed * 1000003 + k; }

std::vector<double> default_p_edges() {
  std::vector<double> edges;
  for (int k = -12; k <= 6; ++k) edges.push_back(std::ldexp(1.0, k));
  return edges;
}

void write_slope_row(std::ostream& os, const std::string& series, const SlopeEstimate& s) {
  os << series << ',' << s.tag << ',' << num(s.slope) << ',' << num(s.intercept) << ',' << num(s.slope_se)
     << ',' << num(s.ci_lo) << ',' << num(s.ci_hi) << ',' << s.t_grid.size() << '\n';
}

json slope_json(const SlopeEstimate& s) {
  return {{"tag", s.tag},          {"slope", jnum(s.slope)}, {"intercept", jnum(s.intercept)},
          {"slope_se", jnum(s.slope_se)}, {"ci_lo", jnum(s.ci_lo)}, {"ci_hi", jnum(s.ci_hi)},
          {"points", s.t_grid.size()}};
}

// Fits log p over the points with at least one hit; needs three of them.
std::optional<SlopeEstimate> fit_hits(const std::vector<double>& t, const std::vector<ProbabilityEstimate>& est,
                                      const std::string& tag) {
  std::vector<double> ts, ys, ses;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (est[i].hits == 0 || !std::isfinite(est[i].log_estimate)) continue;
    ts.push_back(t[i]);
    ys.push_back(est[i].log_estimate);
    ses.push_back(std::exp(est[i].log_stderr - est[i].log_estimate));
  }
  if (ts.size() < 3) return std::nullopt;
  return fit_slope(ts, ys, ses, tag);
}

}  // namespace

// ---- simulate ----

RunResult run_simulate(const RunContext& ctx) {
  const SimulateSpec& s = ctx.config.simulate.value();
  RunResult result;
  Output out(ctx, result);
  const auto laws = build_laws(ctx.config);
  const ProbabilityLaw& phi = law_named(laws, s.law);

  Rng rng(ctx.seed, 0);
  const Trajectory path = simulate(s.q0, s.p0, s.horizon, phi, rng);
  {
    auto os = out.open("trajectory.csv");
    path.write_csv(os);
  }

  // Limit measure dq x pi with pi ~ phi(dp)/p, or dq x delta_0 when that law does not exist.
  std::optional<EmpiricalMeasure> target;
  double target_mean = 0.0;
  const auto pi = frozen_momentum_law(phi);
  if (!pi) {
    target = lambda_component(1.0, 0.0);
  } else {
    target_mean = mean(*pi).to_double();
    if (pi->is_atomic()) target = product_target(*pi);
  }

  auto os = out.open("lln.csv");
  os << "t,bl,tv,mean_momentum,target_mean_momentum\n";
  double last_bl = kNaN;
  for (double t : s.checkpoints) {
    const auto mu = empirical_measure(path, t);
    double bl = kNaN;
    double tv = kNaN;
    if (target) {
      const auto rep = compare(mu, *target);
      bl = rep.bl;
      tv = rep.tv;
    }
    last_bl = bl;
    os << num(t) << ',' << num(bl) << ',' << num(tv) << ',' << num(mu.mean_momentum()) << ','
       << num(target_mean) << '\n';
  }
  {
    auto hs = out.open("histogram.csv");
    hs << "q_bin,p_bin,mass\n";
    const auto edges = s.histogram.p_edges.empty() ? default_p_edges() : s.histogram.p_edges;
    write_histogram(hs, empirical_measure(path, s.horizon), s.histogram.q_bins, edges);
  }
  result.lines.push_back(fmt::format("simulate: {} cycles up to t={}; bl distance to the limit at t={}: {}",
                                     path.cycles().size(), num(s.horizon), num(s.checkpoints.back()),
                                     target ? num(last_bl) : "n/a (non-atomic limit)"));
  return result;
}

// ---- rates ----

RunResult run_rates(const RunContext& ctx) {
  const RatesSpec& s = ctx.config.rates.value();
  RunResult result;
  Output out(ctx, result);
  const auto laws = build_laws(ctx.config);
  const ProbabilityLaw& phi = law_named(laws, s.law);

  const ExtendedReal xi = compute_xi(phi);
  const auto tail = estimate_xi_bar(phi);
  const bool xi_ok = xi.to_double() <= tail.xi_bar_upper.to_double();
  result.checks_passed = xi_ok;
  result.lines.push_back(fmt::format("rates: xi = {}, xi-bar in [{}, {}] ({})", num(xi.to_double()),
                                     num(tail.xi_bar_lower.to_double()), num(tail.xi_bar_upper.to_double()),
                                     yes(xi_ok)));

  json records = json::array();
  auto csv = out.open("rates.csv");
  csv << "name,alpha1,alpha2,alpha3,ell,entropy_part,I,I_bar,I_bar_lower,gap\n";
  for (const auto& m : s.measures) {
    const ProbabilityLaw pi = m.pi.empty() ? invariant_measure(phi).pi : law_named(laws, m.pi);
    const auto mu = OmegaMeasure::make(m.alpha1, pi, m.alpha2, m.alpha3, m.ell, phi);
    const auto i = rate_I(mu, phi, xi);
    const auto ib = rate_I_bar(mu, phi, xi, tail.xi_bar_upper);
    const auto ib_lo = rate_I_bar(mu, phi, xi, tail.xi_bar_lower);
    const double gap = ib.total.is_infinite() && i.total.is_infinite()
                           ? kNaN
                           : ib.total.to_double() - i.total.to_double();
    const bool ok = i.total.to_double() <= ib_lo.total.to_double();
    result.checks_passed = result.checks_passed && ok;
    csv << m.name << ',' << num(m.alpha1) << ',' << num(m.alpha2) << ',' << num(m.alpha3) << ','
        << num(m.ell) << ',' << num(i.entropy_part.to_double()) << ',' << num(i.total.to_double()) << ','
        << num(ib.total.to_double()) << ',' << num(ib_lo.total.to_double()) << ',' << num(gap) << '\n';
    records.push_back({{"name", m.name},
                       {"mu_spec", describe(mu)},
                       {"xi", jnum(xi)},
                       {"xi_bar", {jnum(tail.xi_bar_lower), jnum(tail.xi_bar_upper)}},
                       {"I", jnum(i.total)},
                       {"I_bar", jnum(ib.total)},
                       {"I_bar_lower", jnum(ib_lo.total)},
                       {"gap", jnum(gap)}});
    result.lines.push_back(fmt::format("  {}: I = {}, I-bar = {} ({})", m.name, num(i.total.to_double()),
                                       num(ib.total.to_double()), yes(ok)));
  }
  out.write_json("rates.json", {{"law", describe(phi)},
                                {"xi", jnum(xi)},
                                {"xi_converged", tail.xi_converged},
                                {"xi_bar_lower", jnum(tail.xi_bar_lower)},
                                {"xi_bar_upper", jnum(tail.xi_bar_upper)},
                                {"xi_bar_infinite", tail.xi_bar_infinite},
                                {"records", records},
                                {"checks_passed", result.checks_passed}});
  return result;
}

// ---- rare ----

namespace {

EventSpec make_event(const EventConfig& e, const ProbabilityLaw& phi) {
  if (e.kind == "always") return EventSpec::always();
  if (e.kind == "mean_momentum_exceeds") return EventSpec::mean_momentum_exceeds(e.threshold);
  const auto center = non_ldp_center(e.alpha, e.ell, phi);
  if (e.kind == "bl_ball") return EventSpec::bl_ball(center, e.threshold);
  return EventSpec::momentum_marginal_ball(center, e.threshold);
}

TiltedScheme make_scheme(const SchemeConfig& s, const std::map<std::string, ProbabilityLaw>& laws,
                         const ProbabilityLaw& phi, double t) {
  if (s.kind == "none") return TiltedScheme::no_tilt(phi, t);
  const ProbabilityLaw& pt = s.pi_tilde.empty() ? phi : laws.at(s.pi_tilde);
  return TiltedScheme::make(s.alpha, pt, s.ell, s.delta, t);
}

}  // namespace

RunResult run_rare(const RunContext& ctx) {
  const RareSpec& s = ctx.config.rare.value();
  RunResult result;
  Output out(ctx, result);
  const auto laws = build_laws(ctx.config);
  const ProbabilityLaw& phi = law_named(laws, s.law);
  const EventSpec event = make_event(s.event, phi);
  const bool tilted = s.scheme.kind != "none";

  std::vector<double> ts;
  std::vector<ProbabilityEstimate> is_est, direct_est;
  int disagreements = 0;
  int cost_failures = 0;
  auto est = out.open("estimates.csv");
  est << "t,method,estimate,stderr,log_estimate,log_stderr,hits,n,ess,entropy_cost,cost_mc_mean,cost_mc_stderr\n";
  json points = json::array();
  for (std::size_t i = 0; i < s.t_grid.size(); ++i) {
    const double t = s.t_grid[i];
    const auto scheme = make_scheme(s.scheme, laws, phi, t);
    const double cost = entropy_cost(scheme, phi).to_double();
    std::optional<ProbabilityEstimate> is;
    std::optional<CostCheck> cc;
    if (std::isfinite(cost)) {
      is = importance_probability(event, scheme, s.n_paths, phi, sub_seed(ctx.seed, i));
      cc = entropy_cost_check(scheme, phi, s.n_paths, sub_seed(ctx.seed, 700000 + i));
      if (!cc->within_3sigma) ++cost_failures;
    }
    std::optional<ProbabilityEstimate> d;
    if (s.direct) d = direct_probability(event, t, s.n_paths, phi, sub_seed(ctx.seed, 500000 + i));
    if (is && d) {
      // A tilted law may miss part of the event, so there the estimator is only a lower bound.
      const double tol = 3.0 * std::hypot(is->stderr_, d->stderr_);
      const double diff = is->estimate - d->estimate;
      const bool ok = tilted ? diff <= tol : std::abs(diff) <= tol;
      if (!ok) ++disagreements;
    }
    auto row = [&](const char* method, const ProbabilityEstimate& e, bool with_cost) {
      est << num(t) << ',' << method << ',' << num(e.estimate) << ',' << num(e.stderr_) << ','
          << num(e.log_estimate) << ',' << num(e.log_stderr) << ',' << e.hits << ',' << e.n << ','
          << num(e.ess) << ',' << num(with_cost ? cost : kNaN) << ','
          << num(with_cost && cc ? cc->mc_mean : kNaN) << ',' << num(with_cost && cc ? cc->mc_stderr : kNaN)
          << '\n';
    };
    if (is) {
      row("importance", *is, true);
      ts.push_back(t);
      is_est.push_back(*is);
      if (d) direct_est.push_back(*d);
    } else {
      est << num(t) << ",importance,nan,nan,nan,nan,0,0,nan,inf,nan,nan\n";
    }
    if (d) row("direct", *d, false);
    json p = {{"t", t}, {"scheme", scheme.describe()}, {"entropy_cost", jnum(cost)}, {"empty_window", !is}};
    if (is) p["log_importance"] = jnum(is->log_estimate);
    if (d) p["log_direct"] = jnum(d->log_estimate);
    points.push_back(p);
  }
  est.close();

  json slopes = json::object();
  {
    auto sl = out.open("slopes.csv");
    sl << "series,tag,slope,intercept,slope_se,ci_lo,ci_hi,points\n";
    if (auto f = fit_hits(ts, is_est, "importance")) {
      write_slope_row(sl, "event", *f);
      slopes["importance"] = slope_json(*f);
      result.lines.push_back(fmt::format("rare: importance slope {} [{}, {}]", num(f->slope), num(f->ci_lo),
                                         num(f->ci_hi)));
    }
    if (direct_est.size() == ts.size()) {
      if (auto f = fit_hits(ts, direct_est, "direct")) {
        write_slope_row(sl, "event", *f);
        slopes["direct"] = slope_json(*f);
        result.lines.push_back(fmt::format("rare: direct slope {} [{}, {}]", num(f->slope), num(f->ci_lo),
                                           num(f->ci_hi)));
      }
    }
  }
  result.lines.push_back(fmt::format("rare: importance vs direct disagreements {} ({}); entropy cost "
                                     "checks outside 3 sigma {} ({})",
                                     disagreements, yes(disagreements == 0), cost_failures,
                                     yes(cost_failures == 0)));
  bool ok = disagreements == 0 && cost_failures == 0;

  json tight = json::array();
  if (const auto& tc = s.tightness) {
    auto os = out.open("tightness.csv");
    os << "t,m,estimate,stderr,hits,bound,ok\n";
    int bad = 0;
    std::uint64_t k = 0;
    for (double t : tc->t_grid) {
      for (double m : tc->m) {
        const auto p = tightness_check(m, t, phi, tc->n_paths, sub_seed(ctx.seed, 800000 + k++));
        if (!p.ok) ++bad;
        os << num(t) << ',' << num(m) << ',' << num(p.mc.estimate) << ',' << num(p.mc.stderr_) << ','
           << p.mc.hits << ',' << num(p.bound) << ',' << (p.ok ? 1 : 0) << '\n';
        tight.push_back({{"t", t}, {"m", m}, {"estimate", jnum(p.mc.estimate)}, {"bound", jnum(p.bound)}, {"ok", p.ok}});
      }
    }
    result.lines.push_back(fmt::format("rare: tightness violations {} ({})", bad, yes(bad == 0)));
    ok = ok && bad == 0;
  }

  json free = json::object();
  if (const auto& fe = s.free_energy) {
    const double a = fe->g_a;
    const double b = fe->g_b;
    const BoundedFunction g{[a, b](double p) { return a + b * p / (1.0 + p); }, a + std::max(b, 0.0)};
    const double delta = fe->delta > 0.0 ? fe->delta : suitable_delta(fe->c, g, phi);
    try {
      const auto f = test_function_fixture(fe->c, delta, g, fe->m, phi, compute_xi(phi));
      auto os = out.open("free_energy.csv");
      os << "t,mc_mean,mc_stderr,bound,ok\n";
      int bad = 0;
      json rows = json::array();
      for (const auto& p : free_energy_check(f, phi, fe->t_grid, fe->n_paths, sub_seed(ctx.seed, 900000))) {
        if (!p.ok) ++bad;
        os << num(p.t) << ',' << num(p.mc_mean) << ',' << num(p.mc_stderr) << ',' << num(p.bound) << ','
           << (p.ok ? 1 : 0) << '\n';
        rows.push_back({{"t", p.t}, {"mc_mean", jnum(p.mc_mean)}, {"bound", jnum(p.bound)}, {"ok", p.ok}});
      }
      free = {{"delta", delta}, {"c_f", jnum(f.c_f)}, {"d_f", jnum(f.d_f)}, {"points", rows}};
      result.lines.push_back(fmt::format("rare: free energy delta={} C_f={} violations {} ({})", num(delta),
                                         num(f.c_f), bad, yes(bad == 0)));
      ok = ok && bad == 0;
    } catch (const NotInLambda& e) {
      free = {{"error", e.what()}};
      result.lines.push_back(fmt::format("rare: free energy fixture rejected: {} (FAIL)", e.what()));
      ok = false;
    }
  }

  result.checks_passed = ok;
  out.write_json("rare.json", {{"law", describe(phi)},
                               {"event", event.label},
                               {"points", points},
                               {"slopes", slopes},
                               {"tightness", tight},
                               {"free_energy", free},
                               {"checks_passed", ok}});
  return result;
}

// ---- nonldp ----

RunResult run_nonldp(const RunContext& ctx) {
  const NonLdpSpec& s = ctx.config.nonldp.value();
  RunResult result;
  Output out(ctx, result);
  const auto laws = build_laws(ctx.config);
  const ProbabilityLaw& phi = law_named(laws, s.law);

  NonLdpConfig cfg;
  cfg.alpha = s.alpha;
  cfg.ell = s.ell;
  cfg.delta = s.delta;
  cfg.ball_radius = s.ball_radius;
  cfg.delta1 = s.delta1;
  cfg.j_min = s.j_min;
  cfg.j_max = s.j_max;
  cfg.n_paths = s.n_paths;
  cfg.seed = ctx.seed;

  json cal_json = nullptr;
  if (const auto& cal = s.calibrate) {
    const auto c = calibrate_delta1(s.alpha, s.ell, s.ball_radius, laws.at(cal->law), cal->t_grid,
                                    cal->n_paths, ctx.seed);
    cfg.delta1 = cal->safety * c.delta1;
    cal_json = {{"law", cal->law}, {"delta1", jnum(c.delta1)}, {"inside", c.inside}, {"sampled", c.sampled},
                {"safety", cal->safety}};
    result.lines.push_back(fmt::format("nonldp: delta1 calibrated on {}: {} ({} of {} paths in the ball); used {}",
                                       cal->law, num(c.delta1), c.inside, c.sampled, num(cfg.delta1)));
  }

  const auto res = non_ldp_experiment(cfg, phi, compute_xi(phi));
  const double ms = res.matched_slope.slope;
  const bool matched_ok = std::abs(ms - res.target_slope) <= 0.2 * std::abs(res.target_slope);
  bool all_empty = true;
  for (const auto& m : res.mismatched) all_empty = all_empty && m.empty_window;
  const double bs = res.mismatched_bound_slope ? res.mismatched_bound_slope->slope : kNaN;
  const bool bound_ok = res.mismatched_bound_slope.has_value() && bs <= ms - 0.5;

  {
    auto os = out.open("matched.csv");
    os << "t,estimate,log_estimate,log_stderr,hits,n\n";
    for (std::size_t i = 0; i < res.matched.size(); ++i) {
      const auto& e = res.matched[i];
      os << num(res.matched_times[i]) << ',' << num(e.estimate) << ',' << num(e.log_estimate) << ','
         << num(e.log_stderr) << ',' << e.hits << ',' << e.n << '\n';
    }
  }
  {
    auto os = out.open("mismatched.csv");
    os << "s,empty_window,log_importance,log_bound\n";
    for (const auto& m : res.mismatched) {
      os << num(m.s) << ',' << (m.empty_window ? 1 : 0) << ','
         << num(m.importance ? m.importance->log_estimate : kNaN) << ',' << num(m.log_bound) << '\n';
    }
  }

  bool control_ok = true;
  json control = nullptr;
  std::optional<NonLdpResult> ctl;
  if (!s.control.empty()) {
    const ProbabilityLaw& cphi = laws.at(s.control);
    ctl = non_ldp_experiment(cfg, cphi, compute_xi(cphi));
    control_ok = false;
    if (ctl->mismatched_is_slope) {
      const auto& a = ctl->matched_slope;
      const auto& b = *ctl->mismatched_is_slope;
      control_ok = a.ci_lo <= b.ci_hi && b.ci_lo <= a.ci_hi;
      control = {{"law", s.control}, {"matched", slope_json(a)}, {"mismatched", slope_json(b)}, {"overlap", control_ok}};
    }
    result.lines.push_back(fmt::format("nonldp: control law '{}': matched and mismatched slope intervals overlap {}", s.control, yes(control_ok)));
  }
  {
    auto os = out.open("slopes.csv");
    os << "series,tag,slope,intercept,slope_se,ci_lo,ci_hi,points\n";
    write_slope_row(os, "matched", res.matched_slope);
    if (res.mismatched_is_slope) write_slope_row(os, "mismatched", *res.mismatched_is_slope);
    if (res.mismatched_bound_slope) write_slope_row(os, "mismatched", *res.mismatched_bound_slope);
    if (ctl) {
      write_slope_row(os, "control_matched", ctl->matched_slope);
      if (ctl->mismatched_is_slope) write_slope_row(os, "control_mismatched", *ctl->mismatched_is_slope);
    }
  }

  result.checks_passed = matched_ok && all_empty && bound_ok && control_ok;
  result.lines.push_back(fmt::format("nonldp: matched slope {} (target {}, {}); mismatched windows empty {}; "
                                     "bound slope {}, margin {} ({})",
                                     num(ms), num(res.target_slope), yes(matched_ok), yes(all_empty), num(bs),
                                     num(ms - bs), yes(bound_ok)));
  json j = {{"law", describe(phi)},
            {"target_slope", jnum(res.target_slope)},
            {"delta1", jnum(cfg.delta1)},
            {"calibration", cal_json},
            {"matched_slope", slope_json(res.matched_slope)},
            {"mismatched_windows_empty", all_empty},
            {"control", control},
            {"checks", {{"matched_slope", matched_ok}, {"mismatched_empty", all_empty},
                        {"bound_separation", bound_ok}, {"control_overlap", control_ok}}},
            {"checks_passed", result.checks_passed}};
  if (res.mismatched_bound_slope) j["mismatched_bound_slope"] = slope_json(*res.mismatched_bound_slope);
  if (res.mismatched_is_slope) j["mismatched_importance_slope"] = slope_json(*res.mismatched_is_slope);
  out.write_json("nonldp.json", j);
  return result;
}

// ---- dispatch ----

RunResult run_subcommand(const std::string& name, const RunContext& ctx) {
  const auto need = [&](bool present) {
    if (!present) throw ConfigError("config has no '" + name + "' section", 0);
  };
  RunResult result;
  if (name == "simulate") {
    need(ctx.config.simulate.has_value());
    result = run_simulate(ctx);
  } else if (name == "rates") {
    need(ctx.config.rates.has_value());
    result = run_rates(ctx);
  } else if (name == "rare") {
    need(ctx.config.rare.has_value());
    result = run_rare(ctx);
  } else if (name == "nonldp") {
    need(ctx.config.nonldp.has_value());
    result = run_nonldp(ctx);
  } else {
    throw std::invalid_argument("unknown subcommand " + name);
  }

  Output out(ctx, result);
  ExperimentConfig effective = ctx.config;
  effective.seed = ctx.seed;
  out.open("config.yaml") << emit_config(effective);
  json manifest = {{"subcommand", name},
                   {"config_hash", config_hash(effective)},
                   {"seed", ctx.seed},
                   {"threads", thread_count()},
                   {"files", result.files},
                   {"checks_passed", result.checks_passed},
                   {"versions",
                    {{"hotwall", HOTWALL_VERSION},
                     {"compiler", __VERSION__},
                     {"boost", BOOST_LIB_VERSION},
                     {"fmt", FMT_VERSION},
                     {"nlohmann_json", fmt::format("{}.{}.{}", NLOHMANN_JSON_VERSION_MAJOR,
                                                   NLOHMANN_JSON_VERSION_MINOR, NLOHMANN_JSON_VERSION_PATCH)}}}};
  out.write_json("manifest.json", manifest);
  return result;
}

}  // namespace hotwall::cli
