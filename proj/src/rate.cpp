#include "hotwall/rate.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <variant>

#include <fmt/format.h>

#include "hotwall/errors.hpp"
#include "hotwall/numeric.hpp"
#include "hotwall/quadrature.hpp"

namespace hotwall {

// ---- Omega measures ----

void OmegaMeasure::validate() const {
  for (double a : {alpha1, alpha2, alpha3}) {
    if (!(a >= 0.0 && a <= 1.0)) throw std::invalid_argument("OmegaMeasure: weights must lie in [0, 1]");
  }
  if (std::abs(alpha1 + alpha2 + alpha3 - 1.0) > 1e-12) {
    throw std::invalid_argument("OmegaMeasure: weights must sum to 1");
  }
  if (!(ell >= 0.0 && ell < 1.0)) throw std::invalid_argument("OmegaMeasure: ell must lie in [0, 1)");
  if (alpha1 > 0.0 && !pi.is_atomic() && !pi.is_density() && !pi.is_mixture()) {
    throw std::invalid_argument("OmegaMeasure: missing pi");
  }
}

OmegaMeasure OmegaMeasure::make(double alpha1, const ProbabilityLaw& pi, double alpha2,
                                double alpha3, double ell, const ProbabilityLaw& phi) {
  OmegaMeasure mu{alpha1, alpha2, alpha3, alpha1 == 0.0 ? phi : pi, alpha3 == 0.0 ? 0.5 : ell,
                  false};
  mu.validate();
  return mu;
}

OmegaMeasure invariant_measure(const ProbabilityLaw& phi) {
  return {1.0, 0.0, 0.0, size_bias_inverse(phi), 0.5, false};
}

EmpiricalMeasure to_measure(const OmegaMeasure& mu) {
  std::vector<MeasureComponent<double>> out;
  if (mu.alpha1 > 0.0) {
    const auto target = product_target(mu.pi);
    for (const auto& c : target.components()) {
      out.push_back({c.momentum, 0.0, 1.0, mu.alpha1 * c.weight});
    }
  }
  if (mu.alpha2 > 0.0) out.push_back({0.0, 0.0, 1.0, mu.alpha2});
  if (mu.alpha3 > 0.0) out.push_back({0.0, 0.0, mu.ell, mu.alpha3});
  return {std::move(out), 0.0};
}

std::string describe(const OmegaMeasure& mu) {
  return fmt::format("omega(alpha1={:g}, pi={}, alpha2={:g}, alpha3={:g}, ell={:g}{})", mu.alpha1,
                     mu.alpha1 > 0.0 ? describe(mu.pi) : "-", mu.alpha2, mu.alpha3, mu.ell,
                     mu.outside ? ", outside" : "");
}

// ---- relative entropy ----

FlatLaw FlatLaw::of(const ProbabilityLaw& law) {
  FlatLaw out;
  out.add(law, 0.0);
  return out;
}

void FlatLaw::add(const ProbabilityLaw& law, double log_w) {
  const auto& repr = law.data().repr;
  if (const auto* a = std::get_if<AtomicLaw>(&repr)) {
    for (const auto& at : a->atoms) {
      auto [it, fresh] = atoms.try_emplace(at.location, log_w + at.log_weight);
      if (!fresh) it->second = log_add_exp(it->second, log_w + at.log_weight);
    }
  } else if (const auto* d = std::get_if<DensityLaw>(&repr)) {
    dens.emplace_back(log_w, *d);
  } else {
    for (const auto& [w, part] : std::get<MixtureLaw>(repr).parts) add(part, log_w + std::log(w));
  }
}

double FlatLaw::log_atom(double x) const {
  const auto it = atoms.find(x);
  return it == atoms.end() ? kNegInf : it->second;
}

double FlatLaw::log_density(double x) const {
  LogSum s;
  for (const auto& [lw, d] : dens) {
    if (x > d.lower && x < d.upper) s.add(lw + d.log_pdf(x));
  }
  return s.value();
}

LogDensityRatio::LogDensityRatio(const ProbabilityLaw& nu, const ProbabilityLaw& phi)
    : nu_(FlatLaw::of(nu)), phi_(FlatLaw::of(phi)) {}

double LogDensityRatio::operator()(double x) const {
  const double an = nu_.log_atom(x);
  const double ap = phi_.log_atom(x);
  if (an != kNegInf || ap != kNegInf) {
    if (ap == kNegInf) return kInf;
    return an - ap;
  }
  const double dn = nu_.log_density(x);
  const double dp = phi_.log_density(x);
  if (dp == kNegInf) return dn == kNegInf ? kNegInf : kInf;
  return dn - dp;
}

ExtendedReal relative_entropy(const ProbabilityLaw& nu, const ProbabilityLaw& phi) {
  const FlatLaw n = FlatLaw::of(nu);
  const FlatLaw p = FlatLaw::of(phi);
  KahanSum h;
  for (const auto& [x, lw] : n.atoms) {
    if (lw < -745.0) continue;
    const auto it = p.atoms.find(x);
    if (it == p.atoms.end() || it->second == kNegInf) return ExtendedReal::infinity();
    h.add(std::exp(lw) * (lw - it->second));
  }
  if (!n.dens.empty()) {
    if (p.dens.empty()) return ExtendedReal::infinity();
    double lo = kInf;
    double hi = 0.0;
    for (const auto& [lw, d] : n.dens) {
      lo = std::min(lo, d.lower);
      hi = std::max(hi, d.upper);
    }
    bool singular = false;
    const auto integrand = [&](double x) {
      const double ln = n.log_density(x);
      if (ln < -745.0) return 0.0;
      const double lp = p.log_density(x);
      if (lp == kNegInf) {
        singular = true;
        return 0.0;
      }
      return std::exp(ln) * (ln - lp);
    };
    const double v = quad::integrate_range(integrand, lo, hi, 1e-10);
    if (singular || !std::isfinite(v)) return ExtendedReal::infinity();
    h.add(v);
  }
  return ExtendedReal(std::max(0.0, h.value()));
}

// ---- rate functionals ----

ExtendedReal entropy_part(const OmegaMeasure& mu, const ProbabilityLaw& phi) {
  if (mu.outside) return ExtendedReal::infinity();
  if (mu.alpha1 == 0.0) return {};
  const ExtendedReal m = mean(mu.pi);
  if (m.is_infinite()) return ExtendedReal::infinity();
  return ExtendedReal(mu.alpha1) * m * relative_entropy(size_bias(mu.pi), phi);
}

RateValue rate_I(const OmegaMeasure& mu, const ProbabilityLaw& phi, const ExtendedReal& xi) {
  return rate_I_bar(mu, phi, xi, xi);
}

RateValue rate_I_bar(const OmegaMeasure& mu, const ProbabilityLaw& phi, const ExtendedReal& xi,
                     const ExtendedReal& xi_bar) {
  mu.validate();
  if (mu.outside) {
    const auto inf = ExtendedReal::infinity();
    return {inf, inf, inf};
  }
  return assemble_rate(mu.alpha2, mu.alpha3, mu.ell, entropy_part(mu, phi), xi, xi_bar);
}

BasicExtendedReal<Rational> to_exact(const ExtendedReal& x) {
  if (x.is_infinite()) return BasicExtendedReal<Rational>::infinity();
  return BasicExtendedReal<Rational>(Rational(x.value()));
}

ExactRateValue rate_I_exact(const OmegaMeasure& mu, const ExtendedReal& entropy,
                            const ExtendedReal& xi) {
  return rate_I_bar_exact(mu, entropy, xi, xi);
}

ExactRateValue rate_I_bar_exact(const OmegaMeasure& mu, const ExtendedReal& entropy,
                                const ExtendedReal& xi, const ExtendedReal& xi_bar) {
  mu.validate();
  if (mu.outside) {
    const auto inf = BasicExtendedReal<Rational>::infinity();
    return {inf, inf, inf};
  }
  return assemble_rate(Rational(mu.alpha2), Rational(mu.alpha3), Rational(mu.ell),
                       to_exact(entropy), to_exact(xi), to_exact(xi_bar));
}

BasicExtendedReal<Rational> rate_gap_exact(const OmegaMeasure& mu, const ExtendedReal& xi,
                                           const ExtendedReal& xi_bar) {
  const auto w = stuck_weight(Rational(mu.alpha3), Rational(mu.ell));
  if (w.is_zero()) return {};
  return w * (to_exact(xi_bar) - to_exact(xi));
}

// ---- variational formulas ----

namespace {

// pi(p g), allowing g = -inf where pi has no mass.
double pi_pg(const ProbabilityLaw& pi, const Candidate& g) {
  if (pi.is_atomic()) {
    KahanSum s;
    for (const auto& at : pi.atomic_part().atoms) {
      if (at.log_weight < -745.0) continue;
      const double v = g(at.location);
      if (v == kNegInf) return kNegInf;
      if (v == kInf) return kInf;
      s.add(std::exp(at.log_weight) * at.location * v);
    }
    return s.value();
  }
  return mean_of(pi, [&](double p) { return p * g(p); });
}

}  // namespace

VariationalResult variational_entropy(const ProbabilityLaw& pi, const ProbabilityLaw& phi,
                                      const std::vector<Candidate>& candidates) {
  const ExtendedReal m = mean(pi);
  if (m.is_infinite()) throw InfiniteMean("variational_entropy: pi(p) must be finite");
  VariationalResult best{0.0, -1};
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    double lz = kInf;
    try {
      lz = log_expectation(phi, candidates[k], 1e-12);
    } catch (const InconclusiveConvergence&) {
      continue;
    }
    if (!std::isfinite(lz)) continue;
    const double v = pi_pg(pi, candidates[k]) - m.value() * lz;
    if (v > best.value) best = {v, static_cast<std::ptrdiff_t>(k)};
  }
  return best;
}

Candidate optimal_candidate(const ProbabilityLaw& pi, const ProbabilityLaw& phi) {
  if (!pi.is_atomic() || !phi.is_atomic()) {
    throw NonAtomicTarget("optimal_candidate: closed form needs atomic pi and phi");
  }
  std::map<double, double> g;
  for (const auto& at : phi.atomic_part().atoms) g[at.location] = kNegInf;
  std::map<double, double> ref;
  for (const auto& at : phi.atomic_part().atoms) ref[at.location] = at.log_weight;
  const auto tilde = size_bias(pi);
  for (const auto& at : tilde.atomic_part().atoms) {
    const auto it = ref.find(at.location);
    g[at.location] = it == ref.end() ? kInf : at.log_weight - it->second;
  }
  return [g = std::move(g)](double p) {
    const auto it = g.find(p);
    return it == g.end() ? kNegInf : it->second;
  };
}

Candidate piecewise_log_linear(std::vector<double> log_knots, std::vector<double> values) {
  if (log_knots.empty() || log_knots.size() != values.size()) {
    throw std::invalid_argument("piecewise_log_linear: knots and values must match");
  }
  if (!std::is_sorted(log_knots.begin(), log_knots.end())) {
    throw std::invalid_argument("piecewise_log_linear: knots must be ascending");
  }
  return [x = std::move(log_knots), y = std::move(values)](double p) {
    const double l = std::log(p);
    if (l <= x.front()) return y.front();
    if (l >= x.back()) return y.back();
    const auto i = static_cast<std::size_t>(std::upper_bound(x.begin(), x.end(), l) - x.begin());
    const double w = (l - x[i - 1]) / (x[i] - x[i - 1]);
    return y[i - 1] + w * (y[i] - y[i - 1]);
  };
}

double dv_rate(const OmegaMeasure& mu, const ProbabilityLaw& phi,
               const std::vector<Candidate>& candidates) {
  if (mu.outside || mu.alpha2 != 0.0 || mu.alpha3 != 0.0) {
    throw NotInOmega0("dv_rate: defined on pi(dp) dq measures only; the frozen and stuck parts carry xi terms it misses");
  }
  return variational_entropy(mu.pi, phi, candidates).value;
}

// ---- density approximation ----

std::optional<ProbabilityLaw> frozen_momentum_law(const ProbabilityLaw& phi) {
  if (mean_reciprocal(phi).is_infinite()) return std::nullopt;
  return size_bias_inverse(phi);
}

OmegaMeasure density_approximation(const OmegaMeasure& mu, int n, const ProbabilityLaw& phi,
                                   const ExtendedReal& xi, const ExtendedReal& xi_bar, double eps) {
  if (n < 1) throw std::invalid_argument("density_approximation: n >= 1");
  if (rate_I_bar(mu, phi, xi, xi_bar).total.is_infinite()) {
    throw InfiniteRate("density_approximation: I-bar(mu) is infinite");
  }
  const double inv_n = 1.0 / n;
  const double ell_n = mu.alpha3 > 0.0 && mu.ell == 0.0 ? inv_n : mu.ell;
  if (mu.alpha1 + mu.alpha2 == 0.0) {
    const double ell = mu.ell + inv_n;
    if (!(ell < 1.0)) throw std::invalid_argument("density_approximation: n too small for ell + 1/n < 1");
    return {0.0, 0.0, 1.0, phi, ell, false};
  }
  const double moving = mu.alpha1 + mu.alpha2;
  const double edge = std::nextafter(inv_n, kInf);
  std::vector<std::pair<double, ProbabilityLaw>> parts;
  if (mu.alpha1 > 0.0) parts.emplace_back(mu.alpha1 / moving, restrict_law(mu.pi, edge, kInf));
  if (mu.alpha2 > 0.0) {
    const auto gamma = frozen_momentum_law(phi);
    if (!gamma) {
      throw std::domain_error("density_approximation: frozen part has no momentum law (infinite interarrival mean)");
    }
    const double c = std::max(xi.to_double() - eps, 0.0);
    auto [tilted, lc] = exponential_tilt(restrict_law(*gamma, 0.0, edge), [c](double p) { return c / p; });
    parts.emplace_back(mu.alpha2 / moving, tilted);
  }
  if (parts.size() == 2) {
    // Make the weights sum to one in floating point.
    parts[1].first = 1.0 - parts[0].first;
  }
  ProbabilityLaw pi_n = parts.size() == 1 ? parts[0].second : ProbabilityLaw::mixture(parts);
  return {moving, 0.0, mu.alpha3, pi_n, mu.alpha3 > 0.0 ? ell_n : 0.5, false};
}

// ---- test-function fixture ----

double TestFunctionFixture::operator()(double q, double p) const {
  double v = p * g.fn(p);
  if (p < delta && q < m) v += c / m;
  return v;
}

double TestFunctionFixture::antiderivative(double q, double p) const {
  double v = q * p * g.fn(p);
  if (p < delta) v += c * std::min(q, m) / m;
  return v;
}

double TestFunctionFixture::free_energy_bound() const { return d_f / (1.0 - c_f); }

namespace {

double log_c_f(double c, double delta, const BoundedFunction& g, const ProbabilityLaw& phi) {
  return log_expectation(
      phi, [&](double p) { return g.fn(p) + (p < delta ? c / p : 0.0); }, 1e-12);
}

}  // namespace

double suitable_delta(double c, const BoundedFunction& g, const ProbabilityLaw& phi) {
  double delta = 1.0;
  for (int k = 0; k <= 60; ++k, delta *= 0.5) {
    try {
      if (log_c_f(c, delta, g, phi) < 0.0) return delta;
    } catch (const InconclusiveConvergence&) {
    }
  }
  return 0.0;
}

TestFunctionFixture test_function_fixture(double c, double delta, const BoundedFunction& g,
                                          double m, const ProbabilityLaw& phi,
                                          const ExtendedReal& xi) {
  if (!(m > 0.0 && m < 1.0)) throw NotInLambda("fixture: m must lie in (0, 1)");
  if (!(c >= 0.0) || !(delta >= 0.0)) throw NotInLambda("fixture: need c >= 0 and delta >= 0");
  if (c > 0.0 && !(ExtendedReal(c) < xi)) {
    throw NotInLambda(fmt::format("fixture: c = {:g} is not below xi = {}", c, xi.to_double()));
  }
  double la = kInf;
  try {
    la = log_expectation(phi, g.fn, 1e-12);
  } catch (const InconclusiveConvergence&) {
  }
  if (!(la < 0.0)) throw NotInLambda("fixture: phi(e^g) must be below 1");
  double lcf = kInf;
  try {
    lcf = log_c_f(c, delta, g, phi);
  } catch (const InconclusiveConvergence&) {
  }
  if (!(lcf < 0.0)) {
    throw NotInLambda(fmt::format("fixture: C_f = {:.6g} is not below 1; reduce delta", std::exp(lcf)));
  }

  // D_f: sup over s of int_(0, 1/s] phi(dp) exp(p s g(p) + (c/p) 1[p < delta] min(ps, m)/m).
  auto log_small_time = [&](double s) {
    const double edge = std::nextafter(1.0 / s, kInf);
    const double lm = log_mass(phi, 0.0, edge);
    if (lm == kNegInf) return kNegInf;
    const auto restricted = restrict_law(phi, 0.0, edge);
    return lm + log_expectation(
                    restricted,
                    [&](double p) {
                      double v = p * s * g.fn(p);
                      if (p < delta) v += (c / p) * std::min(p * s, m) / m;
                      return v;
                    },
                    1e-10);
  };
  std::vector<double> grid;
  for (int k = -120; k <= 160; ++k) grid.push_back(std::pow(10.0, k / 40.0));
  if (phi.is_atomic()) {
    for (const auto& at : phi.atomic_part().atoms) {
      const double s = at.reciprocal;
      if (s >= grid.front() && s <= grid.back()) grid.push_back(s);
    }
  }
  double ld = kNegInf;
  for (double s : grid) ld = std::max(ld, log_small_time(s));
  const double lbound =
      std::max(g.sup, 0.0) +
      log_expectation(phi, [&](double p) { return p < delta ? c / p : 0.0; }, 1e-12);
  return {c, delta, m, g, std::exp(lcf), std::exp(ld), std::exp(lbound)};
}

// ---- heuristic classification ----

OmegaSummary classify_heuristic(const EmpiricalMeasure& mu, double p_min) {
  OmegaSummary s{0.0, 0.0, 0.0, 0.0, 0.0};
  double ell_acc = 0.0;
  for (const auto& c : mu.components()) {
    if (c.momentum >= p_min) {
      s.alpha1 += c.weight;
      s.mean_speed += c.weight * c.momentum;
    } else if (c.a == 0.0 && c.b >= 1.0 - 1e-12) {
      s.alpha2 += c.weight;
    } else {
      s.alpha3 += c.weight;
      ell_acc += c.weight * c.b;
    }
  }
  if (s.alpha1 > 0.0) s.mean_speed /= s.alpha1;
  s.ell = s.alpha3 > 0.0 ? ell_acc / s.alpha3 : 0.5;
  return s;
}

}  // namespace hotwall
