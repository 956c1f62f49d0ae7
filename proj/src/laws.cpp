#include "hotwall/laws.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>

#include "hotwall/errors.hpp"
#include "hotwall/numeric.hpp"
#include "hotwall/quadrature.hpp"

namespace hotwall {
namespace {

using LogG2 = std::function<double(double, double)>;  // log g as a function of (x, 1/x)

std::shared_ptr<LawData> make_data(LawRole role, std::string name) {
  auto d = std::make_shared<LawData>();
  d->role = role;
  d->name = std::move(name);
  return d;
}

void finalize_atomic(AtomicLaw& a) {
  std::sort(a.atoms.begin(), a.atoms.end(),
            [](const Atom& x, const Atom& y) { return x.location < y.location; });
  std::vector<double> lw;
  lw.reserve(a.atoms.size());
  for (const auto& at : a.atoms) lw.push_back(at.log_weight);
  const double z = log_sum_exp(lw);
  if (!std::isfinite(z)) throw std::invalid_argument("atomic law: weights do not normalize");
  for (auto& at : a.atoms) at.log_weight -= z;
  // Merge coincident atoms.
  std::vector<Atom> merged;
  for (const auto& at : a.atoms) {
    if (!merged.empty() && merged.back().location == at.location) {
      merged.back().log_weight = log_add_exp(merged.back().log_weight, at.log_weight);
    } else {
      merged.push_back(at);
    }
  }
  a.atoms = std::move(merged);
  a.cumulative.resize(a.atoms.size());
  KahanSum run;
  for (std::size_t i = 0; i < a.atoms.size(); ++i) {
    run.add(std::exp(a.atoms[i].log_weight));
    a.cumulative[i] = run.value();
  }
  if (!a.cumulative.empty()) a.cumulative.back() = 1.0;
}

void check_positive(double x) {
  if (!(x > 0.0) || !std::isfinite(x)) {
    throw std::invalid_argument(fmt::format("law: support point {} not in (0, inf)", x));
  }
}

// ---- atomic kernels ----

std::pair<std::size_t, std::size_t> atom_range(const AtomicLaw& a, double lo, double hi) {
  auto cmp = [](const Atom& at, double v) { return at.location < v; };
  const auto first = std::lower_bound(a.atoms.begin(), a.atoms.end(), lo, cmp);
  const auto last = std::lower_bound(a.atoms.begin(), a.atoms.end(), hi, cmp);
  return {static_cast<std::size_t>(first - a.atoms.begin()),
          static_cast<std::size_t>(std::max(first, last) - a.atoms.begin())};
}

double atomic_log_mass(const AtomicLaw& a, double lo, double hi) {
  if (!(hi > lo)) return kNegInf;
  const auto [i0, i1] = atom_range(a, lo, hi);
  LogSum s;
  for (std::size_t i = i0; i < i1; ++i) s.add(a.atoms[i].log_weight);
  return s.value();
}

double atomic_log_expectation(const AtomicLaw& a, const LogG2& log_g) {
  std::vector<double> terms;
  terms.reserve(a.atoms.size());
  for (const auto& at : a.atoms) {
    const double lg = log_g(at.location, at.reciprocal);
    if (std::isnan(lg)) throw std::domain_error("expectation: log g is NaN");
    if (lg == kInf) return kInf;
    terms.push_back(at.log_weight + lg);
  }
  const double total = log_sum_exp(terms);
  if (a.tail == TailDirection::none) return total;

  // Terms ordered from the bulk toward the truncated tail.
  if (a.tail == TailDirection::toward_zero) std::reverse(terms.begin(), terms.end());
  constexpr std::size_t w = 8;
  if (terms.size() < w) return total;
  bool nondecreasing = true;
  bool decreasing = true;
  double max_ratio = 0.0;
  for (std::size_t i = terms.size() - w + 1; i < terms.size(); ++i) {
    const double prev = terms[i - 1];
    const double cur = terms[i];
    const double slack = 1e-12 * std::max(1.0, std::abs(prev));
    if (cur == kNegInf) {
      nondecreasing = false;
      continue;
    }
    if (cur < prev - slack) {
      nondecreasing = false;
      max_ratio = std::max(max_ratio, std::exp(cur - prev));
    } else {
      decreasing = false;
    }
  }
  if (nondecreasing) return kInf;
  if (decreasing && max_ratio <= 0.9) {
    const double last = terms.back();
    const double remainder = last + std::log(max_ratio / (1.0 - max_ratio));
    if (last == kNegInf || max_ratio == 0.0 || remainder <= total + std::log(1e-9)) return total;
  }
  throw InconclusiveConvergence("expectation: tail of atomic series neither converges nor diverges");
}

// ---- density kernels ----

double density_log_mass(const DensityLaw& d, double lo, double hi) {
  lo = std::max(lo, d.lower);
  hi = std::min(hi, d.upper);
  if (!(hi > lo)) return kNegInf;
  if (d.log_cdf) {
    const double ch = d.log_cdf(hi);
    if (ch < std::log(0.5) || !d.log_sf) return log_sub_exp(ch, d.log_cdf(lo));
    return log_sub_exp(d.log_sf(lo), d.log_sf(hi));
  }
  const auto r = quad::log_integrate_range(d.log_pdf, lo, hi, 1e-12);
  return r.log_value;
}

double density_log_expectation(const DensityLaw& d, const LogG2& log_g, double tol) {
  auto f = [&](double x) {
    const double lp = d.log_pdf(x);
    if (lp == kNegInf) return kNegInf;
    return lp + log_g(x, 1.0 / x);
  };
  const auto r = quad::log_integrate_range(f, d.lower, d.upper, tol);
  if (r.status == quad::Status::divergent) return kInf;
  if (r.status == quad::Status::inconclusive) {
    throw InconclusiveConvergence("expectation: quadrature could not decide finiteness");
  }
  return r.log_value;
}

double log_expect(const ProbabilityLaw& law, const LogG2& log_g, double tol);

double mixture_log_expectation(const MixtureLaw& m, const LogG2& log_g, double tol) {
  LogSum s;
  for (const auto& [w, part] : m.parts) {
    const double v = log_expect(part, log_g, tol);
    if (v == kInf) return kInf;
    s.add(std::log(w) + v);
  }
  return s.value();
}

double log_expect(const ProbabilityLaw& law, const LogG2& log_g, double tol) {
  const auto& repr = law.data().repr;
  if (const auto* a = std::get_if<AtomicLaw>(&repr)) return atomic_log_expectation(*a, log_g);
  if (const auto* d = std::get_if<DensityLaw>(&repr)) return density_log_expectation(*d, log_g, tol);
  return mixture_log_expectation(std::get<MixtureLaw>(repr), log_g, tol);
}

// x in [lo, hi) solving log P([support lower, x)) = target by bisection in log x.
double invert_numeric(const ProbabilityLaw& law, double lower, double lo, double hi,
                      double target) {
  double a = lo;
  double b = hi;
  if (std::isinf(b)) {
    b = std::max(1.0, 2.0 * a);
    while (log_mass(law, lower, b) < target) b *= 2.0;
  }
  for (int it = 0; it < 200 && b > a; ++it) {
    const double m = (a > 0.0) ? std::sqrt(a * b) : 0.5 * b;
    const double mid = (m <= a || m >= b) ? 0.5 * (a + b) : m;
    if (mid <= a || mid >= b) break;
    if (log_mass(law, lower, mid) < target) {
      a = mid;
    } else {
      b = mid;
    }
  }
  return a > 0.0 ? a : b;
}

SpeedDraw finish(double x, LawRole) { return {x, 1.0 / x}; }

SpeedDraw density_conditional(const ProbabilityLaw& law, const DensityLaw& d, double a, double b,
                              Rng& rng) {
  a = std::max(a, d.lower);
  b = std::min(b, d.upper);
  const double u = rng.uniform();
  double x = 0.0;
  if (d.log_cdf && d.inv_log_cdf) {
    const double la = (a <= d.lower) ? kNegInf : d.log_cdf(a);
    const double lb = std::isinf(b) ? 0.0 : d.log_cdf(b);
    if (la > std::log(0.5) && d.log_sf && d.inv_log_sf) {
      const double sa = d.log_sf(a);
      const double sb = std::isinf(b) ? kNegInf : d.log_sf(b);
      x = d.inv_log_sf(log_add_exp(std::log1p(-u) + sa, std::log(u) + sb));
    } else {
      x = d.inv_log_cdf(log_add_exp(std::log1p(-u) + la, std::log(u) + lb));
    }
  } else {
    const double lm = log_mass(law, a, b);
    const double before = log_mass(law, d.lower, a);
    const double target = log_add_exp(before, std::log(u) + lm);
    x = invert_numeric(law, d.lower, a, b, target);
  }
  x = std::clamp(x, a, std::nextafter(b, 0.0));
  if (!(x > 0.0)) x = std::nextafter(a, kInf);
  return finish(x, law.role());
}

SpeedDraw atomic_pick(const AtomicLaw& a, double u) {
  const auto it = std::lower_bound(a.cumulative.begin(), a.cumulative.end(), u);
  const std::size_t i =
      std::min<std::size_t>(static_cast<std::size_t>(it - a.cumulative.begin()),
                            a.atoms.size() - 1);
  return {a.atoms[i].location, a.atoms[i].reciprocal};
}

ProbabilityLaw reweight(const ProbabilityLaw& law, const LogG2& log_h, double log_norm,
                        const std::string& name);

}  // namespace

// ---- construction ----

const LawData& ProbabilityLaw::data() const {
  if (!data_) throw std::logic_error("ProbabilityLaw: empty law");
  return *data_;
}
LawRole ProbabilityLaw::role() const { return data().role; }
const std::string& ProbabilityLaw::name() const { return data().name; }
bool ProbabilityLaw::is_atomic() const { return std::holds_alternative<AtomicLaw>(data().repr); }
bool ProbabilityLaw::is_density() const { return std::holds_alternative<DensityLaw>(data().repr); }
bool ProbabilityLaw::is_mixture() const { return std::holds_alternative<MixtureLaw>(data().repr); }
const AtomicLaw& ProbabilityLaw::atomic_part() const {
  if (!is_atomic()) throw std::logic_error("ProbabilityLaw: not atomic");
  return std::get<AtomicLaw>(data().repr);
}

ProbabilityLaw ProbabilityLaw::with_role(LawRole role) const {
  auto d = std::make_shared<LawData>(data());
  d->role = role;
  return ProbabilityLaw(d);
}

ProbabilityLaw ProbabilityLaw::with_name(std::string name) const {
  auto d = std::make_shared<LawData>(data());
  d->name = std::move(name);
  return ProbabilityLaw(d);
}

ProbabilityLaw ProbabilityLaw::atomic(const std::vector<std::pair<double, double>>& atoms,
                                      LawRole role, std::string name) {
  if (atoms.empty()) throw std::invalid_argument("atomic law: no atoms");
  KahanSum total;
  std::vector<Atom> list;
  for (const auto& [x, w] : atoms) {
    check_positive(x);
    if (!(w > 0.0)) throw std::invalid_argument("atomic law: weights must be positive");
    total.add(w);
    list.push_back({x, 1.0 / x, std::log(w)});
  }
  if (std::abs(total.value() - 1.0) > 1e-12) {
    throw std::invalid_argument(
        fmt::format("atomic law: weights sum to {:.17g}, expected 1", total.value()));
  }
  return atomic_log(std::move(list), TailDirection::none, role, std::move(name));
}

ProbabilityLaw ProbabilityLaw::atomic_log(std::vector<Atom> atoms, TailDirection tail,
                                          LawRole role, std::string name) {
  if (atoms.empty()) throw std::invalid_argument("atomic law: no atoms");
  for (const auto& at : atoms) check_positive(at.location);
  auto d = make_data(role, std::move(name));
  AtomicLaw a;
  a.atoms = std::move(atoms);
  a.tail = tail;
  finalize_atomic(a);
  d->repr = std::move(a);
  return ProbabilityLaw(d);
}

ProbabilityLaw ProbabilityLaw::density(DensityLaw law, LawRole role, std::string name) {
  if (!law.log_pdf) throw std::invalid_argument("density law: missing log pdf");
  if (law.lower < 0.0 || !(law.upper > law.lower)) {
    throw std::invalid_argument("density law: support must be an interval in (0, inf)");
  }
  const auto r = quad::log_integrate_range(law.log_pdf, law.lower, law.upper, 1e-12);
  if (r.status != quad::Status::converged || std::abs(std::expm1(r.log_value)) > 1e-9) {
    throw std::invalid_argument(
        fmt::format("density law: integrates to {:.17g}, expected 1", std::exp(r.log_value)));
  }
  auto d = make_data(role, std::move(name));
  d->repr = std::move(law);
  return ProbabilityLaw(d);
}

ProbabilityLaw ProbabilityLaw::mixture(const std::vector<std::pair<double, ProbabilityLaw>>& parts,
                                       std::string name) {
  if (parts.empty()) throw std::invalid_argument("mixture: no components");
  KahanSum total;
  for (const auto& [w, law] : parts) {
    if (!(w > 0.0)) throw std::invalid_argument("mixture: weights must be positive");
    total.add(w);
  }
  if (std::abs(total.value() - 1.0) > 1e-12) {
    throw std::invalid_argument(
        fmt::format("mixture: weights sum to {:.17g}, expected 1", total.value()));
  }
  // Mixtures of atomic laws stay atomic.
  if (std::all_of(parts.begin(), parts.end(), [](const auto& p) { return p.second.is_atomic(); })) {
    std::vector<Atom> atoms;
    TailDirection tail = TailDirection::none;
    for (const auto& [w, law] : parts) {
      const auto& a = law.atomic_part();
      if (tail == TailDirection::none) tail = a.tail;
      for (const auto& at : a.atoms) atoms.push_back({at.location, at.reciprocal, at.log_weight + std::log(w)});
    }
    return atomic_log(std::move(atoms), tail, parts.front().second.role(), std::move(name));
  }
  auto d = make_data(parts.front().second.role(), std::move(name));
  d->repr = MixtureLaw{parts};
  return ProbabilityLaw(d);
}

ProbabilityLaw ProbabilityLaw::dyadic(int levels) {
  if (levels < 1 || levels > 1020) throw std::invalid_argument("dyadic: levels out of range");
  std::vector<Atom> atoms;
  atoms.reserve(static_cast<std::size_t>(levels));
  for (int j = 0; j < levels; ++j) {
    atoms.push_back({std::ldexp(1.0, -j), std::ldexp(1.0, j), -std::ldexp(1.0, j)});
  }
  return atomic_log(std::move(atoms), TailDirection::toward_zero, LawRole::speed, "dyadic");
}

ProbabilityLaw ProbabilityLaw::exp_interarrival(double xi0) {
  if (!(xi0 > 0.0) || !std::isfinite(xi0)) throw std::invalid_argument("exp_interarrival: xi0 > 0");
  DensityLaw d;
  const double lx = std::log(xi0);
  d.log_pdf = [xi0, lx](double p) { return lx - xi0 / p - 2.0 * std::log(p); };
  d.lower = 0.0;
  d.upper = kInf;
  d.log_cdf = [xi0](double p) { return p <= 0.0 ? kNegInf : -xi0 / p; };
  d.log_sf = [xi0](double p) {
    return p <= 0.0 ? 0.0 : std::log(-std::expm1(-xi0 / p));
  };
  d.inv_log_cdf = [xi0](double y) { return -xi0 / y; };
  d.inv_log_sf = [xi0](double y) { return -xi0 / std::log(-std::expm1(y)); };
  return density(std::move(d), LawRole::speed, fmt::format("exp_interarrival({:g})", xi0));
}

ProbabilityLaw ProbabilityLaw::polynomial(double kappa) {
  if (!(kappa > 0.0) || !std::isfinite(kappa)) throw std::invalid_argument("polynomial: kappa > 0");
  DensityLaw d;
  const double lk = std::log(kappa);
  d.log_pdf = [kappa, lk](double p) {
    return (p > 1.0) ? kNegInf : lk + (kappa - 1.0) * std::log(p);
  };
  d.lower = 0.0;
  d.upper = 1.0;
  d.log_cdf = [kappa](double p) { return p >= 1.0 ? 0.0 : kappa * std::log(p); };
  d.log_sf = [kappa](double p) {
    return p >= 1.0 ? kNegInf : std::log(-std::expm1(kappa * std::log(p)));
  };
  d.inv_log_cdf = [kappa](double y) { return std::exp(y / kappa); };
  d.inv_log_sf = [kappa](double y) { return std::exp(std::log(-std::expm1(y)) / kappa); };
  return density(std::move(d), LawRole::speed, fmt::format("polynomial({:g})", kappa));
}

// ---- sampling ----

double sample(const ProbabilityLaw& law, Rng& rng) { return sample_pair(law, rng).speed; }

SpeedDraw sample_pair(const ProbabilityLaw& law, Rng& rng) {
  const auto& repr = law.data().repr;
  if (const auto* a = std::get_if<AtomicLaw>(&repr)) {
    if (a->atoms.size() == 1) return {a->atoms[0].location, a->atoms[0].reciprocal};
    return atomic_pick(*a, rng.uniform());
  }
  if (const auto* d = std::get_if<DensityLaw>(&repr)) {
    if (d->inv_log_cdf) {
      for (;;) {
        const double x = d->inv_log_cdf(std::log(rng.uniform()));
        if (x > d->lower && x < d->upper + (std::isinf(d->upper) ? 0.0 : 1e-300) && x > 0.0 &&
            std::isfinite(x)) {
          return {x, 1.0 / x};
        }
      }
    }
    return density_conditional(law, *d, d->lower, d->upper, rng);
  }
  const auto& m = std::get<MixtureLaw>(repr);
  const double u = rng.uniform();
  double acc = 0.0;
  for (const auto& [w, part] : m.parts) {
    acc += w;
    if (u <= acc) return sample_pair(part, rng);
  }
  return sample_pair(m.parts.back().second, rng);
}

SpeedDraw sample_conditional(const ProbabilityLaw& law, double a, double b, Rng& rng) {
  const double lm = log_mass(law, a, b);
  if (lm == kNegInf) {
    throw std::domain_error(fmt::format("sample_conditional: [{:.17g}, {:.17g}) has no mass", a, b));
  }
  const auto& repr = law.data().repr;
  if (const auto* at = std::get_if<AtomicLaw>(&repr)) {
    const auto [i0, i1] = atom_range(*at, a, b);
    const double u = rng.uniform();
    // Walk the window from its heaviest atom downward.
    std::vector<std::size_t> idx;
    for (std::size_t i = i0; i < i1; ++i) idx.push_back(i);
    std::sort(idx.begin(), idx.end(), [&](std::size_t x, std::size_t y) {
      return at->atoms[x].log_weight > at->atoms[y].log_weight;
    });
    double acc = 0.0;
    for (std::size_t i : idx) {
      acc += std::exp(at->atoms[i].log_weight - lm);
      if (u <= acc) return {at->atoms[i].location, at->atoms[i].reciprocal};
    }
    const auto& last = at->atoms[idx.back()];
    return {last.location, last.reciprocal};
  }
  if (const auto* d = std::get_if<DensityLaw>(&repr)) return density_conditional(law, *d, a, b, rng);
  const auto& m = std::get<MixtureLaw>(repr);
  const double u = rng.uniform();
  double acc = 0.0;
  for (const auto& [w, part] : m.parts) {
    const double pm = log_mass(part, a, b);
    if (pm == kNegInf) continue;
    acc += std::exp(std::log(w) + pm - lm);
    if (u <= acc) return sample_conditional(part, a, b, rng);
  }
  for (auto it = m.parts.rbegin(); it != m.parts.rend(); ++it) {
    if (log_mass(it->second, a, b) > kNegInf) return sample_conditional(it->second, a, b, rng);
  }
  throw std::domain_error("sample_conditional: empty window");
}

// ---- mass and expectation ----

double log_mass(const ProbabilityLaw& law, double a, double b) {
  const auto& repr = law.data().repr;
  if (const auto* at = std::get_if<AtomicLaw>(&repr)) return atomic_log_mass(*at, a, b);
  if (const auto* d = std::get_if<DensityLaw>(&repr)) return density_log_mass(*d, a, b);
  LogSum s;
  for (const auto& [w, part] : std::get<MixtureLaw>(repr).parts) {
    s.add(std::log(w) + log_mass(part, a, b));
  }
  return s.value();
}

double mass(const ProbabilityLaw& law, double a, double b) {
  return std::min(1.0, std::exp(log_mass(law, a, b)));
}

double log_window_probability(const ProbabilityLaw& phi, double eps, double delta) {
  if (!(eps > 0.0) || !(delta > 0.0) || !(delta < 1.0)) {
    throw std::invalid_argument("window_probability: need eps > 0 and delta in (0, 1)");
  }
  return log_mass(phi, eps * (1.0 - delta), eps * (1.0 + delta));
}

double window_probability(const ProbabilityLaw& phi, double eps, double delta) {
  return std::exp(log_window_probability(phi, eps, delta));
}

double log_expectation(const ProbabilityLaw& law, const std::function<double(double)>& log_g,
                       double tol) {
  return log_expect(law, [&](double x, double) { return log_g(x); }, tol);
}

ExtendedReal expectation(const ProbabilityLaw& law, const std::function<double(double)>& g,
                         double tol) {
  const double le = log_expectation(
      law,
      [&](double x) {
        const double v = g(x);
        if (v < 0.0) throw std::domain_error("expectation: g must be nonnegative");
        return v == 0.0 ? kNegInf : std::log(v);
      },
      tol);
  if (le == kInf) return ExtendedReal::infinity();
  return ExtendedReal(std::exp(le));
}

double mean_of(const ProbabilityLaw& law, const std::function<double(double)>& g, double tol) {
  const auto& repr = law.data().repr;
  if (const auto* a = std::get_if<AtomicLaw>(&repr)) {
    KahanSum s;
    for (const auto& at : a->atoms) {
      if (at.log_weight < -745.0) continue;
      s.add(std::exp(at.log_weight) * g(at.location));
    }
    return s.value();
  }
  if (const auto* d = std::get_if<DensityLaw>(&repr)) {
    auto f = [&](double x) {
      const double lp = d->log_pdf(x);
      if (lp < -745.0) return 0.0;
      return std::exp(lp) * g(x);
    };
    return quad::integrate_range(f, d->lower, d->upper, tol);
  }
  KahanSum s;
  for (const auto& [w, part] : std::get<MixtureLaw>(repr).parts) s.add(w * mean_of(part, g, tol));
  return s.value();
}

ExtendedReal mean(const ProbabilityLaw& law) {
  const double le = log_expect(law, [](double x, double) { return std::log(x); }, 1e-12);
  return le == kInf ? ExtendedReal::infinity() : ExtendedReal(std::exp(le));
}

ExtendedReal mean_reciprocal(const ProbabilityLaw& law) {
  const double le = log_expect(law, [](double, double rx) { return std::log(rx); }, 1e-12);
  return le == kInf ? ExtendedReal::infinity() : ExtendedReal(std::exp(le));
}

// ---- tail exponents ----

ExtendedReal compute_xi(const ProbabilityLaw& phi, double tol) {
  constexpr double c_max = 1e3;
  auto finite = [&](double c) {
    return log_expect(phi, [c](double, double rx) { return c * rx; }, 1e-9) < kInf;
  };
  if (finite(c_max)) return ExtendedReal::infinity();
  if (!finite(tol)) return ExtendedReal(0.0);
  double lo = tol;
  double hi = c_max;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (finite(mid)) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return ExtendedReal(0.5 * (lo + hi));
}

std::vector<double> default_delta_grid() { return {0.2, 0.1, 0.05, 0.02}; }

std::vector<double> default_epsilon_grid() {
  std::vector<double> g;
  for (int k = 0;; ++k) {
    const double e = 0.1 * std::exp2(-0.25 * k);
    if (e < 1e-4) break;
    g.push_back(e);
  }
  return g;
}

TailExponentReport estimate_xi_bar(const ProbabilityLaw& phi, const std::vector<double>& delta_grid,
                                   const std::vector<double>& epsilon_grid) {
  if (delta_grid.empty() || epsilon_grid.empty()) {
    throw std::invalid_argument("estimate_xi_bar: empty grid");
  }
  TailExponentReport rep;
  rep.delta_grid = delta_grid;
  rep.epsilon_grid = epsilon_grid;
  try {
    rep.xi = compute_xi(phi);
  } catch (const InconclusiveConvergence&) {
    rep.xi_converged = false;
  }
  const std::size_t tail_begin = epsilon_grid.size() - (epsilon_grid.size() + 2) / 3;
  for (double delta : delta_grid) {
    double worst = 0.0;
    int empty = 0;
    for (std::size_t i = tail_begin; i < epsilon_grid.size(); ++i) {
      const double eps = epsilon_grid[i];
      const double lw = log_window_probability(phi, eps, delta);
      if (lw == kNegInf) {
        ++empty;
        continue;
      }
      worst = std::max(worst, -eps * lw);
    }
    rep.empty_windows.push_back(empty);
    rep.per_delta.push_back(empty > 0 ? ExtendedReal::infinity() : ExtendedReal(worst));
  }
  // The delta -> 0 end of the grid decides.
  std::size_t k = 0;
  for (std::size_t i = 1; i < delta_grid.size(); ++i) {
    if (delta_grid[i] < delta_grid[k]) k = i;
  }
  if (rep.per_delta[k].is_infinite()) {
    rep.xi_bar_infinite = true;
    rep.xi_bar_lower = ExtendedReal::infinity();
    rep.xi_bar_upper = ExtendedReal::infinity();
  } else {
    const double v = rep.per_delta[k].value();
    const double d = delta_grid[k];
    rep.xi_bar_lower = ExtendedReal(v);
    rep.xi_bar_upper = ExtendedReal(v * (1.0 + d) / (1.0 - d));
  }
  return rep;
}

// ---- transforms ----

namespace {

ProbabilityLaw reweight(const ProbabilityLaw& law, const LogG2& log_h, double log_norm,
                        const std::string& name) {
  const auto& src = law.data();
  auto d = make_data(src.role, name);
  if (const auto* a = std::get_if<AtomicLaw>(&src.repr)) {
    std::vector<Atom> atoms;
    atoms.reserve(a->atoms.size());
    for (const auto& at : a->atoms) {
      const double lw = at.log_weight + log_h(at.location, at.reciprocal) - log_norm;
      if (lw == kNegInf) continue;
      atoms.push_back({at.location, at.reciprocal, lw});
    }
    return ProbabilityLaw::atomic_log(std::move(atoms), a->tail, src.role, name);
  }
  if (const auto* dl = std::get_if<DensityLaw>(&src.repr)) {
    DensityLaw out;
    out.lower = dl->lower;
    out.upper = dl->upper;
    out.log_pdf = [base = dl->log_pdf, log_h, log_norm](double x) {
      const double lp = base(x);
      if (lp == kNegInf) return kNegInf;
      return lp + log_h(x, 1.0 / x) - log_norm;
    };
    d->repr = std::move(out);
    return ProbabilityLaw(d);
  }
  const auto& m = std::get<MixtureLaw>(src.repr);
  std::vector<std::pair<double, ProbabilityLaw>> parts;
  KahanSum total;
  for (const auto& [w, part] : m.parts) {
    const double lc = log_expect(part, log_h, 1e-12);
    if (lc == kNegInf) continue;
    const double nw = std::exp(std::log(w) + lc - log_norm);
    parts.emplace_back(nw, reweight(part, log_h, lc, part.name()));
    total.add(nw);
  }
  for (auto& p : parts) p.first /= total.value();
  d->repr = MixtureLaw{std::move(parts)};
  return ProbabilityLaw(d);
}

}  // namespace

ProbabilityLaw size_bias(const ProbabilityLaw& pi) {
  const ExtendedReal m = mean(pi);
  if (m.is_infinite()) throw InfiniteMean("size_bias: mean is infinite");
  if (m.is_zero()) throw ZeroMean("size_bias: mean is zero");
  return reweight(pi, [](double x, double) { return std::log(x); }, std::log(m.value()),
                  "size_bias(" + describe(pi) + ")");
}

ProbabilityLaw size_bias_inverse(const ProbabilityLaw& pi_tilde) {
  const ExtendedReal m = mean_reciprocal(pi_tilde);
  if (m.is_infinite()) throw InfiniteMean("size_bias_inverse: mean of 1/p is infinite");
  if (m.is_zero()) throw ZeroMean("size_bias_inverse: mean of 1/p is zero");
  return reweight(pi_tilde, [](double, double rx) { return std::log(rx); }, std::log(m.value()),
                  "size_bias_inverse(" + describe(pi_tilde) + ")");
}

ProbabilityLaw reciprocal_law(const ProbabilityLaw& law) {
  const auto& src = law.data();
  if (src.reciprocal_source) return ProbabilityLaw(src.reciprocal_source);
  const LawRole role = src.role == LawRole::speed ? LawRole::interarrival : LawRole::speed;
  auto d = make_data(role, "reciprocal(" + describe(law) + ")");
  d->reciprocal_source = std::make_shared<LawData>(src);
  if (const auto* a = std::get_if<AtomicLaw>(&src.repr)) {
    AtomicLaw out;
    out.atoms.reserve(a->atoms.size());
    for (auto it = a->atoms.rbegin(); it != a->atoms.rend(); ++it) {
      out.atoms.push_back({it->reciprocal, it->location, it->log_weight});
    }
    out.tail = a->tail == TailDirection::toward_zero     ? TailDirection::toward_infinity
               : a->tail == TailDirection::toward_infinity ? TailDirection::toward_zero
                                                          : TailDirection::none;
    out.cumulative.resize(out.atoms.size());
    KahanSum run;
    for (std::size_t i = 0; i < out.atoms.size(); ++i) {
      run.add(std::exp(out.atoms[i].log_weight));
      out.cumulative[i] = run.value();
    }
    if (!out.cumulative.empty()) out.cumulative.back() = 1.0;
    d->repr = std::move(out);
  } else if (const auto* dl = std::get_if<DensityLaw>(&src.repr)) {
    DensityLaw out;
    out.lower = std::isinf(dl->upper) ? 0.0 : 1.0 / dl->upper;
    out.upper = dl->lower <= 0.0 ? kInf : 1.0 / dl->lower;
    out.log_pdf = [f = dl->log_pdf](double y) { return f(1.0 / y) - 2.0 * std::log(y); };
    if (dl->log_sf) out.log_cdf = [f = dl->log_sf](double y) { return f(1.0 / y); };
    if (dl->log_cdf) out.log_sf = [f = dl->log_cdf](double y) { return f(1.0 / y); };
    if (dl->inv_log_sf) out.inv_log_cdf = [f = dl->inv_log_sf](double z) { return 1.0 / f(z); };
    if (dl->inv_log_cdf) out.inv_log_sf = [f = dl->inv_log_cdf](double z) { return 1.0 / f(z); };
    d->repr = std::move(out);
  } else {
    std::vector<std::pair<double, ProbabilityLaw>> parts;
    for (const auto& [w, part] : std::get<MixtureLaw>(src.repr).parts) {
      parts.emplace_back(w, reciprocal_law(part));
    }
    d->repr = MixtureLaw{std::move(parts)};
  }
  return ProbabilityLaw(d);
}

ProbabilityLaw speed_to_interarrival(const ProbabilityLaw& phi) {
  if (phi.role() != LawRole::speed) throw std::invalid_argument("speed_to_interarrival: not a speed law");
  return reciprocal_law(phi);
}

ProbabilityLaw interarrival_to_speed(const ProbabilityLaw& psi) {
  if (psi.role() != LawRole::interarrival) {
    throw std::invalid_argument("interarrival_to_speed: not an interarrival law");
  }
  return reciprocal_law(psi);
}

std::pair<ProbabilityLaw, double> exponential_tilt(const ProbabilityLaw& law,
                                                   const std::function<double(double)>& log_h) {
  const LogG2 h2 = [&log_h](double x, double) { return log_h(x); };
  double lc = kInf;
  try {
    lc = log_expect(law, h2, 1e-12);
  } catch (const InconclusiveConvergence& e) {
    throw DivergentNormalizer(std::string("tilt: normalizer not certified finite: ") + e.what());
  }
  if (lc == kInf) throw DivergentNormalizer("tilt: normalizer is infinite");
  if (lc == kNegInf) throw DivergentNormalizer("tilt: normalizer is zero");
  // Capture log_h by value: the returned law outlives this call.
  const LogG2 owned = [log_h](double x, double) { return log_h(x); };
  return {reweight(law, owned, lc, "tilt(" + describe(law) + ")"), lc};
}

TiltResult tilt_by_boundary_function(const ProbabilityLaw& phi,
                                     const std::function<double(double)>& f1) {
  auto [law, lc] = exponential_tilt(phi, [f1](double v) { return f1(v) / v; });
  return {law, std::exp(lc)};
}

ProbabilityLaw restrict_law(const ProbabilityLaw& law, double a, double b) {
  const double lm = log_mass(law, a, b);
  if (lm == kNegInf) throw std::domain_error("restrict_law: window has no mass");
  const auto& src = law.data();
  const std::string name = fmt::format("restrict({}, [{:g}, {:g}))", describe(law), a, b);
  if (const auto* at = std::get_if<AtomicLaw>(&src.repr)) {
    std::vector<Atom> atoms;
    for (const auto& x : at->atoms) {
      if (x.location >= a && x.location < b) atoms.push_back(x);
    }
    TailDirection tail = TailDirection::none;
    if (at->tail == TailDirection::toward_zero && a <= 0.0) tail = at->tail;
    if (at->tail == TailDirection::toward_infinity && std::isinf(b)) tail = at->tail;
    return ProbabilityLaw::atomic_log(std::move(atoms), tail, src.role, name);
  }
  auto d = make_data(src.role, name);
  if (const auto* dl = std::get_if<DensityLaw>(&src.repr)) {
    DensityLaw out;
    out.lower = std::max(a, dl->lower);
    out.upper = std::min(b, dl->upper);
    const double lo = out.lower;
    const double hi = out.upper;
    out.log_pdf = [f = dl->log_pdf, lo, hi, lm](double x) {
      if (x < lo || x >= hi) return kNegInf;
      return f(x) - lm;
    };
    if (dl->log_cdf) {
      const double la = lo <= dl->lower ? kNegInf : dl->log_cdf(lo);
      out.log_cdf = [f = dl->log_cdf, la, lo, hi, lm](double x) {
        if (x <= lo) return kNegInf;
        if (x >= hi) return 0.0;
        return log_sub_exp(f(x), la) - lm;
      };
      if (dl->inv_log_cdf) {
        out.inv_log_cdf = [f = dl->inv_log_cdf, la, lm](double y) {
          return f(log_add_exp(y + lm, la));
        };
      }
    }
    d->repr = std::move(out);
    return ProbabilityLaw(d);
  }
  std::vector<std::pair<double, ProbabilityLaw>> parts;
  for (const auto& [w, part] : std::get<MixtureLaw>(src.repr).parts) {
    const double pm = log_mass(part, a, b);
    if (pm == kNegInf) continue;
    parts.emplace_back(std::exp(std::log(w) + pm - lm), restrict_law(part, a, b));
  }
  KahanSum total;
  for (const auto& p : parts) total.add(p.first);
  for (auto& p : parts) p.first /= total.value();
  d->repr = MixtureLaw{std::move(parts)};
  return ProbabilityLaw(d);
}

std::string describe(const ProbabilityLaw& law) {
  const auto& d = law.data();
  if (!d.name.empty()) return d.name;
  if (const auto* a = std::get_if<AtomicLaw>(&d.repr)) {
    std::ostringstream os;
    os << "atomic{";
    const std::size_t shown = std::min<std::size_t>(a->atoms.size(), 6);
    for (std::size_t i = 0; i < shown; ++i) {
      if (i) os << ", ";
      os << fmt::format("({:g}, {:.6g})", a->atoms[i].location, std::exp(a->atoms[i].log_weight));
    }
    if (shown < a->atoms.size()) os << ", ...";
    os << "}";
    return os.str();
  }
  if (std::holds_alternative<DensityLaw>(d.repr)) return "density";
  return "mixture";
}

}  // namespace hotwall
