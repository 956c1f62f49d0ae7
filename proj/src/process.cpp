#include "hotwall/process.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>

#include "hotwall/errors.hpp"
#include "hotwall/numeric.hpp"
#include "hotwall/quadrature.hpp"

namespace hotwall {

Trajectory::Trajectory(double q0, double p0) : q0_(q0), p0_(p0), t0_(0.0), delayed_(true) {
  if (!(q0 >= 0.0 && q0 < 1.0)) throw std::invalid_argument("Trajectory: q0 must lie in [0, 1)");
  if (!(p0 > 0.0) || !std::isfinite(p0)) throw std::invalid_argument("Trajectory: p0 must be > 0");
  t0_ = (1.0 - q0) / p0;
  run_sum_ = t0_;
}

Trajectory Trajectory::undelayed() {
  Trajectory tr(0.0, 1.0);
  tr.delayed_ = false;
  tr.p0_ = 0.0;
  tr.t0_ = 0.0;
  tr.run_sum_ = 0.0;
  return tr;
}

void Trajectory::append(const Cycle& c) {
  if (!(c.tau > 0.0) || !(c.speed > 0.0)) throw std::invalid_argument("Trajectory: cycle must be positive");
  if (!delayed_ && cycles_.empty()) p0_ = c.speed;
  cycles_.push_back(c);
  // Kahan-Babuska update of the running epoch.
  const double t = run_sum_ + c.tau;
  if (std::abs(run_sum_) >= std::abs(c.tau)) {
    run_comp_ += (run_sum_ - t) + c.tau;
  } else {
    run_comp_ += (c.tau - t) + run_sum_;
  }
  run_sum_ = t;
  const double e = run_sum_ + run_comp_;
  if (!epochs_.empty() && !(e > epochs_.back())) {
    throw std::runtime_error("Trajectory: epochs stopped increasing (cycle below resolution)");
  }
  epochs_.push_back(e);
}

void Trajectory::extend(double horizon, const CycleSource& source) {
  horizon_ = std::max(horizon_, horizon);
  while (!(covered() > horizon)) {
    const SpeedDraw d = source(cycles_.size() + 1);
    append({d.tau, d.speed});
  }
}

void Trajectory::extend(double horizon, const ProbabilityLaw& phi, Rng& rng) {
  extend(horizon, [&](std::size_t) { return sample_pair(phi, rng); });
}

std::size_t Trajectory::epochs_upto(double t) const {
  if (t < t0_) return 0;
  return 1 + static_cast<std::size_t>(std::upper_bound(epochs_.begin(), epochs_.end(), t) -
                                      epochs_.begin());
}

void Trajectory::write_csv(std::ostream& os) const {
  os << fmt::format("# q0={:.17g},p0={:.17g},delayed={}\n", q0_, p0_, delayed_ ? 1 : 0);
  os << "index,tau,prefix_sum\n";
  for (std::size_t i = 0; i < cycles_.size(); ++i) {
    os << fmt::format("{},{:.17g},{:.17g}\n", i + 1, cycles_[i].tau, epochs_[i]);
  }
}

Trajectory Trajectory::read_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("trajectory csv: empty input");
  double q0 = 0.0;
  double p0 = 0.0;
  int delayed = 1;
  if (std::sscanf(line.c_str(), "# q0=%lf,p0=%lf,delayed=%d", &q0, &p0, &delayed) != 3) {
    throw std::runtime_error("trajectory csv: malformed header: " + line);
  }
  if (!std::getline(is, line) || line != "index,tau,prefix_sum") {
    throw std::runtime_error("trajectory csv: missing column header");
  }
  Trajectory tr = delayed ? Trajectory(q0, p0) : Trajectory::undelayed();
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string idx, tau, prefix;
    std::getline(row, idx, ',');
    std::getline(row, tau, ',');
    std::getline(row, prefix, ',');
    const double t = std::stod(tau);
    tr.append({t, 1.0 / t});
  }
  return tr;
}

Trajectory simulate_with(double q0, double p0, double horizon, const CycleSource& source) {
  Trajectory tr(q0, p0);
  tr.extend(horizon, source);
  return tr;
}

Trajectory simulate(double q0, double p0, double horizon, const ProbabilityLaw& phi, Rng& rng) {
  Trajectory tr(q0, p0);
  tr.extend(horizon, phi, rng);
  return tr;
}

Trajectory simulate_undelayed(double horizon, const ProbabilityLaw& phi, Rng& rng) {
  Trajectory tr = Trajectory::undelayed();
  tr.extend(horizon, phi, rng);
  return tr;
}

StateSample evaluate(const Trajectory& traj, double t) {
  if (!(t >= 0.0)) throw std::invalid_argument("evaluate: t must be >= 0");
  if (!(t < traj.covered())) {
    throw HorizonExceeded(fmt::format("evaluate: t={:.17g} beyond covered time {:.17g}", t,
                                      traj.covered()));
  }
  if (traj.delayed() && t < traj.t0()) {
    const double q = std::min(traj.q0() + traj.p0() * t, std::nextafter(1.0, 0.0));
    return {t, q, traj.p0(), 0};
  }
  const std::size_t n = traj.epochs_upto(t);  // current cycle is the n-th
  const Cycle& c = traj.cycles()[n - 1];
  const double q = std::min((t - traj.epoch(n - 1)) / c.tau, std::nextafter(1.0, 0.0));
  return {t, q, c.speed, traj.delayed() ? n : n - 1};
}

std::pair<double, std::size_t> renewal_counts(const Trajectory& traj, double t) {
  if (traj.delayed()) throw std::invalid_argument("renewal_counts: path must be undelayed");
  if (!(t < traj.covered())) throw HorizonExceeded("renewal_counts: t beyond covered time");
  const std::size_t n = traj.epochs_upto(t) - 1;
  return {traj.epoch(n), n};
}

RecurrencePair recurrence(const Trajectory& traj, double t) {
  if (traj.delayed() && t < traj.t0()) {
    throw BeforeFirstRenewal(fmt::format("recurrence: t={:.17g} precedes T0={:.17g}", t, traj.t0()));
  }
  if (!(t < traj.covered())) throw HorizonExceeded("recurrence: t beyond covered time");
  const std::size_t n = traj.epochs_upto(t);
  return {traj.epoch(n) - t, t - traj.epoch(n - 1)};
}

double dynkin_increment(const TestFunction& f, const Trajectory& traj, double t) {
  const StateSample start = evaluate(traj, 0.0);
  const StateSample end = evaluate(traj, t);
  KahanSum integral;
  auto segment = [&](double a, double b, double qa, double p) {
    if (!(b > a)) return;
    integral.add(quad::gauss_legendre(
        [&](double s) { return p * f.dq(qa + p * (s - a), p); }, a, b));
  };
  double a = 0.0;
  if (traj.delayed()) {
    segment(0.0, std::min(t, traj.t0()), traj.q0(), traj.p0());
    a = traj.t0();
  }
  for (std::size_t i = 0; i < traj.cycles().size() && a < t; ++i) {
    const double b = traj.epoch(i + 1);
    segment(a, std::min(b, t), 0.0, traj.cycles()[i].speed);
    a = b;
  }
  return f.f(end.q, end.p) - f.f(start.q, start.p) - integral.value();
}

namespace {

MonteCarloResidual summarize(const std::vector<RunningStats>& blocks) {
  RunningStats all;
  for (const auto& b : blocks) all.merge(b);
  return {std::abs(all.mean()), all.standard_error(), all.count()};
}

}  // namespace

MonteCarloResidual semigroup_residual(const TestFunction& f, double t, double s,
                                      std::size_t n_samples, const ProbabilityLaw& phi,
                                      std::uint64_t seed, double q0, double p0) {
  if (t < 0.0 || s < 0.0) throw std::invalid_argument("semigroup_residual: negative time");
  auto blocks = run_blocks<RunningStats>(
      seed, n_samples, [&](Rng& rng, std::size_t begin, std::size_t end) {
        RunningStats st;
        for (std::size_t i = begin; i < end; ++i) {
          const Trajectory path = simulate(q0, p0, t + s, phi, rng);
          const StateSample xt = evaluate(path, t);
          const double lhs = f.f(evaluate(path, t + s).q, evaluate(path, t + s).p);
          const Trajectory cont = simulate(xt.q, xt.p, s, phi, rng);
          const StateSample ys = evaluate(cont, s);
          st.add(lhs - f.f(ys.q, ys.p));
        }
        return st;
      });
  return summarize(blocks);
}

MonteCarloResidual generator_residual(const TestFunction& f, double t, std::size_t n_samples,
                                      const ProbabilityLaw& phi, std::uint64_t seed, double q0,
                                      double p0) {
  const double reentry = mean_of(phi, [&](double v) { return f.f(0.0, v); });
  for (double p : {1e-3, 0.1, 0.5, 1.0, 2.0, 10.0, 1e3, p0}) {
    const double gap = std::abs(f.f(1.0, p) - reentry);
    if (gap > 1e-9) {
      throw BoundaryConditionViolated(fmt::format(
          "generator_residual: f(1, {:g}) differs from the re-entry average by {:.3g}", p, gap));
    }
  }
  auto blocks = run_blocks<RunningStats>(
      seed, n_samples, [&](Rng& rng, std::size_t begin, std::size_t end) {
        RunningStats st;
        for (std::size_t i = begin; i < end; ++i) {
          const Trajectory path = simulate(q0, p0, t, phi, rng);
          st.add(dynkin_increment(f, path, t));
        }
        return st;
      });
  return summarize(blocks);
}

}  // namespace hotwall
