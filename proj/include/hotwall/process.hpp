#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "hotwall/laws.hpp"
#include "hotwall/random.hpp"

namespace hotwall {

struct Cycle {
  double tau;
  double speed;
};

/// Source of cycle draws; receives the 1-based index of the cycle being drawn.
using CycleSource = std::function<SpeedDraw(std::size_t)>;

/// One realization of the particle. A delayed path starts at (q0, p0) and
/// first hits the wall at T0 = (1 - q0)/p0; an undelayed path starts a fresh
/// cycle at time 0 (T0 = 0).
class Trajectory {
 public:
  Trajectory(double q0, double p0);
  static Trajectory undelayed();

  double q0() const { return q0_; }
  double p0() const { return p0_; }
  double t0() const { return t0_; }
  bool delayed() const { return delayed_; }
  double horizon() const { return horizon_; }

  const std::vector<Cycle>& cycles() const { return cycles_; }
  /// epoch(0) = T0; epoch(n) = T0 + tau_1 + ... + tau_n (compensated sums).
  double epoch(std::size_t n) const { return n == 0 ? t0_ : epochs_[n - 1]; }
  /// End of the covered time range.
  double covered() const { return epochs_.empty() ? t0_ : epochs_.back(); }

  void append(const Cycle& c);
  /// Draws cycles until the path covers (strictly past) `horizon`.
  void extend(double horizon, const CycleSource& source);
  void extend(double horizon, const ProbabilityLaw& phi, Rng& rng);

  /// Number of epochs <= t among epoch(0), epoch(1), ... (collisions for a delayed path).
  std::size_t epochs_upto(double t) const;

  void write_csv(std::ostream& os) const;
  static Trajectory read_csv(std::istream& is);

 private:
  double q0_;
  double p0_;
  double t0_;
  bool delayed_;
  double horizon_ = 0.0;
  std::vector<Cycle> cycles_;
  std::vector<double> epochs_;
  double run_sum_ = 0.0;
  double run_comp_ = 0.0;
};

Trajectory simulate(double q0, double p0, double horizon, const ProbabilityLaw& phi, Rng& rng);
Trajectory simulate_undelayed(double horizon, const ProbabilityLaw& phi, Rng& rng);
Trajectory simulate_with(double q0, double p0, double horizon, const CycleSource& source);

struct StateSample {
  double t;
  double q;
  double p;
  std::size_t n_collisions;
};

/// Right-continuous state at time t; throws HorizonExceeded past the covered range.
StateSample evaluate(const Trajectory& traj, double t);

/// (S_{N_t}, N_t) on an undelayed path, N_t = #{n >= 1 : S_n <= t}.
std::pair<double, std::size_t> renewal_counts(const Trajectory& traj, double t);

/// Recurrence times of the current cycle. B is the age (t minus the last
/// renewal at or before t), A the residual (next renewal minus t), so that
/// q_t = B/(A+B) and p_t = 1/(A+B).
struct RecurrencePair {
  double A;
  double B;
  double age() const { return B; }
  double residual() const { return A; }
};

RecurrencePair recurrence(const Trajectory& traj, double t);

/// f(q, p) together with its q-derivative.
struct TestFunction {
  std::string name;
  std::function<double(double, double)> f;
  std::function<double(double, double)> dq;
};

struct MonteCarloResidual {
  double residual;
  double stderr_;
  std::size_t n_samples;
};

/// |E f(x_{t+s}) - E (P_s f)(x_t)| with common randomness up to t and a fresh
/// continuation from (q_t, p_t).
MonteCarloResidual semigroup_residual(const TestFunction& f, double t, double s,
                                      std::size_t n_samples, const ProbabilityLaw& phi,
                                      std::uint64_t seed, double q0 = 0.0, double p0 = 1.0);

/// |E[f(x_t) - f(x_0) - int_0^t p f_q(x_s) ds]|. Requires the boundary condition
/// f(1, p) = int f(0, v) phi(dv) for all p (checked on a probe set to 1e-9).
MonteCarloResidual generator_residual(const TestFunction& f, double t, std::size_t n_samples,
                                      const ProbabilityLaw& phi, std::uint64_t seed,
                                      double q0 = 0.0, double p0 = 1.0);

/// Per-path Dynkin increment f(x_t) - f(x_0) - int_0^t p f_q(x_s) ds.
double dynkin_increment(const TestFunction& f, const Trajectory& traj, double t);

}  // namespace hotwall
