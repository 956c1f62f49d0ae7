#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "hotwall/laws.hpp"
#include "hotwall/process.hpp"

namespace hotwall {

using Rational = boost::multiprecision::cpp_rational;

/// Uniform law in q on [a, b) at a fixed momentum, scaled by weight. A
/// component with a == b is a point mass at q = a.
template <typename Real>
struct MeasureComponent {
  Real momentum;
  Real a;
  Real b;
  Real weight;

  bool is_point() const { return a == b; }
};

/// Finite mixture of uniform-in-q components on [0, 1) x [0, inf).
template <typename Real>
class BasicEmpiricalMeasure {
 public:
  using Component = MeasureComponent<Real>;

  BasicEmpiricalMeasure() = default;
  BasicEmpiricalMeasure(std::vector<Component> components, Real total_time)
      : components_(std::move(components)), total_time_(std::move(total_time)) {}

  const std::vector<Component>& components() const { return components_; }
  /// Length of the averaging window; zero for targets not built from a path.
  const Real& total_time() const { return total_time_; }

  Real total_weight() const;
  /// Integral of p.
  Real mean_momentum() const;
  /// Merges components with identical momentum and q-interval.
  BasicEmpiricalMeasure compact() const;

 private:
  std::vector<Component> components_;
  Real total_time_{};
};

using EmpiricalMeasure = BasicEmpiricalMeasure<double>;
using ExactEmpiricalMeasure = BasicEmpiricalMeasure<Rational>;

/// Occupation measure of the path over the time window [from, to).
EmpiricalMeasure occupation_measure(const Trajectory& traj, double from, double to);
ExactEmpiricalMeasure occupation_measure(const Trajectory& traj, const Rational& from,
                                         const Rational& to);

/// mu_t when `delayed` (window [0, t)), otherwise the undelayed measure over
/// [T0, T0 + t). Throws HorizonExceeded when the path does not cover the window.
EmpiricalMeasure empirical_measure(const Trajectory& traj, double t, bool delayed = true);
/// Same in exact arithmetic; epochs are recomputed from T0 = (1 - q0)/p0 and
/// the recorded durations, momenta of full cycles are 1/tau.
ExactEmpiricalMeasure exact_empirical_measure(const Trajectory& traj, const Rational& t,
                                              bool delayed = true);
Rational exact_t0(const Trajectory& traj);

EmpiricalMeasure to_double(const ExactEmpiricalMeasure& mu);

/// Time-weighted average (t1 mu + t2 nu)/(t1 + t2), i.e. the occupation of
/// the concatenated window.
EmpiricalMeasure merge(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu);
ExactEmpiricalMeasure merge(const ExactEmpiricalMeasure& mu, const ExactEmpiricalMeasure& nu);

using MeasureFn = std::function<double(double, double)>;

/// Integral of f(q, p), Gauss-Legendre in q on each component.
double integrate(const EmpiricalMeasure& mu, const MeasureFn& f);
/// Integral using an antiderivative F(q, p) = int_0^q f(r, p) dr (exact on components).
double integrate_with_antiderivative(const EmpiricalMeasure& mu, const MeasureFn& antiderivative,
                                     const MeasureFn& f_at_point);

/// sup_A |mu(A) - nu(A)|, exact on the common refinement of momentum atoms and
/// q-interval endpoints. The total variation norm is twice this value.
double tv_distance(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu);
Rational tv_distance(const ExactEmpiricalMeasure& mu, const ExactEmpiricalMeasure& nu);

/// Bounded-Lipschitz test family: piecewise-linear hats in q and in
/// u = p/(1+p) with nodes k/(n-1), n in {2, 4, 8, 16}; tensor products and
/// both marginal hats, each scaled by 1/n so that every member has sup norm
/// and Lipschitz constant at most 1. The distance is the maximum discrepancy
/// over the family, a lower bound on the true bounded-Lipschitz distance.
struct BlFamily {
  std::vector<int> levels{2, 4, 8, 16};
  std::size_t size() const;
};

double bl_distance(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu,
                   const BlFamily& family = {});

struct MeasureDistanceReport {
  double tv;
  double bl;
  std::size_t bl_family_size;
  std::size_t momentum_atoms;  // distinct momenta in the common refinement
};

MeasureDistanceReport compare(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu,
                              const BlFamily& family = {});

/// dq x pi for an atomic pi; throws NonAtomicTarget otherwise.
EmpiricalMeasure product_target(const ProbabilityLaw& pi);

/// lambda_ell(dq) x delta_v(dp): uniform on [0, ell), or the point q = 0 when ell = 0.
EmpiricalMeasure lambda_component(double ell, double momentum, double weight = 1.0);

/// Histogram with n_q equal q-bins and the given momentum bin edges. Rows are
/// "q_bin,p_bin,mass"; momenta outside the edges go to the first/last bin.
void write_histogram(std::ostream& os, const EmpiricalMeasure& mu, int n_q,
                     const std::vector<double>& p_edges);

}  // namespace hotwall
