#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hotwall/empirical.hpp"
#include "hotwall/extended_real.hpp"
#include "hotwall/laws.hpp"

namespace hotwall {

/// mu(dq, dp) = alpha1 pi(dp) dq + alpha2 delta_0(dp) dq + alpha3 delta_0(dp) lambda_ell(dq).
struct OmegaMeasure {
  double alpha1 = 1.0;
  double alpha2 = 0.0;
  double alpha3 = 0.0;
  ProbabilityLaw pi;
  double ell = 0.5;
  /// Marks a measure declared to lie outside Omega; every rate is then +inf.
  bool outside = false;

  /// Validates and applies the conventions pi = phi when alpha1 = 0 and
  /// ell = 1/2 when alpha3 = 0.
  static OmegaMeasure make(double alpha1, const ProbabilityLaw& pi, double alpha2, double alpha3,
                           double ell, const ProbabilityLaw& phi);
  /// Throws std::invalid_argument when the weights or ell are out of range.
  void validate() const;
};

/// The measure with pi~ = phi, i.e. pi proportional to phi(dp)/p.
OmegaMeasure invariant_measure(const ProbabilityLaw& phi);

/// Exact finite-mixture form; requires an atomic pi when alpha1 > 0.
EmpiricalMeasure to_measure(const OmegaMeasure& mu);

/// A law split into its atoms and its absolutely continuous parts.
struct FlatLaw {
  std::map<double, double> atoms;                   // location -> log weight
  std::vector<std::pair<double, DensityLaw>> dens;  // (log weight, density)

  static FlatLaw of(const ProbabilityLaw& law);
  void add(const ProbabilityLaw& law, double log_w);
  double log_atom(double x) const;     // -inf when x is not an atom
  double log_density(double x) const;  // log of the summed densities at x
};

/// Pointwise log(d nu / d phi); +inf where nu charges a phi-null point.
class LogDensityRatio {
 public:
  LogDensityRatio(const ProbabilityLaw& nu, const ProbabilityLaw& phi);
  double operator()(double x) const;

 private:
  FlatLaw nu_;
  FlatLaw phi_;
};

/// H(nu | phi). +inf when nu is not absolutely continuous with respect to phi.
ExtendedReal relative_entropy(const ProbabilityLaw& nu, const ProbabilityLaw& phi);

template <typename Scalar>
struct BasicRateValue {
  BasicExtendedReal<Scalar> total;
  BasicExtendedReal<Scalar> entropy_part;  // mu(p) H(pi~ | phi)
  BasicExtendedReal<Scalar> xi_part;       // alpha2 xi + alpha3 xi' / ell
};

using RateValue = BasicRateValue<double>;
using ExactRateValue = BasicRateValue<Rational>;

/// alpha3 / ell with alpha3 / 0 = +inf for alpha3 > 0 and 0 / 0 = 0.
template <typename Scalar>
BasicExtendedReal<Scalar> stuck_weight(const Scalar& alpha3, const Scalar& ell) {
  if (alpha3 == Scalar(0)) return {};
  if (ell == Scalar(0)) return BasicExtendedReal<Scalar>::infinity();
  return BasicExtendedReal<Scalar>(Scalar(alpha3 / ell));
}

/// entropy + alpha2 xi + (alpha3/ell) xi_stuck under 0 * inf = 0.
template <typename Scalar>
BasicRateValue<Scalar> assemble_rate(const Scalar& alpha2, const Scalar& alpha3, const Scalar& ell,
                                     const BasicExtendedReal<Scalar>& entropy,
                                     const BasicExtendedReal<Scalar>& xi,
                                     const BasicExtendedReal<Scalar>& xi_stuck) {
  const auto xi_part = BasicExtendedReal<Scalar>(alpha2) * xi + stuck_weight(alpha3, ell) * xi_stuck;
  return {entropy + xi_part, entropy, xi_part};
}

/// mu(p) H(pi~ | phi) with mu(p) = alpha1 pi(p); +inf if mu(p) is infinite.
ExtendedReal entropy_part(const OmegaMeasure& mu, const ProbabilityLaw& phi);

RateValue rate_I(const OmegaMeasure& mu, const ProbabilityLaw& phi, const ExtendedReal& xi);
RateValue rate_I_bar(const OmegaMeasure& mu, const ProbabilityLaw& phi, const ExtendedReal& xi,
                     const ExtendedReal& xi_bar);

/// Same values carried in exact rationals; the entropy part is converted from
/// double exactly, so identities between I and I-bar hold without rounding.
ExactRateValue rate_I_exact(const OmegaMeasure& mu, const ExtendedReal& entropy,
                            const ExtendedReal& xi);
ExactRateValue rate_I_bar_exact(const OmegaMeasure& mu, const ExtendedReal& entropy,
                                const ExtendedReal& xi, const ExtendedReal& xi_bar);
/// alpha3 ell^-1 (xi_bar - xi) in exact arithmetic.
BasicExtendedReal<Rational> rate_gap_exact(const OmegaMeasure& mu, const ExtendedReal& xi,
                                           const ExtendedReal& xi_bar);
BasicExtendedReal<Rational> to_exact(const ExtendedReal& x);

/// Candidate function g(p) for the variational formulas; -inf is allowed
/// where the reference law has mass but pi does not.
using Candidate = std::function<double(double)>;

/// sup over g in {0} and the candidates of pi(p g) - pi(p) log phi(e^g), a
/// lower bound on pi(p) H(pi~ | phi).
struct VariationalResult {
  double value;
  std::ptrdiff_t best;  // index of the maximizing candidate, -1 for g = 0
};
VariationalResult variational_entropy(const ProbabilityLaw& pi, const ProbabilityLaw& phi,
                                      const std::vector<Candidate>& candidates);

/// log(d pi~ / d phi) for atomic pi and phi; -inf off the support of pi~.
Candidate optimal_candidate(const ProbabilityLaw& pi, const ProbabilityLaw& phi);

/// Linear interpolation in log p through (log_knots[i], values[i]), constant outside.
Candidate piecewise_log_linear(std::vector<double> log_knots, std::vector<double> values);

/// Donsker-Varadhan value on Omega_0 (alpha2 = alpha3 = 0): mu(p) sup_h (pi~(h) - log phi(e^h)).
/// Throws NotInOmega0 otherwise.
double dv_rate(const OmegaMeasure& mu, const ProbabilityLaw& phi,
               const std::vector<Candidate>& candidates);

/// Approximating sequence with alpha2 = 0 and ell > 0 whose rates converge to I-bar(mu).
/// The moving part keeps pi on (1/n, inf) and moves the frozen mass to the
/// invariant law on (0, 1/n], tilted by e^{c/p} with c = max(xi - eps, 0).
/// Throws InfiniteRate when I-bar(mu) is infinite.
OmegaMeasure density_approximation(const OmegaMeasure& mu, int n, const ProbabilityLaw& phi,
                                   const ExtendedReal& xi, const ExtendedReal& xi_bar, double eps);

/// Momentum law of the invariant measure used for frozen mass: phi(dp)/p
/// normalized, or delta_0 when the interarrival mean is infinite (returned as empty).
std::optional<ProbabilityLaw> frozen_momentum_law(const ProbabilityLaw& phi);

/// Bounded function of p with a known bound on its positive part.
struct BoundedFunction {
  std::function<double(double)> fn;
  double sup;  // sup of fn
};

/// f(q, p) = p g(p) + c 1[p < delta] 1[q < m]/m together with its Lambda constants.
struct TestFunctionFixture {
  double c;
  double delta;
  double m;
  BoundedFunction g;
  double c_f;        // phi(e^{g + (c/p) 1[p < delta]})
  double d_f;        // sup over s of the small-time integral, on a dense s-grid
  double d_f_bound;  // e^{sup g^+} phi(e^{(c/p) 1[p < delta]}), an upper bound on d_f

  double operator()(double q, double p) const;
  /// int_0^q f(r, p) dr
  double antiderivative(double q, double p) const;
  /// D_f / (1 - C_f)
  double free_energy_bound() const;
};

/// Builds the fixture and certifies membership in Lambda; throws NotInLambda
/// when c >= xi, phi(e^g) >= 1, C_f >= 1, or m is outside (0, 1).
TestFunctionFixture test_function_fixture(double c, double delta, const BoundedFunction& g,
                                          double m, const ProbabilityLaw& phi,
                                          const ExtendedReal& xi);

/// Largest delta in {1, 1/2, 1/4, ...} with C_f < 1, or 0 if none down to 2^-60.
double suitable_delta(double c, const BoundedFunction& g, const ProbabilityLaw& phi);

/// Heuristic decomposition of a finite-time measure: momenta below p_min count
/// as frozen (full q-interval) or stuck (partial interval starting at 0).
struct OmegaSummary {
  double alpha1;
  double alpha2;
  double alpha3;
  double ell;         // weighted mean q-extent of the stuck part
  double mean_speed;  // mu(p) restricted to the moving part, normalized
};
OmegaSummary classify_heuristic(const EmpiricalMeasure& mu, double p_min);

std::string describe(const OmegaMeasure& mu);

}  // namespace hotwall
