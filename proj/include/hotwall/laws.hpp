#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "hotwall/extended_real.hpp"
#include "hotwall/random.hpp"

namespace hotwall {

enum class LawRole { speed, interarrival };

/// Direction in which a truncated atomic law continues with negligible mass.
enum class TailDirection { none, toward_zero, toward_infinity };

/// One atom. `reciprocal` is stored separately so that x -> 1/x is an exact
/// involution on atoms.
struct Atom {
  double location;
  double reciprocal;
  double log_weight;
};

struct AtomicLaw {
  std::vector<Atom> atoms;  // ascending by location
  TailDirection tail = TailDirection::none;
  std::vector<double> cumulative;  // P(X <= atoms[i].location), last entry exactly 1
};

/// Absolutely continuous law. Optional closed forms speed up mass queries and
/// sampling; without them everything falls back to quadrature.
struct DensityLaw {
  std::function<double(double)> log_pdf;
  double lower = 0.0;  // support is (lower, upper)
  double upper = 0.0;
  std::function<double(double)> log_cdf;      // log P(X < x)
  std::function<double(double)> log_sf;       // log P(X >= x)
  std::function<double(double)> inv_log_cdf;  // x such that log_cdf(x) = y
  std::function<double(double)> inv_log_sf;   // x such that log_sf(x) = y
};

struct LawData;

/// Immutable probability law on (0, inf). Cheap to copy and safe to share.
class ProbabilityLaw {
 public:
  ProbabilityLaw() = default;
  ProbabilityLaw(std::shared_ptr<const LawData> data) : data_(std::move(data)) {}

  /// Atoms given as (location, weight); weights must sum to 1 within 1e-12.
  static ProbabilityLaw atomic(const std::vector<std::pair<double, double>>& atoms,
                               LawRole role = LawRole::speed, std::string name = {});
  /// Atoms given by log-weights, normalized here.
  static ProbabilityLaw atomic_log(std::vector<Atom> atoms, TailDirection tail, LawRole role,
                                   std::string name = {});
  /// Density law; normalization is checked by quadrature to 1e-9.
  static ProbabilityLaw density(DensityLaw law, LawRole role, std::string name = {});
  static ProbabilityLaw mixture(const std::vector<std::pair<double, ProbabilityLaw>>& parts,
                                std::string name = {});

  /// Speed law with atoms 2^-j, j = 0..levels-1, weights proportional to exp(-2^j).
  static ProbabilityLaw dyadic(int levels = 1000);
  /// Speed law with density xi0 exp(-xi0/p) / p^2, i.e. Exp(xi0) interarrival times.
  static ProbabilityLaw exp_interarrival(double xi0);
  /// Speed law with density kappa p^(kappa-1) on (0, 1].
  static ProbabilityLaw polynomial(double kappa);

  const LawData& data() const;
  LawRole role() const;
  const std::string& name() const;
  bool is_atomic() const;
  bool is_density() const;
  bool is_mixture() const;
  const AtomicLaw& atomic_part() const;  // throws unless is_atomic()

  /// Same law with a different role tag.
  ProbabilityLaw with_role(LawRole role) const;
  ProbabilityLaw with_name(std::string name) const;

 private:
  std::shared_ptr<const LawData> data_;
};

struct MixtureLaw {
  std::vector<std::pair<double, ProbabilityLaw>> parts;  // weights sum to 1
};

struct LawData {
  std::variant<AtomicLaw, DensityLaw, MixtureLaw> repr;
  LawRole role = LawRole::speed;
  std::string name;
  // Set on laws produced by reciprocal_law, so that applying it twice returns the original.
  std::shared_ptr<const LawData> reciprocal_source;
};

/// A speed draw together with its exact cycle duration.
struct SpeedDraw {
  double speed;
  double tau;
};

double sample(const ProbabilityLaw& law, Rng& rng);
SpeedDraw sample_pair(const ProbabilityLaw& law, Rng& rng);
/// Sample conditioned on [a, b); throws std::domain_error when the window has no mass.
SpeedDraw sample_conditional(const ProbabilityLaw& law, double a, double b, Rng& rng);

/// log P([a, b)). Exact for atomic laws, closed form or quadrature otherwise.
double log_mass(const ProbabilityLaw& law, double a, double b);
double mass(const ProbabilityLaw& law, double a, double b);

/// phi([eps(1-delta), eps(1+delta))).
double window_probability(const ProbabilityLaw& phi, double eps, double delta);
double log_window_probability(const ProbabilityLaw& phi, double eps, double delta);

/// log E[g] where g is given by its logarithm (may return -inf). Returns +inf
/// when divergence is certified; throws InconclusiveConvergence otherwise.
double log_expectation(const ProbabilityLaw& law, const std::function<double(double)>& log_g,
                       double tol = 1e-9);
/// E[g] for nonnegative g.
ExtendedReal expectation(const ProbabilityLaw& law, const std::function<double(double)>& g,
                         double tol = 1e-9);
/// E[g] for signed, integrable g.
double mean_of(const ProbabilityLaw& law, const std::function<double(double)>& g,
               double tol = 1e-10);

/// E[X] and E[1/X].
ExtendedReal mean(const ProbabilityLaw& law);
ExtendedReal mean_reciprocal(const ProbabilityLaw& law);

ExtendedReal compute_xi(const ProbabilityLaw& phi, double tol = 1e-6);

struct TailExponentReport {
  ExtendedReal xi;
  ExtendedReal xi_bar_lower;
  ExtendedReal xi_bar_upper;
  bool xi_bar_infinite = false;
  bool xi_converged = true;
  std::vector<double> delta_grid;
  std::vector<double> epsilon_grid;
  std::vector<ExtendedReal> per_delta;  // limsup over the tail of the eps grid, per delta
  std::vector<int> empty_windows;       // empty windows in the tail, per delta
};

std::vector<double> default_delta_grid();
std::vector<double> default_epsilon_grid();
TailExponentReport estimate_xi_bar(const ProbabilityLaw& phi,
                                   const std::vector<double>& delta_grid = default_delta_grid(),
                                   const std::vector<double>& epsilon_grid = default_epsilon_grid());

/// p pi(dp) / pi(p) and its inverse (weighting by 1/p).
ProbabilityLaw size_bias(const ProbabilityLaw& pi);
ProbabilityLaw size_bias_inverse(const ProbabilityLaw& pi_tilde);

/// Pushforward under x -> 1/x.
ProbabilityLaw reciprocal_law(const ProbabilityLaw& law);
ProbabilityLaw speed_to_interarrival(const ProbabilityLaw& phi);
ProbabilityLaw interarrival_to_speed(const ProbabilityLaw& psi);

/// Reweights by exp(log_h(x)) and renormalizes. Returns the law and log of the normalizer.
std::pair<ProbabilityLaw, double> exponential_tilt(const ProbabilityLaw& law,
                                                   const std::function<double(double)>& log_h);

struct TiltResult {
  ProbabilityLaw law;
  double c_f;
};

/// phi_f(dv) = exp(f1(v)/v) phi(dv) / C_f.
TiltResult tilt_by_boundary_function(const ProbabilityLaw& phi,
                                     const std::function<double(double)>& f1);

/// Law restricted to [a, b) and renormalized.
ProbabilityLaw restrict_law(const ProbabilityLaw& law, double a, double b);

std::string describe(const ProbabilityLaw& law);

}  // namespace hotwall
