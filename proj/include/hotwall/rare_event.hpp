#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hotwall/empirical.hpp"
#include "hotwall/extended_real.hpp"
#include "hotwall/laws.hpp"
#include "hotwall/numeric.hpp"
#include "hotwall/process.hpp"
#include "hotwall/random.hpp"
#include "hotwall/rate.hpp"

namespace hotwall {

// ---- events ----

/// Predicate on the undelayed empirical measure at time t.
struct EventSpec {
  enum class Kind { always, mean_momentum_exceeds, bl_ball, momentum_marginal_ball, custom };

  Kind kind = Kind::always;
  double threshold = 0.0;  // M for mean_momentum_exceeds, radius for balls
  EmpiricalMeasure center;
  std::function<bool(const Trajectory&, double)> predicate;  // custom only
  std::string label;

  static EventSpec always();
  static EventSpec mean_momentum_exceeds(double m);
  static EventSpec bl_ball(EmpiricalMeasure center, double radius);
  /// Ball for the bl distance between momentum marginals.
  static EventSpec momentum_marginal_ball(EmpiricalMeasure center, double radius);
  static EventSpec custom(std::function<bool(const Trajectory&, double)> predicate,
                          std::string label);

  bool operator()(const Trajectory& path, double t) const;
};

/// Same measure with every q-interval replaced by [0, 1): keeps the momentum marginal.
EmpiricalMeasure momentum_marginal(const EmpiricalMeasure& mu);

/// Center alpha gamma + (1 - alpha) lambda_ell delta_0 of the non-LDP ball; gamma
/// is dq times the invariant momentum law (or delta_0 when that law does not exist).
/// Requires an atomic invariant law when alpha > 0.
EmpiricalMeasure non_ldp_center(double alpha, double ell, const ProbabilityLaw& phi);

// ---- tilted laws ----

enum class TiltMode { slow_reentry_only, ll_plus_slow_reentry };

/// Path law of the lower-bound construction: v_1..v_T from pi~, v_{T+1} from
/// phi conditioned on K = [k_lo, k_hi), the rest from phi.
struct TiltedScheme {
  TiltMode mode = TiltMode::slow_reentry_only;
  double alpha = 0.0;
  double ell = 0.5;
  double delta = 0.1;
  double t = 1.0;
  ProbabilityLaw pi_tilde;  // law of the tilted speeds
  double mean_speed = 0.0;  // pi(p) = 1 / E_{pi~}[1/p]
  std::size_t n_tilted = 0;  // T_t = floor(alpha pi(p) t)
  double k_lo = 0.0;
  double k_hi = kInf;

  /// alpha = 0: K = [ell(1-delta)/t, ell(1+delta)/t).
  static TiltedScheme slow_reentry(double ell, double delta, double t);
  /// alpha in (0, 1): K = [(ell-delta)/((1-alpha-delta)t), (ell+delta)/((1-alpha+delta)t)).
  static TiltedScheme ll_plus_slow_reentry(double alpha, const ProbabilityLaw& pi_tilde,
                                           double ell, double delta, double t);
  /// Dispatches on alpha (slow_reentry when alpha = 0).
  static TiltedScheme make(double alpha, const ProbabilityLaw& pi_tilde, double ell, double delta,
                           double t);
  /// pi~ = phi and K = (0, inf): the untilted law.
  static TiltedScheme no_tilt(const ProbabilityLaw& phi, double t);
  /// Explicit fields, for tests and custom proposals.
  static TiltedScheme custom(const ProbabilityLaw& pi_tilde, std::size_t n_tilted, double k_lo,
                             double k_hi, double t);

  std::string describe() const;
};

/// Horizon at which the K_t midpoint ell/((1-alpha) t) equals the speed v.
double matched_time(double alpha, double ell, double v);

struct TiltedPath {
  Trajectory path;
  double log_lr;  // log dP/dQ along the path
};

/// Precomputed sampler for one scheme and one speed law.
class TiltedSampler {
 public:
  /// Throws EmptyWindow when phi(K) = 0.
  TiltedSampler(TiltedScheme scheme, ProbabilityLaw phi);

  TiltedPath sample(Rng& rng) const;
  const TiltedScheme& scheme() const { return scheme_; }
  double log_window_mass() const { return log_window_; }

 private:
  TiltedScheme scheme_;
  ProbabilityLaw phi_;
  LogDensityRatio ratio_;  // log(d pi~ / d phi)
  double log_window_;
};

TiltedPath tilted_sampler(const TiltedScheme& scheme, const ProbabilityLaw& phi, Rng& rng);

/// T H(pi~ | phi) - log phi(K); +inf when the window is empty.
ExtendedReal entropy_cost(const TiltedScheme& scheme, const ProbabilityLaw& phi);

// ---- estimators ----

struct ProbabilityEstimate {
  double estimate = 0.0;
  double stderr_ = 0.0;
  double log_estimate = kNegInf;  // kept separately: estimates may underflow
  double log_stderr = kNegInf;
  double ess = 0.0;  // effective sample size of the weighted hits
  std::size_t hits = 0;
  std::size_t n = 0;
  bool degenerate_ess = false;  // ess below 10
};

ProbabilityEstimate direct_probability(const EventSpec& event, double t, std::size_t n_paths,
                                       const ProbabilityLaw& phi, std::uint64_t seed);

/// Raw (not self-normalized) likelihood-ratio estimator.
ProbabilityEstimate importance_probability(const EventSpec& event, const TiltedScheme& scheme,
                                           std::size_t n_paths, const ProbabilityLaw& phi,
                                           std::uint64_t seed);

/// Mean and standard error of -log LR under the tilted law.
struct CostCheck {
  double closed_form;
  double mc_mean;
  double mc_stderr;
  bool within_3sigma;
};
CostCheck entropy_cost_check(const TiltedScheme& scheme, const ProbabilityLaw& phi,
                             std::size_t n_paths, std::uint64_t seed);

struct SlopeEstimate {
  std::string tag;  // "direct", "importance" or "bound"
  std::vector<double> t_grid;
  std::vector<double> log_prob;
  std::vector<double> log_prob_se;
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
};

/// Weighted least squares of log p on t with weights 1/max(se^2, floor); the
/// standard error is inflated by the residual scatter when it exceeds the weights.
/// The confidence interval is two-sided 95% from Student's t.
SlopeEstimate fit_slope(std::vector<double> t, std::vector<double> log_prob,
                        std::vector<double> log_prob_se, std::string tag,
                        double variance_floor = 1e-6);

// ---- tightness and free energy ----

/// e^{t - floor(tM) log c}, c^{-1} = E[e^{-1/v}].
double tightness_bound(double m, double t, const ProbabilityLaw& phi);
double log_tightness_bound(double m, double t, const ProbabilityLaw& phi);

/// mu-bar_t(p) = (N_t + (t - S_{N_t})/tau_{N_t+1}) / t on an undelayed path.
double mean_momentum(const Trajectory& path, double t);

struct TightnessPoint {
  double t;
  double m;
  ProbabilityEstimate mc;
  double bound;
  bool ok;
};
TightnessPoint tightness_check(double m, double t, const ProbabilityLaw& phi, std::size_t n_paths,
                               std::uint64_t seed);

/// int_0^t f(q_s, p_s) ds on an undelayed path.
double path_integral(const TestFunctionFixture& f, const Trajectory& path, double t);

struct FreeEnergyPoint {
  double t;
  double mc_mean;
  double mc_stderr;
  double bound;  // D_f / (1 - C_f)
  bool ok;       // mc_mean <= bound
};
std::vector<FreeEnergyPoint> free_energy_check(const TestFunctionFixture& f,
                                               const ProbabilityLaw& phi,
                                               const std::vector<double>& t_grid,
                                               std::size_t n_paths, std::uint64_t seed);

// ---- non-LDP experiment ----

/// P(S_{N_t} <= beta t, (t - S_{N_t})/tau_{N_t+1} <= h)
///   <= psi([t(1-beta)/h, inf)) (1 + E[N_{beta t}]),
/// with E[N_s] <= s / tau_min. Returns log of the bound; +inf if tau_min = 0.
double log_decomposition_bound(const ProbabilityLaw& phi, double beta, double h, double t);

/// P(S_{N_t} <= beta t, (t - S_{N_t})/tau_{N_t+1} <= h) by simulation.
ProbabilityEstimate decomposition_event_probability(const ProbabilityLaw& phi, double beta,
                                                    double h, double t, std::size_t n_paths,
                                                    std::uint64_t seed);

struct NonLdpConfig {
  double alpha = 0.0;
  double ell = 0.5;
  double delta = 0.05;        // half-width of the tilted window
  double ball_radius = 0.015;  // bl radius of the event around the center
  double delta1 = 0.1;        // ball-to-constraint constant for the analytic bound
  int j_min = 6;
  int j_max = 11;
  std::size_t n_paths = 2000;
  std::uint64_t seed = 1;
};

struct MismatchedPoint {
  double s;
  bool empty_window;
  std::optional<ProbabilityEstimate> importance;  // when the window is nonempty
  double log_bound;                               // analytic bound, +inf if unavailable
};

struct NonLdpResult {
  std::vector<double> matched_times;
  std::vector<ProbabilityEstimate> matched;
  SlopeEstimate matched_slope;
  std::vector<MismatchedPoint> mismatched;
  std::optional<SlopeEstimate> mismatched_is_slope;     // all windows nonempty
  std::optional<SlopeEstimate> mismatched_bound_slope;  // bound finite everywhere
  double target_slope;  // -(1-alpha) xi / ell
};

/// Matched times put an atom 2^-j at the K_t midpoint; mismatched times are
/// their geometric midpoints. Works for any law; for non-atomic laws the
/// windows are never empty and both sequences are importance sampled.
NonLdpResult non_ldp_experiment(const NonLdpConfig& config, const ProbabilityLaw& phi,
                                const ExtendedReal& xi);

/// Largest constraint deviation max(|S_{N_t}/t - alpha|, |(t - S_{N_t})/tau_{N_t+1} - ell|)
/// over sampled paths inside the ball. Paths come from tilted schemes with
/// alpha' in alpha + {0, 0.02, 0.05, 0.1}, ell' in ell + 0.02 {-10..10} and
/// window half-width 0.02; schemes with an empty window are skipped.
struct Delta1Calibration {
  double delta1;
  std::size_t inside;
  std::size_t sampled;
};
Delta1Calibration calibrate_delta1(double alpha, double ell, double ball_radius,
                                   const ProbabilityLaw& phi, const std::vector<double>& t_grid,
                                   std::size_t n_paths, std::uint64_t seed);

/// (S_{N_t}/t, (t - S_{N_t})/tau_{N_t+1}) on an undelayed path.
std::pair<double, double> renewal_fractions(const Trajectory& path, double t);

}  // namespace hotwall
