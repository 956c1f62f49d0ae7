#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hotwall/laws.hpp"

namespace hotwall::cli {

/// One named law. Built-ins carry a parameter (xi0 or kappa); atomic laws list
/// (location, weight) pairs; mixtures list (weight, law name) pairs.
struct LawSpec {
  std::string kind;     // atomic | density | mixture
  std::string builtin;  // dyadic | exp_interarrival | polynomial, or empty
  double param = 0.0;
  std::string role = "speed";  // speed | interarrival, atomic only
  std::vector<std::pair<double, double>> atoms;
  std::vector<std::pair<double, std::string>> parts;

  bool operator==(const LawSpec&) const = default;
};

struct HistogramSpec {
  int q_bins = 10;
  std::vector<double> p_edges;

  bool operator==(const HistogramSpec&) const = default;
};

struct SimulateSpec {
  std::string law;
  double q0 = 0.0;
  double p0 = 1.0;
  double horizon = 1000.0;
  std::vector<double> checkpoints;  // LLN distance curve times, each <= horizon
  HistogramSpec histogram;

  bool operator==(const SimulateSpec&) const = default;
};

/// alpha1 pi dq + alpha2 delta_0 dq + alpha3 delta_0 lambda_ell.
struct MeasureSpec {
  std::string name;
  double alpha1 = 1.0;
  std::string pi;  // law name; empty means the invariant momentum law
  double alpha2 = 0.0;
  double alpha3 = 0.0;
  double ell = 0.5;

  bool operator==(const MeasureSpec&) const = default;
};

struct RatesSpec {
  std::string law;
  std::vector<MeasureSpec> measures;

  bool operator==(const RatesSpec&) const = default;
};

struct EventConfig {
  std::string kind = "always";  // always | mean_momentum_exceeds | bl_ball | momentum_marginal_ball
  double threshold = 0.0;       // M, or the ball radius
  double alpha = 0.0;           // ball center parameters
  double ell = 0.5;

  bool operator==(const EventConfig&) const = default;
};

struct SchemeConfig {
  std::string kind = "none";  // none | tilted
  double alpha = 0.0;
  double ell = 0.5;
  double delta = 0.1;
  std::string pi_tilde;  // law name, alpha > 0 only

  bool operator==(const SchemeConfig&) const = default;
};

struct TightnessSpec {
  std::vector<double> m;
  std::vector<double> t_grid;
  std::uint64_t n_paths = 10000;

  bool operator==(const TightnessSpec&) const = default;
};

/// g(p) = a + b p/(1+p); delta = 0 picks the largest dyadic delta with C_f < 1.
struct FreeEnergySpec {
  double c = 0.0;
  double delta = 0.0;
  double g_a = -0.7;
  double g_b = 0.0;
  double m = 0.5;
  std::vector<double> t_grid;
  std::uint64_t n_paths = 10000;

  bool operator==(const FreeEnergySpec&) const = default;
};

struct RareSpec {
  std::string law;
  EventConfig event;
  SchemeConfig scheme;
  std::vector<double> t_grid;
  std::uint64_t n_paths = 1000;
  bool direct = true;
  std::optional<TightnessSpec> tightness;
  std::optional<FreeEnergySpec> free_energy;

  bool operator==(const RareSpec&) const = default;
};

struct CalibrationSpec {
  std::string law;  // calibration law
  std::vector<double> t_grid{64.0, 256.0, 1024.0};
  std::uint64_t n_paths = 500;
  double safety = 1.2;

  bool operator==(const CalibrationSpec&) const = default;
};

struct NonLdpSpec {
  std::string law;
  std::string control;  // optional control law
  double alpha = 0.0;
  double ell = 0.5;
  double delta = 0.05;
  double ball_radius = 0.015;
  double delta1 = 0.1;                     // used when calibration is absent
  std::optional<CalibrationSpec> calibrate;
  int j_min = 6;
  int j_max = 11;
  std::uint64_t n_paths = 2000;

  bool operator==(const NonLdpSpec&) const = default;
};

struct ExperimentConfig {
  std::optional<std::uint64_t> seed;
  std::string output;  // relative output directory
  int threads = 1;
  std::map<std::string, LawSpec> laws;
  std::optional<SimulateSpec> simulate;
  std::optional<RatesSpec> rates;
  std::optional<RareSpec> rare;
  std::optional<NonLdpSpec> nonldp;

  bool operator==(const ExperimentConfig&) const = default;
};

/// Parses and validates; throws ConfigError naming the offending line.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

/// Canonical YAML; parse_config(emit_config(c)) == c.
std::string emit_config(const ExperimentConfig& config);

/// CRC-32 of the canonical form, as eight hex digits.
std::string config_hash(const ExperimentConfig& config);

/// Builds every named law (mixtures may refer to laws defined anywhere in the map).
std::map<std::string, ProbabilityLaw> build_laws(const ExperimentConfig& config);

}  // namespace hotwall::cli
