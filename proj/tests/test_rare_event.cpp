#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <functional>

#include "hotwall/errors.hpp"
#include "hotwall/numeric.hpp"
#include "hotwall/rare_event.hpp"

using namespace hotwall;

namespace {

// P(mean momentum at time t > m) by enumerating every cycle sequence of an atomic law.
double enumerate_mean_momentum(const std::vector<std::pair<double, double>>& atoms, double t,
                               double m) {
  double total = 0.0;
  std::function<void(double, std::size_t, double)> rec = [&](double s, std::size_t n, double prob) {
    for (const auto& [v, w] : atoms) {
      const double tau = 1.0 / v;
      if (s + tau > t) {
        const double mm = (static_cast<double>(n) + (t - s) / tau) / t;
        if (mm > m) total += prob * w;
      } else {
        rec(s + tau, n + 1, prob * w);
      }
    }
  };
  rec(0.0, 0, 1.0);
  return total;
}

double dyadic_log_z() {
  LogSum z;
  for (int j = 0; j < 1000; ++j) z.add(-std::ldexp(1.0, j));
  return z.value();
}

}  // namespace

TEST_CASE("direct estimator on trivial events") {
  const auto phi = ProbabilityLaw::atomic({{0.5, 0.5}, {2.0, 0.5}});
  const auto all = direct_probability(EventSpec::always(), 5.0, 1000, phi, 1);
  CHECK(all.estimate == 1.0);
  CHECK(all.stderr_ == 0.0);
  CHECK(all.log_estimate == 0.0);
  const auto positive = direct_probability(EventSpec::mean_momentum_exceeds(0.0), 5.0, 1000, phi, 2);
  CHECK(positive.estimate == 1.0);
}

TEST_CASE("direct estimator matches exhaustive enumeration at t = 5") {
  const std::vector<std::pair<double, double>> atoms{{0.5, 0.5}, {2.0, 0.5}};
  const auto phi = ProbabilityLaw::atomic(atoms);
  for (double m : {0.9, 1.2, 1.6}) {
    const double exact = enumerate_mean_momentum(atoms, 5.0, m);
    const auto est = direct_probability(EventSpec::mean_momentum_exceeds(m), 5.0, 100000, phi, 3);
    CHECK(exact > 0.0);
    CHECK(std::abs(est.estimate - exact) <= 3.0 * est.stderr_);
  }
}

TEST_CASE("estimates are monotone in the event under common randomness") {
  const auto phi = ProbabilityLaw::atomic({{0.5, 0.5}, {2.0, 0.5}});
  double previous = 1.0;
  for (double m : {0.5, 0.8, 1.0, 1.3, 1.7}) {
    const auto est = direct_probability(EventSpec::mean_momentum_exceeds(m), 8.0, 5000, phi, 4);
    CHECK(est.estimate <= previous);
    if (est.hits > 0) CHECK(est.log_estimate / 8.0 <= 0.0);
    previous = est.estimate;
  }
}

TEST_CASE("slow reentry on the dyadic law hits the matched atom") {
  const auto phi = ProbabilityLaw::dyadic();
  const int j = 6;
  const double t = matched_time(0.0, 0.5, std::ldexp(1.0, -j));
  CHECK(t == 32.0);
  const auto scheme = TiltedScheme::slow_reentry(0.5, 0.2, t);
  const TiltedSampler sampler(scheme, phi);
  const double log_atom = -std::ldexp(1.0, j) - dyadic_log_z();
  CHECK(sampler.log_window_mass() == doctest::Approx(log_atom).epsilon(1e-14));
  Rng rng(5);
  for (int k = 0; k < 200; ++k) {
    const auto tp = sampler.sample(rng);
    CHECK(tp.path.cycles()[0].speed == std::ldexp(1.0, -j));
    CHECK(tp.log_lr == sampler.log_window_mass());
  }
  // entropy cost = 2^j + log Z
  CHECK(entropy_cost(scheme, phi).to_double() ==
        doctest::Approx(std::ldexp(1.0, j) + dyadic_log_z()).epsilon(1e-14));
}

TEST_CASE("windows between dyadic atoms are empty") {
  const auto phi = ProbabilityLaw::dyadic();
  for (int j = 4; j <= 10; ++j) {
    const double s = 0.5 * std::ldexp(1.0, j) * std::sqrt(2.0);
    const auto scheme = TiltedScheme::slow_reentry(0.5, 0.05, s);
    CHECK_THROWS_AS(TiltedSampler(scheme, phi), EmptyWindow);
    CHECK(entropy_cost(scheme, phi).is_infinite());
  }
}

TEST_CASE("no tilt gives a zero likelihood ratio and the direct estimate") {
  const auto phi = ProbabilityLaw::atomic({{0.5, 0.3}, {1.0, 0.4}, {2.0, 0.3}});
  const auto scheme = TiltedScheme::no_tilt(phi, 10.0);
  Rng rng(6);
  for (int k = 0; k < 100; ++k) CHECK(tilted_sampler(scheme, phi, rng).log_lr == 0.0);
  CHECK(entropy_cost(scheme, phi).is_zero());
  const auto ev = EventSpec::mean_momentum_exceeds(1.2);
  const auto is = importance_probability(ev, scheme, 20000, phi, 7);
  const auto di = direct_probability(ev, 10.0, 20000, phi, 8);
  CHECK(std::abs(is.estimate - di.estimate) <= 3.0 * std::hypot(is.stderr_, di.stderr_));
}

TEST_CASE("importance sampling is unbiased on randomized configurations") {
  const auto phi = ProbabilityLaw::atomic({{0.5, 0.5}, {2.0, 0.5}});
  Rng rng(9);
  int failures = 0;
  for (int k = 0; k < 10; ++k) {
    const double w = 0.55 + 0.3 * rng.uniform();
    const auto tilde = ProbabilityLaw::atomic({{0.5, 1.0 - w}, {2.0, w}});
    const double t = 6.0 + 6.0 * rng.uniform();
    const auto n_tilted = static_cast<std::size_t>(2 + 6 * rng.uniform());
    const double m = 1.1 + 0.3 * rng.uniform();
    const auto scheme = TiltedScheme::custom(tilde, n_tilted, 0.0, kInf, t);
    const auto ev = EventSpec::mean_momentum_exceeds(m);
    const auto is = importance_probability(ev, scheme, 20000, phi, 100 + k);
    const auto di = direct_probability(ev, t, 20000, phi, 200 + k);
    if (std::abs(is.estimate - di.estimate) > 3.0 * std::hypot(is.stderr_, di.stderr_)) ++failures;
    CHECK(is.ess > 10.0);
  }
  CHECK(failures <= 1);
}

TEST_CASE("importance sampling agrees with direct on a bl ball") {
  const auto phi = ProbabilityLaw::atomic({{0.5, 0.5}, {2.0, 0.5}});
  const auto tilde = ProbabilityLaw::atomic({{0.5, 0.3}, {2.0, 0.7}});
  const auto center = product_target(size_bias_inverse(tilde));
  const double t = 30.0;
  const auto ev = EventSpec::bl_ball(center, 0.012);
  const auto scheme = TiltedScheme::custom(tilde, 40, 0.0, kInf, t);
  const auto is = importance_probability(ev, scheme, 20000, phi, 11);
  const auto di = direct_probability(ev, t, 200000, phi, 12);
  CHECK(di.hits > 50);
  CHECK(is.hits > di.hits / 10);
  CHECK(std::abs(is.estimate - di.estimate) <= 3.0 * std::hypot(is.stderr_, di.stderr_));
}

TEST_CASE("momentum marginal ball ignores positions") {
  const auto a = lambda_component(0.3, 1.0);
  const auto b = lambda_component(0.9, 1.0);
  CHECK(bl_distance(momentum_marginal(a), momentum_marginal(b)) == 0.0);
  CHECK(bl_distance(a, b) > 0.0);
}

TEST_CASE("entropy cost equals the mean of -log LR") {
  const auto phi = ProbabilityLaw::atomic({{0.25, 0.2}, {0.5, 0.3}, {1.0, 0.3}, {2.0, 0.2}});
  const auto tilde = ProbabilityLaw::atomic({{0.5, 0.2}, {1.0, 0.3}, {2.0, 0.5}});
  const double t = matched_time(0.4, 0.5, 0.25);
  const auto scheme = TiltedScheme::ll_plus_slow_reentry(0.4, tilde, 0.5, 0.05, t);
  CHECK(scheme.n_tilted > 0);
  const auto check = entropy_cost_check(scheme, phi, 4000, 13);
  CHECK(check.within_3sigma);
  CHECK(check.mc_stderr > 0.0);
  const double h = relative_entropy(tilde, phi).to_double();
  CHECK(check.closed_form ==
        doctest::Approx(static_cast<double>(scheme.n_tilted) * h - std::log(0.2)).epsilon(1e-12));

  const auto ex = ProbabilityLaw::exp_interarrival(1.0);
  const auto ex_tilde = ProbabilityLaw::exp_interarrival(1.5);
  const auto s2 = TiltedScheme::ll_plus_slow_reentry(0.3, ex_tilde, 0.4, 0.05, 20.0);
  CHECK(s2.mean_speed == doctest::Approx(1.5).epsilon(1e-8));
  const auto c2 = entropy_cost_check(s2, ex, 4000, 14);
  CHECK(c2.within_3sigma);
  // H(Exp(1.5) | Exp(1)) for interarrival times
  const double h2 = std::log(1.5) + 1.0 / 1.5 - 1.0;
  CHECK(relative_entropy(ex_tilde, ex).to_double() == doctest::Approx(h2).epsilon(1e-7));
}

TEST_CASE("slope fit recovers a line") {
  const std::vector<double> t{10, 20, 40, 80};
  std::vector<double> y;
  for (double x : t) y.push_back(-2.0 * x + 0.7);
  const auto s = fit_slope(t, y, {0.1, 0.1, 0.1, 0.1}, "direct");
  CHECK(s.slope == doctest::Approx(-2.0).epsilon(1e-12));
  CHECK(s.intercept == doctest::Approx(0.7).epsilon(1e-10));
  CHECK(s.ci_lo <= -2.0);
  CHECK(s.ci_hi >= -2.0);
  const auto noisy = fit_slope(t, {-19.0, -39.6, -79.1, -159.8}, {0.1, 0.1, 0.1, 0.1}, "direct");
  CHECK(noisy.ci_lo < noisy.slope);
  CHECK(noisy.slope_se > 0.0);
}

TEST_CASE("tightness bound closed form and Monte Carlo") {
  const auto one = ProbabilityLaw::atomic({{1.0, 1.0}});
  CHECK(tightness_bound(2.0, 10.0, one) == doctest::Approx(std::exp(10.0 - 20.0)).epsilon(1e-12));
  CHECK(tightness_bound(50.0, 10.0, one) < 1e-200);
  const auto phi = ProbabilityLaw::atomic({{0.5, 0.5}, {4.0, 0.5}});
  for (double t : {10.0, 20.0}) {
    for (double m : {2.0, 5.0}) {
      const auto pt = tightness_check(m, t, phi, 20000, 15);
      CHECK(pt.ok);
    }
  }
  const auto low = tightness_check(1.0, 10.0, phi, 20000, 16);
  CHECK(low.mc.estimate > 0.0);
  CHECK(low.ok);
}

TEST_CASE("free energy stays below D_f / (1 - C_f)") {
  const auto phi = ProbabilityLaw::dyadic();
  const BoundedFunction half{[](double) { return std::log(0.5); }, std::log(0.5)};
  const auto flat = test_function_fixture(0.0, 0.5, half, 0.5, phi, ExtendedReal(1.0));
  CHECK(flat.c_f == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(flat.free_energy_bound() == doctest::Approx(2.0 * flat.d_f).epsilon(1e-12));
  for (const auto& p : free_energy_check(flat, phi, {10.0, 50.0}, 4000, 17)) CHECK(p.ok);

  const double delta = suitable_delta(0.5, half, phi);
  const auto tilted = test_function_fixture(0.5, delta, half, 0.5, phi, ExtendedReal(1.0));
  for (const auto& p : free_energy_check(tilted, phi, {10.0, 50.0}, 4000, 18)) CHECK(p.ok);
}

TEST_CASE("path integral matches the occupation measure") {
  const auto phi = ProbabilityLaw::atomic({{0.5, 0.5}, {2.0, 0.5}});
  const BoundedFunction g{[](double p) { return -1.0 - 0.1 * std::sin(p); }, -0.9};
  const auto f = test_function_fixture(0.3, 0.75, g, 0.4, phi, ExtendedReal(kInf));
  Rng rng(19);
  for (int k = 0; k < 20; ++k) {
    const double t = 3.0 + 10.0 * rng.uniform();
    const auto path = simulate_undelayed(t, phi, rng);
    const auto mu = empirical_measure(path, t);
    const double via_measure = t * integrate_with_antiderivative(
                                       mu, [&](double q, double p) { return f.antiderivative(q, p); },
                                       [&](double q, double p) { return f(q, p); });
    CHECK(path_integral(f, path, t) == doctest::Approx(via_measure).epsilon(1e-10));
  }
}

TEST_CASE("decomposition bound dominates simulation on atomic laws") {
  const auto phi = ProbabilityLaw::atomic({{0.05, 0.2}, {0.2, 0.2}, {1.0, 0.6}});
  for (double beta : {0.2, 0.5}) {
    for (double h : {0.5, 0.9}) {
      const double t = 12.0;
      const auto mc = decomposition_event_probability(phi, beta, h, t, 20000, 20);
      const double bound = std::exp(log_decomposition_bound(phi, beta, h, t));
      CHECK(mc.estimate <= bound);
    }
  }
  CHECK(std::isinf(log_decomposition_bound(ProbabilityLaw::exp_interarrival(1.0), 0.1, 0.6, 10.0)));
}

TEST_CASE("non-LDP experiment separates the two subsequences on the dyadic law") {
  NonLdpConfig cfg;
  cfg.n_paths = 200;
  const auto r = non_ldp_experiment(cfg, ProbabilityLaw::dyadic(), ExtendedReal(1.0));
  CHECK(r.target_slope == -2.0);
  CHECK(r.matched_slope.slope == doctest::Approx(-2.0).epsilon(0.2));
  for (const auto& est : r.matched) CHECK(est.hits == cfg.n_paths);
  for (const auto& m : r.mismatched) CHECK(m.empty_window);
  CHECK_FALSE(r.mismatched_is_slope.has_value());
  REQUIRE(r.mismatched_bound_slope.has_value());
  CHECK(r.mismatched_bound_slope->slope <= r.matched_slope.slope - 0.5);
}

TEST_CASE("non-LDP control on exponential interarrivals") {
  NonLdpConfig cfg;
  cfg.n_paths = 200;
  const auto r = non_ldp_experiment(cfg, ProbabilityLaw::exp_interarrival(1.0), ExtendedReal(1.0));
  REQUIRE(r.mismatched_is_slope.has_value());
  const auto& a = r.matched_slope;
  const auto& b = *r.mismatched_is_slope;
  CHECK(a.ci_lo <= b.ci_hi);
  CHECK(b.ci_lo <= a.ci_hi);
  CHECK(a.slope == doctest::Approx(-2.0).epsilon(0.1));
}
