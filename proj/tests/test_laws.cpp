#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>

#include "hotwall/errors.hpp"
#include "hotwall/laws.hpp"
#include "hotwall/numeric.hpp"

using namespace hotwall;

namespace {

// Independent normalizer of the dyadic law; terms beyond j = 10 are below 1e-400.
double dyadic_log_z() {
  double z = 0.0;
  for (int j = 0; j <= 10; ++j) z += std::exp(-std::ldexp(1.0, j));
  return std::log(z);
}

}  // namespace

TEST_CASE("single atom always returns its location") {
  const auto law = ProbabilityLaw::atomic({{1.0, 1.0}});
  Rng rng(7);
  for (int i = 0; i < 100; ++i) CHECK(sample(law, rng) == 1.0);
}

TEST_CASE("atomic weights must sum to one") {
  CHECK_THROWS_AS(ProbabilityLaw::atomic({{1.0, 0.5}, {2.0, 0.4}}), std::invalid_argument);
  CHECK_THROWS_AS(ProbabilityLaw::atomic({{-1.0, 1.0}}), std::invalid_argument);
}

TEST_CASE("dyadic sampling frequencies pass a chi-square test") {
  const auto law = ProbabilityLaw::dyadic();
  const double lz = dyadic_log_z();
  std::vector<double> expected(5, 0.0);
  for (int j = 0; j < 4; ++j) expected[j] = std::exp(-std::ldexp(1.0, j) - lz);
  expected[4] = 1.0 - expected[0] - expected[1] - expected[2] - expected[3];

  const int n = 1000000;
  std::vector<double> counts(5, 0.0);
  Rng rng(20240101);
  for (int i = 0; i < n; ++i) {
    const double v = sample(law, rng);
    const int j = static_cast<int>(std::lround(-std::log2(v)));
    counts[std::min(j, 4)] += 1.0;
  }
  // Pool the last two cells: the j >= 4 cell has expectation ~ 0.6.
  expected[3] += expected[4];
  counts[3] += counts[4];
  double chi2 = 0.0;
  for (int k = 0; k < 4; ++k) {
    const double e = expected[k] * n;
    chi2 += (counts[k] - e) * (counts[k] - e) / e;
  }
  const double p = boost::math::cdf(boost::math::complement(boost::math::chi_squared(3.0), chi2));
  CHECK(p > 0.01);
}

TEST_CASE("exp-interarrival cycle durations have mean 1/xi0") {
  const auto law = ProbabilityLaw::exp_interarrival(1.0);
  Rng rng(99);
  RunningStats s;
  for (int i = 0; i < 100000; ++i) s.add(sample_pair(law, rng).tau);
  CHECK(std::abs(s.mean() - 1.0) < 3.0 * s.standard_error());
}

TEST_CASE("speed and interarrival laws are reciprocal") {
  const auto two = ProbabilityLaw::atomic({{2.0, 1.0}});
  const auto psi = speed_to_interarrival(two);
  REQUIRE(psi.is_atomic());
  CHECK(psi.atomic_part().atoms.size() == 1);
  CHECK(psi.atomic_part().atoms[0].location == 0.5);
  CHECK(psi.role() == LawRole::interarrival);

  const auto dy = ProbabilityLaw::dyadic(20);
  const auto dpsi = speed_to_interarrival(dy);
  const auto& a = dy.atomic_part().atoms;
  const auto& b = dpsi.atomic_part().atoms;
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto& mirror = b[b.size() - 1 - i];
    CHECK(mirror.location == a[i].reciprocal);
    CHECK(mirror.log_weight == a[i].log_weight);
  }
  CHECK(dpsi.atomic_part().tail == TailDirection::toward_infinity);

  const auto back = interarrival_to_speed(dpsi);
  const auto& c = back.atomic_part().atoms;
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(c[i].location == a[i].location);
    CHECK(c[i].log_weight == a[i].log_weight);
  }

  // Density: psi must be Exp(xi0).
  const auto ex = ProbabilityLaw::exp_interarrival(2.0);
  const auto epsi = speed_to_interarrival(ex);
  const auto& dens = std::get<DensityLaw>(epsi.data().repr);
  for (double tau : {0.1, 0.5, 1.0, 3.0}) {
    CHECK(dens.log_pdf(tau) == doctest::Approx(std::log(2.0) - 2.0 * tau).epsilon(1e-12));
  }
  CHECK(std::exp(log_mass(epsi, 0.0, 1.0)) == doctest::Approx(1.0 - std::exp(-2.0)).epsilon(1e-12));
  CHECK_THROWS_AS(speed_to_interarrival(epsi), std::invalid_argument);
}

TEST_CASE("dyadic tail series: finite below c = 1, divergent above") {
  const auto law = ProbabilityLaw::dyadic();
  const double lz = dyadic_log_z();
  double oracle = 0.0;
  for (int j = 0; j <= 20; ++j) oracle += std::exp(-0.05 * std::ldexp(1.0, j));
  oracle /= std::exp(lz);

  // e^{c/p} overflows a double on the small atoms; the series is summed from log g.
  const double le = log_expectation(law, [](double p) { return 0.95 / p; });
  REQUIRE(std::isfinite(le));
  CHECK(std::exp(le) == doctest::Approx(oracle).epsilon(1e-12));
  CHECK(log_expectation(law, [](double p) { return 1.05 / p; }) == kInf);
  CHECK(log_expectation(law, [](double p) { return 1.0 / p; }) == kInf);
}

TEST_CASE("expectation of 1 is 1 and expectation is linear on atoms") {
  for (const auto& law : {ProbabilityLaw::dyadic(), ProbabilityLaw::exp_interarrival(1.5),
                          ProbabilityLaw::polynomial(3.0),
                          ProbabilityLaw::atomic({{1.0, 0.4}, {3.0, 0.6}})}) {
    CHECK(expectation(law, [](double) { return 1.0; }).value() == doctest::Approx(1.0).epsilon(1e-10));
  }
  const auto law = ProbabilityLaw::atomic({{1.0, 0.25}, {2.0, 0.5}, {4.0, 0.25}});
  auto f = [](double x) { return x * x; };
  auto g = [](double x) { return 1.0 / x; };
  const double lhs = mean_of(law, [&](double x) { return 2.0 * f(x) - 3.0 * g(x); });
  CHECK(lhs == doctest::Approx(2.0 * mean_of(law, f) - 3.0 * mean_of(law, g)).epsilon(1e-15));
  CHECK(mean_of(law, f) == doctest::Approx(0.25 + 2.0 + 4.0));
}

TEST_CASE("compute_xi on the catalog") {
  CHECK(compute_xi(ProbabilityLaw::dyadic()).value() == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(std::abs(compute_xi(ProbabilityLaw::exp_interarrival(2.0)).value() - 2.0) < 1e-3);
  CHECK(compute_xi(ProbabilityLaw::polynomial(3.0)).value() == 0.0);
  // A law bounded away from zero has every exponential moment of 1/p.
  CHECK(compute_xi(ProbabilityLaw::atomic({{1.0, 0.5}, {2.0, 0.5}})).is_infinite());
}

TEST_CASE("quadrature oracle agrees with closed-form exponential moments") {
  // phi(e^{c/p}) = xi0 / (xi0 - c) for the exp-interarrival law.
  const auto law = ProbabilityLaw::exp_interarrival(2.0);
  for (double c : {0.0, 0.5, 1.0, 1.5, 1.9}) {
    const double le = log_expectation(law, [c](double p) { return c / p; });
    CHECK(std::exp(le) == doctest::Approx(2.0 / (2.0 - c)).epsilon(1e-8));
  }
  CHECK(log_expectation(law, [](double p) { return 2.0 / p; }) == kInf);
  CHECK(log_expectation(law, [](double p) { return 2.001 / p; }) == kInf);
}

TEST_CASE("window probability on the dyadic law") {
  const auto law = ProbabilityLaw::dyadic();
  const double lz = dyadic_log_z();
  const double eps = std::ldexp(1.0, -8);
  CHECK(log_window_probability(law, eps, 0.4) == doctest::Approx(-256.0 - lz).epsilon(1e-15));
  // For delta < 1/3 the window around 3 * 2^-j misses every atom.
  for (int j = 3; j <= 12; ++j) {
    CHECK(window_probability(law, 3.0 * std::ldexp(1.0, -j), 0.3) == 0.0);
  }
  // At delta = 0.4 the window [1.8, 4.2) * 2^-j holds the atoms 2^(1-j) and 2^(2-j).
  const double expect = log_add_exp(-128.0, -64.0) - lz;
  CHECK(log_window_probability(law, 3.0 * eps, 0.4) == doctest::Approx(expect).epsilon(1e-15));
  CHECK(window_probability(law, 1.0, 0.99999) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("window probability is monotone in delta") {
  for (const auto& law : {ProbabilityLaw::dyadic(), ProbabilityLaw::exp_interarrival(1.0),
                          ProbabilityLaw::polynomial(2.0)}) {
    for (double eps : {0.3, 0.05, 0.003}) {
      double prev = -1.0;
      for (double d : {0.01, 0.05, 0.1, 0.2, 0.4, 0.8}) {
        const double w = window_probability(law, eps, d);
        CHECK(w >= prev);
        prev = w;
      }
    }
  }
}

TEST_CASE("xi_bar brackets") {
  const auto dy = estimate_xi_bar(ProbabilityLaw::dyadic());
  CHECK(dy.xi_bar_infinite);
  CHECK(dy.xi_bar_upper.is_infinite());

  const auto ex = estimate_xi_bar(ProbabilityLaw::exp_interarrival(1.0));
  CHECK_FALSE(ex.xi_bar_infinite);
  CHECK(ex.xi_bar_lower.value() >= 0.9);
  CHECK(ex.xi_bar_upper.value() <= 1.1);
  CHECK(ex.xi_bar_lower <= ex.xi_bar_upper);

  const auto po = estimate_xi_bar(ProbabilityLaw::polynomial(3.0));
  CHECK(po.xi_bar_upper.value() <= 0.05);
  CHECK(po.xi <= po.xi_bar_upper);

  // Closed-form window for the exp law: -eps log(e^{-1/(eps(1+d))} - e^{-1/(eps(1-d))}).
  const double eps = ex.epsilon_grid.back();
  const double d = 0.02;
  const double a = -1.0 / (eps * (1.0 + d));
  const double b = -1.0 / (eps * (1.0 - d));
  CHECK(log_window_probability(ProbabilityLaw::exp_interarrival(1.0), eps, d) ==
        doctest::Approx(a + std::log1p(-std::exp(b - a))).epsilon(1e-12));
}

TEST_CASE("xi never exceeds the xi_bar upper bracket") {
  for (const auto& law : {ProbabilityLaw::dyadic(), ProbabilityLaw::exp_interarrival(0.5),
                          ProbabilityLaw::exp_interarrival(2.0), ProbabilityLaw::polynomial(1.0),
                          ProbabilityLaw::polynomial(3.0)}) {
    const auto rep = estimate_xi_bar(law);
    CHECK(rep.xi <= rep.xi_bar_upper);
  }
}

TEST_CASE("size bias") {
  const auto pi = ProbabilityLaw::atomic({{1.0, 0.5}, {3.0, 0.5}});
  const auto pt = size_bias(pi);
  const auto& a = pt.atomic_part().atoms;
  REQUIRE(a.size() == 2);
  CHECK(std::exp(a[0].log_weight) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(std::exp(a[1].log_weight) == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(mean_reciprocal(pt).value() == doctest::Approx(1.0 / mean(pi).value()).epsilon(1e-9));
  CHECK(mean(pt) > mean(pi));

  const auto single = size_bias(ProbabilityLaw::atomic({{2.5, 1.0}}));
  CHECK(single.atomic_part().atoms[0].location == 2.5);
  CHECK(single.atomic_part().atoms[0].log_weight == 0.0);

  const auto back = size_bias_inverse(pt);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(std::exp(back.atomic_part().atoms[i].log_weight) == doctest::Approx(0.5).epsilon(1e-15));
  }

  // Density: size-biasing Exp-interarrival(1) gives density e^{-1/p}/p on (0, inf), which
  // has infinite mean, while the law itself has infinite mean too.
  CHECK_THROWS_AS(size_bias(ProbabilityLaw::exp_interarrival(1.0)), InfiniteMean);
  const auto poly = size_bias(ProbabilityLaw::polynomial(2.0));
  // 2p^2 / (2/3) = 3p^2, i.e. polynomial(3).
  CHECK(mass(poly, 0.0, 0.5) == doctest::Approx(0.125).epsilon(1e-9));
}

TEST_CASE("tilting by a boundary function") {
  const auto phi = ProbabilityLaw::atomic({{1.0, 0.3}, {2.0, 0.7}});
  const auto none = tilt_by_boundary_function(phi, [](double) { return 0.0; });
  CHECK(none.c_f == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(std::exp(none.law.atomic_part().atoms[0].log_weight) == doctest::Approx(0.3).epsilon(1e-15));

  const auto one = ProbabilityLaw::atomic({{1.0, 1.0}});
  const auto t = tilt_by_boundary_function(one, [](double v) { return -v; });
  CHECK(t.c_f == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
  CHECK(t.law.atomic_part().atoms[0].log_weight == doctest::Approx(0.0));

  CHECK_THROWS_AS(tilt_by_boundary_function(ProbabilityLaw::dyadic(), [](double) { return 1.5; }),
                  DivergentNormalizer);
}

TEST_CASE("conditional sampling stays in the window") {
  Rng rng(3);
  const auto ex = ProbabilityLaw::exp_interarrival(1.0);
  for (int i = 0; i < 1000; ++i) {
    const auto d = sample_conditional(ex, 0.01, 0.0102, rng);
    CHECK(d.speed >= 0.01);
    CHECK(d.speed < 0.0102);
  }
  const auto dy = ProbabilityLaw::dyadic();
  const auto d = sample_conditional(dy, 0.9 * std::ldexp(1.0, -9), 1.1 * std::ldexp(1.0, -9), rng);
  CHECK(d.speed == std::ldexp(1.0, -9));
  CHECK(d.tau == 512.0);
  CHECK_THROWS_AS(sample_conditional(dy, 0.6, 0.9, rng), std::domain_error);
}

TEST_CASE("mixtures") {
  const auto m = ProbabilityLaw::mixture(
      {{0.5, ProbabilityLaw::atomic({{1.0, 1.0}})}, {0.5, ProbabilityLaw::polynomial(1.0)}});
  CHECK(mass(m, 0.0, 0.5) == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(mass(m, 1.0, 2.0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(mean(m).value() == doctest::Approx(0.75).epsilon(1e-10));
  CHECK_THROWS_AS(ProbabilityLaw::mixture({{0.5, m}}), std::invalid_argument);
}
