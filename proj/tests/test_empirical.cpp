#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>
#include <string>

#include "hotwall/empirical.hpp"
#include "hotwall/errors.hpp"
#include "hotwall/numeric.hpp"
#include "hotwall/quadrature.hpp"

using namespace hotwall;

namespace {

Trajectory fixed_undelayed(const std::vector<double>& taus) {
  Trajectory tr = Trajectory::undelayed();
  for (double t : taus) tr.append({t, 1.0 / t});
  return tr;
}

// Random configuration for the delayed/undelayed comparison.
struct Config {
  Trajectory path;
  Rational t;
};

Config random_config(Rng& rng) {
  const double q0 = rng.uniform() * 0.999;
  const double p0 = 0.2 + 4.8 * rng.uniform();
  ProbabilityLaw phi;
  switch (static_cast<int>(rng.uniform() * 3.0)) {
    case 0: phi = ProbabilityLaw::atomic({{0.5, 0.5}, {2.0, 0.5}}); break;
    case 1: phi = ProbabilityLaw::exp_interarrival(1.0); break;
    default: phi = ProbabilityLaw::atomic({{0.25, 0.2}, {1.0, 0.3}, {3.0, 0.5}}); break;
  }
  const double t0 = (1.0 - q0) / p0;
  const double t = t0 + 0.01 + 30.0 * rng.uniform();
  Trajectory path = simulate(q0, p0, t + 1.0, phi, rng);
  return {std::move(path), Rational(t)};
}

}  // namespace

TEST_CASE("constant speed gives a single uniform component") {
  const auto law = ProbabilityLaw::atomic({{1.0, 1.0}});
  Rng rng(1);
  const auto path = simulate(0.0, 1.0, 3.0, law, rng);
  const auto mu = exact_empirical_measure(path, Rational(3)).compact();
  REQUIRE(mu.components().size() == 1);
  const auto& c = mu.components()[0];
  CHECK(c.momentum == 1);
  CHECK(c.a == 0);
  CHECK(c.b == 1);
  CHECK(c.weight == 1);
}

TEST_CASE("one and a half cycles match the time integration") {
  const auto path = fixed_undelayed({2.0, 2.0});
  const auto mu = exact_empirical_measure(path, Rational(3));
  REQUIRE(mu.components().size() == 2);
  const Rational half(1, 2);
  CHECK(mu.components()[0].momentum == half);
  CHECK(mu.components()[0].a == 0);
  CHECK(mu.components()[0].b == 1);
  CHECK(mu.components()[0].weight == Rational(2, 3));
  CHECK(mu.components()[1].momentum == half);
  CHECK(mu.components()[1].b == half);
  CHECK(mu.components()[1].weight == Rational(1, 3));
  CHECK(mu.total_weight() == 1);

  const auto md = to_double(mu);
  CHECK(integrate(md, [](double, double) { return 1.0; }) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(integrate(md, [](double, double p) { return p; }) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK_THROWS_AS(empirical_measure(path, 4.5), HorizonExceeded);
}

TEST_CASE("integrate agrees with direct time integration") {
  const auto single = lambda_component(1.0, 2.0);
  CHECK(integrate(single, [](double q, double) { return q; }) == doctest::Approx(0.5).epsilon(1e-15));

  const auto law = ProbabilityLaw::atomic({{0.3, 0.5}, {1.7, 0.5}});
  Rng rng(3);
  const double t = 40.0;
  const auto path = simulate(0.4, 0.9, t, law, rng);
  const auto f = [](double q, double p) { return std::sin(2.0 * std::numbers::pi * q) * p + q * q; };
  // Per-segment time integral of f(q_s, p_s).
  KahanSum direct;
  double a = 0.0;
  auto seg = [&](double s0, double s1, double q0, double p) {
    const double hi = std::min(s1, t);
    if (!(hi > s0)) return;
    direct.add(quad::gauss_legendre([&](double s) { return f(q0 + p * (s - s0), p); }, s0, hi));
  };
  seg(0.0, path.t0(), path.q0(), path.p0());
  a = path.t0();
  for (std::size_t i = 0; i < path.cycles().size() && a < t; ++i) {
    seg(a, path.epoch(i + 1), 0.0, path.cycles()[i].speed);
    a = path.epoch(i + 1);
  }
  const auto mu = empirical_measure(path, t);
  CHECK(integrate(mu, f) == doctest::Approx(direct.value() / t).epsilon(1e-12));
  const auto anti = [](double q, double p) {
    return -std::cos(2.0 * std::numbers::pi * q) * p / (2.0 * std::numbers::pi) + q * q * q / 3.0;
  };
  CHECK(integrate_with_antiderivative(mu, anti, f) == doctest::Approx(direct.value() / t).epsilon(1e-10));
}

TEST_CASE("mean momentum renewal identity is exact") {
  const auto law = ProbabilityLaw::atomic({{0.5, 0.3}, {1.25, 0.4}, {3.0, 0.3}});
  Rng rng(4);
  for (int k = 0; k < 20; ++k) {
    const double t = 5.0 + 50.0 * rng.uniform();
    const auto path = simulate_undelayed(t, law, rng);
    const auto [s, n] = renewal_counts(path, t);
    const Rational rt(t);
    // Exact S_{N_t} and the open cycle.
    Rational sn(0);
    for (std::size_t i = 0; i < n; ++i) sn += Rational(path.cycles()[i].tau);
    const Rational expected = Rational(n) / rt + (rt - sn) / (rt * Rational(path.cycles()[n].tau));
    CHECK(exact_empirical_measure(path, rt, false).mean_momentum() == expected);
    CHECK(s == doctest::Approx(static_cast<double>(sn)));
  }
}

TEST_CASE("merging adjacent windows reproduces the concatenated window") {
  const auto law = ProbabilityLaw::exp_interarrival(0.7);
  Rng rng(5);
  const auto path = simulate(0.2, 1.1, 30.0, law, rng);
  const Rational s(7.3);
  const Rational t(25.6);
  const auto left = occupation_measure(path, Rational(0), s);
  const auto right = occupation_measure(path, s, t);
  const auto whole = occupation_measure(path, Rational(0), t);
  CHECK(tv_distance(merge(left, right), whole) == 0);
  CHECK(merge(left, right).total_weight() == 1);
  CHECK(tv_distance(merge(to_double(left), to_double(right)), to_double(whole)) < 1e-14);
}

TEST_CASE("distances on simple measures") {
  const auto mu = product_target(ProbabilityLaw::atomic({{1.0, 0.3}, {2.0, 0.7}}));
  CHECK(mu.components().size() == 2);
  CHECK(product_target(ProbabilityLaw::atomic({{1.0, 1.0}})).components().size() == 1);
  CHECK(tv_distance(mu, mu) == 0.0);
  CHECK(bl_distance(mu, mu) == 0.0);
  const auto nu = product_target(ProbabilityLaw::atomic({{5.0, 1.0}}));
  CHECK(tv_distance(mu, nu) == doctest::Approx(1.0));
  CHECK(bl_distance(mu, nu) > 0.0);
  CHECK(bl_distance(mu, nu) <= tv_distance(mu, nu));
  CHECK_THROWS_AS(product_target(ProbabilityLaw::exp_interarrival(1.0)), NonAtomicTarget);

  // Same momentum, overlapping q-intervals.
  const auto a = lambda_component(1.0, 1.0);
  const auto b = lambda_component(0.5, 1.0);
  CHECK(tv_distance(a, b) == doctest::Approx(0.5));
  // Point mass at q = 0 against the uniform law.
  CHECK(tv_distance(lambda_component(0.0, 1.0), a) == doctest::Approx(1.0));
}

TEST_CASE("tv and bl are metrics on random triples") {
  Rng rng(6);
  const auto law = ProbabilityLaw::atomic({{0.5, 0.5}, {2.0, 0.5}});
  for (int k = 0; k < 30; ++k) {
    std::vector<EmpiricalMeasure> m;
    for (int r = 0; r < 3; ++r) {
      const double t = 1.0 + 10.0 * rng.uniform();
      m.push_back(empirical_measure(simulate(rng.uniform() * 0.9, 1.0, t, law, rng), t));
    }
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        CHECK(tv_distance(m[i], m[j]) == doctest::Approx(tv_distance(m[j], m[i])).epsilon(1e-12));
        CHECK(bl_distance(m[i], m[j]) == doctest::Approx(bl_distance(m[j], m[i])).epsilon(1e-12));
        CHECK(bl_distance(m[i], m[j]) <= tv_distance(m[i], m[j]) + 1e-15);
      }
    }
    CHECK(tv_distance(m[0], m[2]) <= tv_distance(m[0], m[1]) + tv_distance(m[1], m[2]) + 1e-12);
    CHECK(bl_distance(m[0], m[2]) <= bl_distance(m[0], m[1]) + bl_distance(m[1], m[2]) + 1e-12);
  }
}

TEST_CASE("delayed and undelayed measures differ by at most 2 T0 / t") {
  Rng rng(7);
  Rational worst_slack(1);
  for (int k = 0; k < 100; ++k) {
    const Config c = random_config(rng);
    const Rational t0 = exact_t0(c.path);
    const auto mu = exact_empirical_measure(c.path, c.t, true);
    const auto bar = exact_empirical_measure(c.path, c.t - t0, false);
    const Rational norm = 2 * tv_distance(mu, bar);
    const Rational bound = 2 * t0 / c.t;
    CHECK(norm <= bound);
    if (bound - norm < worst_slack) worst_slack = bound - norm;
  }
  CHECK(worst_slack >= 0);
}

TEST_CASE("bl distance to dq x pi shrinks along a path") {
  const auto pi = ProbabilityLaw::atomic({{1.0, 0.4}, {3.0, 0.6}});
  const auto target = product_target(pi);
  const auto tilde = size_bias(pi);
  double previous = kInf;
  for (double t : {1e2, 1e3, 1e4}) {
    RunningStats st;
    for (int r = 0; r < 10; ++r) {
      Rng rng(8, static_cast<std::uint64_t>(r));
      const auto path = simulate_undelayed(t, tilde, rng);
      st.add(bl_distance(empirical_measure(path, t), target));
    }
    CHECK(st.mean() < previous);
    previous = st.mean();
  }
  CHECK(previous <= 0.02);
}

TEST_CASE("histogram export conserves mass") {
  const auto path = fixed_undelayed({2.0, 0.5, 1.0});
  const auto mu = empirical_measure(path, 3.2);
  std::stringstream ss;
  write_histogram(ss, mu, 4, {0.0, 0.75, 10.0});
  std::string line;
  std::getline(ss, line);
  CHECK(line == "q_bin,p_bin,mass");
  double total = 0.0;
  int rows = 0;
  while (std::getline(ss, line)) {
    total += std::stod(line.substr(line.rfind(',') + 1));
    ++rows;
  }
  CHECK(rows == 8);
  CHECK(total == doctest::Approx(1.0).epsilon(1e-14));
}
