#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "hotwall/errors.hpp"
#include "hotwall/numeric.hpp"
#include "hotwall/process.hpp"

using namespace hotwall;

namespace {

Trajectory fixed_cycles(double q0, double p0, const std::vector<double>& taus) {
  Trajectory tr(q0, p0);
  for (double t : taus) tr.append({t, 1.0 / t});
  return tr;
}

Trajectory fixed_undelayed(const std::vector<double>& taus) {
  Trajectory tr = Trajectory::undelayed();
  for (double t : taus) tr.append({t, 1.0 / t});
  return tr;
}

const double kTwoPi = 2.0 * std::numbers::pi;

}  // namespace

TEST_CASE("evaluate: hand-computed states") {
  const auto free = fixed_cycles(0.0, 1.0, {});
  const auto s = evaluate(free, 0.5);
  CHECK(s.q == 0.5);
  CHECK(s.p == 1.0);
  CHECK(s.n_collisions == 0);
  CHECK_THROWS_AS(evaluate(free, 1.0), HorizonExceeded);

  const auto tr = fixed_cycles(0.5, 2.0, {1.0, 3.0});
  CHECK(tr.t0() == 0.25);
  const auto a = evaluate(tr, 0.75);
  CHECK(a.q == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(a.p == 1.0);
  CHECK(a.n_collisions == 1);

  // Right-continuity at renewal instants.
  const auto b = evaluate(tr, tr.epoch(1));
  CHECK(b.q == 0.0);
  CHECK(b.p == doctest::Approx(1.0 / 3.0));
  CHECK(b.n_collisions == 2);
}

TEST_CASE("deterministic renewals") {
  const auto law = ProbabilityLaw::atomic({{1.0, 1.0}});
  Rng rng(1);
  const auto tr = simulate(0.3, 1.0, 50.0, law, rng);
  for (double t : {0.7, 1.0, 3.2, 10.69, 49.9}) {
    const std::size_t expected = static_cast<std::size_t>(std::floor(t - tr.t0())) + 1;
    CHECK(evaluate(tr, t).n_collisions == expected);
  }
  for (const auto& c : tr.cycles()) CHECK(c.tau == 1.0);
}

TEST_CASE("dyadic cycle lengths match the interarrival mean") {
  const auto law = ProbabilityLaw::dyadic();
  double z = 0.0;
  double m = 0.0;
  for (int j = 0; j <= 10; ++j) {
    z += std::exp(-std::ldexp(1.0, j));
    m += std::ldexp(1.0, j) * std::exp(-std::ldexp(1.0, j));
  }
  m /= z;
  Rng rng(5);
  Trajectory tr = Trajectory::undelayed();
  while (tr.cycles().size() < 100000) tr.append({sample_pair(law, rng).tau, 0.5});
  RunningStats st;
  for (const auto& c : tr.cycles()) {
    CHECK(std::exp2(std::round(std::log2(c.tau))) == c.tau);
    st.add(c.tau);
  }
  CHECK(std::abs(st.mean() - m) < 3.0 * st.standard_error());
}

TEST_CASE("simulation is deterministic given the seed") {
  const auto law = ProbabilityLaw::atomic({{0.5, 0.5}, {2.0, 0.5}});
  Rng r1(42), r2(42);
  const auto a = simulate(0.1, 1.5, 100.0, law, r1);
  const auto b = simulate(0.1, 1.5, 100.0, law, r2);
  REQUIRE(a.cycles().size() == b.cycles().size());
  for (std::size_t i = 0; i < a.cycles().size(); ++i) {
    CHECK(a.cycles()[i].tau == b.cycles()[i].tau);
    CHECK(a.epoch(i + 1) == b.epoch(i + 1));
  }
}

TEST_CASE("renewal counts") {
  const auto tr = fixed_undelayed({1, 1, 1, 1, 1});
  const auto [s, n] = renewal_counts(tr, 3.5);
  CHECK(s == 3.0);
  CHECK(n == 3);
  const auto tr2 = fixed_undelayed({2.0, 1.0});
  CHECK(renewal_counts(tr2, 1.5) == std::pair<double, std::size_t>{0.0, 0});
  CHECK_THROWS_AS(renewal_counts(fixed_cycles(0.2, 1.0, {1.0}), 0.5), std::invalid_argument);

  // Linear scan against the bisection.
  const auto law = ProbabilityLaw::atomic({{0.3, 0.2}, {1.0, 0.5}, {7.0, 0.3}});
  Rng rng(9);
  const auto path = simulate_undelayed(500.0, law, rng);
  Rng pick(10);
  for (int k = 0; k < 500; ++k) {
    const double t = 499.0 * pick.uniform();
    std::size_t count = 0;
    double sum = 0.0;
    double last = 0.0;
    for (const auto& c : path.cycles()) {
      sum += c.tau;
      if (sum <= t) {
        ++count;
        last = sum;
      } else {
        break;
      }
    }
    const auto [sn, nt] = renewal_counts(path, t);
    CHECK(nt == count);
    CHECK(sn == doctest::Approx(last).epsilon(1e-13));
  }
}

TEST_CASE("recurrence times") {
  const auto one = fixed_undelayed({2.0, 5.0});
  const auto r = recurrence(one, 0.5);
  CHECK(r.age() == 0.5);
  CHECK(r.residual() == 1.5);
  const auto st = evaluate(one, 0.5);
  CHECK(st.q == doctest::Approx(r.B / (r.A + r.B)).epsilon(1e-15));
  CHECK(st.q == 0.25);

  const auto at = recurrence(one, 2.0);
  CHECK(at.A + at.B == 5.0);

  CHECK_THROWS_AS(recurrence(fixed_cycles(0.0, 0.5, {1.0}), 1.0), BeforeFirstRenewal);

  const auto law = ProbabilityLaw::atomic({{0.25, 0.3}, {1.0, 0.4}, {3.0, 0.3}});
  Rng rng(77);
  double worst = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const auto path = simulate_undelayed(50.0, law, rng);
    const double t = 50.0 * rng.uniform();
    const auto rp = recurrence(path, t);
    const auto s = evaluate(path, t);
    worst = std::max(worst, std::abs(s.q - rp.B / (rp.A + rp.B)));
    worst = std::max(worst, std::abs(s.p - 1.0 / (rp.A + rp.B)));
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("path invariants") {
  const auto law = ProbabilityLaw::exp_interarrival(1.0);
  Rng rng(8);
  const auto path = simulate(0.9, 0.3, 200.0, law, rng);
  for (std::size_t i = 0; i < path.cycles().size(); ++i) {
    CHECK(path.epoch(i + 1) > path.epoch(i));
    CHECK(path.epoch(i + 1) - path.epoch(i) == doctest::Approx(path.cycles()[i].tau).epsilon(1e-9));
  }
  for (int k = 0; k < 2000; ++k) {
    const double t = 199.0 * rng.uniform();
    const auto s = evaluate(path, t);
    CHECK(s.q >= 0.0);
    CHECK(s.q < 1.0);
    CHECK(s.p > 0.0);
    // Slope p inside the current cycle.
    const double h = 1e-7;
    const auto s2 = evaluate(path, t + h);
    if (s2.n_collisions == s.n_collisions) {
      CHECK((s2.q - s.q) / h == doctest::Approx(s.p).epsilon(1e-5));
    }
  }
}

TEST_CASE("renewal rate N_t/t") {
  const auto law = ProbabilityLaw::atomic({{0.5, 0.5}, {2.0, 0.5}});
  const double mean_tau = 0.5 * 2.0 + 0.5 * 0.5;
  Rng rng(31);
  RunningStats st;
  const double t = 1000.0;
  for (int k = 0; k < 200; ++k) {
    const auto path = simulate_undelayed(t, law, rng);
    st.add(static_cast<double>(renewal_counts(path, t).second) / t);
  }
  CHECK(std::abs(st.mean() - 1.0 / mean_tau) < 3.0 * st.standard_error() + 1.0 / t);
}

TEST_CASE("trajectory csv round trip") {
  const auto law = ProbabilityLaw::atomic({{0.5, 0.5}, {3.0, 0.5}});
  Rng rng(2);
  const auto path = simulate(0.25, 0.75, 30.0, law, rng);
  std::stringstream ss;
  path.write_csv(ss);
  const auto back = Trajectory::read_csv(ss);
  CHECK(back.t0() == path.t0());
  REQUIRE(back.cycles().size() == path.cycles().size());
  for (std::size_t i = 0; i < path.cycles().size(); ++i) {
    CHECK(back.cycles()[i].tau == path.cycles()[i].tau);
    CHECK(back.epoch(i + 1) == path.epoch(i + 1));
  }
}

TEST_CASE("semigroup residual") {
  const TestFunction fq{"q", [](double q, double) { return q; }, [](double, double) { return 1.0; }};
  const auto det = ProbabilityLaw::atomic({{1.0, 1.0}});
  const auto r0 = semigroup_residual(fq, 1.3, 0.7, 100, det, 1);
  CHECK(r0.residual < 1e-12);

  const auto two = ProbabilityLaw::atomic({{0.5, 0.5}, {2.0, 0.5}});
  const auto r1 = semigroup_residual(fq, 1.0, 1.0, 100000, two, 2);
  CHECK(r1.residual < 5.0 * r1.stderr_);

  const auto r2 = semigroup_residual(fq, 1.0, 0.0, 1000, two, 3);
  CHECK(r2.residual == 0.0);
}

TEST_CASE("generator residual") {
  const TestFunction constant{"1", [](double, double) { return 1.0; },
                              [](double, double) { return 0.0; }};
  const auto det = ProbabilityLaw::atomic({{1.0, 1.0}});
  CHECK(generator_residual(constant, 2.0, 100, det, 1).residual == 0.0);

  const TestFunction sine{"sin", [](double q, double) { return std::sin(kTwoPi * q); },
                          [](double q, double) { return kTwoPi * std::cos(kTwoPi * q); }};
  const auto r = generator_residual(sine, 2.5, 1000, det, 2);
  CHECK(r.residual < 5.0 * r.stderr_ + 1e-9);

  const auto two = ProbabilityLaw::atomic({{0.5, 0.5}, {2.0, 0.5}});
  const auto r2 = generator_residual(sine, 2.5, 20000, two, 3, 0.2, 0.7);
  CHECK(r2.residual < 5.0 * r2.stderr_ + 1e-9);

  const TestFunction bad{"q", [](double q, double) { return q; }, [](double, double) { return 1.0; }};
  CHECK_THROWS_AS(generator_residual(bad, 1.0, 10, det, 4), BoundaryConditionViolated);
}
