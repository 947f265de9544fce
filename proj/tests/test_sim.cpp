#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "coop2/models.hpp"
#include "coop2/sim.hpp"
#include "coop2/signvar.hpp"

using namespace coop2;

namespace {

SystemModel linear_decay() {
  SystemModel m;
  m.name = "linear";
  m.f = [](const Vec3& x) { return Vec3{-x[0], -2 * x[1], -3 * x[2]}; };
  m.jac = [](const Vec3&) { return Mat3{{{-1, 0, 0}, {0, -2, 0}, {0, 0, -3}}}; };
  m.box = {{-2, -2, -2}, {2, 2, 2}};
  return m;
}

SystemModel harmonic() {
  SystemModel m;
  m.name = "harmonic";
  m.f = [](const Vec3& x) { return Vec3{x[1], -x[0], -x[2]}; };
  m.jac = [](const Vec3&) { return Mat3{{{0, 1, 0}, {-1, 0, 0}, {0, 0, -1}}}; };
  m.box = {{-5, -5, -5}, {5, 5, 5}};
  m.equilibrium = [] { return Vec3{0, 0, 0}; };
  return m;
}

double linear_error(double rtol) {
  IntegrateOptions o;
  o.rtol = rtol;
  o.atol = rtol * 1e-3;
  const Trajectory t = integrate(linear_decay(), {1, 1, 1}, 1.0, o);
  const Vec3 x = t.states.back();
  return norm_inf(x - Vec3{std::exp(-1.0), std::exp(-2.0), std::exp(-3.0)});
}

}  // namespace

TEST_CASE("linear test problem") {
  IntegrateOptions o;
  o.rtol = 1e-8;
  o.atol = 1e-12;
  const Trajectory t = integrate(linear_decay(), {1, 1, 1}, 1.0, o);
  REQUIRE_FALSE(t.times.empty());
  CHECK(t.times.front() == 0.0);
  CHECK(t.times.back() == 1.0);
  for (std::size_t i = 1; i < t.times.size(); ++i) CHECK(t.times[i] > t.times[i - 1]);
  const Vec3 x = t.states.back();
  CHECK(std::fabs(x[0] - std::exp(-1.0)) <= 10 * o.rtol * std::exp(-1.0));
  CHECK(std::fabs(x[1] - std::exp(-2.0)) <= 10 * o.rtol * std::exp(-2.0));
  CHECK(std::fabs(x[2] - std::exp(-3.0)) <= 10 * o.rtol * std::exp(-3.0));
}

TEST_CASE("tightening rtol by a decade cuts the error at least 4x") {
  // With per-step error control the global error scales roughly linearly in
  // the tolerance, so halving rtol does not reliably give 4x; a decade does.
  const double ref = linear_error(1e-12);
  CHECK(ref < 1e-11);
  for (double r : {1e-5, 1e-6, 1e-7, 1e-8}) CHECK(linear_error(r) >= 4.0 * linear_error(r / 10.0));
}

TEST_CASE("uniform resampling and dense output") {
  IntegrateOptions o;
  o.rtol = 1e-10;
  o.atol = 1e-12;
  o.uniform_samples = 101;
  const Trajectory t = integrate(harmonic(), {1, 0, 1}, 2 * std::numbers::pi, o);
  REQUIRE(t.times.size() == 101);
  for (std::size_t i = 0; i < t.times.size(); ++i) {
    const double s = t.times[i];
    CHECK(s == doctest::Approx(2 * std::numbers::pi * i / 100.0));
    CHECK(std::fabs(t.states[i][0] - std::cos(s)) < 1e-6);
    CHECK(std::fabs(t.states[i][1] + std::sin(s)) < 1e-6);
  }
}

TEST_CASE("integration preconditions and edge cases") {
  const SystemModel m = linear_decay();
  CHECK(integrate(m, {1, 1, 1}, 0.0).times.empty());
  CHECK_THROWS_AS(integrate(m, {3, 0, 0}, 1.0), std::invalid_argument);
  IntegrateOptions bad;
  bad.rtol = 0.0;
  CHECK_THROWS_AS(integrate(m, {1, 1, 1}, 1.0, bad), std::invalid_argument);
}

TEST_CASE("leaving the box is flagged and clipped") {
  SystemModel grow = linear_decay();
  grow.f = [](const Vec3& x) { return Vec3{x[0], 0, 0}; };
  const Trajectory t = integrate(grow, {1, 0, 0}, 5.0);
  CHECK(t.stats.left_box);
  CHECK(t.stats.exit_time == doctest::Approx(std::log(2.0)).epsilon(1e-6));
  CHECK(t.times.back() == t.stats.exit_time);
  CHECK(grow.box.excursion(t.states.back()) == doctest::Approx(10 * 1e-10).epsilon(1e-3));
  CHECK(t.times.back() < 5.0);
}

TEST_CASE("step-size underflow raises StiffnessError") {
  SystemModel blow = linear_decay();
  blow.box = {{-1e300, -1e300, -1e300}, {1e300, 1e300, 1e300}};
  blow.f = [](const Vec3& x) { return Vec3{x[0] * x[0], 0, 0}; };  // blows up at t = 1
  CHECK_THROWS_AS(integrate(blow, {1, 0, 0}, 2.0), StiffnessError);
}

TEST_CASE("csv output") {
  Trajectory t;
  t.times = {0.0, 0.1};
  t.states = {Vec3{1, 2, 3}, Vec3{0.30000000000000004, -1e-300, 5}};
  std::ostringstream os;
  write_csv(os, t);
  CHECK(os.str() == "t,x1,x2,x3\n0,1,2,3\n0.1,0.30000000000000004,-1e-300,5\n");
  CHECK(std::stod(format_double(0.1 + 0.2)) == 0.1 + 0.2);
}

TEST_CASE("goodwin trajectory stays in its box") {
  const SystemModel g = goodwin({});
  const Trajectory t = integrate(g, {0.1, 0.1, 0.1}, 500.0);
  CHECK_FALSE(t.stats.left_box);
  for (const Vec3& x : t.states) CHECK(g.box.contains(x, 1e-6));
}

TEST_CASE("box invariance from random starts") {
  for (const SystemModel& m : {goodwin({}), field_noyes({})}) {
    std::mt19937_64 rng(31);
    IntegrateOptions o;
    o.rtol = 1e-8;
    o.atol = 1e-10;
    const Vec3 w = m.box.width();
    o.atol_scale = Vec3{std::max(1.0, w[0]), std::max(1.0, w[1]), std::max(1.0, w[2])};
    const std::size_t n = m.name == "goodwin" ? 100 : 20;  // FN is the slow one
    for (std::size_t i = 0; i < n; ++i) {
      Vec3 x0;
      for (std::size_t d = 0; d < 3; ++d)
        x0[d] = std::uniform_real_distribution<double>(m.box.lower[d], m.box.upper[d])(rng);
      double worst = 0.0;
      integrate_steps(m, x0, 0.0, 500.0, o, [&](const Step& s) {
        worst = std::max(worst, m.box.excursion(s.x1));
        return true;
      });
      CHECK(worst <= 1e-6 * std::max(1.0, norm_inf(m.box.upper)));
    }
  }
}

TEST_CASE("harmonic oscillator period") {
  OrbitOptions o;
  o.horizon = 100.0;
  o.section_coord = 1;
  o.section_value = 0.0;
  const PeriodEstimate p = detect_orbit(harmonic(), {1, 0.5, 1}, o);
  CHECK(p.converged);
  CHECK(std::fabs(p.period - 2 * std::numbers::pi) < 1e-6);
}

TEST_CASE("stable Goodwin does not converge to an orbit") {
  const GoodwinParams q{1, 1, 1, 1};
  const SystemModel g = goodwin(q);
  const Vec3 e = goodwin_equilibrium(q);
  const PeriodEstimate p = detect_orbit(g, {0.8, 0.3, 0.6}, {});
  CHECK_FALSE(p.converged);
  CHECK_FALSE(p.diagnostics.empty());
  // distance to e shrinks along the run (checked on a coarse time grid)
  IntegrateOptions o;
  o.uniform_samples = 41;
  const Trajectory t = integrate(g, {0.8, 0.3, 0.6}, 40.0, o);
  double prev = 1e300;
  for (std::size_t i = 0; i < t.states.size(); i += 10) {
    const double d = norm2(t.states[i] - e);
    CHECK(d < prev);
    prev = d;
  }
}

TEST_CASE("orbit detection is deterministic") {
  const SystemModel g = goodwin({});
  const PeriodEstimate a = detect_orbit(g, {0.1, 0.1, 0.1});
  const PeriodEstimate b = detect_orbit(g, {0.1, 0.1, 0.1});
  CHECK(a.period == b.period);
  CHECK(a.closure_distance == b.closure_distance);
  CHECK(a.return_times == b.return_times);
  CHECK(a.converged);
  CHECK(a.period_stderr <= 1e-4 * a.period);
}

TEST_CASE("pair sign variations") {
  const SystemModel g = goodwin({});
  const Vec3 b{0.5, 1.0, 2.0};
  const Vec3 a = b + Vec3{1e-3, 1e-3, 1e-3};
  const auto s = pair_sign_variation_series(g, a, b, 100.0, 501);
  REQUIRE(s.size() == 501);
  CHECK(s.front().s_minus == 0);
  for (const auto& x : s) CHECK(x.s_plus <= 1);

  // start with two sign variations; once it drops to <= 1 it stays there
  const Vec3 c{1.0, 0.5, 2.0}, d{0.5, 1.0, 1.5};
  const auto r = pair_sign_variation_series(g, c, d, 100.0, 2001);
  CHECK(r.front().s_minus == 2);
  bool dropped = false;
  for (const auto& x : r) {
    if (dropped) CHECK(x.s_minus <= 1);
    if (x.s_plus <= 1) dropped = true;
  }
}

TEST_CASE("goodwin pair monotonicity") {
  const SystemModel g = goodwin({});
  std::mt19937_64 rng(77);
  std::size_t done = 0;
  while (done < 30) {
    Vec3 a, b;
    for (std::size_t d = 0; d < 3; ++d) {
      a[d] = std::uniform_real_distribution<double>(0, g.box.upper[d])(rng);
      b[d] = std::uniform_real_distribution<double>(0, g.box.upper[d])(rng);
    }
    if (s_minus(a - b) > 1) continue;
    ++done;
    for (const auto& x : pair_sign_variation_series(g, a, b, 100.0, 501)) CHECK(x.s_plus <= 1);
  }
}
