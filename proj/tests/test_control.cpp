#include <doctest.h>

#include <cmath>

#include "fishnav/control.hpp"

using namespace fishnav;

namespace {

ReachSpec zero_spec() {
  ReachSpec s;
  s.x0 = Vec{0.0, 0.0};
  s.y0 = Vec{1.0, 0.0};
  s.delta = 0.3;
  s.arrival_tol = 0.1;
  return s;
}

}  // namespace

TEST_SUITE("control") {

TEST_CASE("step one ball radius") {
  CHECK(step1_ball_radius(1.0, 0.3, 0.0) == doctest::Approx(0.15));
  CHECK(step1_ball_radius(2.0, 0.3, 0.1) == doctest::Approx(0.2));
  CHECK_THROWS_AS(step1_ball_radius(1.0, 0.3, 0.3), InputError);
  CHECK_THROWS_AS(step1_ball_radius(0.0, 0.3, 0.1), InputError);
}

TEST_CASE("target equal to start needs no control") {
  const DriftField f(VectorField::shear_sin());
  ReachSpec s = zero_spec();
  s.y0 = s.x0;
  const auto r = plan_reach(f, s);
  CHECK(r.status == ReachStatus::reached);
  CHECK(r.schedule.empty());
  CHECK(r.arrival_error == 0.0);
  CHECK(verify_schedule(f, r.schedule, s).pass);
}

TEST_CASE("straight line under the zero field") {
  const DriftField f(VectorField::zero(2));
  const ReachSpec s = zero_spec();
  const auto r = plan_reach(f, s);
  REQUIRE(r.status == ReachStatus::reached);
  REQUIRE(r.schedule.values.size() == 1);
  CHECK(r.schedule.duration() == doctest::Approx(4.0));
  CHECK(r.schedule.values[0][0] == doctest::Approx(0.25).epsilon(1e-6));
  CHECK(std::abs(r.schedule.values[0][1]) <= 1e-8);
  CHECK(r.delta_w == 0.0);
  CHECK(r.delta_tilde == doctest::Approx(0.3));

  const auto v = verify_schedule(f, r.schedule, s);
  CHECK(v.pass);
  CHECK(v.arrival_error <= 1e-6);
  CHECK(v.sup_norm < s.delta);

  // Shifting the control by 2 tol / T moves the endpoint by 2 tol.
  ControlSchedule bad = r.schedule;
  bad.values[0][1] += 2.0 * s.arrival_tol / bad.duration();
  const auto vb = verify_schedule(f, bad, s);
  CHECK_FALSE(vb.pass);
  CHECK(vb.arrival_error == doctest::Approx(0.2).epsilon(1e-4));
}

TEST_CASE("verification enforces the strict budget") {
  const DriftField f(VectorField::zero(2));
  const ReachSpec s = zero_spec();
  ControlSchedule at_budget;
  at_budget.breakpoints = {0.0, 10.0 / 3.0};
  at_budget.values = {Vec{0.3, 0.0}};
  const auto v = verify_schedule(f, at_budget, s);
  CHECK(v.arrival_error <= 1e-9);
  CHECK_FALSE(v.pass);
}

TEST_CASE("reached set after three rounds covers a ball") {
  const DriftField f(VectorField::zero(2));
  ReachSpec s = zero_spec();
  s.planner.lo = Vec{-1.0, -1.0};
  s.planner.hi = Vec{1.0, 1.0};
  const auto set = reached_set_rounds(f, s, 3);
  const double radius = 3.0 * s.planner.tau * s.delta / 2.0 * (1.0 - 0.25);
  int checked = 0;
  for (int i = 0; i < 72; ++i) {
    for (double frac : {0.0, 0.3, 0.6, 1.0}) {
      const double a = 2.0 * kPi * i / 72.0;
      CHECK(set.is_marked(Vec{frac * radius * std::cos(a), frac * radius * std::sin(a)}));
      ++checked;
    }
  }
  CHECK(checked == 288);
  CHECK_FALSE(set.is_marked(Vec{0.9, 0.0}));
}

TEST_CASE("reached sets grow with the number of rounds") {
  const DriftField f(VectorField::taylor_green());
  ReachSpec s = zero_spec();
  s.x0 = Vec{0.3, 0.2};
  std::size_t prev = 0;
  for (int rounds = 0; rounds <= 3; ++rounds) {
    const auto set = reached_set_rounds(f, s, rounds);
    std::size_t count = 0;
    for (char c : set.marked) count += c != 0;
    CHECK(count >= prev);
    prev = count;
  }
  CHECK(prev > 1);
}

TEST_CASE("planning is deterministic") {
  const DriftField f(VectorField::shear_sin());
  ReachSpec s = zero_spec();
  s.x0 = Vec{0.5, 0.0};
  s.y0 = Vec{2.0, -1.0};
  const auto a = plan_reach(f, s);
  const auto b = plan_reach(f, s);
  CHECK(a.status == b.status);
  CHECK(a.schedule.breakpoints == b.schedule.breakpoints);
  CHECK(a.schedule.values == b.schedule.values);
  if (a.status == ReachStatus::reached) CHECK(verify_schedule(f, a.schedule, s).pass);
}

TEST_CASE("invalid specs") {
  const DriftField f(VectorField::zero(2));
  ReachSpec s = zero_spec();
  s.delta = -1.0;
  CHECK_THROWS(plan_reach(f, s));
  s = zero_spec();
  s.x0 = Vec{0.0, 0.0, 0.0};
  CHECK_THROWS_AS(plan_reach(f, s), InputError);
}

TEST_CASE("schedule lookup") {
  ControlSchedule c;
  c.breakpoints = {0.0, 1.0, 3.0};
  c.values = {Vec{1.0, 0.0}, Vec{0.0, 1.0}};
  CHECK(c.value_at(0.5) == Vec{1.0, 0.0});
  CHECK(c.value_at(2.0) == Vec{0.0, 1.0});
  CHECK(c.duration() == 3.0);
}

}  // TEST_SUITE
