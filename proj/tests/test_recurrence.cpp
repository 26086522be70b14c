#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "fishnav/recurrence.hpp"

using namespace fishnav;

namespace {

// Independent brute force: follow every point of U forward and test membership.
std::vector<std::int64_t> brute_returns(const DiscreteSystem& sys, const std::vector<std::int64_t>& u,
                                        std::int64_t horizon) {
  const std::set<std::int64_t> in(u.begin(), u.end());
  std::vector<std::int64_t> cur = u, out;
  for (std::int64_t n = 1; n <= horizon; ++n) {
    bool hit = false;
    for (auto& k : cur) {
      k = sys.map(k);
      hit = hit || in.count(k);
    }
    if (hit) out.push_back(n);
  }
  return out;
}

VectorField rotation() {
  Mat m = Mat::zeros(2);
  m(0, 1) = -1.0;
  m(1, 0) = 1.0;
  return VectorField::linear(m);
}

}  // namespace

TEST_SUITE("recurrence") {

TEST_CASE("cycle returns with period 12") {
  const auto sys = DiscreteSystem::cycle(12);
  sys.verify();
  const auto r = poincare_discrete_check(sys, {0}, 100);
  CHECK(r.return_events == std::vector<std::int64_t>{12, 24, 36, 48, 60, 72, 84, 96});
  CHECK(r.union_bound_ok);
  CHECK(r.measure_set == 1.0);
}

TEST_CASE("translation never returns and grows linearly") {
  std::vector<std::int64_t> u(10);
  std::iota(u.begin(), u.end(), 0);
  const auto r = poincare_discrete_check(DiscreteSystem::translation(10), u, 100);
  CHECK(r.return_events.empty());
  CHECK(r.growth_slope == doctest::Approx(10.0));
  CHECK(r.orbit_growth.back() == doctest::Approx(1010.0));
  CHECK(r.union_bound_ok);
}

TEST_CASE("random permutations match brute force") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto sys = DiscreteSystem::random_permutation(50, seed);
    sys.verify();
    const std::vector<std::int64_t> u{static_cast<std::int64_t>(seed % 50), 7, 31};
    const auto r = poincare_discrete_check(sys, u, 60);
    CHECK(r.return_events == brute_returns(sys, u, 60));
    CHECK(r.union_bound_ok);
    for (std::size_t n = 0; n < r.orbit_growth.size(); ++n) {
      CHECK(r.orbit_growth[n] <= (n + 1) * r.measure_set + 1e-12);
    }
    // A finite system returns within |X| steps.
    REQUIRE_FALSE(r.return_events.empty());
    CHECK(r.return_events.front() <= 50);
  }
}

TEST_CASE("parsing and validation") {
  CHECK(DiscreteSystem::parse("cycle:5").size == 5);
  CHECK_FALSE(DiscreteSystem::parse("translate:3").size.has_value());
  CHECK_THROWS_AS(DiscreteSystem::parse("spiral:3"), InputError);
  CHECK_THROWS_AS(DiscreteSystem::permutation({0, 0, 1}).verify(), ModelError);
  CHECK(DiscreteSystem::random_permutation(30, 4).map(3) == DiscreteSystem::random_permutation(30, 4).map(3));
}

TEST_CASE("continuous returns under the identity flow") {
  ReturnScanConfig cfg;
  cfg.particles = 200;
  cfg.horizon = 5.0;
  const auto r = continuous_return_scan(DriftField(VectorField::zero(2)), std::nullopt, {Vec{0.0, 0.0}, 0.5}, cfg);
  CHECK(r.fraction == 1.0);
  CHECK(r.returned == 200);
  for (double t : r.return_times) CHECK(t == doctest::Approx(cfg.tau));
}

TEST_CASE("continuous returns under a rotation") {
  ReturnScanConfig cfg;
  cfg.particles = 100;
  cfg.horizon = 20.0;
  const auto r = continuous_return_scan(DriftField(rotation()), PsiParams{2, 0.75, 1.0}, {Vec{1.0, 0.0}, 0.3}, cfg);
  CHECK(r.mu_sampling);
  CHECK(r.fraction == 1.0);
  for (double t : r.return_times) CHECK(t <= 2 * kPi + 0.5);
}

TEST_CASE("Poisson scan of steady and periodic fields") {
  PoissonScanConfig cfg;
  cfg.horizon = 20.0;
  CHECK(poisson_stability_scan(DriftField(VectorField::zero(2)), cfg).fraction == 1.0);
  const auto r = poisson_stability_scan(DriftField(rotation()), cfg);
  CHECK(r.fraction == 1.0);
  CHECK(r.points.size() == 25);
}

TEST_CASE("near return of a rotation") {
  NearReturnConfig cfg;
  cfg.tau = 1.0;
  const auto r = near_return_search(DriftField(rotation()), Vec{1.0, 0.0}, 8.0, cfg);
  CHECK(std::abs(r.time - 2 * kPi) <= 1e-6);
  CHECK(r.distance <= 1e-8);
}

TEST_CASE("near return of a shear stays at the window start") {
  // Orbits drift at unit speed, so the closest sampled time is tau itself.
  const double horizon = 20.0;
  NearReturnConfig cfg;
  cfg.tau = 0.95 * horizon;
  const auto r = near_return_search(DriftField(VectorField::shear_sin()), Vec{kPi / 2, 0.0}, horizon, cfg);
  CHECK(r.time == doctest::Approx(cfg.tau));
  CHECK(r.distance == doctest::Approx(cfg.tau).epsilon(1e-9));
  CHECK(r.distance >= 0.9 * horizon);
}

}  // TEST_SUITE
