#include <doctest.h>

#include "fishnav/diagnostics.hpp"

using namespace fishnav;

namespace {

VectorField identity_field() {
  Mat m = Mat::zeros(2);
  m(0, 0) = m(1, 1) = 1.0;
  return VectorField::linear(m);
}

}  // namespace

TEST_SUITE("diagnostics") {

TEST_CASE("box averages") {
  const auto centers = CenterSampler{}.centers(2);
  const auto c = VectorField::constant(Vec{0.3, 0.4});
  for (double ell : {0.5, 7.0, 300.0}) CHECK(mean_drift_box(c, ell, centers) == doctest::Approx(0.5).epsilon(1e-13));
  CHECK(mean_drift_box(VectorField::shear_sin(), 100.0, centers) <= 0.02);
  for (int k : {1, 3, 10}) {
    CHECK(mean_drift_box(VectorField::taylor_green(), 2 * kPi * k, centers) <= 1e-12);
  }
  CHECK_THROWS_AS(mean_drift_box(c, 1.0, {}), InputError);
  CHECK_THROWS_AS(mean_drift_box(c, -1.0, centers), InputError);
  CHECK_THROWS_AS(mean_drift_box(c, 1.0, centers, 1), InputError);
}

TEST_CASE("box flux") {
  const Vec o{0.0, 0.0};
  CHECK(mean_flux_box(VectorField::constant(Vec{1.0, 0.0}), FluxBox{o, 0, 3.0}) == doctest::Approx(1.0));
  CHECK(mean_flux_box(VectorField::shear_sin(), FluxBox{Vec{2.0, 1.0}, 0, 50.0}) == 0.0);
  CHECK(mean_flux_box(VectorField::shear_sin(), FluxBox{Vec{0.3, 0.0}, 1, 100.0}) <= 0.02);
  CHECK_THROWS_AS(mean_flux_box(VectorField::shear_sin(), FluxBox{o, 2, 1.0}), InputError);
  const Vec o3{0.0, 0.0, 0.0};
  CHECK(mean_flux_box(VectorField::constant(Vec{0.0, 0.0, 2.0}), FluxBox{o3, 2, 4.0}) == doctest::Approx(2.0));
}

TEST_CASE("sphere flux") {
  for (double r : {0.5, 3.0, 40.0}) {
    CHECK(mean_flux_sphere(VectorField::shear_sin(), Vec{0.2, -1.0}, r) <= 1e-12);
    CHECK(mean_flux_sphere(VectorField::taylor_green(), Vec{1.0, 2.0}, r) <= 1e-12);
    CHECK(mean_flux_sphere(VectorField::constant(Vec{1.0, 0.0}), Vec{0.0, 0.0}, r) <= 1e-14);
    CHECK(mean_flux_sphere(VectorField::shear_sin(3), Vec{0.1, 0.2, 0.3}, r, 48) <= 1e-10);
  }
  // F(x) = x through the unit circle: flux 2 pi over length 2 pi.
  CHECK(mean_flux_sphere(identity_field(), Vec{0.0, 0.0}, 1.0) == doctest::Approx(1.0).epsilon(1e-14));
  // Any cap of the unit circle: F.n = 1 everywhere.
  CHECK(mean_flux_sphere(identity_field(), Vec{0.0, 0.0}, 1.0, 32, Cap{Vec{0.0, 1.0}, 0.7}) ==
        doctest::Approx(1.0).epsilon(1e-14));
  CHECK_THROWS_AS(mean_flux_sphere(identity_field(), Vec{0.0, 0.0}, 0.0), InputError);
  CHECK_THROWS_AS(mean_flux_sphere(identity_field(), Vec{0.0, 0.0}, 1.0, 32, Cap{Vec{0.0, 1.0}, 2.5}), InputError);
}

TEST_CASE("cap flux of a constant field") {
  // Half circle facing +x1: int_{-pi/2}^{pi/2} cos t dt / pi = 2 / pi.
  const double v = mean_flux_sphere(VectorField::constant(Vec{1.0, 0.0}), Vec{0.0, 0.0}, 2.0, 32,
                                    Cap{Vec{1.0, 0.0}, std::sqrt(2.0)});
  CHECK(v == doctest::Approx(2.0 / kPi).epsilon(1e-13));
}

TEST_CASE("drift sweeps") {
  const auto s = drift_sweep(VectorField::shear_sin(), {10.0, 100.0, 1000.0});
  REQUIRE(s.sup_box_average.size() == 3);
  CHECK(s.sup_box_average[0] <= 0.2);
  CHECK(s.sup_box_average[1] <= 0.02);
  CHECK(s.sup_box_average[2] <= 0.002);
  CHECK(s.sup_box_average[1] < s.sup_box_average[0]);
  CHECK(s.sup_box_average[2] < s.sup_box_average[1]);
  CHECK(s.centers_sampled() == 9 + 8);

  const auto c = drift_sweep(VectorField::constant(Vec{1.0, 0.0}), {1.0, 10.0, 100.0});
  for (double v : c.sup_box_average) CHECK(v == doctest::Approx(1.0).epsilon(1e-13));

  const auto t = drift_sweep(VectorField::taylor_green(), {2 * kPi, 20 * kPi});
  for (double v : t.sup_box_average) CHECK(v <= 1e-12);

  CHECK_THROWS_AS(drift_sweep(VectorField::shear_sin(), {}), InputError);
  CHECK_THROWS_AS(drift_sweep(VectorField::shear_sin(), {10.0, 5.0}), InputError);
}

TEST_CASE("drift sweeps are deterministic") {
  CenterSampler sampler;
  sampler.seed = 99;
  const auto a = drift_sweep(VectorField::shear_sin(), {3.0, 30.0}, sampler);
  const auto b = drift_sweep(VectorField::shear_sin(), {3.0, 30.0}, sampler);
  CHECK(a.sup_box_average == b.sup_box_average);
  sampler.seed = 100;
  const auto c = drift_sweep(VectorField::shear_sin(), {3.0, 30.0}, sampler);
  CHECK(c.seed == 100);
}

TEST_CASE("derivative drift") {
  const std::vector<double> scales{2 * kPi, 20 * kPi};
  for (const auto& r : derivative_drift(VectorField::constant(Vec{1.0, 2.0}), scales)) {
    for (double v : r.sup_box_average) CHECK(v <= 1e-9);
  }
  const auto tg = derivative_drift(VectorField::taylor_green(), scales);
  REQUIRE(tg.size() == 2);
  for (const auto& r : tg)
    for (double v : r.sup_box_average) CHECK(v <= 1e-9);
  const auto sh = derivative_drift(VectorField::shear_sin(), {10.0, 100.0});
  // dV/dx1 = (0, cos x1)
  CHECK(sh[0].sup_box_average[0] <= 0.2);
  CHECK(sh[0].sup_box_average[1] <= 0.02);
  for (double v : sh[1].sup_box_average) CHECK(v <= 1e-9);
}

TEST_CASE("center sampler") {
  CenterSampler s;
  s.lattice_per_axis = 4;
  s.random_count = 5;
  CHECK(s.centers(2).size() == 16 + 5);
  CHECK(s.centers(3).size() == 64 + 5);
  s.lattice_per_axis = 0;
  s.random_count = 0;
  CHECK_THROWS_AS(s.centers(2), InputError);
}

}  // TEST_SUITE
