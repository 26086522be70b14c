#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "fishnav/fields.hpp"

using namespace fishnav;

namespace {

VectorField compressible_x1() {
  Mat m = Mat::zeros(2);
  m(0, 0) = 1.0;
  return VectorField::linear(m);
}

}  // namespace

TEST_SUITE("fields") {

TEST_CASE("built-in values") {
  CHECK(VectorField::shear_sin().eval(Vec{0.0, 5.0}) == Vec{0.0, 0.0});
  const auto c = VectorField::constant(Vec{1.0, 0.0});
  CHECK(c.eval(Vec{3.0, -7.0}) == Vec{1.0, 0.0});
  const Vec tg = VectorField::taylor_green().eval(Vec{kPi / 2, 0.0});
  CHECK(tg[0] == doctest::Approx(-1.0).epsilon(1e-15));
  CHECK(std::abs(tg[1]) < 1e-15);
}

TEST_CASE("dimension mismatch is an input error") {
  CHECK_THROWS_AS(VectorField::shear_sin().eval(Vec{1.0, 2.0, 3.0}), InputError);
  CHECK_THROWS_AS(VectorField::shear_sin(3).eval(Vec{1.0, 2.0}), InputError);
}

TEST_CASE("divergence examples") {
  CHECK(std::abs(divergence_fd(VectorField::taylor_green(), Vec{0.7, 1.3}, 1e-4)) <= 1e-6);
  CHECK(std::abs(divergence_fd(VectorField::constant(Vec{0.3, -2.0}), Vec{4.0, 1.0})) <= 1e-12);
  CHECK(divergence_fd(compressible_x1(), Vec{-2.0, 9.0}) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK_THROWS_AS(divergence_fd(VectorField::shear_sin(), Vec{0.0, 0.0}, 0.0), InputError);
}

TEST_CASE("jacobian examples") {
  const Mat s = jacobian_fd(VectorField::shear_sin(), Vec{0.0, 0.0});
  CHECK(std::abs(s(0, 0)) < 1e-6);
  CHECK(std::abs(s(0, 1)) < 1e-6);
  CHECK(std::abs(s(1, 0) - 1.0) < 1e-6);
  CHECK(std::abs(s(1, 1)) < 1e-6);

  const Mat z = jacobian_fd(VectorField::constant(Vec{2.0, 1.0}), Vec{1.0, 1.0});
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) CHECK(std::abs(z(i, j)) < 1e-12);

  const Mat t = jacobian_fd(VectorField::taylor_green(), Vec{0.0, 0.0});
  CHECK(std::abs(t(0, 0) + 1.0) < 1e-6);
  CHECK(std::abs(t(0, 1)) < 1e-6);
  CHECK(std::abs(t(1, 0)) < 1e-6);
  CHECK(std::abs(t(1, 1) - 1.0) < 1e-6);
}

TEST_CASE("built-ins are divergence free on random points") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  const std::vector<VectorField> fields{VectorField::shear_sin(2), VectorField::shear_sin(3),
                                        VectorField::taylor_green(), VectorField::constant(Vec{0.2, -0.7}),
                                        VectorField::constant(Vec{1.0, 2.0, 3.0})};
  for (const auto& f : fields) {
    double worst = 0.0;
    for (int i = 0; i < 10000; ++i) {
      Vec x(f.dim());
      for (int a = 0; a < f.dim(); ++a) x[a] = u(rng);
      worst = std::max(worst, std::abs(divergence_fd(f, x, 1e-4)));
    }
    CHECK(worst <= 1e-6);
  }
}

TEST_CASE("evaluations stay within the declared sup bound") {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(-100.0, 100.0);
  const std::vector<VectorField> fields{
      VectorField::shear_sin(2, 1.7, 2.0), VectorField::taylor_green(0.8, 1.5),
      VectorField::sum(VectorField::shear_sin(), VectorField::taylor_green()),
      VectorField::scaled(VectorField::taylor_green(), -2.0, 3.0)};
  for (const auto& f : fields) {
    double worst = 0.0;
    for (int i = 0; i < 100000; ++i) {
      const Vec v = f.eval(Vec{u(rng), u(rng)});
      REQUIRE(v.finite());
      worst = std::max(worst, v.norm());
    }
    CHECK(worst <= f.sup_bound() * (1.0 + 1e-12));
  }
}

TEST_CASE("sum and scaled combinators") {
  const auto a = VectorField::shear_sin(), b = VectorField::taylor_green();
  const auto s = VectorField::sum(a, b);
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  for (int i = 0; i < 1000; ++i) {
    const Vec x{u(rng), u(rng)};
    CHECK(s.eval(x) == a.eval(x) + b.eval(x));
    CHECK(std::abs(divergence_fd(s, x)) <= 2e-6);
  }
  const auto sc = VectorField::scaled(b, 2.0, 0.5);
  const Vec x{0.3, 1.1};
  CHECK(sc.eval(x) == 2.0 * b.eval(x * 0.5));
  CHECK(sc.sup_bound() == doctest::Approx(2.0 * b.sup_bound()));
  CHECK_THROWS_AS(VectorField::sum(a, VectorField::shear_sin(3)), InputError);
}

TEST_CASE("grid fields interpolate multilinearly and tile periodically") {
  const auto path = std::filesystem::temp_directory_path() / "fishnav_grid_test.csv";
  {
    std::ofstream out(path);
    out << "x1,x2,v1,v2\n";
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 2; ++j) out << i << ',' << j << ',' << i + 10 * j << ',' << -i << '\n';
  }
  const auto g = VectorField::grid(read_grid_csv(path));
  CHECK(g.eval(Vec{1.0, 1.0}) == Vec{11.0, -1.0});
  // Midpoint of a cell: average of four corners.
  const Vec mid = g.eval(Vec{0.5, 0.5});
  CHECK(mid[0] == doctest::Approx(0.25 * (0 + 1 + 10 + 11)));
  // Periods 3 and 2: x1 = 2.5 blends node 2 with node 0.
  const Vec wrap = g.eval(Vec{2.5, 0.0});
  CHECK(wrap[0] == doctest::Approx(1.0));
  CHECK(g.eval(Vec{-3.0 + 1.25, 2.0 + 0.5}) == g.eval(Vec{1.25, 0.5}));
  CHECK(g.sup_bound() == doctest::Approx(std::hypot(12.0, 2.0)));
  const auto j = g.to_json();
  CHECK(j["kind"] == "grid");
  std::filesystem::remove(path);
}

TEST_CASE("grid CSV validation") {
  const auto path = std::filesystem::temp_directory_path() / "fishnav_grid_bad.csv";
  {
    std::ofstream out(path);
    out << "x1,x2,v1,v2\n0,0,1,1\n1,0,1,1\n0,1,1,1\n";
  }
  CHECK_THROWS_AS(read_grid_csv(path), InputError);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(read_grid_csv("/nonexistent/grid.csv"), InputError);
}

TEST_CASE("JSON specs round trip") {
  const auto f = VectorField::scaled(VectorField::sum(VectorField::shear_sin(), VectorField::taylor_green(0.5, 2.0)),
                                     1.5, 0.25);
  const auto g = VectorField::from_json(f.to_json());
  const Vec x{0.37, -1.2};
  CHECK(g.eval(x) == f.eval(x));
  CHECK(g.to_json() == f.to_json());
  CHECK_THROWS_AS(VectorField::from_json(nlohmann::json{{"kind", "vortex"}}), InputError);
  CHECK_THROWS_AS(VectorField::from_json(nlohmann::json{{"kind", "constant"}, {"dim", 2}, {"params", {{"value", {1}}}}}),
                  InputError);
}

TEST_CASE("field arguments") {
  CHECK(field_from_arg("shear_sin").kind() == FieldKind::shear_sin);
  CHECK(field_from_arg("constant:1,2").eval(Vec{0.0, 0.0}) == Vec{1.0, 2.0});
  const Vec c = field_from_arg("circular").eval(Vec{1.0, 0.0});
  CHECK(c == Vec{0.0, 1.0});
  CHECK_THROWS_AS(field_from_arg("no_such_field"), InputError);
}

}  // TEST_SUITE
