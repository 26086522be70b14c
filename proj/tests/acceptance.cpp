// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <memory>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "fishnav/control.hpp"
#include "fishnav/corrector_grid.hpp"
#include "fishnav/recurrence.hpp"

using namespace fishnav;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// Criterion 1: closed-form div W against central differences of the quadrature.
Outcome divergence_oracle() {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  std::vector<Vec> pts;
  for (int i = 0; i < 100; ++i) pts.push_back(Vec{u(rng), u(rng)});
  const double h = 1e-3;
  double worst = 0.0;
  for (double alpha : {1.0, 2.0, 4.0}) {
    QuadratureConfig q;
    q.window_radius = 5.0 * std::sqrt(2.0) + 0.01;
    const CorrectorField w(VectorField::shear_sin(), {2, 0.75, alpha}, q);
    for (const Vec& x : pts) {
      double fd = 0.0;
      for (int j = 0; j < 2; ++j) {
        Vec e = Vec::zeros(2);
        e[j] = h;
        fd += (w.eval(x + e)[j] - w.eval(x - e)[j]) / (2 * h);
      }
      const double exact = w.div_exact(x, w.eval(x));
      worst = std::max(worst, std::abs(exact - fd) / (1.0 + std::abs(exact)));
    }
  }
  return {worst <= 1e-2, fmt("max |div_exact - div_fd| / (1 + |div_exact|) = %.3e (tol 1e-2)", worst)};
}

// Criterion 2
Outcome measure_ball_closed_form() {
  const double got = measure_ball({2, 0.75, 1.0}, 10.0);
  const double want = 4 * kPi * (std::pow(101.0, 0.25) - 1.0);
  const double rel = std::abs(got - want) / want;
  return {rel <= 1e-3, fmt("mu(B_10) = %.12g, closed form %.12g, rel %.2e (tol 1e-3)", got, want, rel)};
}

// Criterion 3
Outcome invariance() {
  QuadratureConfig q;
  q.window_radius = 5.0 * std::sqrt(2.0) + 0.01;
  const CorrectorField w(VectorField::shear_sin(), {2, 0.75, 2.0}, q);
  const auto r = invariance_scan(w, 21, 5.0);
  return {r.max_residual <= 0.05 * r.max_reference,
          fmt("max |div psi(V+W)| = %.3e, max |grad psi . V| = %.3e, ratio %.3e (tol 0.05)", r.max_residual,
              r.max_reference, r.ratio())};
}

// Criterion 4
Outcome alpha_decay() {
  const std::vector<double> alphas{1.0, 2.0, 4.0, 8.0, 16.0};
  const auto rows = alpha_sweep(VectorField::shear_sin(), 0.75, alphas, SweepGrid{11, 5.0});
  bool bound_ok = true;
  std::string worst;
  double worst_ratio = 0.0;
  for (const auto& r : rows) {
    const double ratio = std::max(r.sup_div_w, r.sup_div_w_exact) / r.div_bound;
    bound_ok = bound_ok && r.sup_div_w <= r.div_bound && r.sup_div_w_exact <= r.div_bound;
    if (ratio > worst_ratio) {
      worst_ratio = ratio;
      worst = fmt("%g", r.alpha);
    }
  }
  const double decay = rows.back().sup_w / rows.front().sup_w;
  return {bound_ok && decay <= 0.5,
          fmt("sup|W| alpha=16 / alpha=1 = %.3e / %.3e = %.3f (tol 0.5); max sup|div W| / bound = %.3f at alpha %s",
              rows.back().sup_w, rows.front().sup_w, decay, worst_ratio, worst.c_str())};
}

// Criterion 5
Outcome scaling_identity() {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> ux(-3.0, 3.0), ua(std::log(0.5), std::log(8.0));
  double worst = 0.0, worst_abs = 0.0;
  for (int i = 0; i < 20; ++i) {
    const Vec x{ux(rng), ux(rng)};
    const double alpha = std::exp(ua(rng));
    const auto s = corrector_scaling_check(VectorField::shear_sin(), 0.75, {}, x, alpha);
    const double ratio = s.residual / (2.0 * s.quadrature_est);
    if (ratio > worst) {
      worst = ratio;
      worst_abs = s.residual;
    }
  }
  return {worst <= 1.0, fmt("max residual / (2 x quadrature estimate) = %.3e (residual %.2e)", worst, worst_abs)};
}

// Criterion 6
Outcome radial_moment() {
  double worst = 0.0;
  for (const auto& v : {VectorField::taylor_green(), VectorField::shear_sin()}) {
    for (double rho : {0.5, 1.0, 2.0}) worst = std::max(worst, std::abs(radial_moment_check(v, rho, 1.0, 0.75, 1.0)));
  }
  Mat id = Mat::zeros(2);
  id(0, 0) = id(1, 1) = 1.0;
  const double compressible = radial_moment_check(VectorField::linear(id), 1.0, 1.0, 0.75, 1.0);
  return {worst <= 1e-6 && compressible > 0.0,
          fmt("max |moment| = %.2e (tol 1e-6); F(x)=x moment = %.6f (> 0)", worst, compressible)};
}

// Criterion 7
Outcome discrete_recurrence() {
  std::mt19937_64 rng(7);
  int agree = 0;
  for (std::uint64_t s = 1; s <= 50; ++s) {
    const std::int64_t n = std::uniform_int_distribution<std::int64_t>(10, 10000)(rng);
    const auto sys = DiscreteSystem::random_permutation(n, s);
    std::vector<std::int64_t> perm(n);
    for (std::int64_t k = 0; k < n; ++k) perm[k] = sys.map(k);
    std::set<std::int64_t> in;
    while (in.size() < 5) in.insert(std::uniform_int_distribution<std::int64_t>(0, n - 1)(rng));
    const std::vector<std::int64_t> u(in.begin(), in.end());
    const std::int64_t horizon = 500;

    // Brute force on the explicit permutation table.
    std::vector<std::int64_t> brute, cur = u;
    for (std::int64_t t = 1; t <= horizon; ++t) {
      bool hit = false;
      for (auto& k : cur) {
        k = perm[k];
        hit = hit || in.count(k);
      }
      if (hit) brute.push_back(t);
    }
    if (poincare_discrete_check(sys, u, horizon).return_events == brute) ++agree;
  }
  std::vector<std::int64_t> u(10);
  for (int k = 0; k < 10; ++k) u[k] = k;
  const auto tr = poincare_discrete_check(DiscreteSystem::translation(10), u, 1000);
  const bool linear = std::abs(tr.growth_slope - 10.0) <= 1e-9;
  return {agree == 50 && tr.return_events.empty() && linear,
          fmt("%d/50 permutations agree with brute force; translation: %zu returns, orbit growth slope %.6f",
              agree, tr.return_events.size(), tr.growth_slope)};
}

// Criterion 8
Outcome wandering_vs_corrected() {
  const BallSpec ball{Vec{kPi / 2, 0.0}, 0.5};
  ReturnScanConfig plain;
  plain.particles = 1000;
  plain.horizon = 1e3;
  const auto r0 = continuous_return_scan(DriftField(VectorField::shear_sin()), std::nullopt, ball, plain);

  const Vec lo{-20.0, -20.0}, hi{20.0, 20.0};
  const double spacing = 0.25;
  QuadratureConfig q;
  q.window_radius = CorrectorGrid::required_window(lo, hi, spacing);
  const PsiParams psi{2, 0.75, 2.0};
  const CorrectorField w(VectorField::shear_sin(), psi, q);
  const auto grid = std::make_shared<CorrectorGrid>(CorrectorGrid::build(w, lo, hi, spacing));
  ReturnScanConfig corrected = plain;
  corrected.horizon = 1e4;
  const auto r1 = continuous_return_scan(DriftField(VectorField::shear_sin(), grid), psi, ball, corrected);
  return {r0.fraction == 0.0 && r1.fraction > 0.0,
          fmt("without W: %zu/%zu returned by t=1e3; with W (alpha 2): fraction %.3f (%zu/%zu, %zu escaped the "
              "grid) by t=1e4",
              r0.returned, r0.particles, r1.fraction, r1.returned, r1.particles, r1.escaped)};
}

// Criterion 9
Outcome controllability() {
  ReachSpec spec;
  spec.x0 = Vec{0.5, 0.5};
  spec.y0 = Vec{0.5 + 6 * kPi, 0.5};
  spec.delta = 0.3;
  spec.arrival_tol = 0.1;
  spec.planner.lo = Vec{spec.x0[0] - 4.0, -3.5};
  spec.planner.hi = Vec{spec.y0[0] + 4.0, 4.5};
  const double spacing = 0.25;
  QuadratureConfig q;
  q.window_radius = CorrectorGrid::required_window(spec.planner.lo, spec.planner.hi, spacing);
  const CorrectorField w(VectorField::taylor_green(), {2, 0.75, 2.0}, q);
  const auto grid =
      std::make_shared<CorrectorGrid>(CorrectorGrid::build(w, spec.planner.lo, spec.planner.hi, spacing));
  const DriftField f(VectorField::taylor_green(), grid);
  const auto plan = plan_reach(f, spec);
  if (plan.status != ReachStatus::reached) {
    return {false, fmt("planner %s: %s (best distance %.3f)", to_string(plan.status).c_str(), plan.reason.c_str(),
                       plan.best_distance)};
  }
  const auto v = verify_schedule(f, plan.schedule, spec);
  return {v.pass && v.sup_norm < 0.3 && v.arrival_error <= 0.1,
          fmt("REACHED, distance %.2f, T = %.0f, %zu segments; verify: sup|u| = %.4f (< 0.3), arrival error %.4f "
              "(<= 0.1)",
              distance(spec.x0, spec.y0), plan.schedule.duration(), plan.schedule.values.size(), v.sup_norm,
              v.arrival_error)};
}

// Criterion 10
Outcome flow_correctness() {
  Mat m = Mat::zeros(2);
  m(0, 1) = -1.0;
  m(1, 0) = 1.0;
  const DriftField rot(VectorField::linear(m));
  const Vec x0{1.0, 0.5};
  const double t = 5.0;
  const Vec exact{std::cos(t) * x0[0] - std::sin(t) * x0[1], std::sin(t) * x0[0] + std::cos(t) * x0[1]};
  auto err = [&](double h) {
    FlowConfig cfg;
    cfg.step = h;
    return (flow_map(rot, x0, t, cfg) - exact).norm();
  };
  const double order = std::log2(err(0.1) / err(0.05));

  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  double excess = -1e300;
  int count = 0;
  for (const auto& v : {VectorField::shear_sin(), VectorField::taylor_green(), VectorField::constant(Vec{0.6, -0.8})}) {
    for (int i = 0; i < 20; ++i) {
      const auto tr = integrate(DriftField(v), Vec{u(rng), u(rng)}, 100.0);
      excess = std::max(excess, tr.max_growth_excess);
      ++count;
    }
  }
  return {order >= 3.5 && excess <= 1e-6,
          fmt("RK4 order %.3f (>= 3.5); max growth excess over %d trajectories %.2e (<= 1e-6)", order, count, excess)};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"1 exact divergence", divergence_oracle},
      {"2 measure of balls", measure_ball_closed_form},
      {"3 invariance", invariance},
      {"4 alpha decay", alpha_decay},
      {"5 scaling identity", scaling_identity},
      {"6 radial moment", radial_moment},
      {"7 discrete recurrence", discrete_recurrence},
      {"8 wandering vs corrected", wandering_vs_corrected},
      {"9 controllability", controllability},
      {"10 flow correctness", flow_correctness},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s  [%s] %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str(), secs);
    std::fflush(stdout);
    failed += !o.pass;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
