#include "fishnav/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "fishnav/parallel.hpp"
#include "fishnav/quadrature.hpp"

namespace fishnav {

namespace {

double psi_max_on_box(const PsiParams& psi, const Vec& lo, const Vec& hi) {
  Vec nearest(lo.dim());
  for (int a = 0; a < lo.dim(); ++a) nearest[a] = std::clamp(0.0, lo[a], hi[a]);
  return psi_eval(psi, nearest);
}

// Rejection sampler shared by the box and ball variants. `propose` draws a
// uniform point of the region.
template <class Propose>
std::vector<Vec> rejection(const PsiParams& psi, double psi_max, std::size_t n, std::uint64_t seed,
                           Propose&& propose, double* acceptance) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::vector<Vec> out;
  out.reserve(n);
  std::size_t proposals = 0;
  while (out.size() < n) {
    const Vec x = propose(rng);
    ++proposals;
    if (u01(rng) * psi_max < psi_eval(psi, x)) out.push_back(x);
    if (proposals >= 10000 && out.size() < proposals / 100) {
      throw ConfigError("rejection sampling efficiency below 1%");
    }
  }
  if (acceptance) *acceptance = proposals ? static_cast<double>(n) / proposals : 1.0;
  return out;
}

}  // namespace

void FlowConfig::validate() const {
  if (!(step > 0.0) || !std::isfinite(step)) throw ConfigError("flow step must be positive");
  if (!(horizon >= 0.0)) throw ConfigError("flow horizon must be >= 0");
}

DriftField::DriftField(VectorField v) : v_(std::move(v)) {}

DriftField::DriftField(VectorField v, std::shared_ptr<const CorrectorGrid> w) : v_(std::move(v)), w_(std::move(w)) {
  if (w_ && v_.dim() != 2) throw InputError("corrector grids are planar");
}

double DriftField::sup_bound() const { return v_.sup_bound() + (w_ ? w_->sup_bound() : 0.0); }

std::string DriftField::id() const { return v_.to_json().dump() + (w_ ? "+W" : ""); }

Vec DriftField::operator()(const Vec& x) const {
  Vec out;
  if (!try_eval(x, out)) throw IntegrationError("trajectory left the corrector grid");
  return out;
}

int step_count(double t, double step) {
  if (t == 0.0) return 0;
  const double n = std::ceil(std::abs(t) / step - 1e-9);
  if (n > 2e9) throw ConfigError("too many integration steps");
  return std::max(1, static_cast<int>(n));
}

Vec flow_map(const DriftField& f, const Vec& x0, double t, const FlowConfig& cfg) {
  cfg.validate();
  if (x0.dim() != f.dim()) throw InputError("start point has the wrong dimension");
  const int n = step_count(t, cfg.step);
  const double h = n ? t / n : 0.0;
  Vec x = x0;
  for (int i = 0; i < n; ++i) {
    x = rk4_step(f, x, h);
    if (!x.finite()) throw IntegrationError("non-finite state at t = " + std::to_string((i + 1) * h));
  }
  return x;
}

Vec flow_map(const std::function<Vec(const Vec&)>& f, const Vec& x0, double t, const FlowConfig& cfg) {
  cfg.validate();
  const int n = step_count(t, cfg.step);
  const double h = n ? t / n : 0.0;
  Vec x = x0;
  for (int i = 0; i < n; ++i) {
    x = rk4_step(f, x, h);
    if (!x.finite()) throw IntegrationError("non-finite state at t = " + std::to_string((i + 1) * h));
  }
  return x;
}

Trajectory integrate(const DriftField& f, const Vec& x0, double t, const FlowConfig& cfg, int sample_every) {
  cfg.validate();
  if (sample_every < 1) throw InputError("sample_every must be >= 1");
  if (x0.dim() != f.dim()) throw InputError("start point has the wrong dimension");
  const int n = step_count(t, cfg.step);
  const double h = n ? t / n : 0.0;
  Trajectory traj;
  traj.field_id = f.id();
  traj.sup_speed = f.sup_bound();
  const double r0 = x0.norm();
  auto record = [&](double time, const Vec& x) {
    traj.times.push_back(time);
    traj.states.push_back(x);
    if (std::isfinite(traj.sup_speed)) {
      traj.max_growth_excess = std::max(traj.max_growth_excess, x.norm() - r0 - traj.sup_speed * std::abs(time));
    }
  };
  Vec x = x0;
  record(0.0, x);
  for (int i = 0; i < n; ++i) {
    x = rk4_step(f, x, h);
    if (!x.finite()) throw IntegrationError("non-finite state at t = " + std::to_string((i + 1) * h));
    if ((i + 1) % sample_every == 0 || i + 1 == n) record((i + 1) * h, x);
  }
  return traj;
}

InvarianceSample invariance_residual(const CorrectorField& w, const Vec& x, double h) {
  if (!(h > 0.0)) throw InputError("finite-difference step must be positive");
  const auto& psi = w.psi();
  const auto& v = w.base();
  auto flux = [&](const Vec& y) { return (v(y) + w.eval(y)) * psi_eval(psi, y); };
  InvarianceSample s;
  s.x = x;
  s.residual = central_divergence(flux, x, h);
  s.reference = psi_grad(psi, x).dot(v(x));
  return s;
}

InvarianceReport invariance_scan(const CorrectorField& w, int points_per_axis, double half_width, double h) {
  if (points_per_axis < 2) throw InputError("need at least 2 points per axis");
  if (w.psi().dim != 2) throw InputError("invariance scan is planar");
  const int n = points_per_axis;
  InvarianceReport rep;
  rep.samples.resize(static_cast<std::size_t>(n) * n);
  parallel_for(rep.samples.size(), [&](std::size_t k) {
    const int i = static_cast<int>(k) / n, j = static_cast<int>(k) % n;
    const Vec x{-half_width + 2.0 * half_width * i / (n - 1), -half_width + 2.0 * half_width * j / (n - 1)};
    rep.samples[k] = invariance_residual(w, x, h);
  });
  for (const auto& s : rep.samples) {
    rep.max_residual = std::max(rep.max_residual, std::abs(s.residual));
    rep.max_reference = std::max(rep.max_reference, std::abs(s.reference));
  }
  return rep;
}

double BumpFunction::operator()(const Vec& x) const {
  const double z2 = (x - center).norm2() / (radius * radius);
  if (z2 >= 1.0) return 0.0;
  return std::exp(1.0 - 1.0 / (1.0 - z2));
}

std::vector<Vec> sample_psi_box(const PsiParams& psi, const Vec& lo, const Vec& hi, std::size_t n,
                                std::uint64_t seed, double* acceptance) {
  psi.validate();
  if (lo.dim() != psi.dim || hi.dim() != psi.dim) throw InputError("box has the wrong dimension");
  for (int a = 0; a < lo.dim(); ++a) {
    if (!(hi[a] > lo[a])) throw InputError("box must satisfy lo < hi");
  }
  auto propose = [&](std::mt19937_64& rng) {
    Vec x(lo.dim());
    for (int a = 0; a < lo.dim(); ++a) x[a] = std::uniform_real_distribution<double>(lo[a], hi[a])(rng);
    return x;
  };
  return rejection(psi, psi_max_on_box(psi, lo, hi), n, seed, propose, acceptance);
}

std::vector<Vec> sample_psi_ball(const PsiParams& psi, const Vec& center, double radius, std::size_t n,
                                 std::uint64_t seed, double* acceptance) {
  psi.validate();
  if (center.dim() != psi.dim) throw InputError("ball center has the wrong dimension");
  if (!(radius > 0.0)) throw InputError("ball radius must be positive");
  const double dist = std::max(0.0, center.norm() - radius);
  const double psi_max = std::pow(dist * dist + psi.alpha * psi.alpha, -psi.p);
  auto propose = [&](std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-radius, radius);
    for (;;) {
      Vec z(center.dim());
      for (int a = 0; a < center.dim(); ++a) z[a] = u(rng);
      if (z.norm2() < radius * radius) return center + z;
    }
  };
  return rejection(psi, psi_max, n, seed, propose, acceptance);
}

PushforwardReport pushforward_test(const DriftField& f, const PsiParams& psi, const PushforwardConfig& cfg) {
  cfg.flow.validate();
  if (f.dim() != 2 || psi.dim != 2) throw InputError("pushforward test is planar");
  if (cfg.particles < 1000) throw ConfigError("pushforward test needs at least 1000 particles");
  if (cfg.lattice_per_axis < 1 || cfg.bootstrap < 2) throw ConfigError("bad pushforward test-function setup");

  PushforwardReport rep;
  const int m = cfg.lattice_per_axis;
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      const double a = m == 1 ? 0.0 : -cfg.extent + 2.0 * cfg.extent * i / (m - 1);
      const double b = m == 1 ? 0.0 : -cfg.extent + 2.0 * cfg.extent * j / (m - 1);
      rep.tests.push_back({Vec{a, b}, cfg.bump_radius});
    }
  }
  const double margin = cfg.time * f.sup_bound();
  for (const auto& t : rep.tests) {
    for (int a = 0; a < 2; ++a) {
      if (t.center[a] - t.radius - margin < cfg.lo[a] || t.center[a] + t.radius + margin > cfg.hi[a]) {
        throw ConfigError("test functions reach within time * sup speed of the region boundary");
      }
    }
  }

  // Exact values by tensor Gauss-Legendre.
  auto box_integral = [&](const Vec& lo, const Vec& hi, const std::function<double(const Vec&)>& g) {
    const Rule1D rx = composite_gauss_legendre(lo[0], hi[0], 24, 16);
    const Rule1D ry = composite_gauss_legendre(lo[1], hi[1], 24, 16);
    double s = 0.0;
    for (std::size_t i = 0; i < rx.nodes.size(); ++i) {
      double row = 0.0;
      for (std::size_t j = 0; j < ry.nodes.size(); ++j) row += ry.weights[j] * g(Vec{rx.nodes[i], ry.nodes[j]});
      s += rx.weights[i] * row;
    }
    return s;
  };
  const double mass = box_integral(cfg.lo, cfg.hi, [&](const Vec& x) { return psi_eval(psi, x); });
  for (const auto& t : rep.tests) {
    const Vec r{t.radius, t.radius};
    rep.expected.push_back(
        box_integral(t.center - r, t.center + r, [&](const Vec& x) { return t(x) * psi_eval(psi, x); }) / mass);
  }

  const auto starts = sample_psi_box(psi, cfg.lo, cfg.hi, cfg.particles, cfg.seed, &rep.acceptance_rate);
  const int steps = step_count(cfg.time, cfg.flow.step);
  const double h = steps ? cfg.time / steps : 0.0;
  const std::size_t n = starts.size(), nt = rep.tests.size();
  std::vector<double> phi(n * nt, 0.0);
  std::vector<char> escaped(n, 0);
  parallel_for(n, [&](std::size_t i) {
    Vec x = starts[i];
    for (int s = 0; s < steps; ++s) {
      if (!rk4_try_step(f, x, h)) {
        escaped[i] = 1;
        return;
      }
    }
    for (std::size_t j = 0; j < nt; ++j) phi[i * nt + j] = rep.tests[j](x);
  });
  rep.particles = n;
  rep.escaped = static_cast<std::size_t>(std::count(escaped.begin(), escaped.end(), 1));

  rep.empirical.assign(nt, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < nt; ++j) rep.empirical[j] += phi[i * nt + j];
  }
  for (auto& e : rep.empirical) e /= static_cast<double>(n);

  // Percentile bootstrap of the sample means.
  std::mt19937_64 rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  std::vector<std::vector<double>> boot(nt, std::vector<double>(cfg.bootstrap));
  std::vector<double> acc(nt);
  for (int b = 0; b < cfg.bootstrap; ++b) {
    std::fill(acc.begin(), acc.end(), 0.0);
    for (std::size_t s = 0; s < n; ++s) {
      const double* row = &phi[pick(rng) * nt];
      for (std::size_t j = 0; j < nt; ++j) acc[j] += row[j];
    }
    for (std::size_t j = 0; j < nt; ++j) boot[j][b] = acc[j] / static_cast<double>(n);
  }
  for (std::size_t j = 0; j < nt; ++j) {
    auto& v = boot[j];
    std::sort(v.begin(), v.end());
    const auto q = [&](double p) { return v[static_cast<std::size_t>(std::lround(p * (v.size() - 1)))]; };
    const double width = 0.5 * (q(0.975) - q(0.025));
    rep.width.push_back(width);
    const double disc = std::abs(rep.empirical[j] - rep.expected[j]);
    rep.discrepancy.push_back(disc);
    rep.max_discrepancy = std::max(rep.max_discrepancy, disc);
    rep.max_ratio = std::max(rep.max_ratio, width > 0.0 ? disc / width : (disc > 0.0 ? INFINITY : 0.0));
  }
  return rep;
}

}  // namespace fishnav
