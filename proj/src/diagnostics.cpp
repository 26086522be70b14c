#include "fishnav/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "fishnav/parallel.hpp"
#include "fishnav/quadrature.hpp"

namespace fishnav {

namespace {

// Composite rule on [a, a + len] fine enough for wavenumber k: one n-point
// panel integrates e^{ikx} accurately while k * panel / 2 stays below n - 12.
Rule1D axis_rule(double a, double len, double k, int n) {
  int panels = 1;
  if (k > 0.0) {
    const double max_panel = 2.0 * std::max(n - 12, 4) / k;
    panels = std::max(1, static_cast<int>(std::ceil(len / max_panel)));
  }
  return composite_gauss_legendre(a, a + len, panels, n);
}

int angular_count(double k, double radius, int quad_n) {
  const double kr = k * radius;
  return std::max(quad_n, static_cast<int>(std::ceil(1.5 * (kr + 8.0 * std::cbrt(kr)))) + 16);
}

// Integral of f over the axis-aligned box prod_a [lo_a, lo_a + len_a] given one rule per axis.
template <class F>
Vec tensor_integral(const F& f, int dim, const std::vector<Rule1D>& rules) {
  const std::size_t n0 = rules[0].nodes.size();
  std::vector<Vec> rows(n0, Vec::zeros(dim));
  parallel_for(n0, [&](std::size_t i) {
    Vec acc = Vec::zeros(dim);
    Vec y = Vec::zeros(dim);
    y[0] = rules[0].nodes[i];
    if (dim == 1) {
      acc += f(y) * rules[0].weights[i];
    } else {
      for (std::size_t j = 0; j < rules[1].nodes.size(); ++j) {
        y[1] = rules[1].nodes[j];
        if (dim == 2) {
          acc += f(y) * rules[1].weights[j];
          continue;
        }
        Vec inner = Vec::zeros(dim);
        for (std::size_t l = 0; l < rules[2].nodes.size(); ++l) {
          y[2] = rules[2].nodes[l];
          inner += f(y) * rules[2].weights[l];
        }
        acc += inner * rules[1].weights[j];
      }
      acc *= rules[0].weights[i];
    }
    rows[i] = acc;
  });
  Vec total = Vec::zeros(dim);
  for (const auto& r : rows) total += r;
  return total;
}

template <class F>
double drift_sup(const F& f, int dim, double k, double ell, const std::vector<Vec>& centers, int quad_n) {
  if (!(ell > 0.0)) throw InputError("box side must be positive");
  if (quad_n < 2) throw InputError("quad_n must be >= 2");
  if (centers.empty()) throw InputError("center list is empty");
  double sup = 0.0;
  for (const auto& c : centers) {
    if (c.dim() != dim) throw InputError("center has the wrong dimension");
    std::vector<Rule1D> rules;
    for (int a = 0; a < dim; ++a) rules.push_back(axis_rule(c[a], ell, k, quad_n));
    const Vec integral = tensor_integral(f, dim, rules);
    sup = std::max(sup, integral.norm() / std::pow(ell, dim));
  }
  return sup;
}

template <class F>
DriftReport sweep(const F& f, int dim, double k, const std::vector<double>& scales, const CenterSampler& sampler,
                  int quad_n) {
  if (scales.empty()) throw InputError("scale list is empty");
  for (std::size_t i = 1; i < scales.size(); ++i) {
    if (!(scales[i] > scales[i - 1])) throw InputError("scales must be increasing");
  }
  const auto centers = sampler.centers(dim);
  DriftReport rep;
  rep.scales = scales;
  rep.lattice_centers = centers.size() - sampler.random_count;
  rep.random_centers = sampler.random_count;
  rep.seed = sampler.seed;
  for (double ell : scales) rep.sup_box_average.push_back(drift_sup(f, dim, k, ell, centers, quad_n));
  return rep;
}

// Orthonormal frame whose last vector is `dir` (d = 3).
std::array<Vec, 3> frame_about(const Vec& dir) {
  const Vec e3 = dir / dir.norm();
  const Vec seed = std::abs(e3[0]) < 0.9 ? Vec{1.0, 0.0, 0.0} : Vec{0.0, 1.0, 0.0};
  Vec e1 = seed - e3 * seed.dot(e3);
  e1 /= e1.norm();
  const Vec e2{e3[1] * e1[2] - e3[2] * e1[1], e3[2] * e1[0] - e3[0] * e1[2], e3[0] * e1[1] - e3[1] * e1[0]};
  return {e1, e2, e3};
}

}  // namespace

std::vector<Vec> CenterSampler::centers(int dim) const {
  if (lattice_per_axis < 1) throw InputError("lattice_per_axis must be >= 1");
  std::vector<Vec> out;
  std::size_t total = 1;
  for (int a = 0; a < dim; ++a) total *= lattice_per_axis;
  for (std::size_t flat = 0; flat < total; ++flat) {
    Vec c(dim);
    std::size_t rem = flat;
    for (int a = dim - 1; a >= 0; --a) {
      const int i = static_cast<int>(rem % lattice_per_axis);
      rem /= lattice_per_axis;
      c[a] = lattice_per_axis == 1 ? 0.0 : -spread + 2.0 * spread * i / (lattice_per_axis - 1);
    }
    out.push_back(c);
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-spread, spread);
  for (std::size_t i = 0; i < random_count; ++i) {
    Vec c(dim);
    for (int a = 0; a < dim; ++a) c[a] = u(rng);
    out.push_back(c);
  }
  return out;
}

double mean_drift_box(const VectorField& field, double ell, const std::vector<Vec>& centers, int quad_n) {
  return drift_sup(field, field.dim(), field.max_wavenumber(), ell, centers, quad_n);
}

double mean_flux_box(const VectorField& field, const FluxBox& box, int quad_n) {
  const int d = field.dim();
  if (box.normal_axis < 0 || box.normal_axis >= d) throw InputError("normal axis out of range");
  if (!(box.side > 0.0)) throw InputError("box side must be positive");
  if (box.center.dim() != d) throw InputError("box center has the wrong dimension");
  const double k = field.max_wavenumber();
  std::vector<int> axes;
  for (int a = 0; a < d; ++a) {
    if (a != box.normal_axis) axes.push_back(a);
  }
  std::vector<Rule1D> rules;
  for (int a : axes) rules.push_back(axis_rule(box.center[a] - 0.5 * box.side, box.side, k, quad_n));
  // Integrate over the d-1 free coordinates; the normal coordinate stays fixed.
  auto lifted = [&](const Vec& t) {
    Vec y = box.center;
    for (std::size_t i = 0; i < axes.size(); ++i) y[axes[i]] = t[static_cast<int>(i)];
    Vec out = Vec::zeros(d - 1);
    out[0] = field(y)[box.normal_axis];
    return out;
  };
  const Vec flux = tensor_integral(lifted, d - 1, rules);
  return std::abs(flux[0]) / std::pow(box.side, d - 1);
}

double mean_flux_sphere(const VectorField& field, const Vec& center, double radius, int quad_n,
                        const std::optional<Cap>& cap) {
  const int d = field.dim();
  if (!(radius > 0.0)) throw InputError("sphere radius must be positive");
  if (center.dim() != d) throw InputError("sphere center has the wrong dimension");
  if (d != 2 && d != 3) throw InputError("sphere flux is implemented for d = 2 and d = 3");
  double half_angle = kPi;
  Vec dir = Vec::unit(d, d - 1);
  if (cap) {
    if (!(cap->chord > 0.0 && cap->chord <= 2.0)) throw InputError("cap chord must be in (0, 2]");
    if (cap->direction.dim() != d || !(cap->direction.norm() > 0.0)) throw InputError("bad cap direction");
    half_angle = 2.0 * std::asin(0.5 * cap->chord);
    dir = cap->direction / cap->direction.norm();
  }
  const double k = field.max_wavenumber();
  const int nang = angular_count(k, radius, quad_n);
  const bool full = half_angle >= kPi;

  if (d == 2) {
    auto flux_at = [&](double theta) {
      const Vec n{std::cos(theta), std::sin(theta)};
      return field(center + n * radius).dot(n);
    };
    double flux = 0.0;
    if (full) {
      for (int j = 0; j < nang; ++j) flux += flux_at(2.0 * kPi * j / nang);
      flux *= 2.0 * kPi * radius / nang;
    } else {
      const double beta = std::atan2(dir[1], dir[0]);
      const Rule1D rule = axis_rule(beta - half_angle, 2.0 * half_angle, k * radius, quad_n);
      for (std::size_t i = 0; i < rule.nodes.size(); ++i) flux += rule.weights[i] * flux_at(rule.nodes[i]);
      flux *= radius;
    }
    return std::abs(flux) / (2.0 * half_angle * radius);
  }

  const auto e = frame_about(dir);
  const double u_lo = std::cos(half_angle);
  const Rule1D urule = axis_rule(u_lo, 1.0 - u_lo, k * radius, quad_n);
  std::vector<double> rows(urule.nodes.size());
  parallel_for(rows.size(), [&](std::size_t i) {
    const double u = urule.nodes[i], s = std::sqrt(std::max(0.0, 1.0 - u * u));
    double acc = 0.0;
    for (int j = 0; j < nang; ++j) {
      const double phi = 2.0 * kPi * j / nang;
      const Vec n = e[0] * (s * std::cos(phi)) + e[1] * (s * std::sin(phi)) + e[2] * u;
      acc += field(center + n * radius).dot(n);
    }
    rows[i] = urule.weights[i] * acc * 2.0 * kPi / nang;
  });
  double flux = 0.0;
  for (double r : rows) flux += r;
  flux *= radius * radius;
  const double area = 2.0 * kPi * radius * radius * (1.0 - u_lo);
  return std::abs(flux) / area;
}

DriftReport drift_sweep(const VectorField& field, const std::vector<double>& scales, const CenterSampler& sampler,
                        int quad_n) {
  return sweep(field, field.dim(), field.max_wavenumber(), scales, sampler, quad_n);
}

std::vector<DriftReport> derivative_drift(const VectorField& field, const std::vector<double>& scales, double h,
                                          const CenterSampler& sampler, int quad_n) {
  if (!(h > 0.0)) throw InputError("finite-difference step must be positive");
  std::vector<DriftReport> out;
  for (int j = 0; j < field.dim(); ++j) {
    auto partial = [&](const Vec& x) {
      Vec xp = x, xm = x;
      xp[j] += h;
      xm[j] -= h;
      return (field(xp) - field(xm)) / (2.0 * h);
    };
    out.push_back(sweep(partial, field.dim(), field.max_wavenumber(), scales, sampler, quad_n));
  }
  return out;
}

}  // namespace fishnav
