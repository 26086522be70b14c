#include "fishnav/corrector.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/special_functions/bessel.hpp>

#include "fishnav/parallel.hpp"
#include "fishnav/quadrature.hpp"

namespace fishnav {

namespace {

using cplx = std::complex<double>;

// Relative truncation level of each ring's local expansion.
constexpr double kRingEps = 1e-13;
constexpr int kMaxTerms = 64;

int ring_terms(double window, double r) {
  const double q = window / r;
  if (q <= 0.0) return 1;
  return std::clamp(static_cast<int>(std::ceil(std::log(kRingEps) / std::log(q))), 1, kMaxTerms);
}

// Extra angular resolution for the bump of g near the origin seen from x: the
// ray integrals are analytic in a strip of half-width ~alpha/|x| in angle.
double bump_bandwidth(double xnorm, double alpha) { return 28.0 * xnorm / alpha; }

double wave_bandwidth(double k, double rho) {
  const double kr = k * rho;
  return kr + 8.0 * std::cbrt(kr);
}

// J_0..J_m at z >= 0. Upward recurrence is stable for orders below z.
void bessel_table(double z, int m, std::vector<double>& out) {
  out.assign(m + 1, 0.0);
  if (z == 0.0) {
    out[0] = 1.0;
    return;
  }
  if (z > m + 1) {
    out[0] = boost::math::cyl_bessel_j(0, z);
    if (m >= 1) out[1] = boost::math::cyl_bessel_j(1, z);
    for (int n = 1; n < m; ++n) out[n + 1] = 2.0 * n / z * out[n] - out[n - 1];
  } else {
    for (int n = 0; n <= m; ++n) out[n] = boost::math::cyl_bessel_j(n, z);
  }
}

// acc[m-1] += F_m = int_0^{2pi} yhat.V(r yhat) e^{i m theta} dtheta, m = 1..nr,
// from e^{i z cos(theta - beta)} = sum_l i^l J_l(z) e^{i l (theta - beta)}.
void ring_series(const std::vector<PlaneWave>& waves, double r, int nr, std::vector<double>& jn,
                 std::vector<cplx>& acc) {
  const cplx I(0.0, 1.0);
  for (const auto& w : waves) {
    const double kap = std::hypot(w.kappa[0], w.kappa[1]);
    const double beta = kap > 0.0 ? std::atan2(w.kappa[1], w.kappa[0]) : 0.0;
    bessel_table(kap * r, nr + 1, jn);
    const cplx am = 0.5 * (w.amp[0] - I * w.amp[1]);  // coefficient of e^{i theta}
    const cplx ap = 0.5 * (w.amp[0] + I * w.amp[1]);  // coefficient of e^{-i theta}
    const cplx u = I * std::polar(1.0, beta);
    cplx um1(1.0, 0.0);  // u^(m-1)
    for (int m = 1; m <= nr; ++m) {
      const cplx up1 = um1 * u * u;
      acc[m - 1] += 2.0 * kPi * (am * jn[m + 1] * up1 + ap * jn[m - 1] * um1);
      um1 *= u;
    }
  }
}

double sphere_area(int dim) { return dim == 2 ? 2.0 * kPi : 4.0 * kPi; }

}  // namespace

void PsiParams::validate() const {
  if (dim < 2 || dim > kMaxDim) throw InputError("psi: dimension must be 2 or 3");
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw InputError("psi: alpha must be positive");
  const double lo = 0.5 * (dim - 1), hi = 0.5 * dim;
  if (!(p > lo && p < hi)) {
    throw InputError("psi: p must lie in ((d-1)/2, d/2) = (" + std::to_string(lo) + ", " +
                     std::to_string(hi) + ")");
  }
}

PsiParams PsiParams::midpoint(int dim, double alpha) { return {dim, 0.25 * (2 * dim - 1), alpha}; }

double psi_eval(const PsiParams& psi, const Vec& x) {
  return std::pow(x.norm2() + psi.alpha * psi.alpha, -psi.p);
}

Vec psi_grad(const PsiParams& psi, const Vec& x) {
  const double s = x.norm2() + psi.alpha * psi.alpha;
  return x * (-2.0 * psi.p * std::pow(s, -psi.p - 1.0));
}

double unit_ball_volume(int dim) {
  switch (dim) {
    case 1: return 2.0;
    case 2: return kPi;
    case 3: return 4.0 * kPi / 3.0;
    default: throw InputError("unsupported dimension");
  }
}

double newton_constant(int dim) { return 1.0 / (dim * unit_ball_volume(dim)); }

void QuadratureConfig::validate() const {
  if (radial_nodes < 2 || radial_nodes > 64) throw ConfigError("radial_nodes must be in [2, 64]");
  if (angular_nodes < 8) throw ConfigError("angular_nodes must be >= 8");
  if (!(tail_tol > 0.0)) throw ConfigError("tail_tol must be positive");
  if (!(window_radius > 0.0) || !std::isfinite(window_radius)) {
    throw ConfigError("window_radius must be positive and finite");
  }
  if (truncation_radius < 0.0) throw ConfigError("truncation_radius must be >= 0");
}

CorrectorField::CorrectorField(VectorField base, PsiParams psi, QuadratureConfig quad)
    : base_(std::move(base)), psi_(psi), quad_(quad) {
  psi_.validate();
  quad_.validate();
  if (base_.dim() != psi_.dim) throw InputError("corrector: field and psi dimensions differ");
  if (!base_.bounded()) throw InputError("corrector: base field must be bounded");
  c_d_ = newton_constant(psi_.dim);

  const double rw = quad_.window_radius;
  r_inner_ = psi_.dim == 2 ? std::max(2.0 * rw, 2.0) : 0.0;
  const double r_min = psi_.dim == 2 ? 2.0 * r_inner_ : 2.0 * rw;
  const Vec edge = Vec::unit(psi_.dim, 0) * rw;

  if (quad_.truncation_radius > 0.0) {
    r_trunc_ = quad_.truncation_radius;
    if (r_trunc_ < r_min) {
      throw ConfigError("truncation_radius must be at least " + std::to_string(r_min));
    }
    if (tail_bound(edge) > quad_.tail_tol) {
      throw ConfigError("truncation_radius too small for tail_tol at the window edge");
    }
  } else if (base_.sup_bound() == 0.0) {
    r_trunc_ = r_min;
  } else {
    const double a2 = rw * rw + psi_.alpha * psi_.alpha;
    const double lead = psi_.dim == 2 ? 1.0 : std::pow(2.0, psi_.dim - 1);
    double r = r_min;
    for (int it = 0; it < 50; ++it) {
      const double q = psi_.dim == 2 ? rw / r : 0.0;
      const double next =
          std::sqrt(a2) * std::pow(lead * base_.sup_bound() / (quad_.tail_tol * (1.0 - q)), 0.5 / psi_.p);
      if (std::abs(next - r) <= 1e-12 * r) break;
      r = next;
    }
    r_trunc_ = std::max(1.001 * r, r_min);
  }

  if (psi_.dim == 2 && base_.sup_bound() > 0.0) {
    waves_ = base_.plane_waves();
    terms_ = ring_terms(rw, r_inner_);
    moments_ = far_moments({quad_.radial_nodes, 1.0});
  }
}

double CorrectorField::g(const Vec& y) const {
  const double s = y.norm2() + psi_.alpha * psi_.alpha;
  return y.dot(base_(y)) * std::pow(s, -psi_.p - 1.0);
}

double CorrectorField::prefactor(const Vec& x) const {
  return 2.0 * psi_.p * c_d_ * std::pow(x.norm2() + psi_.alpha * psi_.alpha, psi_.p);
}

void CorrectorField::check_window(const Vec& x) const {
  if (x.dim() != psi_.dim) throw InputError("corrector: point has the wrong dimension");
  if (!x.finite()) throw InputError("corrector: non-finite point");
  if (x.norm() > quad_.window_radius * (1.0 + 1e-12)) {
    throw ConfigError("corrector evaluated at |x| = " + std::to_string(x.norm()) +
                      " outside window_radius = " + std::to_string(quad_.window_radius));
  }
}

double CorrectorField::tail_bound(const Vec& x) const {
  const double vmax = base_.sup_bound();
  if (vmax == 0.0) return 0.0;
  const double ratio = std::pow((x.norm2() + psi_.alpha * psi_.alpha) / (r_trunc_ * r_trunc_), psi_.p);
  if (psi_.dim == 2) {
    const double q = x.norm() / r_trunc_;
    if (q >= 1.0) return std::numeric_limits<double>::infinity();
    return vmax * ratio / (1.0 - q);
  }
  if (2.0 * x.norm() > r_trunc_) return std::numeric_limits<double>::infinity();
  return std::pow(2.0, psi_.dim - 1) * vmax * ratio;
}

double CorrectorField::expansion_bound(const Vec& x) const {
  if (psi_.dim != 2 || base_.sup_bound() == 0.0) return 0.0;
  const double q = quad_.window_radius / r_inner_;
  return prefactor(x) * 2.0 * kPi * base_.sup_bound() * kRingEps * std::pow(r_inner_, -2.0 * psi_.p) /
         (2.0 * psi_.p * (1.0 - q));
}

// Moments M_n = int_{R1<|y|<R} g(y) conj(y)^-(n+1) dy of the sources outside
// the inner disc, so that their contribution at |x| < R1 is -sum_n conj(x)^n M_n.
// Per ring the angular integrals F_m = int f(theta) e^{i m theta} dtheta of
// f = yhat.V(r yhat) come from the Bessel series when V is a finite sum of plane
// waves, otherwise from the trapezoid rule.
CorrectorField::Moments CorrectorField::far_moments(const Rule& rule) const {
  const double alpha = psi_.alpha;
  const double k = base_.max_wavenumber();
  const double panel = std::min(2.0 * base_.length_scale(), 0.5 * r_inner_);
  const int panels = std::max(1, static_cast<int>(std::ceil((r_trunc_ - r_inner_) / panel)));
  const Rule1D radial = composite_gauss_legendre(r_inner_, r_trunc_, panels, rule.radial_nodes);
  const double scale = rule.angular_scale * quad_.angular_nodes / 64.0;
  const bool series = waves_.has_value() && quad_.closed_form_rings;

  const std::size_t rings = radial.nodes.size();
  const std::size_t blocks = std::min<std::size_t>(rings, 256);
  std::vector<Moments> partial(blocks, Moments(terms_, cplx(0.0, 0.0)));

  parallel_for(blocks, [&](std::size_t b) {
    Moments& acc_total = partial[b];
    std::vector<cplx> acc(terms_);
    std::vector<double> jn;
    const std::size_t lo = rings * b / blocks, hi = rings * (b + 1) / blocks;
    for (std::size_t i = lo; i < hi; ++i) {
      const double r = radial.nodes[i];
      const int nr = std::min(terms_, ring_terms(quad_.window_radius, r));
      std::fill(acc.begin(), acc.begin() + nr, cplx(0.0, 0.0));
      double angular = 1.0;
      if (series) {
        ring_series(*waves_, r, nr, jn, acc);
      } else {
        const int ntheta = static_cast<int>(std::ceil(scale * (64.0 + wave_bandwidth(k, r)))) + nr + 1;
        const cplx step = std::polar(1.0, 2.0 * kPi / ntheta);
        cplx z(1.0, 0.0);
        for (int j = 0; j < ntheta; ++j) {
          if ((j & 255) == 0) z = std::polar(1.0, 2.0 * kPi * j / ntheta);
          const Vec yhat{z.real(), z.imag()};
          cplx zp = z * yhat.dot(base_(yhat * r));
          for (int n = 0; n < nr; ++n) {
            acc[n] += zp;
            zp *= z;
          }
          z *= step;
        }
        angular = 2.0 * kPi / ntheta;
      }
      const double ring_weight = radial.weights[i] * r * std::pow(r * r + alpha * alpha, -psi_.p - 1.0) * angular;
      double rpow = 1.0;
      for (int n = 0; n < nr; ++n) {
        acc_total[n] += acc[n] * (ring_weight * rpow);
        rpow /= r;
      }
    }
  });

  Moments total(terms_, cplx(0.0, 0.0));
  for (const auto& part : partial) {
    for (int n = 0; n < terms_; ++n) total[n] += part[n];
  }
  return total;
}

double CorrectorField::near_panel() const { return std::min(2.0 * base_.length_scale(), psi_.alpha); }

// Polar rays from x over the disc |y - center| < radius (x inside). Along
// y = x + rho s the kernel times the Jacobian is -s, so each ray contributes
// -s int g(x + rho s) drho. Every ray uses the same number of panels, stretched
// to its length, so the rule varies smoothly with x.
Vec CorrectorField::disc_rays(const Vec& x, const Vec& center, double radius, int panels,
                              const Rule& rule) const {
  const auto& gl = gauss_legendre(rule.radial_nodes);
  const Vec rel = x - center;
  const double reach = radius + rel.norm();
  const double cn = center.norm();
  const double bump = cn < radius ? bump_bandwidth(x.norm(), psi_.alpha)
                                  : 28.0 * reach / std::hypot(cn - radius, psi_.alpha);
  const double scale = rule.angular_scale * quad_.angular_nodes / 64.0;
  const int nphi = static_cast<int>(std::ceil(scale * (64.0 + wave_bandwidth(base_.max_wavenumber(), reach) + bump)));
  const double c = radius * radius - rel.norm2();

  Vec total = Vec::zeros(2);
  for (int j = 0; j < nphi; ++j) {
    const double phi = 2.0 * kPi * j / nphi;
    const Vec s{std::cos(phi), std::sin(phi)};
    const double b = rel.dot(s);
    const double rho_hi = -b + std::sqrt(b * b + c);
    const double h = rho_hi / panels;
    double ray = 0.0;
    for (int pnl = 0; pnl < panels; ++pnl) {
      const double mid = (pnl + 0.5) * h;
      for (int q = 0; q < rule.radial_nodes; ++q) {
        ray += gl.weights[q] * g(x + s * (mid + 0.5 * h * gl.nodes[q]));
      }
    }
    total -= s * (0.5 * h * ray);
  }
  return total * (2.0 * kPi / nphi);
}

// d = 3: rays from x straight to the truncation sphere. Directions use
// Gauss-Legendre in cos(theta) and the trapezoid rule in phi.
Vec CorrectorField::rays_3d(const Vec& x, const Rule& rule) const {
  const double rt = r_trunc_;
  const int panels = std::max(1, static_cast<int>(std::ceil((rt + quad_.window_radius) / near_panel())));
  const auto& gl = gauss_legendre(rule.radial_nodes);
  const double xn = x.norm();
  const double scale = rule.angular_scale * quad_.angular_nodes / 64.0;
  const double band = wave_bandwidth(base_.max_wavenumber(), rt + xn) + bump_bandwidth(xn, psi_.alpha);
  const int nphi = static_cast<int>(std::ceil(scale * (64.0 + band)));
  const int nu = std::min(512, nphi / 2 + 1);
  const auto& glu = gauss_legendre(nu);
  const double c = rt * rt - x.norm2();

  std::vector<Vec> rows(nu, Vec::zeros(3));
  parallel_for(static_cast<std::size_t>(nu), [&](std::size_t iu) {
    const double u = glu.nodes[iu];
    const double sin_t = std::sqrt(std::max(0.0, 1.0 - u * u));
    Vec acc = Vec::zeros(3);
    for (int j = 0; j < nphi; ++j) {
      const double phi = 2.0 * kPi * j / nphi;
      const Vec s{sin_t * std::cos(phi), sin_t * std::sin(phi), u};
      const double b = x.dot(s);
      const double rho_hi = -b + std::sqrt(b * b + c);
      const double h = rho_hi / panels;
      double ray = 0.0;
      for (int pnl = 0; pnl < panels; ++pnl) {
        const double mid = (pnl + 0.5) * h;
        for (int q = 0; q < rule.radial_nodes; ++q) {
          ray += gl.weights[q] * g(x + s * (mid + 0.5 * h * gl.nodes[q]));
        }
      }
      acc -= s * (0.5 * h * ray);
    }
    rows[iu] = acc * (glu.weights[iu] * 2.0 * kPi / nphi);
  });
  Vec total = Vec::zeros(3);
  for (const auto& r : rows) total += r;
  return total;
}

namespace {

cplx horner_conj(const std::vector<cplx>& m, const Vec& x) {
  const cplx xb(x[0], -x[1]);
  cplx acc(0.0, 0.0);
  for (int n = static_cast<int>(m.size()) - 1; n >= 0; --n) acc = acc * xb + m[n];
  return acc;
}

}  // namespace

Vec CorrectorField::integral(const Vec& x, const Rule& rule, const Moments& far) const {
  if (psi_.dim == 3) return rays_3d(x, rule);
  const int panels =
      std::max(1, static_cast<int>(std::ceil((r_inner_ + quad_.window_radius) / near_panel())));
  Vec near = disc_rays(x, Vec::zeros(2), r_inner_, panels, rule);
  const cplx f = horner_conj(far, x);
  near[0] -= f.real();
  near[1] -= f.imag();
  return near;
}

CorrectorField::Patch CorrectorField::make_patch(const Vec& center, double radius, double reach) const {
  if (psi_.dim != 2) throw ConfigError("corrector patches are planar");
  if (!(reach >= 0.0 && reach < radius)) throw ConfigError("patch reach must be in [0, radius)");
  const double cn = center.norm();
  if (cn + radius >= r_inner_) throw ConfigError("patch disc leaves the inner quadrature disc");
  Patch patch{center, radius, reach, {}};
  if (base_.sup_bound() == 0.0) return patch;

  const int terms = reach == 0.0 ? 1
                                 : std::clamp(static_cast<int>(std::ceil(std::log(kRingEps) / std::log(reach / radius))),
                                              1, kMaxTerms);
  const Rule rule{quad_.radial_nodes, 1.0};
  const auto& gl = gauss_legendre(rule.radial_nodes);
  const double span = r_inner_ + cn - radius;
  const int panels = std::max(1, static_cast<int>(std::ceil(span / near_panel())));
  const double bump = cn > radius ? bump_bandwidth(cn, psi_.alpha)
                                  : 28.0 * radius / std::hypot(radius - cn, psi_.alpha);
  const double scale = quad_.angular_nodes / 64.0;
  const int nphi = static_cast<int>(
      std::ceil(scale * (64.0 + wave_bandwidth(base_.max_wavenumber(), r_inner_ + cn) + bump))) + terms + 1;
  const double c = r_inner_ * r_inner_ - center.norm2();

  // Rays from the centre over radius < rho < boundary of the inner disc:
  // M_n = int dphi e^{i(n+1)phi} int drho rho^-n g(center + rho s).
  std::vector<cplx> moments(terms, cplx(0.0, 0.0));
  std::vector<double> radial(terms);
  for (int j = 0; j < nphi; ++j) {
    const double phi = 2.0 * kPi * j / nphi;
    const cplx z = std::polar(1.0, phi);
    const Vec s{z.real(), z.imag()};
    const double b = center.dot(s);
    const double rho_hi = -b + std::sqrt(b * b + c);
    const double h = (rho_hi - radius) / panels;
    std::fill(radial.begin(), radial.end(), 0.0);
    for (int pnl = 0; pnl < panels; ++pnl) {
      const double mid = radius + (pnl + 0.5) * h;
      for (int q = 0; q < rule.radial_nodes; ++q) {
        const double rho = mid + 0.5 * h * gl.nodes[q];
        double val = 0.5 * h * gl.weights[q] * g(center + s * rho);
        const double inv = 1.0 / rho;
        for (int n = 0; n < terms; ++n) {
          radial[n] += val;
          val *= inv;
        }
      }
    }
    cplx zp = z;
    for (int n = 0; n < terms; ++n) {
      moments[n] += zp * radial[n];
      zp *= z;
    }
  }
  for (auto& m : moments) m *= 2.0 * kPi / nphi;
  patch.moments = std::move(moments);
  return patch;
}

Vec CorrectorField::eval_patch(const Patch& patch, const Vec& x) const {
  check_window(x);
  if (base_.sup_bound() == 0.0) return Vec::zeros(2);
  const Vec rel = x - patch.center;
  if (rel.norm() > patch.reach * (1.0 + 1e-12)) throw ConfigError("point outside the patch reach");
  const Rule rule{quad_.radial_nodes, 1.0};
  const int panels = std::max(1, static_cast<int>(std::ceil((patch.radius + patch.reach) / near_panel())));
  Vec total = disc_rays(x, patch.center, patch.radius, panels, rule);
  const cplx local = horner_conj(patch.moments, rel);
  const cplx far = horner_conj(moments_, x);
  total[0] -= local.real() + far.real();
  total[1] -= local.imag() + far.imag();
  return total * prefactor(x);
}

Vec CorrectorField::eval(const Vec& x) const {
  check_window(x);
  if (base_.sup_bound() == 0.0) return Vec::zeros(psi_.dim);
  return integral(x, {quad_.radial_nodes, 1.0}, moments_) * prefactor(x);
}

CorrectorEstimate CorrectorField::eval_with_error(const Vec& x) const {
  check_window(x);
  CorrectorEstimate est;
  if (base_.sup_bound() == 0.0) {
    est.value = Vec::zeros(psi_.dim);
    return est;
  }
  const Rule coarse{std::max(2, quad_.radial_nodes - 2), 0.8};
  if (psi_.dim == 2) {
    std::call_once(coarse_once_, [&] { coarse_moments_ = far_moments(coarse); });
  }
  const double pre = prefactor(x);
  est.value = integral(x, {quad_.radial_nodes, 1.0}, moments_) * pre;
  const Vec rough = integral(x, coarse, coarse_moments_) * pre;
  est.quadrature_est = (est.value - rough).norm();
  est.tail_bound = tail_bound(x);
  est.expansion_bound = expansion_bound(x);
  est.err_est = est.quadrature_est + est.tail_bound + est.expansion_bound;
  return est;
}

double CorrectorField::div_exact(const Vec& x, const Vec& w_at_x) const {
  return 2.0 * psi_.p * x.dot(base_(x) + w_at_x) / (x.norm2() + psi_.alpha * psi_.alpha);
}

ScalingCheck corrector_scaling_check(const VectorField& base, double p, const QuadratureConfig& quad,
                                     const Vec& x, double alpha) {
  if (!(alpha > 0.0)) throw InputError("scaling check: alpha must be positive");
  const int d = base.dim();
  QuadratureConfig q1 = quad;
  q1.truncation_radius = 0.0;
  q1.window_radius = std::max(1.02 * alpha * x.norm(), 0.1 * alpha);
  const CorrectorField direct(base, {d, p, alpha}, q1);

  // At alpha = 1 both routes run the same rule.
  QuadratureConfig q2 = quad;
  q2.window_radius = q1.window_radius / alpha;
  q2.truncation_radius = direct.truncation_radius() / alpha;
  const CorrectorField rescaled(VectorField::scaled(base, 1.0, alpha), {d, p, 1.0}, q2);

  const auto e1 = direct.eval_with_error(x * alpha);
  const auto e2 = rescaled.eval_with_error(x);
  ScalingCheck out;
  out.direct = e1.value;
  out.rescaled = e2.value;
  out.residual = (e1.value - e2.value).norm();
  out.quadrature_est = e1.quadrature_est + e1.expansion_bound + e2.quadrature_est + e2.expansion_bound;
  return out;
}

double radial_moment_check(const VectorField& base, double rho, double scale, double p, double c) {
  if (!(rho > 0.0)) throw InputError("radial moment: rho must be positive");
  if (!(c > 0.0)) throw InputError("radial moment: c must be positive");
  const int d = base.dim();
  const double k = base.max_wavenumber() * std::abs(scale);
  const double panel = std::min(k > 0.0 ? 2.0 / k : rho, std::sqrt(c));
  const int panels = std::max(2, static_cast<int>(std::ceil(rho / panel)));
  const Rule1D radial = composite_gauss_legendre(0.0, rho, panels, 16);
  const int nang = 64 + 2 * static_cast<int>(std::ceil(wave_bandwidth(k, rho)));

  auto integrand = [&](const Vec& yhat, double r) {
    return r * yhat.dot(base(yhat * (r * scale))) * std::pow(r * r + c, -p);
  };

  double total = 0.0;
  if (d == 2) {
    for (int j = 0; j < nang; ++j) {
      const double t = 2.0 * kPi * j / nang;
      const Vec yhat{std::cos(t), std::sin(t)};
      for (std::size_t i = 0; i < radial.nodes.size(); ++i) {
        const double r = radial.nodes[i];
        total += radial.weights[i] * r * integrand(yhat, r);
      }
    }
    return total * 2.0 * kPi / nang;
  }
  if (d == 3) {
    const auto& glu = gauss_legendre(std::min(512, nang / 2 + 1));
    for (std::size_t iu = 0; iu < glu.nodes.size(); ++iu) {
      const double u = glu.nodes[iu], st = std::sqrt(1.0 - u * u);
      for (int j = 0; j < nang; ++j) {
        const double t = 2.0 * kPi * j / nang;
        const Vec yhat{st * std::cos(t), st * std::sin(t), u};
        for (std::size_t i = 0; i < radial.nodes.size(); ++i) {
          const double r = radial.nodes[i];
          total += glu.weights[iu] * radial.weights[i] * r * r * integrand(yhat, r);
        }
      }
    }
    return total * 2.0 * kPi / nang;
  }
  throw InputError("radial moment: dimension must be 2 or 3");
}

std::vector<AlphaSweepRow> alpha_sweep(const VectorField& base, double p, const std::vector<double>& alphas,
                                       const SweepGrid& grid, const QuadratureConfig& quad, double fd_step) {
  if (base.dim() != 2) throw InputError("alpha sweep is defined on a planar grid");
  if (grid.points_per_axis < 2) throw InputError("alpha sweep needs at least 2 points per axis");
  const int n = grid.points_per_axis;
  std::vector<Vec> pts;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double a = -grid.half_width + 2.0 * grid.half_width * i / (n - 1);
      const double b = -grid.half_width + 2.0 * grid.half_width * j / (n - 1);
      pts.push_back(Vec{a, b});
    }
  }
  std::vector<AlphaSweepRow> rows;
  for (double alpha : alphas) {
    QuadratureConfig q = quad;
    q.window_radius = std::sqrt(2.0) * grid.half_width + 2.0 * fd_step;
    const CorrectorField w(base, {2, p, alpha}, q);
    struct Sample {
      double w, div, div_exact, dw;
    };
    std::vector<Sample> samples(pts.size());
    parallel_for(pts.size(), [&](std::size_t i) {
      const Vec& x = pts[i];
      const Vec wx = w.eval(x);
      const Mat jac = central_jacobian(w, x, fd_step);
      double dw = 0.0;
      for (int col = 0; col < 2; ++col) dw = std::max(dw, std::hypot(jac(0, col), jac(1, col)));
      samples[i] = {wx.norm(), jac(0, 0) + jac(1, 1), w.div_exact(x, wx), dw};
    });
    AlphaSweepRow row;
    row.alpha = alpha;
    for (const auto& s : samples) {
      row.sup_w = std::max(row.sup_w, s.w);
      row.sup_div_w = std::max(row.sup_div_w, std::abs(s.div));
      row.sup_div_w_exact = std::max(row.sup_div_w_exact, std::abs(s.div_exact));
      row.sup_dw = std::max(row.sup_dw, s.dw);
    }
    row.div_bound = p / alpha * (base.sup_bound() + row.sup_w);
    rows.push_back(row);
  }
  return rows;
}

double measure_ball(const PsiParams& psi, double radius) {
  psi.validate();
  if (!(radius >= 0.0)) throw InputError("measure_ball: radius must be >= 0");
  if (radius == 0.0) return 0.0;
  const int d = psi.dim;
  const double a2 = psi.alpha * psi.alpha;
  const double val = integrate_adaptive(
      [&](double r) { return std::pow(r, d - 1) * std::pow(r * r + a2, -psi.p); }, 0.0, radius, 1e-13);
  return sphere_area(d) * val;
}

}  // namespace fishnav
