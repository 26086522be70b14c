#pragma once

#include <complex>
#include <memory>
#include <mutex>
#include <optional>
#include <vector>

#include "fishnav/fields.hpp"

namespace fishnav {

/// Weight psi(x) = (|x|^2 + alpha^2)^(-p) of the invariant measure mu = psi dx.
struct PsiParams {
  int dim = 2;
  double p = 0.75;
  double alpha = 1.0;

  /// Requires (d-1)/2 < p < d/2 and alpha > 0.
  void validate() const;
  /// p at the midpoint of the admissible interval.
  static PsiParams midpoint(int dim, double alpha);
};

double psi_eval(const PsiParams& psi, const Vec& x);
Vec psi_grad(const PsiParams& psi, const Vec& x);

double unit_ball_volume(int dim);
/// c_d = 1 / (d omega_d).
double newton_constant(int dim);

struct QuadratureConfig {
  int radial_nodes = 8;        // Gauss-Legendre nodes per radial panel
  int angular_nodes = 64;      // angular nodes at zero bandwidth; scales every angular count
  double truncation_radius = 0.0;  // 0 = smallest radius meeting tail_tol
  double tail_tol = 1e-4;
  double window_radius = 10.0;     // W may be evaluated for |x| <= window_radius
  bool closed_form_rings = true;   // Bessel series for ring coefficients of trigonometric fields

  void validate() const;
};

struct CorrectorEstimate {
  Vec value;
  double err_est = 0.0;          // tail + expansion + quadrature
  double tail_bound = 0.0;
  double expansion_bound = 0.0;
  double quadrature_est = 0.0;
};

/// Newtonian-potential corrector
///
///   W(x) = 2p c_d (|x|^2+alpha^2)^p  int (x-y)/|x-y|^d  y.V(y) / (|y|^2+alpha^2)^(p+1) dy,
///
/// which makes div(psi (V + W)) = 0 for incompressible V.
///
/// The integral is taken in polar coordinates centred at x, where the Jacobian
/// rho^(d-1) cancels the kernel magnitude exactly. In d = 2 the polar rays stop
/// at |y| = R1 = 2 * window_radius; sources in R1 < |y| < R_trunc enter through
/// a local (Taylor) expansion in conj(x) whose moments are computed once at
/// construction. Sources beyond R_trunc are dropped; tail_bound() certifies the
/// loss. In d = 3 the rays run directly to R_trunc.
class CorrectorField {
 public:
  CorrectorField(VectorField base, PsiParams psi, QuadratureConfig quad = {});

  /// W(x). Throws ConfigError outside the evaluation window.
  Vec eval(const Vec& x) const;
  Vec operator()(const Vec& x) const { return eval(x); }
  CorrectorEstimate eval_with_error(const Vec& x) const;

  /// Closed form div W = 2p x.(V + W) / (|x|^2 + alpha^2), given W(x).
  double div_exact(const Vec& x, const Vec& w_at_x) const;

  double tail_bound(const Vec& x) const;

  /// Local expansion about `center` of the sources in |y| < R1 outside the
  /// disc |y - center| < radius. Usable for |x - center| <= reach < radius,
  /// where only that small disc needs direct quadrature. d = 2 only.
  struct Patch {
    Vec center;
    double radius = 0.0;
    double reach = 0.0;
    std::vector<std::complex<double>> moments;
  };
  Patch make_patch(const Vec& center, double radius, double reach) const;
  Vec eval_patch(const Patch& patch, const Vec& x) const;

  const VectorField& base() const { return base_; }
  const PsiParams& psi() const { return psi_; }
  const QuadratureConfig& quadrature() const { return quad_; }
  double c_d() const { return c_d_; }
  double truncation_radius() const { return r_trunc_; }
  double inner_radius() const { return r_inner_; }
  double window_radius() const { return quad_.window_radius; }
  int expansion_terms() const { return terms_; }

 private:
  struct Rule {
    int radial_nodes;
    double angular_scale;
  };
  using Moments = std::vector<std::complex<double>>;

  double g(const Vec& y) const;
  Vec integral(const Vec& x, const Rule& rule, const Moments& far) const;
  Vec disc_rays(const Vec& x, const Vec& center, double radius, int panels, const Rule& rule) const;
  double near_panel() const;
  Vec rays_3d(const Vec& x, const Rule& rule) const;
  Moments far_moments(const Rule& rule) const;
  double expansion_bound(const Vec& x) const;
  double prefactor(const Vec& x) const;
  void check_window(const Vec& x) const;

  VectorField base_;
  PsiParams psi_;
  QuadratureConfig quad_;
  double c_d_ = 0.0;
  double r_inner_ = 0.0;
  double r_trunc_ = 0.0;
  int terms_ = 0;
  Moments moments_;
  std::optional<std::vector<PlaneWave>> waves_;

  mutable std::once_flag coarse_once_;
  mutable Moments coarse_moments_;
};

/// W(alpha x) computed twice: directly, and through the rescaled integral
/// 2p c_d (|x|^2+1)^p int (x-y)/|x-y|^d y.V(alpha y)/(|y|^2+1)^(p+1) dy.
struct ScalingCheck {
  Vec direct;
  Vec rescaled;
  double residual = 0.0;
  double quadrature_est = 0.0;  // combined, excluding the shared truncation tail
};
ScalingCheck corrector_scaling_check(const VectorField& base, double p, const QuadratureConfig& quad,
                                     const Vec& x, double alpha);

/// int_{B_rho} y.V(scale y) / (|y|^2 + c)^p dy. Vanishes for incompressible V.
double radial_moment_check(const VectorField& base, double rho, double scale, double p, double c);

struct AlphaSweepRow {
  double alpha = 0.0;
  double sup_w = 0.0;
  double sup_div_w = 0.0;        // central differences of W
  double sup_div_w_exact = 0.0;  // closed form
  double sup_dw = 0.0;           // max_j sup |dW/dx_j|
  double div_bound = 0.0;        // (p/alpha)(|V|_inf + sup_w)
};

struct SweepGrid {
  int points_per_axis = 11;
  double half_width = 5.0;
};

std::vector<AlphaSweepRow> alpha_sweep(const VectorField& base, double p, const std::vector<double>& alphas,
                                       const SweepGrid& grid, const QuadratureConfig& quad = {},
                                       double fd_step = 1e-3);

/// mu(B_R(0)) = d omega_d int_0^R r^(d-1) (r^2+alpha^2)^(-p) dr.
double measure_ball(const PsiParams& psi, double radius);

}  // namespace fishnav
