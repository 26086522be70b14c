#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "fishnav/corrector_grid.hpp"

namespace fishnav {

struct FlowConfig {
  double step = 1e-2;
  double horizon = 0.0;

  void validate() const;
};

/// Right-hand side V or V + W, with W read from a precomputed grid.
class DriftField {
 public:
  explicit DriftField(VectorField v);
  DriftField(VectorField v, std::shared_ptr<const CorrectorGrid> w);

  int dim() const { return v_.dim(); }
  const VectorField& base() const { return v_; }
  const CorrectorGrid* corrector() const { return w_.get(); }
  bool corrected() const { return static_cast<bool>(w_); }
  /// sup|V| plus the certified sup of the W interpolant.
  double sup_bound() const;
  std::string id() const;

  /// False when x leaves the corrector grid.
  bool try_eval(const Vec& x, Vec& out) const {
    out = v_(x);
    if (!w_) return true;
    Vec w;
    if (!w_->try_eval(x, w)) return false;
    out += w;
    return true;
  }
  /// Throws IntegrationError outside the corrector grid.
  Vec operator()(const Vec& x) const;

 private:
  VectorField v_;
  std::shared_ptr<const CorrectorGrid> w_;
};

template <class F>
Vec rk4_step(const F& f, const Vec& x, double h) {
  const Vec k1 = f(x);
  const Vec k2 = f(x + k1 * (0.5 * h));
  const Vec k3 = f(x + k2 * (0.5 * h));
  const Vec k4 = f(x + k3 * h);
  return x + (k1 + 2.0 * k2 + 2.0 * k3 + k4) * (h / 6.0);
}

/// RK4 step for the non-throwing evaluator; false if any stage leaves the domain.
inline bool rk4_try_step(const DriftField& f, Vec& x, double h) {
  Vec k1, k2, k3, k4;
  if (!f.try_eval(x, k1) || !f.try_eval(x + k1 * (0.5 * h), k2) || !f.try_eval(x + k2 * (0.5 * h), k3) ||
      !f.try_eval(x + k3 * h, k4)) {
    return false;
  }
  x += (k1 + 2.0 * k2 + 2.0 * k3 + k4) * (h / 6.0);
  return true;
}

/// Number of equal steps of size at most cfg.step covering |t|.
int step_count(double t, double step);

struct Trajectory {
  std::vector<double> times;
  std::vector<Vec> states;
  std::string field_id;
  double sup_speed = 0.0;           // bound used for the growth check
  double max_growth_excess = 0.0;   // max_i |x_i| - |x_0| - sup_speed * |t_i|, should be <= 1e-6
  bool growth_ok() const { return max_growth_excess <= 1e-6; }
};

/// phi^t(x0) by fixed-step RK4; t < 0 integrates backward.
/// Throws IntegrationError on non-finite states or when leaving the W grid.
Vec flow_map(const DriftField& f, const Vec& x0, double t, const FlowConfig& cfg = {});
Vec flow_map(const std::function<Vec(const Vec&)>& f, const Vec& x0, double t, const FlowConfig& cfg = {});

/// Stored trajectory with a sample every `sample_every` steps (and at the end).
Trajectory integrate(const DriftField& f, const Vec& x0, double t, const FlowConfig& cfg = {},
                     int sample_every = 1);

/// Central-difference div(psi (V + W))(x) with W evaluated by quadrature,
/// alongside the reference scale grad(psi).V(x) = div(psi V)(x).
struct InvarianceSample {
  Vec x;
  double residual = 0.0;
  double reference = 0.0;
};
InvarianceSample invariance_residual(const CorrectorField& w, const Vec& x, double h = 1e-3);

struct InvarianceReport {
  std::vector<InvarianceSample> samples;
  double max_residual = 0.0;
  double max_reference = 0.0;
  double ratio() const { return max_reference > 0.0 ? max_residual / max_reference : max_residual; }
};
/// Residuals on an n x n lattice spanning [-half_width, half_width]^2.
InvarianceReport invariance_scan(const CorrectorField& w, int points_per_axis, double half_width, double h = 1e-3);

/// Smooth bump exp(1 - 1/(1 - |z|^2)) at z = (x - center) / radius, zero outside.
struct BumpFunction {
  Vec center;
  double radius = 1.0;
  double operator()(const Vec& x) const;
};

struct PushforwardConfig {
  Vec lo{-5.0, -5.0};
  Vec hi{5.0, 5.0};
  std::size_t particles = 100000;
  double time = 1.0;
  std::uint64_t seed = 1;
  int bootstrap = 200;
  FlowConfig flow;
  /// Test functions: lattice_per_axis^2 bumps on [-extent, extent]^2.
  int lattice_per_axis = 5;
  double extent = 2.4;
  double bump_radius = 1.0;
};

struct PushforwardReport {
  std::vector<BumpFunction> tests;
  std::vector<double> expected;     // int phi dmu / mu(region)
  std::vector<double> empirical;    // mean phi(X_t)
  std::vector<double> discrepancy;  // |empirical - expected|
  std::vector<double> width;        // bootstrap 95% half-width of the empirical mean
  double max_discrepancy = 0.0;
  double max_ratio = 0.0;           // max discrepancy / width
  double acceptance_rate = 0.0;
  std::size_t particles = 0;
  std::size_t escaped = 0;
};

/// Samples mu = psi dx restricted to the box, flows the sample for cfg.time
/// under `f`, and compares test-function averages against their exact values.
/// The bumps must stay farther than time * sup speed from the box edge.
PushforwardReport pushforward_test(const DriftField& f, const PsiParams& psi, const PushforwardConfig& cfg);

/// Draws n points from psi dx restricted to the box [lo, hi] by rejection.
/// Throws ConfigError when the expected acceptance rate is below 1%.
std::vector<Vec> sample_psi_box(const PsiParams& psi, const Vec& lo, const Vec& hi, std::size_t n,
                                std::uint64_t seed, double* acceptance = nullptr);
/// Same for a ball.
std::vector<Vec> sample_psi_ball(const PsiParams& psi, const Vec& center, double radius, std::size_t n,
                                 std::uint64_t seed, double* acceptance = nullptr);

}  // namespace fishnav
