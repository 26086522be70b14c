#pragma once

#include <cstdint>
#include <vector>

#include "fishnav/corrector.hpp"

namespace fishnav {

struct GridValidation {
  double max_error = 0.0;   // max |W_grid - W_direct| over the samples
  double sup_w = 0.0;       // max |W_direct| over the samples
  std::size_t samples = 0;
  bool ok = false;          // max_error <= tol * max(sup node |W|, sup_w)
};

/// W sampled on a planar lattice and read back with Catmull-Rom bicubic
/// interpolation. The lattice is padded by two nodes on every side so the
/// interpolant is defined on the whole box [lo, hi].
///
/// Nodes are filled tile by tile: each tile shares one local expansion of the
/// distant sources (CorrectorField::Patch), so only a small disc around every
/// node is integrated directly.
class CorrectorGrid {
 public:
  static CorrectorGrid build(const CorrectorField& w, const Vec& lo, const Vec& hi, double spacing);

  /// Window radius a CorrectorField needs for build(lo, hi, spacing).
  static double required_window(const Vec& lo, const Vec& hi, double spacing);
  /// Default lattice spacing for a corrector: a quarter of its shortest length scale.
  static double default_spacing(const CorrectorField& w);

  bool contains(const Vec& x) const;
  /// Throws ConfigError outside [lo, hi].
  Vec eval(const Vec& x) const;
  Vec operator()(const Vec& x) const { return eval(x); }
  /// Non-throwing variant for integrators; false outside [lo, hi].
  bool try_eval(const Vec& x, Vec& out) const;

  /// Certified bound on |interpolant|: max node norm times the per-axis
  /// maximum of sum |Catmull-Rom weights|, squared.
  double sup_bound() const { return sup_bound_; }
  double max_node_norm() const { return max_node_; }

  GridValidation validate(const CorrectorField& w, std::size_t samples, std::uint64_t seed,
                          double tol = 1e-3) const;

  const Vec& lo() const { return lo_; }
  const Vec& hi() const { return hi_; }
  double spacing() const { return spacing_; }
  int nx() const { return nx_; }
  int ny() const { return ny_; }

 private:
  Vec node_point(int i, int j) const;

  Vec lo_, hi_, origin_;
  double spacing_ = 0.0;
  int nx_ = 0, ny_ = 0;
  std::vector<double> values_;  // (i * ny + j) * 2 + component
  double sup_bound_ = 0.0;
  double max_node_ = 0.0;
};

}  // namespace fishnav
