#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "fishnav/fields.hpp"

namespace fishnav {

/// Finite-scale drift envelope: for each box side l, the largest box average
/// |l^-d int_{x+[0,l]^d} V| over the sampled corners x.
struct DriftReport {
  std::vector<double> scales;
  std::vector<double> sup_box_average;
  std::size_t lattice_centers = 0;
  std::size_t random_centers = 0;
  std::uint64_t seed = 0;

  std::size_t centers_sampled() const { return lattice_centers + random_centers; }
};

/// Box corners: a regular lattice of `lattice_per_axis`^d points spanning
/// [-spread, spread]^d plus `random_count` seeded uniform points in the same cube.
struct CenterSampler {
  int lattice_per_axis = 3;
  std::size_t random_count = 8;
  double spread = 50.0;
  std::uint64_t seed = 1;

  std::vector<Vec> centers(int dim) const;
};

inline constexpr int kDefaultQuadNodes = 32;

/// max over centers of |l^-d int_{x+[0,l]^d} V(y) dy|, tensor Gauss-Legendre.
/// Long boxes are split into panels short enough for the field's bandwidth.
double mean_drift_box(const VectorField& field, double ell, const std::vector<Vec>& centers,
                      int quad_n = kDefaultQuadNodes);

/// Axis-aligned (d-1)-box centred at `center`, normal to `normal_axis`, side `side`.
struct FluxBox {
  Vec center;
  int normal_axis = 0;
  double side = 1.0;
};

/// l^-(d-1) |int_Q V.n dH^{d-1}|.
double mean_flux_box(const VectorField& field, const FluxBox& box, int quad_n = kDefaultQuadNodes);

/// Spherical cap D_r(dir) = {y on the unit sphere : |y - dir| < chord}, scaled
/// by R about the sphere centre. chord in (0, 2].
struct Cap {
  Vec direction;
  double chord = 2.0;
};

/// Surface average |int V.n dH^{d-1}| / H^{d-1}(S) over the sphere |y - center| = R,
/// or over the cap when given. Polar rule in d = 2, lat-long product rule in d = 3.
double mean_flux_sphere(const VectorField& field, const Vec& center, double radius,
                        int quad_n = kDefaultQuadNodes, const std::optional<Cap>& cap = std::nullopt);

DriftReport drift_sweep(const VectorField& field, const std::vector<double>& scales,
                        const CenterSampler& sampler = {}, int quad_n = kDefaultQuadNodes);

/// drift_sweep applied to each partial-derivative field dV/dx_j (central differences).
std::vector<DriftReport> derivative_drift(const VectorField& field, const std::vector<double>& scales,
                                          double h = kDefaultFdStep, const CenterSampler& sampler = {},
                                          int quad_n = kDefaultQuadNodes);

}  // namespace fishnav
