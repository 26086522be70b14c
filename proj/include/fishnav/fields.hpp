#pragma once

#include <complex>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fishnav/vec.hpp"

namespace fishnav {

enum class FieldKind { constant, shear_sin, taylor_green, grid, linear, sum, scaled };

std::string to_string(FieldKind kind);

/// Node values of a periodic lattice field. Node (i_1, ..., i_d) sits at
/// origin + i * spacing; the lattice tiles space with period n * spacing.
struct GridData {
  int dim = 0;
  std::array<int, kMaxDim> n{};
  Vec origin;
  Vec spacing;
  std::vector<double> values;  // node-major, axis 0 slowest, d components per node
  std::string source;          // CSV path, kept for serialization

  Vec node_value(std::array<int, kMaxDim> idx) const;
};

/// One term amp * exp(i kappa.x) of a trigonometric-polynomial field.
struct PlaneWave {
  Vec kappa;
  std::array<std::complex<double>, kMaxDim> amp{};
};

/// Reads a lattice CSV with header `x1,...,xd,v1,...,vd` (row-major).
GridData read_grid_csv(const std::filesystem::path& path);

/// Bounded velocity field described declaratively, so that every run can be
/// reproduced from its JSON spec.
class VectorField {
 public:
  static VectorField constant(const Vec& value);
  static VectorField zero(int dim);
  /// V = (0, a sin(k x1), 0...): the canonical wandering example.
  static VectorField shear_sin(int dim = 2, double amplitude = 1.0, double wavenumber = 1.0);
  /// V = a(-sin kx1 cos kx2, cos kx1 sin kx2).
  static VectorField taylor_green(double amplitude = 1.0, double wavenumber = 1.0);
  /// V = A x. Unbounded; only for flow and diagnostic tests.
  static VectorField linear(const Mat& matrix);
  static VectorField grid(GridData data);
  static VectorField sum(const VectorField& a, const VectorField& b);
  /// factor * F(dilation * x).
  static VectorField scaled(const VectorField& field, double factor, double dilation = 1.0);

  int dim() const { return dim_; }
  FieldKind kind() const { return kind_; }
  double sup_bound() const { return sup_; }
  std::optional<double> lip_bound() const { return lip_; }
  /// Upper bound on the spatial frequency content; 0 for constants.
  double max_wavenumber() const { return wavenumber_; }
  /// Shortest length on which the field varies (1 / wavenumber, +inf for constants).
  double length_scale() const;
  bool bounded() const { return std::isfinite(sup_); }

  /// Throws InputError on a dimension mismatch.
  Vec eval(const Vec& x) const;
  Vec operator()(const Vec& x) const { return eval_unchecked(x); }
  Vec eval_unchecked(const Vec& x) const;

  /// Exact expansion as a finite sum of plane waves, or nullopt for grid and
  /// linear fields. The sum is real.
  std::optional<std::vector<PlaneWave>> plane_waves() const;

  nlohmann::json to_json() const;
  static VectorField from_json(const nlohmann::json& spec,
                               const std::filesystem::path& base_dir = {});

 private:
  VectorField() = default;

  FieldKind kind_ = FieldKind::constant;
  int dim_ = 0;
  std::vector<double> params_;
  std::shared_ptr<const GridData> grid_;
  std::vector<std::shared_ptr<const VectorField>> children_;
  double sup_ = 0.0;
  std::optional<double> lip_;
  double wavenumber_ = 0.0;
};

/// Field from a CLI argument: a built-in name (`zero`, `shear_sin`,
/// `taylor_green`, `circular`, `constant:1,0`) or a path to a JSON spec.
VectorField field_from_arg(const std::string& arg, int dim = 2);

template <class F>
double central_divergence(const F& f, const Vec& x, double h) {
  double div = 0.0;
  for (int i = 0; i < x.dim(); ++i) {
    Vec xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    div += (f(xp)[i] - f(xm)[i]) / (2.0 * h);
  }
  return div;
}

/// Row i holds the gradient of component i.
template <class F>
Mat central_jacobian(const F& f, const Vec& x, double h) {
  Mat jac = Mat::zeros(x.dim());
  for (int j = 0; j < x.dim(); ++j) {
    Vec xp = x, xm = x;
    xp[j] += h;
    xm[j] -= h;
    const Vec fp = f(xp), fm = f(xm);
    for (int i = 0; i < x.dim(); ++i) jac(i, j) = (fp[i] - fm[i]) / (2.0 * h);
  }
  return jac;
}

inline constexpr double kDefaultFdStep = 1e-4;

double divergence_fd(const VectorField& field, const Vec& x, double h = kDefaultFdStep);
Mat jacobian_fd(const VectorField& field, const Vec& x, double h = kDefaultFdStep);

}  // namespace fishnav
