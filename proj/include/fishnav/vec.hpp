#pragma once

#include <array>
#include <cmath>
#include <initializer_list>
#include <span>

#include "fishnav/errors.hpp"

namespace fishnav {

inline constexpr int kMaxDim = 3;
inline constexpr double kPi = 3.14159265358979323846;

/// Small point/vector with inline storage for d <= 3.
///
/// All field, flow and quadrature code passes states by value; keeping the
/// storage inline avoids heap traffic in the integrator's inner loop.
class Vec {
 public:
  Vec() = default;

  explicit Vec(int dim) : dim_(dim) {
    if (dim < 1 || dim > kMaxDim) {
      throw InputError("dimension must be in [1, 3], got " + std::to_string(dim));
    }
  }

  Vec(std::initializer_list<double> values) : Vec(static_cast<int>(values.size())) {
    int i = 0;
    for (double v : values) c_[i++] = v;
  }

  static Vec zeros(int dim) { return Vec(dim); }

  static Vec unit(int dim, int axis) {
    Vec e(dim);
    e[axis] = 1.0;
    return e;
  }

  static Vec from_span(std::span<const double> values) {
    Vec v(static_cast<int>(values.size()));
    for (int i = 0; i < v.dim(); ++i) v[i] = values[i];
    return v;
  }

  int dim() const { return dim_; }

  double& operator[](int i) { return c_[i]; }
  double operator[](int i) const { return c_[i]; }

  std::span<const double> view() const { return {c_.data(), static_cast<std::size_t>(dim_)}; }
  const double* begin() const { return c_.data(); }
  const double* end() const { return c_.data() + dim_; }

  double dot(const Vec& o) const {
    double s = 0.0;
    for (int i = 0; i < dim_; ++i) s += c_[i] * o.c_[i];
    return s;
  }
  double norm2() const { return dot(*this); }
  double norm() const { return std::sqrt(norm2()); }

  bool finite() const {
    for (int i = 0; i < dim_; ++i) {
      if (!std::isfinite(c_[i])) return false;
    }
    return true;
  }

  Vec& operator+=(const Vec& o) {
    for (int i = 0; i < dim_; ++i) c_[i] += o.c_[i];
    return *this;
  }
  Vec& operator-=(const Vec& o) {
    for (int i = 0; i < dim_; ++i) c_[i] -= o.c_[i];
    return *this;
  }
  Vec& operator*=(double s) {
    for (int i = 0; i < dim_; ++i) c_[i] *= s;
    return *this;
  }
  Vec& operator/=(double s) {
    for (int i = 0; i < dim_; ++i) c_[i] /= s;
    return *this;
  }

  friend Vec operator+(Vec a, const Vec& b) { return a += b; }
  friend Vec operator-(Vec a, const Vec& b) { return a -= b; }
  friend Vec operator-(Vec a) { return a *= -1.0; }
  friend Vec operator*(Vec a, double s) { return a *= s; }
  friend Vec operator*(double s, Vec a) { return a *= s; }
  friend Vec operator/(Vec a, double s) { return a /= s; }

  friend bool operator==(const Vec& a, const Vec& b) {
    if (a.dim_ != b.dim_) return false;
    for (int i = 0; i < a.dim_; ++i) {
      if (a.c_[i] != b.c_[i]) return false;
    }
    return true;
  }

 private:
  std::array<double, kMaxDim> c_{};
  int dim_ = 0;
};

inline double distance(const Vec& a, const Vec& b) { return (a - b).norm(); }

/// Row-major d x d matrix, d <= 3.
struct Mat {
  int dim = 0;
  std::array<std::array<double, kMaxDim>, kMaxDim> a{};

  static Mat zeros(int d) {
    Mat m;
    m.dim = d;
    return m;
  }
  double& operator()(int i, int j) { return a[i][j]; }
  double operator()(int i, int j) const { return a[i][j]; }
};

}  // namespace fishnav
