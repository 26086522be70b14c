#include "fishnav/corrector_grid.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "fishnav/parallel.hpp"

namespace fishnav {

namespace {

constexpr int kPad = 2;
constexpr int kTileNodes = 8;        // tile edge in nodes
constexpr double kPatchRadius = 4.0;  // in units of the tile half-diagonal / 1.4

// Catmull-Rom weights for nodes -1, 0, 1, 2 at fraction t in [0, 1].
std::array<double, 4> catmull_rom(double t) {
  const double t2 = t * t, t3 = t2 * t;
  return {0.5 * (-t3 + 2.0 * t2 - t), 0.5 * (3.0 * t3 - 5.0 * t2 + 2.0), 0.5 * (-3.0 * t3 + 4.0 * t2 + t),
          0.5 * (t3 - t2)};
}

// max_t sum_k |w_k(t)|. The maximum is attained at t = 1/2 (value 5/4); the
// dense scan guards against a slip in that claim.
double catmull_rom_lebesgue() {
  double best = 0.0;
  for (int i = 0; i <= 4096; ++i) {
    const auto w = catmull_rom(i / 4096.0);
    best = std::max(best, std::abs(w[0]) + std::abs(w[1]) + std::abs(w[2]) + std::abs(w[3]));
  }
  return std::max(best, 1.25);
}

}  // namespace

double CorrectorGrid::required_window(const Vec& lo, const Vec& hi, double spacing) {
  // Extremal nodes exactly as build() lays them out.
  auto last = [&](int a) {
    const int n = static_cast<int>(std::ceil((hi[a] - lo[a]) / spacing)) + 2 * kPad + 2;
    return lo[a] - kPad * spacing + (n - 1) * spacing;
  };
  double r = 0.0;
  for (double x : {lo[0] - kPad * spacing, last(0)}) {
    for (double y : {lo[1] - kPad * spacing, last(1)}) r = std::max(r, std::hypot(x, y));
  }
  return r * (1.0 + 1e-9);
}

double CorrectorGrid::default_spacing(const CorrectorField& w) {
  return 0.25 * std::min({w.base().length_scale(), w.psi().alpha, 1.0});
}

Vec CorrectorGrid::node_point(int i, int j) const {
  return Vec{origin_[0] + i * spacing_, origin_[1] + j * spacing_};
}

CorrectorGrid CorrectorGrid::build(const CorrectorField& w, const Vec& lo, const Vec& hi, double spacing) {
  if (w.psi().dim != 2) throw ConfigError("corrector grids are planar");
  if (lo.dim() != 2 || hi.dim() != 2 || !(hi[0] > lo[0]) || !(hi[1] > lo[1])) {
    throw InputError("grid box must satisfy lo < hi componentwise");
  }
  if (!(spacing > 0.0)) throw InputError("grid spacing must be positive");
  const double need = required_window(lo, hi, spacing);
  if (w.window_radius() < need) {
    throw ConfigError("corrector window " + std::to_string(w.window_radius()) + " is smaller than the grid needs (" +
                      std::to_string(need) + ")");
  }

  CorrectorGrid g;
  g.lo_ = lo;
  g.hi_ = hi;
  g.spacing_ = spacing;
  g.origin_ = Vec{lo[0] - kPad * spacing, lo[1] - kPad * spacing};
  g.nx_ = static_cast<int>(std::ceil((hi[0] - lo[0]) / spacing)) + 2 * kPad + 2;
  g.ny_ = static_cast<int>(std::ceil((hi[1] - lo[1]) / spacing)) + 2 * kPad + 2;
  g.values_.assign(static_cast<std::size_t>(g.nx_) * g.ny_ * 2, 0.0);

  const int tx = (g.nx_ + kTileNodes - 1) / kTileNodes, ty = (g.ny_ + kTileNodes - 1) / kTileNodes;
  const double half = 0.5 * (kTileNodes - 1) * spacing;
  const double reach = std::sqrt(2.0) * half * (1.0 + 1e-9);
  const double radius = std::max(kPatchRadius / 1.4 * reach, 2.5 * reach);

  parallel_for(static_cast<std::size_t>(tx) * ty, [&](std::size_t tile) {
    const int ti = static_cast<int>(tile / ty), tj = static_cast<int>(tile % ty);
    const int i0 = ti * kTileNodes, j0 = tj * kTileNodes;
    const Vec center = g.node_point(i0, j0) + Vec{half, half};
    const bool use_patch = center.norm() + radius < w.inner_radius();
    CorrectorField::Patch patch;
    if (use_patch) patch = w.make_patch(center, radius, reach);
    for (int i = i0; i < std::min(i0 + kTileNodes, g.nx_); ++i) {
      for (int j = j0; j < std::min(j0 + kTileNodes, g.ny_); ++j) {
        const Vec x = g.node_point(i, j);
        const Vec v = use_patch ? w.eval_patch(patch, x) : w.eval(x);
        const std::size_t k = (static_cast<std::size_t>(i) * g.ny_ + j) * 2;
        g.values_[k] = v[0];
        g.values_[k + 1] = v[1];
      }
    }
  });

  for (std::size_t k = 0; k < g.values_.size(); k += 2) {
    g.max_node_ = std::max(g.max_node_, std::hypot(g.values_[k], g.values_[k + 1]));
  }
  const double leb = catmull_rom_lebesgue();
  g.sup_bound_ = g.max_node_ * leb * leb;
  return g;
}

bool CorrectorGrid::contains(const Vec& x) const {
  return x[0] >= lo_[0] && x[0] <= hi_[0] && x[1] >= lo_[1] && x[1] <= hi_[1];
}

bool CorrectorGrid::try_eval(const Vec& x, Vec& out) const {
  if (!contains(x)) return false;
  const double fx = (x[0] - origin_[0]) / spacing_, fy = (x[1] - origin_[1]) / spacing_;
  const int i = static_cast<int>(fx), j = static_cast<int>(fy);
  const auto wx = catmull_rom(fx - i), wy = catmull_rom(fy - j);
  double a = 0.0, b = 0.0;
  for (int p = 0; p < 4; ++p) {
    const double* row = &values_[(static_cast<std::size_t>(i - 1 + p) * ny_ + (j - 1)) * 2];
    double ra = 0.0, rb = 0.0;
    for (int q = 0; q < 4; ++q) {
      ra += wy[q] * row[2 * q];
      rb += wy[q] * row[2 * q + 1];
    }
    a += wx[p] * ra;
    b += wx[p] * rb;
  }
  out = Vec{a, b};
  return true;
}

Vec CorrectorGrid::eval(const Vec& x) const {
  Vec out;
  if (x.dim() != 2 || !try_eval(x, out)) throw ConfigError("point outside the corrector grid box");
  return out;
}

GridValidation CorrectorGrid::validate(const CorrectorField& w, std::size_t samples, std::uint64_t seed,
                                       double tol) const {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(lo_[0], hi_[0]), uy(lo_[1], hi_[1]);
  std::vector<Vec> pts;
  for (std::size_t s = 0; s < samples; ++s) {
    const double a = ux(rng);
    pts.push_back(Vec{a, uy(rng)});
  }
  std::vector<std::pair<double, double>> res(samples);
  parallel_for(samples, [&](std::size_t s) {
    const Vec direct = w.eval(pts[s]);
    res[s] = {(eval(pts[s]) - direct).norm(), direct.norm()};
  });
  GridValidation v;
  v.samples = samples;
  for (const auto& [err, mag] : res) {
    v.max_error = std::max(v.max_error, err);
    v.sup_w = std::max(v.sup_w, mag);
  }
  v.ok = v.max_error <= tol * std::max(v.sup_w, max_node_);
  return v;
}

}  // namespace fishnav
