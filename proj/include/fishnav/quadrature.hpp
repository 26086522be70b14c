#pragma once

#include <functional>
#include <vector>

namespace fishnav {

/// Gauss-Legendre rule on [-1, 1].
struct GaussLegendre {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Cached n-point rule; the returned reference stays valid for the process lifetime.
const GaussLegendre& gauss_legendre(int n);

/// Nodes/weights of a composite rule on [a, b] with `panels` equal panels.
struct Rule1D {
  std::vector<double> nodes;
  std::vector<double> weights;
};
Rule1D composite_gauss_legendre(double a, double b, int panels, int nodes_per_panel);

/// Adaptive Gauss-Kronrod on [a, b]; `error` receives the estimate when non-null.
double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          double rel_tol = 1e-12, double* error = nullptr);

}  // namespace fishnav
