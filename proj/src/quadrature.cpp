#include "fishnav/quadrature.hpp"

#include <algorithm>
#include <map>
#include <memory>
#include <mutex>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/legendre.hpp>

#include "fishnav/errors.hpp"

namespace fishnav {

namespace {

GaussLegendre make_rule(int n) {
  GaussLegendre rule;
  // legendre_p_zeros returns the nonnegative roots in increasing order.
  const auto zeros = boost::math::legendre_p_zeros<double>(n);
  std::vector<double> nodes, weights;
  for (double z : zeros) {
    const double dp = boost::math::legendre_p_prime(n, z);
    const double w = 2.0 / ((1.0 - z * z) * dp * dp);
    if (z == 0.0) {
      nodes.push_back(0.0);
      weights.push_back(w);
    } else {
      nodes.push_back(z);
      weights.push_back(w);
      nodes.push_back(-z);
      weights.push_back(w);
    }
  }
  std::vector<std::size_t> order(nodes.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return nodes[a] < nodes[b]; });
  for (auto i : order) {
    rule.nodes.push_back(nodes[i]);
    rule.weights.push_back(weights[i]);
  }
  return rule;
}

}  // namespace

const GaussLegendre& gauss_legendre(int n) {
  if (n < 1 || n > 512) throw InputError("Gauss-Legendre order must be in [1, 512]");
  static std::mutex mutex;
  static std::map<int, std::unique_ptr<GaussLegendre>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<GaussLegendre>(make_rule(n));
  return *slot;
}

Rule1D composite_gauss_legendre(double a, double b, int panels, int nodes_per_panel) {
  if (panels < 1) throw InputError("composite rule needs at least one panel");
  const auto& gl = gauss_legendre(nodes_per_panel);
  Rule1D rule;
  rule.nodes.reserve(static_cast<std::size_t>(panels) * nodes_per_panel);
  rule.weights.reserve(rule.nodes.capacity());
  const double width = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    const double mid = a + (p + 0.5) * width;
    for (int k = 0; k < nodes_per_panel; ++k) {
      rule.nodes.push_back(mid + 0.5 * width * gl.nodes[k]);
      rule.weights.push_back(0.5 * width * gl.weights[k]);
    }
  }
  return rule;
}

double integrate_adaptive(const std::function<double(double)>& f, double a, double b, double rel_tol,
                          double* error) {
  double err = 0.0;
  const double value =
      boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 20, rel_tol, &err);
  if (error) *error = err;
  return value;
}

}  // namespace fishnav
