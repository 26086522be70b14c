#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "fishnav/dynamics.hpp"

namespace fishnav {

/// Injective map on integer states with a weight per state. Finite systems
/// live on {0, ..., size-1}; infinite ones (translations) on Z.
struct DiscreteSystem {
  std::string name;
  std::function<std::int64_t(std::int64_t)> map;
  std::function<double(std::int64_t)> weight;
  std::optional<std::int64_t> size;

  static DiscreteSystem permutation(std::vector<std::int64_t> perm, std::vector<double> weights = {});
  static DiscreteSystem cycle(std::int64_t n);
  static DiscreteSystem random_permutation(std::int64_t n, std::uint64_t seed);
  /// k -> k + shift on Z with counting measure.
  static DiscreteSystem translation(std::int64_t shift);
  /// `cycle:N`, `random:N[:seed]`, `translate:S`, or a JSON file holding a permutation array.
  static DiscreteSystem parse(const std::string& spec);

  /// Exhaustive check on finite systems: bijective and weight(T^-1{k}) = weight(k).
  /// Throws ModelError on failure.
  void verify() const;
};

struct RecurrenceReport {
  std::vector<std::int64_t> set;               // U
  std::int64_t horizon = 0;
  std::vector<std::int64_t> return_events;     // n in [1, horizon] with T^n(U) meets U
  std::vector<double> orbit_growth;            // mu(union_{k<=n} T^k(U)), n = 0..horizon
  double growth_slope = 0.0;                   // least-squares slope of orbit_growth against n
  double measure_set = 0.0;
  bool union_bound_ok = true;                  // orbit_growth[n] <= (n+1) mu(U)
};

/// Iterates the image sets T^n(U) exactly. Throws ModelError when two visited
/// states share an image.
RecurrenceReport poincare_discrete_check(const DiscreteSystem& sys, const std::vector<std::int64_t>& set,
                                         std::int64_t horizon);

struct BallSpec {
  Vec center;
  double radius = 0.5;
};

struct ReturnScanConfig {
  double tau = 1.0;
  double horizon = 1e3;
  std::size_t particles = 1000;
  std::uint64_t seed = 1;
  FlowConfig flow;
  int histogram_bins = 20;
};

struct ContinuousReturnReport {
  std::size_t particles = 0;
  std::size_t returned = 0;
  std::size_t escaped = 0;             // left the corrector grid before returning
  double fraction = 0.0;
  bool mu_sampling = false;            // starts drawn from psi dx (else Lebesgue)
  std::vector<Vec> starts;
  std::vector<double> return_times;    // first return time >= tau, or -1
  std::vector<double> histogram_edges;
  std::vector<std::size_t> histogram;
};

/// Flows particles started in U and records the first sampled time t >= tau
/// at which the state lies in U. With psi given, starts follow psi dx on U.
ContinuousReturnReport continuous_return_scan(const DriftField& f, const std::optional<PsiParams>& psi,
                                              const BallSpec& set, const ReturnScanConfig& cfg);

struct PoissonScanConfig {
  Vec lo{-1.0, -1.0};
  Vec hi{1.0, 1.0};
  int points_per_axis = 5;
  double tau = 1.0;
  double horizon = 100.0;
  double eps = 0.1;
  FlowConfig flow;
};

struct PoissonScanReport {
  std::vector<Vec> points;
  std::vector<double> min_distance;  // min over sampled t in [tau, horizon] of |phi^t(x) - x|
  std::vector<double> time_at_min;
  std::size_t escaped = 0;
  std::size_t stable = 0;            // points with min_distance <= eps
  double fraction = 0.0;
};

PoissonScanReport poisson_stability_scan(const DriftField& f, const PoissonScanConfig& cfg);

struct NearReturnConfig {
  double tau = 0.5;
  FlowConfig flow;
  double time_tol = 1e-10;
};

struct NearReturn {
  double time = 0.0;
  double distance = 0.0;
};

/// argmin over sampled t in [tau, horizon] of |phi^t(x0) - x0|, refined by
/// golden-section search between the neighbouring samples.
NearReturn near_return_search(const DriftField& f, const Vec& x0, double horizon, const NearReturnConfig& cfg = {});

}  // namespace fishnav
