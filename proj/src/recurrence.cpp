#include "fishnav/recurrence.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "fishnav/parallel.hpp"

namespace fishnav {

namespace {

double ls_slope(const std::vector<double>& y) {
  const std::size_t n = y.size();
  if (n < 2) return 0.0;
  const double xm = 0.5 * static_cast<double>(n - 1);
  const double ym = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = static_cast<double>(i) - xm;
    sxy += dx * (y[i] - ym);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

std::int64_t parse_int(const std::string& s, const std::string& what) {
  try {
    std::size_t pos = 0;
    const long long v = std::stoll(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw InputError("cannot parse " + what + " '" + s + "'");
  }
}

}  // namespace

DiscreteSystem DiscreteSystem::permutation(std::vector<std::int64_t> perm, std::vector<double> weights) {
  const auto n = static_cast<std::int64_t>(perm.size());
  if (n == 0) throw InputError("permutation is empty");
  if (!weights.empty() && static_cast<std::int64_t>(weights.size()) != n) {
    throw InputError("weights and permutation differ in length");
  }
  auto p = std::make_shared<std::vector<std::int64_t>>(std::move(perm));
  auto w = std::make_shared<std::vector<double>>(std::move(weights));
  DiscreteSystem s;
  s.name = "permutation:" + std::to_string(n);
  s.size = n;
  s.map = [p, n](std::int64_t k) {
    if (k < 0 || k >= n) throw InputError("state outside the permutation domain");
    return (*p)[k];
  };
  s.weight = [w](std::int64_t k) { return w->empty() ? 1.0 : (*w)[k]; };
  return s;
}

DiscreteSystem DiscreteSystem::cycle(std::int64_t n) {
  if (n < 1) throw InputError("cycle length must be >= 1");
  std::vector<std::int64_t> perm(n);
  for (std::int64_t k = 0; k < n; ++k) perm[k] = (k + 1) % n;
  auto s = permutation(std::move(perm));
  s.name = "cycle:" + std::to_string(n);
  return s;
}

DiscreteSystem DiscreteSystem::random_permutation(std::int64_t n, std::uint64_t seed) {
  if (n < 1) throw InputError("permutation size must be >= 1");
  std::vector<std::int64_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::mt19937_64 rng(seed);
  // Fisher-Yates with an explicit draw so the result does not depend on the
  // standard library's shuffle.
  for (std::int64_t i = n - 1; i > 0; --i) {
    const auto j = static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(i + 1));
    std::swap(perm[i], perm[j]);
  }
  auto s = permutation(std::move(perm));
  s.name = "random:" + std::to_string(n) + ":" + std::to_string(seed);
  return s;
}

DiscreteSystem DiscreteSystem::translation(std::int64_t shift) {
  DiscreteSystem s;
  s.name = "translate:" + std::to_string(shift);
  s.map = [shift](std::int64_t k) { return k + shift; };
  s.weight = [](std::int64_t) { return 1.0; };
  return s;
}

DiscreteSystem DiscreteSystem::parse(const std::string& spec) {
  const auto colon = spec.find(':');
  const std::string head = spec.substr(0, colon);
  const std::string rest = colon == std::string::npos ? "" : spec.substr(colon + 1);
  if (head == "cycle") return cycle(parse_int(rest, "cycle length"));
  if (head == "translate") return translation(parse_int(rest, "shift"));
  if (head == "random") {
    const auto c2 = rest.find(':');
    const auto n = parse_int(rest.substr(0, c2), "size");
    const std::uint64_t seed = c2 == std::string::npos ? 1 : parse_int(rest.substr(c2 + 1), "seed");
    return random_permutation(n, seed);
  }
  std::ifstream in(spec);
  if (!in) throw InputError("unknown system spec '" + spec + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw InputError("cannot parse permutation file: " + std::string(e.what()));
  }
  if (j.is_array()) return permutation(j.get<std::vector<std::int64_t>>());
  return permutation(j.at("perm").get<std::vector<std::int64_t>>(),
                     j.value("weights", std::vector<double>{}));
}

void DiscreteSystem::verify() const {
  if (!size) return;
  const std::int64_t n = *size;
  std::vector<std::int64_t> preimage(n, -1);
  for (std::int64_t k = 0; k < n; ++k) {
    const std::int64_t t = map(k);
    if (t < 0 || t >= n) throw ModelError("map leaves the state space at " + std::to_string(k));
    if (preimage[t] >= 0) {
      throw ModelError("map is not injective: " + std::to_string(preimage[t]) + " and " + std::to_string(k) +
                       " share an image");
    }
    preimage[t] = k;
  }
  for (std::int64_t k = 0; k < n; ++k) {
    const double a = weight(preimage[k]), b = weight(k);
    if (std::abs(a - b) > 1e-12 * std::max(std::abs(a), std::abs(b))) {
      throw ModelError("weight not preserved at state " + std::to_string(k));
    }
  }
}

RecurrenceReport poincare_discrete_check(const DiscreteSystem& sys, const std::vector<std::int64_t>& set,
                                         std::int64_t horizon) {
  if (set.empty()) throw InputError("set U is empty");
  if (horizon < 0) throw InputError("horizon must be >= 0");
  RecurrenceReport rep;
  rep.set = set;
  std::sort(rep.set.begin(), rep.set.end());
  rep.set.erase(std::unique(rep.set.begin(), rep.set.end()), rep.set.end());
  if (sys.size) {
    for (auto k : rep.set) {
      if (k < 0 || k >= *sys.size) throw InputError("U contains a state outside the system");
    }
  }
  rep.horizon = horizon;
  for (auto k : rep.set) rep.measure_set += sys.weight(k);
  if (!(rep.measure_set > 0.0)) throw InputError("U must have positive measure");

  const std::unordered_set<std::int64_t> in_set(rep.set.begin(), rep.set.end());
  std::unordered_set<std::int64_t> visited(rep.set.begin(), rep.set.end());
  std::vector<std::int64_t> current = rep.set, next(current.size());
  rep.orbit_growth.reserve(static_cast<std::size_t>(horizon) + 1);
  rep.orbit_growth.push_back(rep.measure_set);

  for (std::int64_t n = 1; n <= horizon; ++n) {
    bool hit = false;
    for (std::size_t i = 0; i < current.size(); ++i) {
      next[i] = sys.map(current[i]);
      hit = hit || in_set.count(next[i]) > 0;
    }
    // T^n(U) is the image of a set; injectivity keeps its size.
    auto sorted = next;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
      throw ModelError("map is not injective on visited states (step " + std::to_string(n) + ")");
    }
    if (hit) rep.return_events.push_back(n);
    double grown = rep.orbit_growth.back();
    for (auto k : next) {
      if (visited.insert(k).second) grown += sys.weight(k);
    }
    rep.orbit_growth.push_back(grown);
    if (grown > static_cast<double>(n + 1) * rep.measure_set * (1.0 + 1e-12)) rep.union_bound_ok = false;
    current.swap(next);
  }
  rep.growth_slope = ls_slope(rep.orbit_growth);
  return rep;
}

ContinuousReturnReport continuous_return_scan(const DriftField& f, const std::optional<PsiParams>& psi,
                                              const BallSpec& set, const ReturnScanConfig& cfg) {
  cfg.flow.validate();
  if (!(cfg.tau > 0.0)) throw InputError("tau must be positive");
  if (!(cfg.horizon >= cfg.tau)) throw InputError("horizon must be >= tau");
  if (!(set.radius > 0.0)) throw InputError("U radius must be positive");
  if (set.center.dim() != f.dim()) throw InputError("U center has the wrong dimension");
  if (cfg.particles == 0) throw InputError("need at least one particle");

  ContinuousReturnReport rep;
  rep.particles = cfg.particles;
  rep.mu_sampling = psi.has_value();
  if (psi) {
    rep.starts = sample_psi_ball(*psi, set.center, set.radius, cfg.particles, cfg.seed);
  } else {
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> u(-set.radius, set.radius);
    while (rep.starts.size() < cfg.particles) {
      Vec z(f.dim());
      for (int a = 0; a < f.dim(); ++a) z[a] = u(rng);
      if (z.norm2() < set.radius * set.radius) rep.starts.push_back(set.center + z);
    }
  }

  const double h = cfg.flow.step;
  const auto steps = static_cast<std::int64_t>(std::ceil(cfg.horizon / h - 1e-9));
  const auto first = static_cast<std::int64_t>(std::ceil(cfg.tau / h - 1e-9));
  const double r2 = set.radius * set.radius;
  rep.return_times.assign(cfg.particles, -1.0);
  std::vector<char> escaped(cfg.particles, 0);
  parallel_for(cfg.particles, [&](std::size_t i) {
    Vec x = rep.starts[i];
    for (std::int64_t s = 1; s <= steps; ++s) {
      if (!rk4_try_step(f, x, h)) {
        escaped[i] = 1;
        return;
      }
      if (!x.finite()) throw IntegrationError("non-finite state in return scan");
      if (s >= first && (x - set.center).norm2() < r2) {
        rep.return_times[i] = static_cast<double>(s) * h;
        return;
      }
    }
  });
  rep.escaped = static_cast<std::size_t>(std::count(escaped.begin(), escaped.end(), 1));

  const int bins = std::max(1, cfg.histogram_bins);
  for (int b = 0; b <= bins; ++b) rep.histogram_edges.push_back(cfg.tau + (cfg.horizon - cfg.tau) * b / bins);
  rep.histogram.assign(bins, 0);
  for (double t : rep.return_times) {
    if (t < 0.0) continue;
    ++rep.returned;
    const double frac = cfg.horizon > cfg.tau ? (t - cfg.tau) / (cfg.horizon - cfg.tau) : 0.0;
    rep.histogram[std::clamp(static_cast<int>(frac * bins), 0, bins - 1)]++;
  }
  rep.fraction = static_cast<double>(rep.returned) / static_cast<double>(rep.particles);
  return rep;
}

PoissonScanReport poisson_stability_scan(const DriftField& f, const PoissonScanConfig& cfg) {
  cfg.flow.validate();
  if (f.dim() != 2 || cfg.lo.dim() != 2 || cfg.hi.dim() != 2) throw InputError("Poisson scan is planar");
  if (cfg.points_per_axis < 1) throw InputError("need at least one point per axis");
  if (!(cfg.tau > 0.0) || !(cfg.horizon >= cfg.tau)) throw InputError("need 0 < tau <= horizon");
  PoissonScanReport rep;
  const int m = cfg.points_per_axis;
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      const double a = m == 1 ? 0.5 * (cfg.lo[0] + cfg.hi[0]) : cfg.lo[0] + (cfg.hi[0] - cfg.lo[0]) * i / (m - 1);
      const double b = m == 1 ? 0.5 * (cfg.lo[1] + cfg.hi[1]) : cfg.lo[1] + (cfg.hi[1] - cfg.lo[1]) * j / (m - 1);
      rep.points.push_back(Vec{a, b});
    }
  }
  const double h = cfg.flow.step;
  const auto steps = static_cast<std::int64_t>(std::ceil(cfg.horizon / h - 1e-9));
  const auto first = static_cast<std::int64_t>(std::ceil(cfg.tau / h - 1e-9));
  rep.min_distance.assign(rep.points.size(), INFINITY);
  rep.time_at_min.assign(rep.points.size(), -1.0);
  std::vector<char> escaped(rep.points.size(), 0);
  parallel_for(rep.points.size(), [&](std::size_t k) {
    const Vec x0 = rep.points[k];
    Vec x = x0;
    for (std::int64_t s = 1; s <= steps; ++s) {
      if (!rk4_try_step(f, x, h)) {
        escaped[k] = 1;
        return;
      }
      if (s >= first) {
        const double d = (x - x0).norm();
        if (d < rep.min_distance[k]) {
          rep.min_distance[k] = d;
          rep.time_at_min[k] = static_cast<double>(s) * h;
        }
      }
    }
  });
  rep.escaped = static_cast<std::size_t>(std::count(escaped.begin(), escaped.end(), 1));
  for (double d : rep.min_distance) rep.stable += d <= cfg.eps ? 1 : 0;
  rep.fraction = static_cast<double>(rep.stable) / static_cast<double>(rep.points.size());
  return rep;
}

NearReturn near_return_search(const DriftField& f, const Vec& x0, double horizon, const NearReturnConfig& cfg) {
  cfg.flow.validate();
  if (!(horizon > 0.0)) throw InputError("horizon must be positive");
  if (!(cfg.tau >= 0.0) || cfg.tau > horizon) throw InputError("need 0 <= tau <= horizon");
  if (x0.dim() != f.dim()) throw InputError("start point has the wrong dimension");
  const double h = cfg.flow.step;
  const auto steps = static_cast<std::int64_t>(std::ceil(horizon / h - 1e-9));

  // Sample phi^t on the step lattice t_s = s h (last step shortened to hit the horizon).
  auto time_of = [&](std::int64_t s) { return std::min(static_cast<double>(s) * h, horizon); };
  std::int64_t best = -1;
  double best_d = INFINITY;
  Vec x = x0, prev = x0, best_prev = x0;
  if (cfg.tau == 0.0) {
    best = 0;
    best_d = 0.0;
  }
  for (std::int64_t s = 1; s <= steps && best_d > 0.0; ++s) {
    prev = x;
    x = rk4_step(f, x, time_of(s) - time_of(s - 1));
    if (!x.finite()) throw IntegrationError("non-finite state in near-return search");
    if (time_of(s) < cfg.tau) continue;
    const double d = (x - x0).norm();
    if (d < best_d) {
      best_d = d;
      best = s;
      best_prev = prev;
    }
  }
  if (best < 0) throw IntegrationError("no sample in [tau, horizon]");
  if (best_d == 0.0) return {time_of(best), 0.0};

  // Golden-section refinement of |phi^t(x0) - x0|^2 on [t_{k-1}, t_{k+1}] ∩ [tau, horizon].
  const double base_t = time_of(best - 1);
  const Vec base_x = best_prev;
  auto dist2 = [&](double t) {
    const int n = std::max(1, step_count(t - base_t, h));
    Vec y = base_x;
    const double dt = (t - base_t) / n;
    for (int i = 0; i < n; ++i) y = rk4_step(f, y, dt);
    return (y - x0).norm2();
  };
  double a = std::max(base_t, cfg.tau), b = std::min(time_of(best + 1), horizon);
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - g * (b - a), d = a + g * (b - a);
  double fc = dist2(c), fd = dist2(d);
  while (b - a > cfg.time_tol) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = dist2(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = dist2(d);
    }
  }
  const double t_star = 0.5 * (a + b);
  const double d_star = std::sqrt(dist2(t_star));
  if (d_star < best_d) return {t_star, d_star};
  return {time_of(best), best_d};
}

}  // namespace fishnav
