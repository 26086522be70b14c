#include "fishnav/control.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <tuple>

namespace fishnav {

namespace {

constexpr double kHomingShare = 0.9;  // homing control stays below 0.9 delta~
constexpr int kStaleCoast = 3;        // coasting stops after this many windows ending in visited cells

struct Segment {
  Vec u;
  double duration = 0.0;
};

// Integrates x' = f(x) + u over `duration`; false if the state leaves the domain.
template <class OnStep>
bool advance(const DriftField& f, Vec& x, const Vec& u, double duration, double step, OnStep&& on_step) {
  if (duration <= 0.0) return true;
  const int n = step_count(duration, step);
  const double h = duration / n;
  auto g = [&](const Vec& y, Vec& out) {
    if (!f.try_eval(y, out)) return false;
    out += u;
    return true;
  };
  Vec k1, k2, k3, k4;
  for (int i = 0; i < n; ++i) {
    if (!g(x, k1) || !g(x + k1 * (0.5 * h), k2) || !g(x + k2 * (0.5 * h), k3) || !g(x + k3 * h, k4)) {
      return false;
    }
    x += (k1 + 2.0 * k2 + 2.0 * k3 + k4) * (h / 6.0);
    if (!x.finite()) return false;
    on_step(x);
  }
  return true;
}

bool advance(const DriftField& f, Vec& x, const Vec& u, double duration, double step) {
  return advance(f, x, u, duration, step, [](const Vec&) {});
}

struct Budget {
  double delta_w = 0.0;
  double delta_tilde = 0.0;
};

Budget split_budget(const DriftField& f, double delta) {
  Budget b;
  if (f.corrected()) b.delta_w = f.corrector()->max_node_norm() * 1.01;
  if (b.delta_w >= delta) {
    throw ConfigError("corrector magnitude " + std::to_string(b.delta_w) + " exceeds the control budget " +
                      std::to_string(delta) + "; increase alpha");
  }
  b.delta_tilde = delta - b.delta_w;
  return b;
}

// Cell lattice over the search box.
struct Cells {
  Vec lo;
  double side = 0.0;
  int nx = 0, ny = 0;
  std::vector<char> marked;
  std::vector<char> visited;  // holds a node
  std::size_t marked_count = 0;

  Cells(const Vec& lo_, const Vec& hi_, double side_) : lo(lo_), side(side_) {
    nx = std::max(1, static_cast<int>(std::ceil((hi_[0] - lo_[0]) / side)));
    ny = std::max(1, static_cast<int>(std::ceil((hi_[1] - lo_[1]) / side)));
    const auto total = static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny);
    if (total > 50'000'000) throw ConfigError("planner lattice too fine: " + std::to_string(total) + " cells");
    marked.assign(total, 0);
    visited.assign(total, 0);
  }

  long index(const Vec& x) const {
    const long i = static_cast<long>(std::floor((x[0] - lo[0]) / side));
    const long j = static_cast<long>(std::floor((x[1] - lo[1]) / side));
    if (i < 0 || j < 0 || i >= nx || j >= ny) return -1;
    return i * ny + j;
  }

  void mark(long k) {
    if (k >= 0 && !marked[k]) {
      marked[k] = 1;
      ++marked_count;
    }
  }

  // Every cell whose centre lies within r of x.
  void mark_ball(const Vec& x, double r) {
    const long i0 = static_cast<long>(std::floor((x[0] - r - lo[0]) / side));
    const long i1 = static_cast<long>(std::floor((x[0] + r - lo[0]) / side));
    const long j0 = static_cast<long>(std::floor((x[1] - r - lo[1]) / side));
    const long j1 = static_cast<long>(std::floor((x[1] + r - lo[1]) / side));
    for (long i = std::max(0L, i0); i <= std::min<long>(nx - 1, i1); ++i) {
      for (long j = std::max(0L, j0); j <= std::min<long>(ny - 1, j1); ++j) {
        const double cx = lo[0] + (i + 0.5) * side - x[0];
        const double cy = lo[1] + (j + 0.5) * side - x[1];
        if (cx * cx + cy * cy <= r * r) mark(i * ny + j);
      }
    }
    mark(index(x));
  }
};

struct Node {
  Vec state;
  double time = 0.0;
  long parent = -1;
  Segment seg;
  int round = 0;
};

std::vector<Vec> control_set(double magnitude) {
  std::vector<Vec> out{Vec{0.0, 0.0}};
  for (int k = 0; k < 8; ++k) {
    const double a = k * kPi / 4.0;
    out.push_back(Vec{magnitude * std::cos(a), magnitude * std::sin(a)});
  }
  return out;
}

}  // namespace

void planner_box(const ReachSpec& spec, Vec& lo, Vec& hi) {
  const PlannerConfig& p = spec.planner;
  if (p.lo.dim() == 2 && p.hi.dim() == 2) {
    lo = p.lo;
    hi = p.hi;
  } else {
    lo = Vec{std::min(spec.x0[0], spec.y0[0]) - p.pad, std::min(spec.x0[1], spec.y0[1]) - p.pad};
    hi = Vec{std::max(spec.x0[0], spec.y0[0]) + p.pad, std::max(spec.x0[1], spec.y0[1]) + p.pad};
  }
  if (!(hi[0] > lo[0] && hi[1] > lo[1])) throw InputError("planner box must have hi > lo");
}

namespace {

void check_spec(const DriftField& f, const ReachSpec& spec) {
  if (f.dim() != 2) throw InputError("the planner works in two dimensions");
  if (spec.x0.dim() != 2 || spec.y0.dim() != 2) throw InputError("x0 and y0 must be 2-vectors");
  if (!(spec.delta > 0.0)) throw InputError("delta must be positive");
  if (!(spec.arrival_tol > 0.0)) throw InputError("arrival tolerance must be positive");
  if (!(spec.horizon > 0.0)) throw InputError("horizon must be positive");
  if (!(spec.planner.tau > 0.0)) throw InputError("tau must be positive");
  if (spec.planner.cell < 0.0) throw InputError("cell size must be non-negative");
  if (spec.planner.homing_windows < 1) throw InputError("homing_windows must be at least 1");
  spec.planner.flow.validate();
}

// Constant control u over k tau windows taking s exactly to y, by Newton's
// method with a finite-difference Jacobian.
bool home(const DriftField& f, const Vec& s, const Vec& y, double duration, double step, double cap,
          const Vec& guess, Vec& u_out) {
  Vec u = guess;
  auto residual = [&](const Vec& c, Vec& r) {
    Vec x = s;
    if (!advance(f, x, c, duration, step)) return false;
    r = x - y;
    return true;
  };
  Vec r;
  if (!residual(u, r)) return false;
  const double hfd = 1e-6;
  for (int it = 0; it < 25; ++it) {
    if (r.norm() <= 1e-10) {
      if (u.norm() > cap) return false;
      u_out = u;
      return true;
    }
    double jac[2][2];
    for (int c = 0; c < 2; ++c) {
      Vec up = u, um = u, rp, rm;
      up[c] += hfd;
      um[c] -= hfd;
      if (!residual(up, rp) || !residual(um, rm)) return false;
      jac[0][c] = (rp[0] - rm[0]) / (2 * hfd);
      jac[1][c] = (rp[1] - rm[1]) / (2 * hfd);
    }
    const double det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
    if (!(std::abs(det) > 1e-14)) return false;
    const Vec du{(jac[1][1] * r[0] - jac[0][1] * r[1]) / det, (-jac[1][0] * r[0] + jac[0][0] * r[1]) / det};
    // Damped update: halve until the residual drops.
    double lambda = 1.0;
    bool improved = false;
    for (int ls = 0; ls < 12; ++ls) {
      Vec trial = u - du * lambda, rt;
      if (residual(trial, rt) && rt.norm() < r.norm()) {
        u = trial;
        r = rt;
        improved = true;
        break;
      }
      lambda *= 0.5;
    }
    if (!improved) return false;
    if (u.norm() > 4.0 * cap) return false;
  }
  if (r.norm() <= 1e-10 && u.norm() <= cap) {
    u_out = u;
    return true;
  }
  return false;
}

// Shortest homing leg from s: k = 1, 2, ... windows.
bool try_homing(const DriftField& f, const Vec& s, const ReachSpec& spec, double cap, Segment& seg) {
  const double tau = spec.planner.tau;
  for (int k = 1; k <= spec.planner.homing_windows; ++k) {
    const double duration = k * tau;
    Vec drift = s;
    if (!advance(f, drift, Vec{0.0, 0.0}, duration, spec.planner.flow.step)) continue;
    const Vec guess = (spec.y0 - drift) / duration;
    Vec u;
    if (home(f, s, spec.y0, duration, spec.planner.flow.step, cap, guess, u)) {
      seg = {u, duration};
      return true;
    }
  }
  return false;
}

ControlSchedule to_schedule(const std::vector<Segment>& segs) {
  ControlSchedule s;
  s.breakpoints.push_back(0.0);
  for (const auto& g : segs) {
    if (g.duration <= 0.0) continue;
    // Merge equal neighbouring controls.
    if (!s.values.empty() && s.values.back() == g.u) {
      s.breakpoints.back() += g.duration;
      continue;
    }
    s.values.push_back(g.u);
    s.breakpoints.push_back(s.breakpoints.back() + g.duration);
    s.planning_sup = std::max(s.planning_sup, g.u.norm());
  }
  return s;
}

std::vector<Segment> path_to(const std::vector<Node>& nodes, long k) {
  std::vector<Segment> segs;
  for (; k >= 0 && nodes[k].parent >= 0; k = nodes[k].parent) segs.push_back(nodes[k].seg);
  std::reverse(segs.begin(), segs.end());
  return segs;
}

}  // namespace

std::string to_string(ReachStatus s) { return s == ReachStatus::reached ? "REACHED" : "NOT_REACHED"; }

Vec ControlSchedule::value_at(double t) const {
  if (values.empty()) return Vec{0.0, 0.0};
  auto it = std::upper_bound(breakpoints.begin(), breakpoints.end(), t);
  long k = static_cast<long>(it - breakpoints.begin()) - 1;
  k = std::clamp<long>(k, 0, static_cast<long>(values.size()) - 1);
  return values[k];
}

double step1_ball_radius(double tau, double delta, double u_norm) {
  if (!(tau > 0.0)) throw InputError("tau must be positive");
  if (!(u_norm < delta)) {
    throw InputError("control norm " + std::to_string(u_norm) + " leaves no budget below delta " +
                     std::to_string(delta));
  }
  return tau * (delta - u_norm) / 2.0;
}

bool ReachedSet::is_marked(const Vec& x) const {
  const long i = static_cast<long>(std::floor((x[0] - lo[0]) / cell));
  const long j = static_cast<long>(std::floor((x[1] - lo[1]) / cell));
  if (i < 0 || j < 0 || i >= nx || j >= ny) return false;
  return marked[i * ny + j] != 0;
}

ReachedSet reached_set_rounds(const DriftField& f, const ReachSpec& spec, int rounds) {
  check_spec(f, spec);
  if (rounds < 0) throw InputError("rounds must be non-negative");
  const Budget b = split_budget(f, spec.delta);
  const double tau = spec.planner.tau;
  const double r = tau * b.delta_tilde / 4.0;
  const double side = spec.planner.cell > 0.0 ? spec.planner.cell : r;
  Vec lo, hi;
  planner_box(spec, lo, hi);
  Cells cells(lo, hi, side);
  const auto controls = control_set(b.delta_tilde / 2.0);

  std::vector<Vec> frontier{spec.x0};
  cells.visited[std::max(0L, cells.index(spec.x0))] = 1;
  cells.mark(cells.index(spec.x0));
  for (int round = 0; round < rounds; ++round) {
    std::vector<Vec> next;
    for (const Vec& s : frontier) {
      for (const Vec& u : controls) {
        Vec x = s;
        if (!advance(f, x, u, tau, spec.planner.flow.step)) continue;
        cells.mark_ball(x, r);
        const long k = cells.index(x);
        if (k < 0 || cells.visited[k]) continue;
        cells.visited[k] = 1;
        next.push_back(x);
      }
    }
    frontier = std::move(next);
  }
  ReachedSet out;
  out.lo = lo;
  out.cell = side;
  out.nx = cells.nx;
  out.ny = cells.ny;
  out.marked = std::move(cells.marked);
  return out;
}

ReachResult plan_reach(const DriftField& f, const ReachSpec& spec) {
  check_spec(f, spec);
  const Budget b = split_budget(f, spec.delta);
  ReachResult res;
  res.delta_w = b.delta_w;
  res.delta_tilde = b.delta_tilde;

  const PlannerConfig& pc = spec.planner;
  const double tau = pc.tau;
  const double step = pc.flow.step;
  const double r = tau * b.delta_tilde / 4.0;
  const double cap = kHomingShare * b.delta_tilde;

  auto finish = [&](std::vector<Segment> segs) {
    res.schedule = to_schedule(segs);
    VerifyResult v = verify_schedule(f, res.schedule, spec);
    res.schedule.sup_norm = v.sup_norm;
    res.trajectory = std::move(v.trajectory);
    res.arrival_error = v.arrival_error;
    res.status = v.pass ? ReachStatus::reached : ReachStatus::not_reached;
    res.reason = v.pass ? "" : v.reason;
  };

  if (distance(spec.x0, spec.y0) == 0.0) {
    finish({});
    return res;
  }

  Vec lo, hi;
  planner_box(spec, lo, hi);
  Cells cells(lo, hi, pc.cell > 0.0 ? pc.cell : r);
  if (cells.index(spec.x0) < 0 || cells.index(spec.y0) < 0) throw InputError("x0 and y0 must lie in the planner box");
  const auto controls = control_set(b.delta_tilde / 2.0);
  const double homing_reach = pc.homing_windows * tau * b.delta_tilde / 2.0;

  std::vector<Node> nodes;
  using Key = std::tuple<double, long>;  // (distance to y0, node id)
  std::priority_queue<Key, std::vector<Key>, std::greater<>> open;
  auto push = [&](Node n) {
    const long k = cells.index(n.state);
    if (k < 0 || cells.visited[k] || n.time > spec.horizon) return;
    cells.visited[k] = 1;
    nodes.push_back(std::move(n));
    const long id = static_cast<long>(nodes.size()) - 1;
    open.emplace(distance(nodes.back().state, spec.y0) + pc.time_weight * nodes.back().time, id);
  };
  push(Node{spec.x0, 0.0, -1, {}, 0});
  cells.mark(cells.index(spec.x0));
  res.best_distance = distance(spec.x0, spec.y0);

  while (!open.empty()) {
    if (res.expanded_cells >= pc.max_expansions) {
      res.reason = "expansion budget exhausted";
      break;
    }
    const long id = std::get<1>(open.top());
    open.pop();
    ++res.expanded_cells;
    const Node node = nodes[id];
    const double d = distance(node.state, spec.y0);
    res.best_distance = std::min(res.best_distance, d);

    if (d <= 0.5 * spec.arrival_tol) {
      res.frontier = open.size();
      res.marked_cells = cells.marked_count;
      finish(path_to(nodes, id));
      if (res.status == ReachStatus::reached) return res;
    }
    if (d <= homing_reach) {
      Segment seg;
      if (try_homing(f, node.state, spec, cap, seg) && node.time + seg.duration <= spec.horizon) {
        auto segs = path_to(nodes, id);
        segs.push_back(seg);
        res.frontier = open.size();
        res.marked_cells = cells.marked_count;
        finish(std::move(segs));
        if (res.status == ReachStatus::reached) return res;
      }
    }

    for (const Vec& u : controls) {
      Vec x = node.state;
      if (!advance(f, x, u, tau, step)) continue;
      cells.mark_ball(x, r);
      push(Node{x, node.time + tau, id, {u, tau}, node.round + 1});
    }
    // Coasting under V + W alone.
    Vec x = node.state;
    long parent = id;
    double t = node.time;
    const int windows = static_cast<int>(std::floor(pc.coast_factor));
    const Vec zero{0.0, 0.0};
    int stale = 0;
    for (int w = 1; w <= windows && stale < kStaleCoast; ++w) {
      if (!advance(f, x, zero, tau, step, [&](const Vec& y) { cells.mark(cells.index(y)); })) break;
      t += tau;
      if (t > spec.horizon) break;
      const long k = cells.index(x);
      if (k >= 0 && !cells.visited[k]) {
        stale = 0;
        push(Node{x, t, parent, {zero, t - (parent == id ? node.time : nodes[parent].time)}, node.round + 1});
        parent = static_cast<long>(nodes.size()) - 1;
      } else {
        ++stale;
      }
    }
  }
  if (res.reason.empty()) res.reason = "search space exhausted";
  res.frontier = open.size();
  res.marked_cells = cells.marked_count;
  res.status = ReachStatus::not_reached;
  return res;
}

VerifyResult verify_schedule(const DriftField& f, const ControlSchedule& schedule, const ReachSpec& spec,
                             double step_scale) {
  if (!(step_scale > 0.0)) throw InputError("step scale must be positive");
  check_spec(f, spec);
  if (schedule.breakpoints.size() != schedule.values.size() + 1 && !(schedule.values.empty())) {
    throw InputError("schedule needs one more breakpoint than values");
  }
  for (std::size_t k = 1; k < schedule.breakpoints.size(); ++k) {
    if (!(schedule.breakpoints[k] > schedule.breakpoints[k - 1])) throw InputError("breakpoints must increase");
  }
  VerifyResult out;
  const double step = spec.planner.flow.step * step_scale;
  Vec x = spec.x0;
  out.trajectory.field_id = f.id();
  out.trajectory.times.push_back(0.0);
  out.trajectory.states.push_back(x);
  auto applied = [&](const Vec& y, const Vec& u) {
    Vec w{0.0, 0.0};
    if (f.corrected() && !f.corrector()->try_eval(y, w)) return -1.0;
    return (w + u).norm();
  };
  double t = 0.0;
  bool ok = true;
  for (std::size_t k = 0; k < schedule.values.size() && ok; ++k) {
    const Vec& u = schedule.values[k];
    const double duration = schedule.breakpoints[k + 1] - schedule.breakpoints[k];
    const int n = step_count(duration, step);
    const double h = duration / n;
    out.sup_norm = std::max(out.sup_norm, applied(x, u));
    for (int i = 0; i < n; ++i) {
      if (!advance(f, x, u, h, h)) {
        ok = false;
        out.reason = "trajectory left the corrector grid";
        break;
      }
      t += h;
      const double a = applied(x, u);
      if (a < 0.0) {
        ok = false;
        out.reason = "trajectory left the corrector grid";
        break;
      }
      out.sup_norm = std::max(out.sup_norm, a);
      out.trajectory.times.push_back(t);
      out.trajectory.states.push_back(x);
    }
  }
  out.arrival_error = distance(x, spec.y0);
  if (!ok) return out;
  if (!(out.arrival_error <= spec.arrival_tol)) {
    out.reason = "arrival error " + std::to_string(out.arrival_error) + " above tolerance";
  } else if (!(out.sup_norm < spec.delta)) {
    out.reason = "control norm " + std::to_string(out.sup_norm) + " not below delta";
  } else if (schedule.duration() > spec.horizon) {
    out.reason = "schedule longer than the horizon";
  } else {
    out.pass = true;
  }
  return out;
}

}  // namespace fishnav
