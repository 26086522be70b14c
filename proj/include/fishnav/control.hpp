#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "fishnav/dynamics.hpp"

namespace fishnav {

/// Piecewise-constant planning control u~ on [breakpoints[k], breakpoints[k+1]).
/// With a corrector the applied control is the feedback u(t) = W(x(t)) + u~(t).
struct ControlSchedule {
  std::vector<double> breakpoints;  // size values.size() + 1, starts at 0
  std::vector<Vec> values;
  double planning_sup = 0.0;        // max |u~|
  double sup_norm = 0.0;            // max |W(x(t)) + u~(t)| along the verified trajectory

  bool empty() const { return values.empty(); }
  double duration() const { return breakpoints.empty() ? 0.0 : breakpoints.back(); }
  Vec value_at(double t) const;
};

struct PlannerConfig {
  double tau = 1.0;             // control window length
  double cell = 0.0;            // cell side; 0 = tau * delta~ / 4
  double coast_factor = 50.0;   // free flow up to coast_factor * tau after each node
  double time_weight = 0.1;     // search priority: distance to y0 + time_weight * elapsed time
  std::size_t max_expansions = 200000;
  int homing_windows = 8;       // final constant-control leg lasts k * tau, k <= homing_windows
  Vec lo;                       // search box; empty = bounding box of x0, y0 padded by `pad`
  Vec hi;
  double pad = 4.0;
  FlowConfig flow;
};

struct ReachSpec {
  Vec x0;
  Vec y0;
  double delta = 0.3;
  double arrival_tol = 0.1;
  double horizon = 1e4;
  PlannerConfig planner;
};

enum class ReachStatus { reached, not_reached };
std::string to_string(ReachStatus s);

struct ReachResult {
  ReachStatus status = ReachStatus::not_reached;
  ControlSchedule schedule;
  Trajectory trajectory;
  double arrival_error = 0.0;
  std::size_t expanded_cells = 0;
  std::size_t marked_cells = 0;
  std::size_t frontier = 0;        // open nodes left when the search stopped
  double best_distance = 0.0;      // closest node state to y0
  double delta_w = 0.0;            // corrector share of the budget
  double delta_tilde = 0.0;        // planning share
  std::string reason;
};

/// Search box: planner.lo/hi when set, else the bounding box of x0 and y0 padded by planner.pad.
void planner_box(const ReachSpec& spec, Vec& lo, Vec& hi);

/// r = tau (delta - |u|) / 2: radius of the ball reachable by adding a constant
/// control of norm below (delta - |u|) / 2 over a window of length tau.
double step1_ball_radius(double tau, double delta, double u_norm);

/// Grid search over cells. Each node holds an actually reached state; it is
/// expanded by integrating V + W for tau under the nine controls
/// {0, (delta~/2) e^{i k pi/4}} and by coasting under V + W. Cells within
/// tau delta~ / 4 of an endpoint are marked reached. A node near y0 closes the
/// plan with one constant control found by Newton's method.
ReachResult plan_reach(const DriftField& f, const ReachSpec& spec);

struct ReachedSet {
  Vec lo;
  double cell = 0.0;
  int nx = 0, ny = 0;
  std::vector<char> marked;  // nx * ny
  bool is_marked(const Vec& x) const;
};
/// The marked cells after `rounds` breadth-first expansion rounds (no coasting).
ReachedSet reached_set_rounds(const DriftField& f, const ReachSpec& spec, int rounds);

struct VerifyResult {
  bool pass = false;
  double arrival_error = 0.0;
  double sup_norm = 0.0;
  Trajectory trajectory;
  std::string reason;
};

/// Re-simulates x' = V(x) + W(x) + u~(t) at step_scale times the planning step
/// and checks the arrival tolerance and sup |u| < delta.
VerifyResult verify_schedule(const DriftField& f, const ControlSchedule& schedule, const ReachSpec& spec,
                             double step_scale = 1.0);

}  // namespace fishnav
