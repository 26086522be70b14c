#include "fishnav/json_io.hpp"

#include <cstdio>
#include <fstream>
#include <set>

namespace fishnav {

void to_json(json& j, const Vec& v) {
  j = json::array();
  for (double c : v) j.push_back(c);
}

void from_json(const json& j, Vec& v) {
  if (!j.is_array() || j.empty() || j.size() > static_cast<std::size_t>(kMaxDim)) {
    throw InputError("expected an array of 1 to 3 numbers, got " + j.dump());
  }
  v = Vec(static_cast<int>(j.size()));
  for (int i = 0; i < v.dim(); ++i) {
    if (!j[i].is_number()) throw InputError("expected a number, got " + j[i].dump());
    v[i] = j[i].get<double>();
  }
}

void to_json(json& j, const CorrectorEstimate& e) {
  j = {{"W", e.value},
       {"err_est", e.err_est},
       {"tail_bound", e.tail_bound},
       {"expansion_bound", e.expansion_bound},
       {"quadrature_est", e.quadrature_est}};
}

void to_json(json& j, const DriftReport& r) {
  j = {{"scales", r.scales},
       {"sup_box_average", r.sup_box_average},
       {"lattice_centers", r.lattice_centers},
       {"random_centers", r.random_centers},
       {"seed", r.seed}};
}

void to_json(json& j, const AlphaSweepRow& r) {
  j = {{"alpha", r.alpha},         {"sup_W", r.sup_w},   {"sup_divW", r.sup_div_w},
       {"sup_divW_exact", r.sup_div_w_exact}, {"sup_dW", r.sup_dw}, {"div_bound", r.div_bound}};
}

void to_json(json& j, const InvarianceReport& r) {
  json samples = json::array();
  for (const auto& s : r.samples) samples.push_back({{"x", s.x}, {"residual", s.residual}, {"reference", s.reference}});
  j = {{"max_residual", r.max_residual},
       {"max_reference", r.max_reference},
       {"ratio", r.ratio()},
       {"samples", samples}};
}

void to_json(json& j, const PushforwardReport& r) {
  json tests = json::array();
  for (std::size_t i = 0; i < r.tests.size(); ++i) {
    tests.push_back({{"center", r.tests[i].center},
                     {"radius", r.tests[i].radius},
                     {"expected", r.expected[i]},
                     {"empirical", r.empirical[i]},
                     {"discrepancy", r.discrepancy[i]},
                     {"width", r.width[i]}});
  }
  j = {{"tests", tests},
       {"max_discrepancy", r.max_discrepancy},
       {"max_ratio", r.max_ratio},
       {"acceptance_rate", r.acceptance_rate},
       {"particles", r.particles},
       {"escaped", r.escaped}};
}

void to_json(json& j, const RecurrenceReport& r) {
  j = {{"set", r.set},
       {"horizon", r.horizon},
       {"returns", r.return_events},
       {"orbit_growth", r.orbit_growth},
       {"growth_slope", r.growth_slope},
       {"measure_set", r.measure_set},
       {"union_bound_ok", r.union_bound_ok}};
}

void to_json(json& j, const ContinuousReturnReport& r) {
  j = {{"particles", r.particles},
       {"returned", r.returned},
       {"escaped", r.escaped},
       {"fraction", r.fraction},
       {"mu_sampling", r.mu_sampling},
       {"return_times", r.return_times},
       {"histogram_edges", r.histogram_edges},
       {"histogram", r.histogram}};
}

void to_json(json& j, const PoissonScanReport& r) {
  json pts = json::array();
  for (std::size_t i = 0; i < r.points.size(); ++i) {
    pts.push_back({{"x", r.points[i]}, {"min_distance", r.min_distance[i]}, {"time_at_min", r.time_at_min[i]}});
  }
  j = {{"points", pts}, {"escaped", r.escaped}, {"stable", r.stable}, {"fraction", r.fraction}};
}

void to_json(json& j, const NearReturn& r) { j = {{"time", r.time}, {"distance", r.distance}}; }

void to_json(json& j, const ControlSchedule& s) {
  j = {{"breakpoints", s.breakpoints},
       {"values", s.values},
       {"planning_sup", s.planning_sup},
       {"sup_norm", s.sup_norm}};
}

void from_json(const json& j, ControlSchedule& s) {
  s = {};
  s.breakpoints = j.at("breakpoints").get<std::vector<double>>();
  for (const auto& v : j.at("values")) s.values.push_back(v.get<Vec>());
  if (!s.values.empty() && s.breakpoints.size() != s.values.size() + 1) {
    throw InputError("schedule needs one more breakpoint than values");
  }
  for (const auto& v : s.values) s.planning_sup = std::max(s.planning_sup, v.norm());
  s.sup_norm = j.value("sup_norm", 0.0);
}

void to_json(json& j, const ReachSpec& s) {
  const PlannerConfig& p = s.planner;
  json planner = {{"tau", p.tau},
                  {"cell", p.cell},
                  {"coast_factor", p.coast_factor},
                  {"time_weight", p.time_weight},
                  {"max_expansions", p.max_expansions},
                  {"homing_windows", p.homing_windows},
                  {"pad", p.pad},
                  {"step", p.flow.step}};
  if (p.lo.dim() > 0) planner["lo"] = p.lo;
  if (p.hi.dim() > 0) planner["hi"] = p.hi;
  j = {{"x0", s.x0},
       {"y0", s.y0},
       {"delta", s.delta},
       {"arrival_tol", s.arrival_tol},
       {"horizon", s.horizon},
       {"planner", planner}};
}

namespace {

void reject_unknown(const json& j, const std::set<std::string>& known, const std::string& where) {
  for (const auto& [k, _] : j.items()) {
    if (!known.count(k)) throw InputError("unknown key '" + k + "' in " + where);
  }
}

}  // namespace

void from_json(const json& j, ReachSpec& s) {
  reject_unknown(j, {"x0", "y0", "delta", "arrival_tol", "horizon", "planner", "field", "corrector"}, "reach spec");
  s.x0 = j.at("x0").get<Vec>();
  s.y0 = j.at("y0").get<Vec>();
  s.delta = j.value("delta", s.delta);
  s.arrival_tol = j.value("arrival_tol", s.arrival_tol);
  s.horizon = j.value("horizon", s.horizon);
  if (j.contains("planner")) {
    const json& p = j["planner"];
    reject_unknown(p,
                   {"tau", "cell", "coast_factor", "time_weight", "max_expansions", "homing_windows", "lo", "hi",
                    "pad", "step"},
                   "planner");
    PlannerConfig& c = s.planner;
    c.tau = p.value("tau", c.tau);
    c.cell = p.value("cell", c.cell);
    c.coast_factor = p.value("coast_factor", c.coast_factor);
    c.time_weight = p.value("time_weight", c.time_weight);
    c.max_expansions = p.value("max_expansions", c.max_expansions);
    c.homing_windows = p.value("homing_windows", c.homing_windows);
    c.pad = p.value("pad", c.pad);
    c.flow.step = p.value("step", c.flow.step);
    if (p.contains("lo")) c.lo = p["lo"].get<Vec>();
    if (p.contains("hi")) c.hi = p["hi"].get<Vec>();
  }
}

void to_json(json& j, const ReachResult& r) {
  j = {{"status", to_string(r.status)},
       {"schedule", r.schedule},
       {"arrival_error", r.arrival_error},
       {"expanded_cells", r.expanded_cells},
       {"marked_cells", r.marked_cells},
       {"frontier", r.frontier},
       {"best_distance", r.best_distance},
       {"delta_w", r.delta_w},
       {"delta_tilde", r.delta_tilde},
       {"duration", r.schedule.duration()},
       {"reason", r.reason}};
}

void to_json(json& j, const VerifyResult& r) {
  j = {{"pass", r.pass}, {"arrival_error", r.arrival_error}, {"sup_norm", r.sup_norm}, {"reason", r.reason}};
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw InputError("cannot parse " + path.string() + ": " + e.what());
  }
}

void write_json_file(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

std::vector<double> parse_list_arg(const std::string& text) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t end = std::min(text.find(',', start), text.size());
    const std::string cell = text.substr(start, end - start);
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(cell, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != cell.size()) throw InputError("cannot parse number '" + cell + "' in '" + text + "'");
    out.push_back(v);
    start = end + 1;
  }
  return out;
}

Vec parse_vec_arg(const std::string& text) {
  const auto v = parse_list_arg(text);
  if (v.size() > static_cast<std::size_t>(kMaxDim)) throw InputError("vector '" + text + "' has more than 3 entries");
  return Vec::from_span(v);
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace fishnav
