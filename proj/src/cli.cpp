#include "fishnav/cli.hpp"

#include <CLI11.hpp>
#include <boost/version.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "fishnav/json_io.hpp"
#include "fishnav/parallel.hpp"

namespace fishnav {

namespace {

namespace fs = std::filesystem;

struct Run {
  fs::path dir;
  std::vector<std::string> outputs;
  std::ostream& out;
  std::uint64_t seed = 1;

  void write_json(const std::string& name, const json& j) {
    fs::create_directories(dir);
    write_json_file(dir / name, j);
    outputs.push_back((dir / name).string());
  }
  void write_text(const std::string& name, const std::string& text) {
    fs::create_directories(dir);
    std::ofstream f(dir / name);
    if (!f) throw InputError("cannot write " + (dir / name).string());
    f << text;
    outputs.push_back((dir / name).string());
  }
};

std::string csv_row(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ',';
    s += format_double(v[i]);
  }
  return s + '\n';
}

std::vector<Vec> parse_points(const std::string& text) {
  std::vector<Vec> pts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ';')) pts.push_back(parse_vec_arg(item));
  if (pts.empty()) throw InputError("no points given");
  return pts;
}

void parse_box(const std::string& text, Vec& lo, Vec& hi) {
  const auto v = parse_list_arg(text);
  if (v.size() != 4) throw InputError("box must be xlo,ylo,xhi,yhi, got '" + text + "'");
  lo = Vec{v[0], v[1]};
  hi = Vec{v[2], v[3]};
  if (!(hi[0] > lo[0] && hi[1] > lo[1])) throw InputError("box must have hi > lo");
}

struct FieldOpts {
  std::string field;
  int dim = 2;
  VectorField load() const { return field_from_arg(field, dim); }
};

void add_field(CLI::App* app, FieldOpts& f) {
  app->add_option("--field", f.field, "built-in name (shear_sin, taylor_green, circular, zero, constant:a,b) or JSON spec file")
      ->required();
  app->add_option("--dim", f.dim, "dimension for built-ins that support it")->check(CLI::Range(1, 3));
}

struct CorrOpts {
  double alpha = 0.0;
  double p = 0.0;
  int radial_nodes = 8;
  int angular_nodes = 64;
  double tail_tol = 1e-4;
  std::string box;
  double spacing = 0.0;

  PsiParams psi(int dim) const {
    PsiParams ps = PsiParams::midpoint(dim, alpha);
    if (p > 0.0) ps.p = p;
    ps.validate();
    return ps;
  }
  QuadratureConfig quad(double window) const {
    QuadratureConfig q;
    q.radial_nodes = radial_nodes;
    q.angular_nodes = angular_nodes;
    q.tail_tol = tail_tol;
    q.window_radius = window;
    q.validate();
    return q;
  }
};

void add_corrector(CLI::App* app, CorrOpts& c, double alpha_default, bool with_grid) {
  c.alpha = alpha_default;
  app->add_option("--alpha", c.alpha, with_grid ? "corrector alpha; 0 runs V alone" : "corrector alpha");
  app->add_option("--p", c.p, "weight exponent; 0 = midpoint of ((d-1)/2, d/2)");
  app->add_option("--radial-nodes", c.radial_nodes, "Gauss-Legendre nodes per radial panel");
  app->add_option("--angular-nodes", c.angular_nodes, "base angular node count");
  app->add_option("--tail-tol", c.tail_tol, "certified truncation tail tolerance");
  if (with_grid) {
    app->add_option("--box", c.box, "corrector grid box xlo,ylo,xhi,yhi");
    app->add_option("--spacing", c.spacing, "corrector grid spacing; 0 = automatic");
  }
}

DriftField make_drift(const VectorField& v, const CorrOpts& c, const Vec& lo, const Vec& hi) {
  if (!(c.alpha > 0.0)) return DriftField(v);
  if (v.dim() != 2) throw ConfigError("corrected flows need a planar field");
  const double spacing = c.spacing > 0.0 ? c.spacing : 0.25 * std::min({v.length_scale(), c.alpha, 1.0});
  CorrectorField w(v, c.psi(2), c.quad(CorrectorGrid::required_window(lo, hi, spacing)));
  return DriftField(v, std::make_shared<CorrectorGrid>(CorrectorGrid::build(w, lo, hi, spacing)));
}

DriftField make_drift(const VectorField& v, const CorrOpts& c) {
  if (!(c.alpha > 0.0)) return DriftField(v);
  if (c.box.empty()) throw InputError("--box is required with a corrector");
  Vec lo, hi;
  parse_box(c.box, lo, hi);
  return make_drift(v, c, lo, hi);
}

// Control problem files carry the field and corrector next to the reach spec.
DriftField control_drift(const json& spec, const ReachSpec& reach) {
  if (!spec.contains("field")) throw InputError("control spec needs a 'field' entry");
  const json& fj = spec["field"];
  const VectorField v = fj.is_string() ? field_from_arg(fj.get<std::string>(), 2) : VectorField::from_json(fj);
  CorrOpts c;
  if (spec.contains("corrector") && !spec["corrector"].is_null()) {
    const json& cj = spec["corrector"];
    c.alpha = cj.at("alpha").get<double>();
    c.p = cj.value("p", 0.0);
    c.spacing = cj.value("spacing", 0.0);
    c.radial_nodes = cj.value("radial_nodes", c.radial_nodes);
    c.angular_nodes = cj.value("angular_nodes", c.angular_nodes);
    c.tail_tol = cj.value("tail_tol", c.tail_tol);
  }
  Vec lo, hi;
  planner_box(reach, lo, hi);
  return make_drift(v, c, lo, hi);
}

std::string join_command(const CLI::App* leaf) {
  std::vector<std::string> words;
  for (const CLI::App* a = leaf; a && a->get_parent(); a = a->get_parent()) words.push_back(a->get_name());
  std::string s;
  for (auto it = words.rbegin(); it != words.rend(); ++it) s += (s.empty() ? "" : " ") + *it;
  return s;
}

// Resolved option values of the leaf command, in a form --config accepts back.
json echo_options(const CLI::App* leaf) {
  json cfg = json::object();
  for (const CLI::App* a = leaf; a; a = a->get_parent()) {
    for (const CLI::Option* o : a->get_options()) {
      if (o->get_lnames().empty()) continue;
      const std::string name = o->get_lnames().front();
      if (name == "help" || name == "version" || name == "config" || cfg.contains(name)) continue;
      if (o->get_type_size() == 0) {
        cfg[name] = o->count() > 0;
      } else if (o->count() > 0) {
        cfg[name] = o->results().back();
      } else {
        cfg[name] = o->get_default_str();
      }
    }
  }
  return cfg;
}

std::string config_value(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer() || v.is_number_unsigned()) return v.dump();
  if (v.is_number()) return format_double(v.get<double>());
  if (v.is_array()) {
    std::string s;
    const bool nested = !v.empty() && v[0].is_array();
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (i) s += nested ? ";" : ",";
      s += config_value(v[i]);
    }
    return s;
  }
  throw InputError("unsupported config value " + v.dump());
}

// Options already present in `explicit_flags` are skipped.
std::vector<std::string> config_tokens(const json& cfg, const std::set<std::string>& explicit_flags) {
  if (!cfg.is_object()) throw InputError("config file must hold a JSON object");
  std::vector<std::string> tokens;
  for (const auto& [key, value] : cfg.items()) {
    if (key == "config") continue;
    std::string flag = "--" + key;
    std::replace(flag.begin() + 2, flag.end(), '_', '-');
    if (explicit_flags.count(flag)) continue;
    if (value.is_boolean()) {
      if (value.get<bool>()) tokens.push_back(flag);
      continue;
    }
    const std::string text = config_value(value);
    if (text.empty()) continue;
    tokens.push_back(flag);
    tokens.push_back(text);
  }
  return tokens;
}

// Splices config-file options after the command words. Explicit flags win.
std::vector<std::string> expand_config(std::vector<std::string> args) {
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[i + 1];
      args.erase(args.begin() + i, args.begin() + i + 2);
      break;
    }
    if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
      args.erase(args.begin() + i);
      break;
    }
  }
  if (path.empty()) return args;
  json cfg = read_json_file(path);
  // Command words follow the global options.
  std::size_t words = 0;
  while (words < args.size() && !args[words].empty() && args[words][0] == '-') {
    const std::string& a = args[words];
    const bool takes_value = a == "--out" || a == "--seed" || a == "--threads";
    words += takes_value ? 2 : 1;
  }
  words = std::min(words, args.size());
  const std::size_t first_word = words;
  while (words < args.size() && !args[words].empty() && args[words][0] != '-') ++words;
  if (cfg.contains("command") && cfg.contains("config")) {
    if (words == first_word) {
      std::stringstream ss(cfg["command"].get<std::string>());
      std::vector<std::string> cmd;
      for (std::string w; ss >> w;) cmd.push_back(w);
      args.insert(args.begin() + static_cast<long>(first_word), cmd.begin(), cmd.end());
      words = first_word + cmd.size();
    }
    cfg = cfg["config"];
  }
  std::set<std::string> explicit_flags;
  for (const auto& a : args) {
    if (a.rfind("--", 0) == 0) explicit_flags.insert(a.substr(0, a.find('=')));
  }
  const auto tokens = config_tokens(cfg, explicit_flags);
  args.insert(args.begin() + static_cast<long>(words), tokens.begin(), tokens.end());
  return args;
}

json error_json(const std::string& type, const std::string& message, int code) {
  return {{"error", {{"type", type}, {"message", message}, {"exit_code", code}}}};
}

}  // namespace

int dispatch(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  const auto t0 = std::chrono::steady_clock::now();
  CLI::App app{"Corrector fields, flows, recurrence scans and small-control planning for drift fields", "fishnav"};
  app.option_defaults()->always_capture_default()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", kVersion);

  std::string config_path;
  std::uint64_t seed = 1;
  int threads = 0;
  std::string out_dir = "fishnav_out";
  app.add_option("--config", config_path, "JSON config file (option name -> value) or a run manifest");
  app.add_option("--seed", seed, "random seed");
  app.add_option("--threads", threads, "worker thread cap; 0 = hardware")->check(CLI::NonNegativeNumber);
  app.add_option("--out", out_dir, "artifact directory");

  std::map<const CLI::App*, std::function<int(Run&)>> handlers;
  auto sub = [&](CLI::App* parent, const std::string& name, const std::string& help) {
    CLI::App* s = parent->add_subcommand(name, help);
    s->fallthrough();
    return s;
  };

  // fields
  FieldOpts fo;
  std::string fields_x;
  double fd_step = kDefaultFdStep;
  {
    CLI::App* s = sub(&app, "fields", "evaluate a field, its divergence and Jacobian at points");
    add_field(s, fo);
    s->add_option("--x", fields_x, "points, e.g. 1,0;0,2")->required();
    s->add_option("--fd-step", fd_step, "central-difference step");
    handlers[s] = [&](Run& run) {
      const VectorField v = fo.load();
      json pts = json::array();
      for (const Vec& x : parse_points(fields_x)) {
        const Mat jac = jacobian_fd(v, x, fd_step);
        json rows = json::array();
        for (int i = 0; i < v.dim(); ++i) {
          std::vector<double> row;
          for (int k = 0; k < v.dim(); ++k) row.push_back(jac(i, k));
          rows.push_back(row);
        }
        pts.push_back({{"x", x}, {"value", v.eval(x)}, {"divergence_fd", divergence_fd(v, x, fd_step)}, {"jacobian", rows}});
      }
      json res = {{"field", v.to_json()}, {"dim", v.dim()}, {"sup_bound", v.sup_bound()}, {"points", pts}};
      res["lip_bound"] = v.lip_bound() ? json(*v.lip_bound()) : json(nullptr);
      run.write_json("fields.json", res);
      run.out << res.dump(2) << '\n';
      return 0;
    };
  }

  // drift
  FieldOpts dfo;
  std::string drift_scales = "1,10,100,1000";
  CenterSampler sampler;
  int quad_n = kDefaultQuadNodes;
  int derivative = -1;
  {
    CLI::App* s = sub(&app, "drift", "finite-scale mean-drift envelope, CSV scale,sup_box_average");
    add_field(s, dfo);
    s->add_option("--scales", drift_scales, "box sides");
    s->add_option("--lattice", sampler.lattice_per_axis, "lattice corners per axis");
    s->add_option("--random", sampler.random_count, "seeded random corners");
    s->add_option("--spread", sampler.spread, "corners lie in [-spread, spread]^d");
    s->add_option("--quad", quad_n, "Gauss-Legendre nodes per axis");
    s->add_option("--derivative", derivative, "use dV/dx_j instead of V; -1 = V");
    handlers[s] = [&](Run& run) {
      const VectorField v = dfo.load();
      sampler.seed = run.seed;
      const auto scales = parse_list_arg(drift_scales);
      DriftReport rep;
      if (derivative < 0) {
        rep = drift_sweep(v, scales, sampler, quad_n);
      } else {
        if (derivative >= v.dim()) throw InputError("--derivative must be below the dimension");
        rep = derivative_drift(v, scales, kDefaultFdStep, sampler, quad_n)[derivative];
      }
      std::string csv = "scale,sup_box_average\n";
      for (std::size_t i = 0; i < rep.scales.size(); ++i) csv += csv_row({rep.scales[i], rep.sup_box_average[i]});
      run.write_text("drift.csv", csv);
      run.out << csv;
      return 0;
    };
  }

  // flux
  FieldOpts xfo;
  std::string flux_center, flux_radii = "1,10,100", surface = "sphere", cap_dir;
  int flux_axis = 0;
  double cap_chord = 1.0;
  int flux_quad = kDefaultQuadNodes;
  {
    CLI::App* s = sub(&app, "flux", "normalized flux through spheres, caps or boxes, CSV surface,R,value");
    add_field(s, xfo);
    s->add_option("--center", flux_center, "surface centre; default origin");
    s->add_option("--radii", flux_radii, "radii (box: side)");
    s->add_option("--surface", surface, "sphere, cap or box")->check(CLI::IsMember({"sphere", "cap", "box"}));
    s->add_option("--axis", flux_axis, "box normal axis");
    s->add_option("--cap-dir", cap_dir, "cap direction");
    s->add_option("--cap-chord", cap_chord, "cap chord on the unit sphere, in (0, 2]");
    s->add_option("--quad", flux_quad, "quadrature nodes");
    handlers[s] = [&](Run& run) {
      const VectorField v = xfo.load();
      const Vec c = flux_center.empty() ? Vec::zeros(v.dim()) : parse_vec_arg(flux_center);
      std::string csv = "surface,R,value\n";
      for (double r : parse_list_arg(flux_radii)) {
        double value = 0.0;
        if (surface == "box") {
          value = mean_flux_box(v, FluxBox{c, flux_axis, r}, flux_quad);
        } else if (surface == "cap") {
          if (cap_dir.empty()) throw InputError("--cap-dir is required for caps");
          value = mean_flux_sphere(v, c, r, flux_quad, Cap{parse_vec_arg(cap_dir), cap_chord});
        } else {
          value = mean_flux_sphere(v, c, r, flux_quad);
        }
        csv += surface + "," + format_double(r) + "," + format_double(value) + "\n";
      }
      run.write_text("flux.csv", csv);
      run.out << csv;
      return 0;
    };
  }

  // corrector eval / sweep
  FieldOpts cfo, sfo;
  CorrOpts ceo, swo;
  std::string corr_x;
  double corr_window = 0.0;
  std::string alphas = "1,2,4,8,16";
  SweepGrid sweep_grid;
  double sweep_fd = 1e-3;
  {
    CLI::App* c = app.add_subcommand("corrector", "corrector field W");
    c->require_subcommand(1);
    c->fallthrough();
    CLI::App* e = sub(c, "eval", "W, its exact divergence and error estimate at points");
    add_field(e, cfo);
    add_corrector(e, ceo, 1.0, false);
    e->add_option("--x", corr_x, "points, e.g. 1,0;0,2")->required();
    e->add_option("--window", corr_window, "evaluation window radius; 0 = fit the points");
    handlers[e] = [&](Run& run) {
      const VectorField v = cfo.load();
      const auto pts = parse_points(corr_x);
      double need = 10.0;
      for (const Vec& x : pts) need = std::max(need, 1.02 * x.norm());
      const CorrectorField w(v, ceo.psi(v.dim()), ceo.quad(corr_window > 0.0 ? corr_window : need));
      json rows = json::array();
      for (const Vec& x : pts) {
        const CorrectorEstimate est = w.eval_with_error(x);
        json r = est;
        r["x"] = x;
        r["div_exact"] = w.div_exact(x, est.value);
        rows.push_back(r);
      }
      json res = rows.size() == 1 ? rows[0] : json{{"points", rows}};
      res["alpha"] = w.psi().alpha;
      res["p"] = w.psi().p;
      res["c_d"] = w.c_d();
      res["truncation_radius"] = w.truncation_radius();
      run.write_json("corrector.json", res);
      run.out << res.dump(2) << '\n';
      return 0;
    };

    CLI::App* sw = sub(c, "sweep", "sup norms of W and its derivatives over alpha, CSV alpha,sup_W,sup_divW,sup_dW");
    add_field(sw, sfo);
    add_corrector(sw, swo, 1.0, false);
    sw->add_option("--alphas", alphas, "alpha values");
    sw->add_option("--points", sweep_grid.points_per_axis, "grid points per axis");
    sw->add_option("--half-width", sweep_grid.half_width, "grid spans [-h, h]^2");
    sw->add_option("--fd-step", sweep_fd, "central-difference step for derivatives of W");
    handlers[sw] = [&](Run& run) {
      const VectorField v = sfo.load();
      const double p = swo.psi(v.dim()).p;
      const auto rows = alpha_sweep(v, p, parse_list_arg(alphas), sweep_grid, swo.quad(10.0), sweep_fd);
      std::string csv = "alpha,sup_W,sup_divW,sup_dW\n";
      for (const auto& r : rows) csv += csv_row({r.alpha, r.sup_w, r.sup_div_w, r.sup_dw});
      run.write_text("sweep.csv", csv);
      run.write_json("sweep.json", json{{"p", p}, {"rows", rows}});
      run.out << csv;
      return 0;
    };
  }

  // flow
  FieldOpts ffo;
  CorrOpts fco;
  std::string flow_x0;
  double flow_t = 1.0;
  FlowConfig flow_cfg;
  int sample_every = 1;
  {
    CLI::App* s = sub(&app, "flow", "RK4 trajectory of V or V + W, CSV t,x1,...,xd");
    add_field(s, ffo);
    add_corrector(s, fco, 0.0, true);
    s->add_option("--x0", flow_x0, "initial state")->required();
    s->add_option("--t", flow_t, "final time (negative integrates backward)");
    s->add_option("--step", flow_cfg.step, "RK4 step");
    s->add_option("--sample-every", sample_every, "store every n-th step")->check(CLI::PositiveNumber);
    handlers[s] = [&](Run& run) {
      const VectorField v = ffo.load();
      const DriftField f = make_drift(v, fco);
      const Trajectory tr = integrate(f, parse_vec_arg(flow_x0), flow_t, flow_cfg, sample_every);
      std::string csv = "t";
      for (int i = 0; i < f.dim(); ++i) csv += ",x" + std::to_string(i + 1);
      csv += '\n';
      for (std::size_t k = 0; k < tr.times.size(); ++k) {
        std::vector<double> row{tr.times[k]};
        for (double c : tr.states[k]) row.push_back(c);
        csv += csv_row(row);
      }
      run.write_text("trajectory.csv", csv);
      run.out << csv;
      return 0;
    };
  }

  // invariance
  FieldOpts ifo;
  CorrOpts ico;
  int inv_points = 21;
  double inv_half = 5.0, inv_h = 1e-3;
  {
    CLI::App* s = sub(&app, "invariance", "residual of div(psi (V + W)) on a lattice, JSON");
    add_field(s, ifo);
    add_corrector(s, ico, 2.0, false);
    s->add_option("--points", inv_points, "lattice points per axis");
    s->add_option("--half-width", inv_half, "lattice spans [-h, h]^2");
    s->add_option("--fd-step", inv_h, "central-difference step");
    handlers[s] = [&](Run& run) {
      const VectorField v = ifo.load();
      const CorrectorField w(v, ico.psi(v.dim()), ico.quad(std::max(10.0, 1.5 * inv_half + 2 * inv_h)));
      json res = invariance_scan(w, inv_points, inv_half, inv_h);
      run.write_json("invariance.json", res);
      run.out << res.dump(2) << '\n';
      return 0;
    };
  }

  // pushforward
  FieldOpts pfo;
  CorrOpts pco;
  PushforwardConfig pcfg;
  std::string pf_box = "-5,-5,5,5";
  bool no_corrector = false;
  {
    CLI::App* s = sub(&app, "pushforward", "Monte Carlo check that psi dx is carried to itself, JSON");
    add_field(s, pfo);
    add_corrector(s, pco, 2.0, false);
    s->add_option("--spacing", pco.spacing, "corrector grid spacing; 0 = automatic");
    s->add_flag("--no-corrector", no_corrector, "flow V alone (psi dx is then not invariant)");
    s->add_option("--region", pf_box, "sampling box xlo,ylo,xhi,yhi");
    s->add_option("--particles", pcfg.particles, "sample size");
    s->add_option("--time", pcfg.time, "flow time");
    s->add_option("--bootstrap", pcfg.bootstrap, "bootstrap resamples");
    s->add_option("--lattice", pcfg.lattice_per_axis, "test bumps per axis");
    s->add_option("--extent", pcfg.extent, "bump centres span [-extent, extent]^2");
    s->add_option("--bump-radius", pcfg.bump_radius, "bump radius");
    s->add_option("--step", pcfg.flow.step, "RK4 step");
    handlers[s] = [&](Run& run) {
      const VectorField v = pfo.load();
      parse_box(pf_box, pcfg.lo, pcfg.hi);
      pcfg.seed = run.seed;
      const PsiParams psi = pco.psi(v.dim());
      CorrOpts c = pco;
      if (no_corrector) c.alpha = 0.0;
      const double pad = pcfg.time * (v.sup_bound() + 1.0) + 0.5;
      const DriftField f =
          make_drift(v, c, pcfg.lo - Vec{pad, pad}, pcfg.hi + Vec{pad, pad});
      json res = pushforward_test(f, psi, pcfg);
      res["corrected"] = f.corrected();
      run.write_json("pushforward.json", res);
      run.out << res.dump(2) << '\n';
      return 0;
    };
  }

  // recur
  std::string perm, uset = "0";
  std::int64_t d_horizon = 100;
  FieldOpts rfo, pso, nfo;
  CorrOpts rco, pco2, nco;
  std::string ball_center = "1.5707963267948966,0";
  double ball_radius = 0.5;
  ReturnScanConfig rcfg;
  bool mu_sampling = false;
  PoissonScanConfig pcfg2;
  std::string p_lo = "-1,-1", p_hi = "1,1";
  std::string nr_x0;
  double nr_horizon = 100.0;
  NearReturnConfig nrcfg;
  {
    CLI::App* r = app.add_subcommand("recur", "recurrence checks");
    r->require_subcommand(1);
    r->fallthrough();

    CLI::App* d = sub(r, "discrete", "exact return events of an injective map, JSON + CSV n");
    d->add_option("--perm", perm, "cycle:N, random:N[:seed], translate:S or a JSON permutation file")->required();
    d->add_option("--U", uset, "states in U, comma separated");
    d->add_option("--horizon", d_horizon, "iterations")->check(CLI::PositiveNumber);
    handlers[d] = [&](Run& run) {
      const DiscreteSystem sys = DiscreteSystem::parse(perm);
      std::vector<std::int64_t> u;
      for (double x : parse_list_arg(uset)) {
        if (x != std::floor(x)) throw InputError("--U entries must be integers");
        u.push_back(static_cast<std::int64_t>(x));
      }
      json res = poincare_discrete_check(sys, u, d_horizon);
      res["system"] = sys.name;
      std::string csv = "n\n";
      for (auto n : res["returns"]) csv += std::to_string(n.get<std::int64_t>()) + "\n";
      run.write_json("recurrence.json", res);
      run.write_text("returns.csv", csv);
      run.out << res.dump(2) << '\n';
      return 0;
    };

    CLI::App* c = sub(r, "continuous", "first returns of particles started in a ball, JSON + CSV");
    add_field(c, rfo);
    add_corrector(c, rco, 0.0, true);
    c->add_option("--center", ball_center, "ball centre");
    c->add_option("--radius", ball_radius, "ball radius");
    c->add_option("--tau", rcfg.tau, "returns count from this time on");
    c->add_option("--horizon", rcfg.horizon, "final time");
    c->add_option("--particles", rcfg.particles, "particles");
    c->add_option("--bins", rcfg.histogram_bins, "histogram bins");
    c->add_option("--step", rcfg.flow.step, "RK4 step");
    c->add_flag("--mu", mu_sampling, "draw starts from psi dx instead of Lebesgue measure");
    handlers[c] = [&](Run& run) {
      const VectorField v = rfo.load();
      const DriftField f = make_drift(v, rco);
      rcfg.seed = run.seed;
      std::optional<PsiParams> psi;
      if (mu_sampling) psi = PsiParams::midpoint(v.dim(), rco.alpha > 0.0 ? rco.alpha : 1.0);
      if (mu_sampling && rco.p > 0.0) psi->p = rco.p;
      const auto rep = continuous_return_scan(f, psi, BallSpec{parse_vec_arg(ball_center), ball_radius}, rcfg);
      json res = rep;
      res["corrected"] = f.corrected();
      std::string csv = "particle";
      for (int i = 0; i < v.dim(); ++i) csv += ",x" + std::to_string(i + 1);
      csv += ",return_time\n";
      for (std::size_t k = 0; k < rep.starts.size(); ++k) {
        std::vector<double> row{static_cast<double>(k)};
        for (double x : rep.starts[k]) row.push_back(x);
        row.push_back(rep.return_times[k]);
        csv += csv_row(row);
      }
      run.write_json("returns.json", res);
      run.write_text("returns.csv", csv);
      run.out << res.dump(2) << '\n';
      return 0;
    };

    CLI::App* p = sub(r, "poisson", "minimum return distance on a lattice of starts, JSON + CSV");
    add_field(p, pso);
    add_corrector(p, pco2, 0.0, true);
    p->add_option("--lo", p_lo, "lattice corner");
    p->add_option("--hi", p_hi, "lattice corner");
    p->add_option("--points", pcfg2.points_per_axis, "points per axis");
    p->add_option("--tau", pcfg2.tau, "minimum return time");
    p->add_option("--horizon", pcfg2.horizon, "final time");
    p->add_option("--eps", pcfg2.eps, "stability threshold");
    p->add_option("--step", pcfg2.flow.step, "RK4 step");
    handlers[p] = [&](Run& run) {
      const DriftField f = make_drift(pso.load(), pco2);
      pcfg2.lo = parse_vec_arg(p_lo);
      pcfg2.hi = parse_vec_arg(p_hi);
      const auto rep = poisson_stability_scan(f, pcfg2);
      std::string csv = "x1,x2,min_distance,time_at_min\n";
      for (std::size_t k = 0; k < rep.points.size(); ++k) {
        csv += csv_row({rep.points[k][0], rep.points[k][1], rep.min_distance[k], rep.time_at_min[k]});
      }
      json res = rep;
      res["corrected"] = f.corrected();
      run.write_json("poisson.json", res);
      run.write_text("poisson.csv", csv);
      run.out << res.dump(2) << '\n';
      return 0;
    };

    CLI::App* n = sub(r, "near-return", "closest approach of an orbit to its start, JSON");
    add_field(n, nfo);
    add_corrector(n, nco, 0.0, true);
    n->add_option("--x0", nr_x0, "start")->required();
    n->add_option("--horizon", nr_horizon, "final time");
    n->add_option("--tau", nrcfg.tau, "minimum return time");
    n->add_option("--step", nrcfg.flow.step, "RK4 step");
    handlers[n] = [&](Run& run) {
      const DriftField f = make_drift(nfo.load(), nco);
      json res = near_return_search(f, parse_vec_arg(nr_x0), nr_horizon, nrcfg);
      res["x0"] = parse_vec_arg(nr_x0);
      run.write_json("near_return.json", res);
      run.out << res.dump(2) << '\n';
      return 0;
    };
  }

  // control
  std::string spec_path, result_path;
  {
    CLI::App* c = app.add_subcommand("control", "small-control navigation");
    c->require_subcommand(1);
    c->fallthrough();

    CLI::App* p = sub(c, "plan", "plan a schedule from x0 to y0, JSON result + CSV trajectory");
    p->add_option("--spec", spec_path, "reach spec JSON")->required()->check(CLI::ExistingFile);
    handlers[p] = [&](Run& run) {
      const json spec = read_json_file(spec_path);
      const ReachSpec reach = spec.get<ReachSpec>();
      const DriftField f = control_drift(spec, reach);
      const ReachResult res = plan_reach(f, reach);
      json doc = {{"spec", spec}, {"result", res}};
      std::string csv = "t,x1,x2\n";
      for (std::size_t k = 0; k < res.trajectory.times.size(); ++k) {
        csv += csv_row({res.trajectory.times[k], res.trajectory.states[k][0], res.trajectory.states[k][1]});
      }
      run.write_json("result.json", doc);
      run.write_text("trajectory.csv", csv);
      run.out << json(res).dump(2) << '\n';
      return 0;
    };

    CLI::App* v = sub(c, "verify", "re-simulate a stored plan; exit 1 when it fails");
    v->add_option("--result", result_path, "result.json written by control plan")->required()->check(CLI::ExistingFile);
    handlers[v] = [&](Run& run) {
      const json doc = read_json_file(result_path);
      const json& spec = doc.at("spec");
      const ReachSpec reach = spec.get<ReachSpec>();
      const DriftField f = control_drift(spec, reach);
      const ControlSchedule sched = doc.at("result").at("schedule").get<ControlSchedule>();
      const VerifyResult vr = verify_schedule(f, sched, reach);
      json res = vr;
      run.write_json("verify.json", res);
      run.out << res.dump(2) << '\n';
      return vr.pass ? 0 : 1;
    };
  }

  try {
    std::vector<std::string> args = expand_config(raw_args);
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << '\n';
    return 0;
  } catch (const CLI::ParseError& e) {
    err << app.help();
    err << error_json("UsageError", e.what(), 2).dump() << '\n';
    return 2;
  } catch (const InputError& e) {
    err << error_json("UsageError", e.what(), 2).dump() << '\n';
    return 2;
  }

  const CLI::App* leaf = &app;
  while (!leaf->get_subcommands().empty()) leaf = leaf->get_subcommands().front();
  auto h = handlers.find(leaf);
  if (h == handlers.end()) {
    err << error_json("UsageError", "incomplete command", 2).dump() << '\n';
    return 2;
  }

  set_thread_cap(threads);
  Run run{out_dir, {}, out, seed};
  int code = 0;
  try {
    code = h->second(run);
  } catch (const std::exception& e) {
    // Malformed values and files are usage errors.
    std::string type = "Error";
    code = 1;
    if (dynamic_cast<const InputError*>(&e) || dynamic_cast<const json::exception*>(&e)) {
      type = "UsageError";
      code = 2;
    } else if (dynamic_cast<const ConfigError*>(&e)) {
      type = "ConfigError";
    } else if (dynamic_cast<const IntegrationError*>(&e)) {
      type = "IntegrationError";
    } else if (dynamic_cast<const ModelError*>(&e)) {
      type = "ModelError";
    }
    err << error_json(type, e.what(), code).dump() << '\n';
  }

  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  json manifest = {{"command", join_command(leaf)},
                   {"config", echo_options(leaf)},
                   {"seed", seed},
                   {"exit_code", code},
                   {"versions",
                    {{"fishnav", kVersion},
                     {"compiler", __VERSION__},
                     {"boost", BOOST_LIB_VERSION},
                     {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                           std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                           std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
                     {"cli11", CLI11_VERSION}}},
                   {"wall_time_s", wall},
                   {"outputs", run.outputs}};
  try {
    fs::create_directories(run.dir);
    write_json_file(run.dir / "manifest.json", manifest);
  } catch (const std::exception& e) {
    err << error_json("InputError", e.what(), 1).dump() << '\n';
    return 1;
  }
  return code;
}

}  // namespace fishnav
