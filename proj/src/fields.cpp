#include "fishnav/fields.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

namespace fishnav {

namespace {

int wrap(int i, int n) {
  const int r = i % n;
  return r < 0 ? r + n : r;
}

std::vector<double> parse_csv_row(const std::string& line) {
  std::vector<double> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    try {
      out.push_back(std::stod(cell));
    } catch (const std::exception&) {
      throw InputError("grid CSV: cannot parse '" + cell + "'");
    }
  }
  return out;
}

Vec parse_vec(const std::string& text) {
  std::vector<double> v;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) v.push_back(std::stod(cell));
  if (v.empty()) throw InputError("empty vector literal");
  return Vec::from_span(v);
}

// c sin(kappa.x) split into two waves.
void add_sine(std::vector<PlaneWave>& out, const Vec& kappa, const Vec& c) {
  const std::complex<double> half_i(0.0, 0.5);
  PlaneWave plus{kappa, {}}, minus{-kappa, {}};
  for (int i = 0; i < c.dim(); ++i) {
    plus.amp[i] = -half_i * c[i];
    minus.amp[i] = half_i * c[i];
  }
  out.push_back(plus);
  out.push_back(minus);
}

}  // namespace

std::string to_string(FieldKind kind) {
  switch (kind) {
    case FieldKind::constant: return "constant";
    case FieldKind::shear_sin: return "shear_sin";
    case FieldKind::taylor_green: return "taylor_green";
    case FieldKind::grid: return "grid";
    case FieldKind::linear: return "linear";
    case FieldKind::sum: return "sum";
    case FieldKind::scaled: return "scaled";
  }
  return "unknown";
}

Vec GridData::node_value(std::array<int, kMaxDim> idx) const {
  std::size_t flat = 0;
  for (int a = 0; a < dim; ++a) flat = flat * n[a] + wrap(idx[a], n[a]);
  Vec v(dim);
  for (int c = 0; c < dim; ++c) v[c] = values[flat * dim + c];
  return v;
}

GridData read_grid_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open grid CSV " + path.string());
  std::string header;
  std::getline(in, header);
  const auto columns = std::count(header.begin(), header.end(), ',') + 1;
  if (columns % 2 != 0 || columns < 2 || columns > 2 * kMaxDim) {
    throw InputError("grid CSV header must be x1,...,xd,v1,...,vd");
  }
  const int d = static_cast<int>(columns / 2);

  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto row = parse_csv_row(line);
    if (static_cast<int>(row.size()) != 2 * d) throw InputError("grid CSV: ragged row");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw InputError("grid CSV has no rows");

  GridData g;
  g.dim = d;
  g.origin = Vec(d);
  g.spacing = Vec(d);
  g.source = path.string();
  std::array<std::vector<double>, kMaxDim> axes;
  for (int a = 0; a < d; ++a) {
    for (const auto& r : rows) axes[a].push_back(r[a]);
    std::sort(axes[a].begin(), axes[a].end());
    axes[a].erase(std::unique(axes[a].begin(), axes[a].end()), axes[a].end());
    if (axes[a].size() < 2) throw InputError("grid CSV needs >= 2 nodes per axis");
    g.n[a] = static_cast<int>(axes[a].size());
    g.origin[a] = axes[a].front();
    g.spacing[a] = (axes[a].back() - axes[a].front()) / (g.n[a] - 1);
    for (int i = 0; i < g.n[a]; ++i) {
      if (std::abs(axes[a][i] - (g.origin[a] + i * g.spacing[a])) > 1e-9 * (1.0 + g.spacing[a])) {
        throw InputError("grid CSV nodes are not on a regular lattice");
      }
    }
  }
  std::size_t total = 1;
  for (int a = 0; a < d; ++a) total *= g.n[a];
  if (rows.size() != total) throw InputError("grid CSV does not cover the full lattice");
  g.values.assign(total * d, 0.0);
  for (const auto& r : rows) {
    std::size_t flat = 0;
    for (int a = 0; a < d; ++a) {
      const int i = static_cast<int>(std::lround((r[a] - g.origin[a]) / g.spacing[a]));
      flat = flat * g.n[a] + i;
    }
    for (int c = 0; c < d; ++c) g.values[flat * d + c] = r[d + c];
  }
  return g;
}

VectorField VectorField::constant(const Vec& value) {
  VectorField f;
  f.kind_ = FieldKind::constant;
  f.dim_ = value.dim();
  f.params_.assign(value.begin(), value.end());
  f.sup_ = value.norm();
  f.lip_ = 0.0;
  f.wavenumber_ = 0.0;
  return f;
}

VectorField VectorField::zero(int dim) { return constant(Vec::zeros(dim)); }

VectorField VectorField::shear_sin(int dim, double amplitude, double wavenumber) {
  if (dim < 2) throw InputError("shear_sin needs dim >= 2");
  VectorField f;
  f.kind_ = FieldKind::shear_sin;
  f.dim_ = Vec(dim).dim();
  f.params_ = {amplitude, wavenumber};
  f.sup_ = std::abs(amplitude);
  f.lip_ = std::abs(amplitude * wavenumber);
  f.wavenumber_ = std::abs(wavenumber);
  return f;
}

VectorField VectorField::taylor_green(double amplitude, double wavenumber) {
  VectorField f;
  f.kind_ = FieldKind::taylor_green;
  f.dim_ = 2;
  f.params_ = {amplitude, wavenumber};
  f.sup_ = std::abs(amplitude);
  f.lip_ = std::abs(amplitude * wavenumber);
  f.wavenumber_ = std::sqrt(2.0) * std::abs(wavenumber);
  return f;
}

VectorField VectorField::linear(const Mat& matrix) {
  VectorField f;
  f.kind_ = FieldKind::linear;
  f.dim_ = Vec(matrix.dim).dim();
  double frob = 0.0;
  for (int i = 0; i < matrix.dim; ++i) {
    for (int j = 0; j < matrix.dim; ++j) {
      f.params_.push_back(matrix(i, j));
      frob += matrix(i, j) * matrix(i, j);
    }
  }
  f.sup_ = frob > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
  f.lip_ = std::sqrt(frob);
  f.wavenumber_ = 0.0;
  return f;
}

VectorField VectorField::grid(GridData data) {
  VectorField f;
  f.kind_ = FieldKind::grid;
  f.dim_ = data.dim;
  double sup = 0.0;
  for (std::size_t i = 0; i < data.values.size(); i += data.dim) {
    double s = 0.0;
    for (int c = 0; c < data.dim; ++c) s += data.values[i + c] * data.values[i + c];
    sup = std::max(sup, std::sqrt(s));
  }
  // Lipschitz bound of the multilinear interpolant: per-axis slope bound, summed.
  double lip = 0.0;
  double min_spacing = std::numeric_limits<double>::infinity();
  std::array<int, kMaxDim> idx{};
  const std::size_t total = data.values.size() / data.dim;
  for (int a = 0; a < data.dim; ++a) {
    min_spacing = std::min(min_spacing, data.spacing[a]);
    double axis_slope = 0.0;
    for (std::size_t flat = 0; flat < total; ++flat) {
      std::size_t rem = flat;
      for (int b = data.dim - 1; b >= 0; --b) {
        idx[b] = static_cast<int>(rem % data.n[b]);
        rem /= data.n[b];
      }
      auto next = idx;
      next[a] += 1;
      axis_slope = std::max(axis_slope, (data.node_value(next) - data.node_value(idx)).norm() / data.spacing[a]);
    }
    lip += axis_slope;
  }
  f.sup_ = sup;
  f.lip_ = lip;
  f.wavenumber_ = kPi / min_spacing;
  f.grid_ = std::make_shared<const GridData>(std::move(data));
  return f;
}

VectorField VectorField::sum(const VectorField& a, const VectorField& b) {
  if (a.dim() != b.dim()) throw InputError("sum of fields with different dimensions");
  VectorField f;
  f.kind_ = FieldKind::sum;
  f.dim_ = a.dim();
  f.children_ = {std::make_shared<const VectorField>(a), std::make_shared<const VectorField>(b)};
  f.sup_ = a.sup_ + b.sup_;
  if (a.lip_ && b.lip_) f.lip_ = *a.lip_ + *b.lip_;
  f.wavenumber_ = std::max(a.wavenumber_, b.wavenumber_);
  return f;
}

VectorField VectorField::scaled(const VectorField& field, double factor, double dilation) {
  VectorField f;
  f.kind_ = FieldKind::scaled;
  f.dim_ = field.dim();
  f.params_ = {factor, dilation};
  f.children_ = {std::make_shared<const VectorField>(field)};
  f.sup_ = field.sup_ == 0.0 ? 0.0 : std::abs(factor) * field.sup_;
  if (field.lip_) f.lip_ = std::abs(factor * dilation) * *field.lip_;
  f.wavenumber_ = std::abs(dilation) * field.wavenumber_;
  return f;
}

std::optional<std::vector<PlaneWave>> VectorField::plane_waves() const {
  std::vector<PlaneWave> out;
  switch (kind_) {
    case FieldKind::constant: {
      PlaneWave w{Vec::zeros(dim_), {}};
      for (int i = 0; i < dim_; ++i) w.amp[i] = params_[i];
      out.push_back(w);
      return out;
    }
    case FieldKind::shear_sin: {
      Vec c = Vec::zeros(dim_);
      c[1] = params_[0];
      add_sine(out, Vec::unit(dim_, 0) * params_[1], c);
      return out;
    }
    case FieldKind::taylor_green: {
      // -a sin(kx)cos(ky) and a cos(kx)sin(ky) as sines of k(x+y) and k(x-y).
      const double a = params_[0], k = params_[1];
      add_sine(out, Vec{k, k}, Vec{-0.5 * a, 0.5 * a});
      add_sine(out, Vec{k, -k}, Vec{-0.5 * a, -0.5 * a});
      return out;
    }
    case FieldKind::sum: {
      auto a = children_[0]->plane_waves();
      auto b = children_[1]->plane_waves();
      if (!a || !b) return std::nullopt;
      a->insert(a->end(), b->begin(), b->end());
      return a;
    }
    case FieldKind::scaled: {
      auto w = children_[0]->plane_waves();
      if (!w) return std::nullopt;
      for (auto& term : *w) {
        term.kappa *= params_[1];
        for (auto& c : term.amp) c *= params_[0];
      }
      return w;
    }
    case FieldKind::grid:
    case FieldKind::linear:
      return std::nullopt;
  }
  return std::nullopt;
}

double VectorField::length_scale() const {
  return wavenumber_ > 0.0 ? 1.0 / wavenumber_ : std::numeric_limits<double>::infinity();
}

Vec VectorField::eval(const Vec& x) const {
  if (x.dim() != dim_) {
    throw InputError("point has dimension " + std::to_string(x.dim()) + ", field expects " +
                     std::to_string(dim_));
  }
  return eval_unchecked(x);
}

Vec VectorField::eval_unchecked(const Vec& x) const {
  Vec out(dim_);
  switch (kind_) {
    case FieldKind::constant:
      for (int i = 0; i < dim_; ++i) out[i] = params_[i];
      return out;
    case FieldKind::shear_sin:
      out[1] = params_[0] * std::sin(params_[1] * x[0]);
      return out;
    case FieldKind::taylor_green: {
      const double k = params_[1];
      const double s1 = std::sin(k * x[0]), c1 = std::cos(k * x[0]);
      const double s2 = std::sin(k * x[1]), c2 = std::cos(k * x[1]);
      out[0] = -params_[0] * s1 * c2;
      out[1] = params_[0] * c1 * s2;
      return out;
    }
    case FieldKind::linear:
      for (int i = 0; i < dim_; ++i) {
        double s = 0.0;
        for (int j = 0; j < dim_; ++j) s += params_[i * dim_ + j] * x[j];
        out[i] = s;
      }
      return out;
    case FieldKind::grid: {
      const GridData& g = *grid_;
      std::array<int, kMaxDim> base{};
      std::array<double, kMaxDim> frac{};
      for (int a = 0; a < dim_; ++a) {
        const double u = (x[a] - g.origin[a]) / g.spacing[a];
        const double fl = std::floor(u);
        base[a] = static_cast<int>(std::fmod(fl, static_cast<double>(g.n[a])));
        frac[a] = u - fl;
      }
      for (int corner = 0; corner < (1 << dim_); ++corner) {
        double w = 1.0;
        auto idx = base;
        for (int a = 0; a < dim_; ++a) {
          const bool hi = (corner >> a) & 1;
          w *= hi ? frac[a] : 1.0 - frac[a];
          idx[a] += hi ? 1 : 0;
        }
        if (w != 0.0) out += w * g.node_value(idx);
      }
      return out;
    }
    case FieldKind::sum:
      return children_[0]->eval_unchecked(x) + children_[1]->eval_unchecked(x);
    case FieldKind::scaled:
      return params_[0] * children_[0]->eval_unchecked(params_[1] * x);
  }
  return out;
}

nlohmann::json VectorField::to_json() const {
  nlohmann::json j;
  j["kind"] = kind_ == FieldKind::grid ? "grid" : to_string(kind_);
  j["dim"] = dim_;
  nlohmann::json p = nlohmann::json::object();
  switch (kind_) {
    case FieldKind::constant: p["value"] = params_; break;
    case FieldKind::shear_sin:
    case FieldKind::taylor_green:
      p["amplitude"] = params_[0];
      p["wavenumber"] = params_[1];
      break;
    case FieldKind::linear: {
      nlohmann::json rows = nlohmann::json::array();
      for (int i = 0; i < dim_; ++i) {
        rows.push_back(std::vector<double>(params_.begin() + i * dim_, params_.begin() + (i + 1) * dim_));
      }
      p["matrix"] = rows;
      break;
    }
    case FieldKind::grid: p["csv"] = grid_->source; break;
    case FieldKind::sum: p["terms"] = {children_[0]->to_json(), children_[1]->to_json()}; break;
    case FieldKind::scaled:
      p["field"] = children_[0]->to_json();
      p["factor"] = params_[0];
      p["dilation"] = params_[1];
      break;
  }
  j["params"] = p;
  return j;
}

VectorField VectorField::from_json(const nlohmann::json& spec, const std::filesystem::path& base_dir) {
  if (!spec.is_object() || !spec.contains("kind")) throw InputError("field spec needs a 'kind'");
  const std::string kind = spec.at("kind").get<std::string>();
  const int dim = spec.value("dim", 2);
  const nlohmann::json params = spec.value("params", nlohmann::json::object());
  try {
    if (kind == "constant") {
      const auto v = params.value("value", std::vector<double>(dim, 0.0));
      if (static_cast<int>(v.size()) != dim) throw InputError("constant value has wrong dimension");
      return constant(Vec::from_span(v));
    }
    if (kind == "shear_sin") {
      return shear_sin(dim, params.value("amplitude", 1.0), params.value("wavenumber", 1.0));
    }
    if (kind == "taylor_green") {
      if (dim != 2) throw InputError("taylor_green is two-dimensional");
      return taylor_green(params.value("amplitude", 1.0), params.value("wavenumber", 1.0));
    }
    if (kind == "linear") {
      const auto rows = params.at("matrix").get<std::vector<std::vector<double>>>();
      Mat m = Mat::zeros(static_cast<int>(rows.size()));
      for (int i = 0; i < m.dim; ++i) {
        if (static_cast<int>(rows[i].size()) != m.dim) throw InputError("linear matrix must be square");
        for (int j = 0; j < m.dim; ++j) m(i, j) = rows[i][j];
      }
      return linear(m);
    }
    if (kind == "grid" || kind == "grid_sampled") {
      std::filesystem::path csv = params.at("csv").get<std::string>();
      if (csv.is_relative() && !base_dir.empty()) csv = base_dir / csv;
      auto data = read_grid_csv(csv);
      if (data.dim != dim) throw InputError("grid CSV dimension differs from spec dim");
      return grid(std::move(data));
    }
    if (kind == "sum") {
      const auto& terms = params.at("terms");
      if (!terms.is_array() || terms.empty()) throw InputError("sum needs a nonempty 'terms' list");
      VectorField acc = from_json(terms[0], base_dir);
      for (std::size_t i = 1; i < terms.size(); ++i) acc = sum(acc, from_json(terms[i], base_dir));
      return acc;
    }
    if (kind == "scaled") {
      return scaled(from_json(params.at("field"), base_dir), params.value("factor", 1.0),
                    params.value("dilation", 1.0));
    }
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("bad field params: ") + e.what());
  }
  throw InputError("unknown field kind '" + kind + "'");
}

VectorField field_from_arg(const std::string& arg, int dim) {
  if (arg == "zero") return VectorField::zero(dim);
  if (arg == "shear_sin") return VectorField::shear_sin(dim);
  if (arg == "taylor_green") return VectorField::taylor_green();
  if (arg == "circular") {
    Mat m = Mat::zeros(2);
    m(0, 1) = -1.0;
    m(1, 0) = 1.0;
    return VectorField::linear(m);
  }
  if (arg.rfind("constant:", 0) == 0) return VectorField::constant(parse_vec(arg.substr(9)));
  std::ifstream in(arg);
  if (!in) throw InputError("unknown field '" + arg + "' (not a built-in name or readable file)");
  nlohmann::json spec;
  try {
    in >> spec;
  } catch (const nlohmann::json::exception& e) {
    throw InputError("cannot parse field spec " + arg + ": " + e.what());
  }
  return VectorField::from_json(spec, std::filesystem::path(arg).parent_path());
}

double divergence_fd(const VectorField& field, const Vec& x, double h) {
  if (!(h > 0.0)) throw InputError("finite-difference step must be positive");
  field.eval(x);
  return central_divergence(field, x, h);
}

Mat jacobian_fd(const VectorField& field, const Vec& x, double h) {
  if (!(h > 0.0)) throw InputError("finite-difference step must be positive");
  field.eval(x);
  return central_jacobian(field, x, h);
}

}  // namespace fishnav
