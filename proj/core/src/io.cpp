#include "toricflow/io.hpp"

#include "toricflow/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace toricflow {

using json = nlohmann::json;

namespace {

json parse_json(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, what + ": " + e.what());
  }
}

const json& field(const json& obj, const char* key, const std::string& what) {
  if (!obj.is_object() || !obj.contains(key)) throw Error(ErrorCode::ParseError, what + ": missing field '" + key + "'");
  return obj.at(key);
}

Rational rational_of(const json& v, const std::string& what) {
  if (v.is_number_integer()) return Rational(v.get<long long>());
  if (v.is_number_float()) return parse_rational(v.dump());
  if (v.is_string()) {
    try {
      return parse_rational(v.get<std::string>());
    } catch (const std::exception&) {
      throw Error(ErrorCode::ParseError, what + ": bad rational '" + v.get<std::string>() + "'");
    }
  }
  throw Error(ErrorCode::ParseError, what + ": expected a number");
}

double real_of(const json& v, const std::string& what) { return to_double(rational_of(v, what)); }

std::vector<long> integer_list(const json& v, const std::string& what) {
  if (!v.is_array()) throw Error(ErrorCode::ParseError, what + ": expected a list");
  std::vector<long> out;
  for (const auto& e : v) {
    if (!e.is_number_integer()) throw Error(ErrorCode::ParseError, what + ": entries must be integers");
    out.push_back(e.get<long>());
  }
  return out;
}

void check_keys(const json& obj, std::initializer_list<const char*> keys, const std::string& what) {
  for (const auto& [k, v] : obj.items()) {
    bool known = false;
    for (const char* a : keys) known = known || k == a;
    if (!known) throw Error(ErrorCode::ParseError, what + ": unknown field '" + k + "'");
  }
}

}  // namespace

std::string read_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::InvalidInput, "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

PolytopeSpec parse_polytope_spec(const std::string& text) {
  const std::string what = "polytope file";
  const json j = parse_json(text, what);
  if (!j.is_object()) throw Error(ErrorCode::ParseError, what + ": expected an object");
  check_keys(j, {"name", "dim", "facets"}, what);
  PolytopeSpec spec;
  if (j.contains("name")) {
    if (!j["name"].is_string()) throw Error(ErrorCode::ParseError, what + ": name must be text");
    spec.name = j["name"].get<std::string>();
  }
  const auto& d = field(j, "dim", what);
  if (!d.is_number_integer()) throw Error(ErrorCode::ParseError, what + ": dim must be an integer");
  spec.dim = d.get<int>();
  const auto& fs = field(j, "facets", what);
  if (!fs.is_array()) throw Error(ErrorCode::ParseError, what + ": facets must be a list");
  for (const auto& f : fs) {
    check_keys(f, {"normal", "offset"}, what);
    Facet facet;
    facet.normal = integer_list(field(f, "normal", what), what + ": normal");
    facet.offset = rational_of(field(f, "offset", what), what + ": offset");
    spec.facets.push_back(std::move(facet));
  }
  return spec;
}

PolytopeSpec read_polytope_spec(const std::string& path) { return parse_polytope_spec(read_text(path)); }

DelzantPolytope read_polytope(const std::string& path) {
  auto spec = read_polytope_spec(path);
  return DelzantPolytope::create(spec.dim, std::move(spec.facets), spec.name);
}

WeightData parse_weight(const std::string& text) {
  const std::string what = "weight file";
  const json j = parse_json(text, what);
  if (!j.is_object()) throw Error(ErrorCode::ParseError, what + ": expected an object");
  check_keys(j, {"p_sigma", "c_sigma", "groups", "scal_sigma", "scal_j"}, what);
  WeightData w;
  const auto& ps = field(j, "p_sigma", what);
  if (!ps.is_array()) throw Error(ErrorCode::ParseError, what + ": p_sigma must be a list");
  for (const auto& v : ps) w.p_sigma.push_back(rational_of(v, what + ": p_sigma"));
  w.c_sigma = rational_of(field(j, "c_sigma", what), what + ": c_sigma");
  if (j.contains("groups")) {
    if (!j["groups"].is_array()) throw Error(ErrorCode::ParseError, what + ": groups must be a list");
    for (const auto& g : j["groups"]) {
      check_keys(g, {"p", "c", "d"}, what);
      FactorGroup fg;
      fg.p = integer_list(field(g, "p", what), what + ": p");
      fg.c = rational_of(field(g, "c", what), what + ": c");
      const auto& d = field(g, "d", what);
      if (!d.is_number_integer() || d.get<long>() < 0)
        throw Error(ErrorCode::ParseError, what + ": d must be a nonnegative integer");
      fg.d = d.get<int>();
      w.groups.push_back(std::move(fg));
    }
  }
  if (j.contains("scal_sigma")) w.scal_sigma = real_of(j["scal_sigma"], what + ": scal_sigma");
  if (j.contains("scal_j")) {
    if (!j["scal_j"].is_array()) throw Error(ErrorCode::ParseError, what + ": scal_j must be a list");
    for (const auto& v : j["scal_j"]) w.scal_j.push_back(real_of(v, what + ": scal_j"));
  }
  return w;
}

WeightData read_weight(const std::string& path) { return parse_weight(read_text(path)); }

std::map<std::string, std::string> read_config(const std::string& path, const std::vector<std::string>& allowed) {
  const std::string what = "config file";
  const json j = parse_json(read_text(path), what);
  if (!j.is_object()) throw Error(ErrorCode::ParseError, what + ": expected an object");
  std::map<std::string, std::string> out;
  for (const auto& [k, v] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), k) == allowed.end())
      throw Error(ErrorCode::InvalidInput, what + ": unknown key '" + k + "'");
    if (v.is_string())
      out[k] = v.get<std::string>();
    else if (v.is_number() || v.is_boolean())
      out[k] = v.dump();
    else
      throw Error(ErrorCode::ParseError, what + ": value of '" + k + "' must be a scalar");
  }
  return out;
}

void write_checkpoint(std::ostream& out, const SymplecticPotential& u, double t) {
  const auto& chart = u.chart();
  const int n = chart.dim();
  out << "# polytope=" << chart.polytope().name() << " h=" << format_double(chart.spacing())
      << " t=" << format_double(t) << "\n";
  for (std::size_t k = 0; k < chart.size(); ++k) {
    const auto& node = chart.node(static_cast<int>(k));
    for (int i = 0; i < n; ++i) out << node.index[i] << ' ';
    for (int i = 0; i < n; ++i) out << format_double(node.x[i]) << ' ';
    out << format_double(u.f()[k]) << "\n";
  }
}

void write_checkpoint(const std::string& path, const SymplecticPotential& u, double t) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::InvalidInput, "cannot write " + path);
  write_checkpoint(out, u, t);
}

Checkpoint read_checkpoint(const std::string& path) {
  std::istringstream in(read_text(path));
  Checkpoint cp;
  std::string line;
  if (!std::getline(in, line) || line.rfind("# ", 0) != 0) throw Error(ErrorCode::ParseError, "checkpoint: missing header");
  std::istringstream hs(line.substr(2));
  std::string tok;
  bool have_h = false;
  while (hs >> tok) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos) continue;
    const std::string key = tok.substr(0, eq), val = tok.substr(eq + 1);
    try {
      if (key == "polytope") cp.polytope = val;
      if (key == "h") {
        cp.h = std::stod(val);
        have_h = true;
      }
      if (key == "t") cp.t = std::stod(val);
    } catch (const std::exception&) {
      throw Error(ErrorCode::ParseError, "checkpoint: bad header value " + tok);
    }
  }
  if (!have_h) throw Error(ErrorCode::ParseError, "checkpoint: header lacks h");
  int cols = -1;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::vector<std::string> parts;
    while (ls >> tok) parts.push_back(tok);
    if (cols < 0) cols = static_cast<int>(parts.size());
    if (static_cast<int>(parts.size()) != cols || (cols - 1) % 2 != 0 || cols < 3 || cols > 7)
      throw Error(ErrorCode::ParseError, "checkpoint: malformed row");
    const int n = (cols - 1) / 2;
    std::array<int, 3> idx{};
    try {
      for (int i = 0; i < n; ++i) idx[i] = std::stoi(parts[i]);
      cp.f.push_back(std::stod(parts[cols - 1]));
    } catch (const std::exception&) {
      throw Error(ErrorCode::ParseError, "checkpoint: malformed number");
    }
    cp.index.push_back(idx);
  }
  return cp;
}

SymplecticPotential load_potential(ChartPtr chart, const Checkpoint& cp) {
  if (cp.f.size() != chart->size()) throw Error(ErrorCode::ChartMismatch, "checkpoint node count differs from the chart");
  if (std::abs(cp.h - chart->spacing()) > 1e-15 * chart->spacing())
    throw Error(ErrorCode::ChartMismatch, "checkpoint spacing differs from the chart");
  std::vector<double> f(chart->size());
  for (std::size_t r = 0; r < cp.f.size(); ++r) {
    const int k = chart->find(cp.index[r]);
    if (k < 0) throw Error(ErrorCode::ChartMismatch, "checkpoint node not on the chart");
    f[k] = cp.f[r];
  }
  return SymplecticPotential(std::move(chart), std::move(f), PotentialTag::Flowed, true);
}

void write_trace(std::ostream& out, const FlowTrace& trace, int dim) {
  out << "t,dt,calabi_energy,mabuchi_rel,sup_residual,max_rm,dist_to_start,dist_to_target,min_hessian_eig,max_f";
  if (trace.weighted) {
    out << ",weighted_energy";
    for (int i = 0; i < dim; ++i) out << ",A" << i + 1;
    out << ",B";
  }
  out << "\n";
  for (const auto& r : trace.rows) {
    out << format_double(r.t) << ',' << format_double(r.dt) << ',' << format_double(r.calabi_energy) << ','
        << format_double(r.mabuchi_rel) << ',' << format_double(r.sup_residual) << ',' << format_double(r.max_rm)
        << ',' << format_double(r.dist_to_start) << ',' << format_double(r.dist_to_target) << ','
        << format_double(r.min_hessian_eig) << ',' << format_double(r.max_f);
    if (trace.weighted) {
      out << ',' << format_double(r.weighted_energy);
      for (int i = 0; i < dim; ++i) out << ',' << format_double(i < static_cast<int>(r.A.size()) ? r.A[i] : 0.0);
      out << ',' << format_double(r.B);
    }
    out << "\n";
  }
}

void write_scan(std::ostream& out, const StabilityReport& report, int dim) {
  for (int i = 0; i < dim; ++i) out << 'a' << i + 1 << ',';
  out << "b,L,denom,ratio\n";
  for (const auto& r : report.rows) {
    for (const auto& a : r.crease.a) out << format_rational(a) << ',';
    out << format_rational(r.crease.b) << ',' << format_double(r.L) << ',' << format_double(r.denom) << ','
        << format_double(r.ratio) << "\n";
  }
  out << "# lambda_estimate=" << format_double(report.lambda_estimate) << "\n";
  out << "# minimizer a=(";
  for (std::size_t i = 0; i < report.worst.a.size(); ++i) out << (i ? "," : "") << format_rational(report.worst.a[i]);
  out << ") b=" << format_rational(report.worst.b) << "\n";
}

void write_field(std::ostream& out, const ScalarField& field) {
  const auto& chart = *field.chart;
  const int n = chart.dim();
  out << "# field=" << (field.label.empty() ? "value" : field.label) << " polytope=" << chart.polytope().name()
      << " h=" << format_double(chart.spacing()) << "\n";
  for (int i = 0; i < n; ++i) out << 'x' << i + 1 << ',';
  out << "value\n";
  for (std::size_t q = 0; q < field.nodes.size(); ++q) {
    const auto& node = chart.node(field.nodes[q]);
    for (int i = 0; i < n; ++i) out << format_double(node.x[i]) << ',';
    out << format_double(field.values[q]) << "\n";
  }
}

void write_segment(std::ostream& out, const SegmentProfile& p) {
  out << "t,V,V2,inv,inv_d1,inv_d2,rm_local\n";
  for (std::size_t i = 0; i < p.t.size(); ++i)
    out << format_double(p.t[i]) << ',' << format_double(p.V[i]) << ',' << format_double(p.V2[i]) << ','
        << format_double(p.inv[i]) << ',' << format_double(p.inv_d1[i]) << ',' << format_double(p.inv_d2[i]) << ','
        << format_double(p.rm_local[i]) << "\n";
  out << "# endpoint_value=" << format_double(p.endpoint_value_start) << ',' << format_double(p.endpoint_value_end)
      << "\n# endpoint_slope=" << format_double(p.endpoint_slope_start) << ','
      << format_double(p.endpoint_slope_end) << "\n# max_rm=" << format_double(p.max_rm)
      << "\n# chord_excess=" << format_double(p.chord_excess) << "\n# chord_excess_local="
      << format_double(p.chord_excess_local) << "\n";
}

void write_probe(std::ostream& out, const std::vector<ProbeRow>& rows) {
  out << "member,boundary_integral,max_rm,max_u,convex,note\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    out << i << ',' << format_double(r.boundary_integral) << ',' << format_double(r.max_rm) << ','
        << format_double(r.max_u) << ',' << (r.convex ? 1 : 0) << ',' << r.note << "\n";
  }
}

}  // namespace toricflow
