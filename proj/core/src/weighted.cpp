#include "toricflow/weighted.hpp"

#include "toricflow/errors.hpp"

#include <Eigen/Dense>

#include <cmath>

namespace toricflow {

WeightData WeightData::trivial(int dim) {
  WeightData w;
  w.p_sigma.assign(dim, Rational(0));
  w.c_sigma = 1;
  return w;
}

namespace {

Polynomial affine_factor(int n, const std::vector<long>& p, const Rational& c) {
  RVec a(n);
  for (int k = 0; k < n; ++k) a[k] = Rational(p[k]);
  return Polynomial::affine(a, c);
}

Rational affine_value(const RVec& a, const Rational& c, const RVec& z) {
  Rational s = c;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * z[k];
  return s;
}

}  // namespace

WeightModel::WeightModel(const DelzantPolytope& P, WeightData data) : data_(std::move(data)), dim_(P.dim()) {
  const int n = dim_;
  if (static_cast<int>(data_.p_sigma.size()) != n) throw Error(ErrorCode::InvalidInput, "p_sigma has wrong length");
  if (!data_.scal_j.empty() && data_.scal_j.size() != data_.groups.size())
    throw Error(ErrorCode::InvalidInput, "scal_j must have one entry per group");
  data_.scal_j.resize(data_.groups.size(), 0.0);
  const auto& verts = P.exact().vertices();
  for (const auto& v : verts)
    if (affine_value(data_.p_sigma, data_.c_sigma, v) <= 0)
      throw Error(ErrorCode::NegativeAffineFactor, "leading factor of the weight is not positive on P");
  p_ = Polynomial::affine(data_.p_sigma, data_.c_sigma);
  for (std::size_t j = 0; j < data_.groups.size(); ++j) {
    const auto& g = data_.groups[j];
    if (static_cast<int>(g.p.size()) != n) throw Error(ErrorCode::InvalidInput, "group normal has wrong length");
    if (g.d < 0) throw Error(ErrorCode::InvalidInput, "group exponent must be nonnegative");
    RVec a(n);
    for (int k = 0; k < n; ++k) a[k] = Rational(g.p[k]);
    bool touches = false;
    for (const auto& v : verts) {
      const Rational val = affine_value(a, g.c, v);
      if (val < 0)
        throw Error(ErrorCode::NegativeAffineFactor, "factor of group " + std::to_string(j + 1) + " is negative on P");
      if (val == 0) touches = true;
    }
    if ((g.d > 0 || data_.scal_j[j] != 0) && !touches)
      throw Error(ErrorCode::InvalidInput, "factor of group " + std::to_string(j + 1) + " does not vanish on P");
    if (g.d > 0) p_ = p_ * affine_factor(n, g.p, g.c).pow(static_cast<unsigned>(g.d));
  }
  pd_ = PolynomialD(p_);
  dpd_.resize(n);
  d2pd_.assign(n, std::vector<PolynomialD>(n));
  for (int r = 0; r < n; ++r) {
    const Polynomial dr = p_.derivative(r);
    dpd_[r] = PolynomialD(dr);
    for (int s = 0; s < n; ++s) d2pd_[r][s] = PolynomialD(dr.derivative(s));
  }
}

bool WeightModel::trivial() const {
  if (data_.scal_sigma != 0) return false;
  for (double s : data_.scal_j)
    if (s != 0) return false;
  return p_.degree() == 0 && p_.evaluate(RVec(dim_, Rational(0))) == 1;
}

double WeightModel::factor(int j, std::span<const double> z) const {
  const auto& g = data_.groups[j];
  double s = to_double(g.c);
  for (int k = 0; k < dim_; ++k) s += static_cast<double>(g.p[k]) * z[k];
  return s;
}

double WeightModel::curvature_constant_term(std::span<const double> z) const {
  double out = 0;
  if (data_.scal_sigma != 0) {
    double s = to_double(data_.c_sigma);
    for (int k = 0; k < dim_; ++k) s += to_double(data_.p_sigma[k]) * z[k];
    out += data_.scal_sigma / s;
  }
  for (std::size_t j = 0; j < data_.groups.size(); ++j)
    if (data_.scal_j[j] != 0) out += data_.scal_j[j] / factor(static_cast<int>(j), z);
  return out;
}

double weight(const WeightModel& w, std::span<const double> z) {
  const double v = w.p(z);
  if (v < -1e-14) throw Error(ErrorCode::NegativeAffineFactor, "weight is negative at the point");
  return std::max(v, 0.0);
}

std::vector<double> weighted_cell_weights(const GridChart& chart, const WeightModel& w) {
  const auto& P = chart.polytope();
  const int n = chart.dim();
  const double h = chart.spacing();
  const Rational& he = chart.spacing_exact();
  const Rational half = he / 2;
  std::vector<double> out(chart.size());
  for (std::size_t k = 0; k < chart.size(); ++k) {
    const auto x = chart.x(static_cast<int>(k));
    bool full = true;
    for (int i = 0; i < P.facet_count() && full; ++i) {
      double reach = 0;
      for (int j = 0; j < n; ++j) reach += std::abs(P.normals()(i, j));
      if (P.l(i, x) - 0.5 * h * reach <= 1e-9 * h) full = false;
    }
    if (!full) {
      out[k] = to_double(cell_measure(chart, static_cast<int>(k), w.polynomial()));
      continue;
    }
    // Box integral monomial by monomial.
    const auto& idx = chart.node(static_cast<int>(k)).index;
    Rational total = 0;
    for (const auto& [alpha, c] : w.polynomial().terms()) {
      Rational term = c;
      for (int j = 0; j < n; ++j) {
        const Rational lo = he * idx[j] - half, hi = he * idx[j] + half;
        Rational plo = lo, phi = hi;
        for (int e = 0; e < alpha[j]; ++e) {
          plo *= lo;
          phi *= hi;
        }
        term *= Rational(phi - plo) / (alpha[j] + 1);
      }
      total += term;
    }
    out[k] = to_double(total);
  }
  return out;
}

ScalarField weighted_scalar_curvature(const SymplecticPotential& u, const WeightModel& w) {
  const auto& chart = u.chart();
  if (w.dim() != chart.dim()) throw Error(ErrorCode::InvalidInput, "weight dimension does not match");
  const auto hd = hessian_data(u);
  const auto& gc = chart.guillemin();
  const int n = chart.dim();
  const double h = chart.spacing();
  const bool G = u.has_guillemin_part();
  ScalarField out{u.chart_ptr(), {}, {}, "weighted_scalar_curvature"};
  for (int k : chart.field_nodes()) {
    const auto z = chart.x(k);
    const int s = chart.hessian_slot(k);
    const double pz = w.p(z);
    if (!(pz > 0)) throw Error(ErrorCode::NegativeAffineFactor, "weight vanishes at an evaluation node");
    // Second derivative sum of u^{rs}.
    double dd = G ? -gc.R[k] : 0.0;
    for (const auto& p : chart.stencil(s)) dd += (p.A.array() * hd.C[chart.hessian_slot(p.node)].array()).sum();
    const Mat Wk = hd.W[s];
    double first = 0, zeroth = 0;
    for (int r = 0; r < n; ++r)
      for (int q = 0; q < n; ++q) zeroth += w.d2p(r, q, z) * Wk(r, q);
    for (int q = 0; q < n; ++q) {
      const int kp = chart.neighbor(k, q, 1), km = chart.neighbor(k, q, -1);
      const Mat dC = (hd.C[chart.hessian_slot(kp)] - hd.C[chart.hessian_slot(km)]) / (2 * h);
      for (int r = 0; r < n; ++r) {
        const double dW = (G ? gc.dW[s][q](r, q) : 0.0) + dC(r, q);
        first += w.dp(r, z) * dW;
      }
    }
    out.nodes.push_back(k);
    out.values.push_back(w.curvature_constant_term(z) - (zeroth + 2 * first) / pz - dd);
  }
  return out;
}

Projection project_affine(const GridChart& chart, const std::vector<int>& nodes, const std::vector<double>& R,
                          const std::vector<double>& weights) {
  const int n = chart.dim();
  const int m = n + 1;
  if (R.size() != nodes.size() || weights.size() != nodes.size())
    throw Error(ErrorCode::ChartMismatch, "projection data has wrong length");
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(m, m);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m);
  Eigen::VectorXd b(m);
  auto basis = [&](int k) {
    const auto x = chart.x(nodes[k]);
    for (int i = 0; i < n; ++i) b(i) = x[i];
    b(n) = 1.0;
  };
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    basis(static_cast<int>(k));
    M += weights[k] * b * b.transpose();
    rhs -= weights[k] * R[k] * b;
  }
  Eigen::LDLT<Eigen::MatrixXd> ldlt(M);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive() ||
      std::abs(ldlt.vectorD().minCoeff()) <= 1e-14 * std::abs(ldlt.vectorD().maxCoeff()))
    throw Error(ErrorCode::SingularMomentMatrix, "weighted moment matrix is singular");
  const Eigen::VectorXd coef = ldlt.solve(rhs);
  Projection out;
  out.A.assign(coef.data(), coef.data() + n);
  out.B = coef(n);
  out.perp.resize(nodes.size());
  out.residuals.assign(m, 0.0);
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    basis(static_cast<int>(k));
    out.perp[k] = R[k] + coef.dot(b);
    out.residuals[n] += weights[k] * out.perp[k];
    for (int i = 0; i < n; ++i) out.residuals[i] += weights[k] * out.perp[k] * b(i);
  }
  // Constant first, then coordinates.
  std::rotate(out.residuals.rbegin(), out.residuals.rbegin() + 1, out.residuals.rend());
  return out;
}

Projection extremal_projection(const WeightModel& w, const ScalarField& R) {
  const auto& chart = *R.chart;
  const auto all = weighted_cell_weights(chart, w);
  std::vector<double> wts;
  for (int k : R.nodes) wts.push_back(all[k]);
  return project_affine(chart, R.nodes, R.values, wts);
}

DiscreteMabuchi weighted_functional(ChartPtr chart, const WeightModel& w, bool guillemin_part) {
  if (!guillemin_part) throw Error(ErrorCode::InvalidInput, "weighted functional needs the Guillemin reference");
  const auto& P = chart->polytope();
  const int n = chart->dim();
  const double h = chart->spacing();
  const auto& gc = chart->guillemin();
  auto closure_at = [&](std::span<const double> z) {
    const auto J = gc.inverse->jet(z);
    double s = 0;
    for (int r = 0; r < n; ++r)
      for (int q = 0; q < n; ++q) s += w.d2p(r, q, z) * J.W(r, q) + 2 * w.dp(r, z) * J.dW[q](r, q);
    return w.curvature_constant_term(z) - s / w.p(z) + J.R;
  };
  std::vector<double> c(chart->size());
  for (std::size_t k = 0; k < c.size(); ++k) {
    const auto z = chart->x(static_cast<int>(k));
    const auto& node = chart->node(static_cast<int>(k));
    if (w.trivial()) {
      c[k] = gc.R[k];
      continue;
    }
    if (node.depth >= kDirectDepth) {
      c[k] = closure_at(z);
    } else {
      const double v1 = boundary_limit(P, z, closure_at, 2e-3);
      const double v2 = boundary_limit(P, z, closure_at, 4e-3);
      if (!std::isfinite(v1) || !std::isfinite(v2) || std::abs(v1 - v2) > 1e-6 * (1 + std::abs(v1)))
        throw Error(ErrorCode::NonAdmissibleWeight,
                    "weighted Guillemin curvature has no boundary limit; the weight is not admissible for the flow");
      c[k] = v1;
    }
    if (!std::isfinite(c[k])) throw Error(ErrorCode::NonAdmissibleWeight, "weighted curvature is not finite");
  }
  auto wts = weighted_cell_weights(*chart, w);
  return DiscreteMabuchi(std::move(chart), guillemin_part, std::move(wts), std::move(c));
}

FlowModel weighted_model(ChartPtr chart, const WeightModel& w, bool guillemin_part) {
  auto op = weighted_functional(chart, w, guillemin_part);
  std::vector<int> all(chart->size());
  for (std::size_t k = 0; k < all.size(); ++k) all[k] = static_cast<int>(k);
  auto energy = chart->weights();
  FlowModel m{op, std::move(energy), nullptr, true};
  const std::vector<double> wts = op.weights();
  m.affine = [chart, all, wts](const std::vector<double>& R) {
    const auto pr = project_affine(*chart, all, R, wts);
    AffinePart a;
    a.A = pr.A;
    a.B = pr.B;
    a.values.resize(R.size());
    for (std::size_t k = 0; k < R.size(); ++k) a.values[k] = pr.perp[k] - R[k];
    return a;
  };
  return m;
}

RunResult weighted_flow(const WeightModel& w, const SymplecticPotential& u0, const FlowControls& controls) {
  FlowControls c = controls;
  if (!c.target) c.target = guillemin(u0.chart_ptr());
  return run_model(weighted_model(u0.chart_ptr(), w, u0.has_guillemin_part()), u0, c);
}

double weighted_distance(const SymplecticPotential& u1, const SymplecticPotential& u2, const WeightModel& w) {
  require_same_chart(u1, u2);
  const auto wts = weighted_cell_weights(u1.chart(), w);
  const bool same = u1.has_guillemin_part() == u2.has_guillemin_part();
  const auto v1 = same ? u1.f() : u1.nodal_values();
  const auto v2 = same ? u2.f() : u2.nodal_values();
  double s = 0;
  for (std::size_t k = 0; k < v1.size(); ++k) s += wts[k] * (v1[k] - v2[k]) * (v1[k] - v2[k]);
  return std::sqrt(s);
}

InteriorBoundReport interior_bound_probe(const SymplecticPotential& u, const WeightModel& w, double epsilon) {
  const auto& chart = u.chart();
  if (!(epsilon > 2 * chart.spacing()))
    throw Error(ErrorCode::PreconditionFailed, "interior bound probe needs epsilon > 2h");
  const auto wts = weighted_cell_weights(chart, w);
  const auto vals = u.nodal_values();
  InteriorBoundReport r;
  for (std::size_t k = 0; k < vals.size(); ++k) r.weighted_l2 += wts[k] * vals[k] * vals[k];
  for (std::size_t k = 0; k < vals.size(); ++k) {
    const auto& node = chart.node(static_cast<int>(k));
    if (node.euclidean_depth < epsilon - 1e-12) continue;
    ++r.nodes;
    r.max_abs_u = std::max(r.max_abs_u, std::abs(vals[k]));
    r.max_abs_du = std::max(r.max_abs_du, gradient_at(u, chart.x(static_cast<int>(k))).norm());
  }
  return r;
}

}  // namespace toricflow
