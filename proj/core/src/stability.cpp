#include "toricflow/stability.hpp"

#include "toricflow/discrete.hpp"
#include "toricflow/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <thread>

namespace toricflow {

double CreaseFunction::operator()(std::span<const double> x) const {
  double s = to_double(b);
  for (std::size_t k = 0; k < a.size(); ++k) s += to_double(a[k]) * x[k];
  return std::max(0.0, s);
}

namespace {

Polynomial affine_poly(const AffineFunction& f) {
  RVec g(f.gradient.size());
  for (std::size_t k = 0; k < g.size(); ++k) g[k] = to_rational(f.gradient[k]);
  return Polynomial::affine(g, to_rational(f.constant));
}

Polynomial theta_poly(const RVec& theta) {
  const int n = static_cast<int>(theta.size()) - 1;
  RVec g(theta.begin(), theta.begin() + n);
  return Polynomial::affine(g, theta[n]);
}

RVec theta_exact(const AffineFunction& theta) {
  RVec t;
  for (double g : theta.gradient) t.push_back(to_rational(g));
  t.push_back(to_rational(theta.constant));
  return t;
}

// Exact integral over dP of max(0, l) and over P of max(0, l) * q.
struct CreaseIntegrals {
  Rational boundary;
  Rational interior;
};

CreaseIntegrals crease_integrals(const DelzantPolytope& P, const RVec& a, const Rational& b, const Polynomial& q) {
  std::vector<Halfspace> hs = P.exact().halfspaces();
  hs.push_back({a, b});
  HPolytope cut(P.dim(), std::move(hs));
  CreaseIntegrals out{0, 0};
  if (cut.empty() || !cut.full_dimensional()) return out;
  const Polynomial l = Polynomial::affine(a, b);
  for (int j = 0; j < P.facet_count(); ++j) out.boundary += cut.integrate_facet(j, l);
  if (!q.is_zero()) out.interior = cut.integrate(l * q);
  return out;
}

}  // namespace

RVec extremal_affine_exact(const DelzantPolytope& P) {
  const int n = P.dim();
  // Basis phi_0 = 1, phi_{k+1} = x_k; theta = sum c_b phi_b.
  std::vector<Polynomial> basis;
  basis.push_back(Polynomial::constant(n, 1));
  for (int k = 0; k < n; ++k) basis.push_back(Polynomial::variable(n, k));
  RMat G(n + 1, RVec(n + 1));
  RVec rhs(n + 1);
  for (int i = 0; i <= n; ++i) {
    for (int j = 0; j <= n; ++j) G[i][j] = integrate(P, basis[i] * basis[j]);
    rhs[i] = 2 * boundary_moment(P, basis[i]);
  }
  auto c = solve(G, rhs);
  if (!c) throw Error(ErrorCode::SingularMomentMatrix, "moment Gram matrix is singular");
  RVec out(n + 1);
  for (int k = 0; k < n; ++k) out[k] = (*c)[k + 1];
  out[n] = (*c)[0];
  return out;
}

AffineFunction extremal_affine(const DelzantPolytope& P) {
  auto c = extremal_affine_exact(P);
  AffineFunction t;
  const int n = P.dim();
  for (int k = 0; k < n; ++k) t.gradient.push_back(to_double(c[k]));
  t.constant = to_double(c[n]);
  return t;
}

std::vector<double> extremal_residuals(const DelzantPolytope& P, const AffineFunction& theta) {
  const int n = P.dim();
  const Polynomial th = theta_poly(theta_exact(theta));
  std::vector<double> r;
  std::vector<Polynomial> basis;
  basis.push_back(Polynomial::constant(n, 1));
  for (int k = 0; k < n; ++k) basis.push_back(Polynomial::variable(n, k));
  for (const auto& b : basis) r.push_back(to_double(2 * boundary_moment(P, b) - integrate(P, b * th)));
  return r;
}

AffineFunction average_scalar_curvature(const DelzantPolytope& P) {
  Rational sigma = 0;
  for (const auto& m : facet_measures(P)) sigma += m;
  return AffineFunction::constant_function(P.dim(), to_double(2 * sigma / P.volume()));
}

double l_functional(const DelzantPolytope& P, const AffineFunction& theta, const AffineFunction& f) {
  const Polynomial fp = affine_poly(f);
  const Polynomial th = theta_poly(theta_exact(theta));
  return to_double(2 * boundary_moment(P, fp) - integrate(P, fp * th));
}

Rational l_functional_exact(const DelzantPolytope& P, const RVec& theta, const CreaseFunction& f) {
  auto ci = crease_integrals(P, f.a, f.b, theta_poly(theta));
  return 2 * ci.boundary - ci.interior;
}

double l_functional(const DelzantPolytope& P, const AffineFunction& theta, const CreaseFunction& f) {
  return to_double(l_functional_exact(P, theta_exact(theta), f));
}

double l_functional(const DelzantPolytope& P, const AffineFunction& theta, const SymplecticPotential& u) {
  const auto& chart = u.chart();
  const double boundary = boundary_integral(P, [&](std::span<const double> x) { return evaluate(u, x); },
                                            chart.spacing());
  double interior = 0;
  for (std::size_t k = 0; k < chart.size(); ++k) {
    const int id = static_cast<int>(k);
    interior += chart.node(id).weight * u.nodal_value(id) * theta(chart.x(id));
  }
  return 2 * boundary - interior;
}

Rational normalized_boundary_integral(const DelzantPolytope& P, const CreaseFunction& f, const RVec& x0) {
  const Rational at = dot(f.a, x0) + f.b;
  const Polynomial none(P.dim());
  if (at > 0) {
    // f - l = max(-l, 0)
    RVec na(f.a.size());
    for (std::size_t k = 0; k < na.size(); ++k) na[k] = -f.a[k];
    return crease_integrals(P, na, -f.b, none).boundary;
  }
  return crease_integrals(P, f.a, f.b, none).boundary;
}

bool crease_cuts_interior(const DelzantPolytope& P, const CreaseFunction& f) {
  bool pos = false, neg = false;
  for (const auto& v : P.vertices()) {
    const Rational s = dot(f.a, v) + f.b;
    pos = pos || s > 0;
    neg = neg || s < 0;
  }
  return pos && neg;
}

double mabuchi_energy_rel(const SymplecticPotential& u, const AffineFunction& theta, const SymplecticPotential& u_ref) {
  require_same_chart(u, u_ref);
  if (u.has_guillemin_part() != u_ref.has_guillemin_part())
    throw Error(ErrorCode::ChartMismatch, "potentials differ in their Guillemin part");
  auto op = DiscreteMabuchi::unweighted(u_ref.chart_ptr(), u_ref.has_guillemin_part());
  op.hessians(u.f());
  const auto hd_ref = op.hessians(u_ref.f());
  auto a = sample_affine(u.chart(), theta);
  for (double& v : a) v = -v;
  return op.energy_difference(u.f(), u_ref.f(), hd_ref, a);
}

namespace {

std::vector<RVec> primitive_directions(int n, int D) {
  std::vector<RVec> out;
  std::vector<int> v(n, -D);
  while (true) {
    int g = 0;
    for (int c : v) g = std::gcd(g, std::abs(c));
    if (g == 1) {
      RVec a(n);
      for (int k = 0; k < n; ++k) a[k] = v[k];
      out.push_back(a);
    }
    int k = n - 1;
    while (k >= 0 && v[k] == D) v[k--] = -D;
    if (k < 0) break;
    ++v[k];
  }
  return out;
}

bool row_less(const ScanRow& x, const ScanRow& y) {
  if (x.crease.a != y.crease.a) return RVecLess{}(x.crease.a, y.crease.a);
  return x.crease.b < y.crease.b;
}

}  // namespace

StabilityReport pl_stability_scan(const DelzantPolytope& P, const AffineFunction& theta, int max_denominator,
                                  const Rational& depth_margin, const std::optional<RVec>& x0_opt) {
  if (max_denominator < 1) throw Error(ErrorCode::InvalidInput, "max_denominator must be positive");
  if (depth_margin < 0) throw Error(ErrorCode::InvalidInput, "depth_margin must be nonnegative");
  const int n = P.dim();
  const RVec x0 = x0_opt ? *x0_opt : P.barycenter_exact();
  const RVec th = theta_exact(theta);

  std::vector<Halfspace> shrunk = P.exact().halfspaces();
  for (auto& h : shrunk) h.offset -= depth_margin;
  HPolytope inner(n, shrunk);

  const auto dirs = primitive_directions(n, max_denominator);
  std::vector<std::vector<ScanRow>> per_dir(dirs.size());

  auto work = [&](std::size_t d) {
    const RVec& a = dirs[d];
    if (inner.empty()) return;
    Rational lo = dot(a, inner.vertices()[0]), hi = lo;
    for (const auto& v : inner.vertices()) {
      const Rational s = dot(a, v);
      if (s < lo) lo = s;
      if (s > hi) hi = s;
    }
    // Hyperplane <a,x> = -b must meet the shrunk polytope: -b in [lo, hi].
    std::set<Rational> offsets;
    for (int q = 1; q <= max_denominator; ++q) {
      const Rational qq(q);
      const Rational start = -hi * qq;
      Integer pmin = boost::multiprecision::numerator(start) / boost::multiprecision::denominator(start);
      for (Integer p = pmin - 1; Rational(p, q) <= -lo; ++p) {
        const Rational b(p, q);
        if (b >= -hi && b <= -lo) offsets.insert(b);
      }
    }
    for (const auto& b : offsets) {
      CreaseFunction f{a, b};
      if (!crease_cuts_interior(P, f)) continue;
      const Rational L = l_functional_exact(P, th, f);
      const Rational denom = normalized_boundary_integral(P, f, x0);
      if (denom <= 0) continue;
      per_dir[d].push_back({f, to_double(L), to_double(denom), to_double(L / denom)});
    }
  };

  const unsigned threads = std::max(1u, std::min<unsigned>(std::thread::hardware_concurrency(), 16u));
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t)
    pool.emplace_back([&, t] {
      for (std::size_t d = t; d < dirs.size(); d += threads) work(d);
    });
  for (auto& th_ : pool) th_.join();

  StabilityReport report;
  for (auto& rows : per_dir)
    for (auto& r : rows) report.rows.push_back(std::move(r));
  if (report.rows.empty()) throw Error(ErrorCode::EmptyFamily, "no crease meets the depth margin");
  std::sort(report.rows.begin(), report.rows.end(), row_less);
  std::size_t best = 0;
  for (std::size_t i = 1; i < report.rows.size(); ++i)
    if (report.rows[i].ratio < report.rows[best].ratio) best = i;
  report.lambda_estimate = report.rows[best].ratio;
  report.worst = report.rows[best].crease;
  return report;
}

}  // namespace toricflow
