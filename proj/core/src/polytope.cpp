#include "toricflow/polytope.hpp"

#include "toricflow/errors.hpp"

#include <array>
#include <cmath>
#include <numeric>
#include <sstream>

namespace toricflow {

namespace {

std::string format_point(const RVec& v) {
  std::ostringstream os;
  os << "(";
  for (std::size_t k = 0; k < v.size(); ++k) os << (k ? ", " : "") << format_rational(v[k]);
  os << ")";
  return os.str();
}

std::string format_normal(const std::vector<long>& n) {
  std::ostringstream os;
  os << "(";
  for (std::size_t k = 0; k < n.size(); ++k) os << (k ? "," : "") << n[k];
  os << ")";
  return os.str();
}

DelzantReport failure(ErrorCode code, std::string message) {
  DelzantReport r;
  r.valid = false;
  r.code = code;
  r.message = std::move(message);
  return r;
}

RVec rational_normal(const Facet& f) {
  RVec a(f.normal.size());
  for (std::size_t k = 0; k < a.size(); ++k) a[k] = Rational(f.normal[k]);
  return a;
}

}  // namespace

DelzantReport check_delzant(int dim, const std::vector<Facet>& facets, const std::string& name) {
  if (dim < 1) return failure(ErrorCode::InvalidInput, "dimension must be positive");
  if (static_cast<int>(facets.size()) < dim + 1)
    return failure(ErrorCode::InvalidInput, "need at least n+1 facets");

  std::vector<Halfspace> hs;
  for (std::size_t i = 0; i < facets.size(); ++i) {
    const auto& f = facets[i];
    if (static_cast<int>(f.normal.size()) != dim)
      return failure(ErrorCode::InvalidInput, "facet " + std::to_string(i + 1) + " has wrong normal length");
    long g = 0;
    for (long c : f.normal) g = std::gcd(g, std::labs(c));
    if (g != 1)
      return failure(ErrorCode::NonPrimitiveNormal, "facet " + std::to_string(i + 1) + " normal " +
                                                        format_normal(f.normal) + " has gcd " + std::to_string(g));
    hs.push_back({rational_normal(f), f.offset});
  }

  RMat N;
  for (const auto& h : hs) N.push_back(h.normal);
  if (rank(N) < dim) return failure(ErrorCode::Unbounded, "normals do not span R^n");

  // Recession directions d != 0 with <n_i, d> >= 0 normalised by sum_i <n_i, d> = 1.
  std::vector<Halfspace> cone;
  RVec total(dim, Rational(0));
  for (const auto& h : hs) {
    cone.push_back({h.normal, Rational(0)});
    for (int k = 0; k < dim; ++k) total[k] += h.normal[k];
  }
  RVec neg(dim);
  for (int k = 0; k < dim; ++k) neg[k] = -total[k];
  cone.push_back({total, Rational(-1)});
  cone.push_back({neg, Rational(1)});
  HPolytope recession(dim, cone);
  if (!recession.empty())
    return failure(ErrorCode::Unbounded, "recession direction " + format_point(recession.vertices()[0]));

  HPolytope hp(dim, hs);
  if (hp.empty()) return failure(ErrorCode::EmptyInterior, "polytope is empty");
  if (!hp.full_dimensional()) return failure(ErrorCode::EmptyInterior, "polytope has empty interior");

  for (std::size_t j = 0; j < hs.size(); ++j) {
    auto on = hp.vertices_on(static_cast<int>(j));
    if (on.empty() || hp.affine_dimension(on) != dim - 1)
      return failure(ErrorCode::RedundantFacet, "facet " + std::to_string(j + 1) + " does not support a facet of P");
  }

  for (std::size_t v = 0; v < hp.vertices().size(); ++v) {
    const auto& act = hp.active(static_cast<int>(v));
    std::ostringstream who;
    for (std::size_t q = 0; q < act.size(); ++q) who << (q ? "," : "") << act[q] + 1;
    if (static_cast<int>(act.size()) != dim)
      return failure(ErrorCode::NonSimpleVertex, std::to_string(act.size()) + " facets (" + who.str() +
                                                     ") meet at vertex " + format_point(hp.vertices()[v]));
    RMat M;
    for (int j : act) M.push_back(hs[j].normal);
    Rational det = determinant(M);
    if (abs(det) != 1)
      return failure(ErrorCode::NonUnimodularVertex, "det = " + format_rational(det) + " at vertex " +
                                                         format_point(hp.vertices()[v]) + " where facets " +
                                                         who.str() + " meet");
  }

  DelzantPolytope P;
  P.dim_ = dim;
  P.name_ = name;
  P.facets_ = facets;
  P.exact_ = std::move(hp);
  P.normals_.resize(static_cast<Eigen::Index>(facets.size()), dim);
  P.offsets_.resize(static_cast<Eigen::Index>(facets.size()));
  for (std::size_t i = 0; i < facets.size(); ++i) {
    for (int k = 0; k < dim; ++k) P.normals_(static_cast<Eigen::Index>(i), k) = static_cast<double>(facets[i].normal[k]);
    P.offsets_(static_cast<Eigen::Index>(i)) = to_double(facets[i].offset);
  }
  P.volume_ = P.exact_.volume();
  P.barycenter_.resize(dim);
  for (int k = 0; k < dim; ++k) {
    Exponent e(dim, 0);
    e[k] = 1;
    P.barycenter_[k] = P.exact_.integrate(Polynomial::monomial(e)) / P.volume_;
  }

  DelzantReport ok;
  ok.valid = true;
  ok.message = "Delzant: valid, " + std::to_string(P.vertices().size()) + " vertices";
  ok.polytope = std::move(P);
  return ok;
}

DelzantPolytope DelzantPolytope::create(int dim, std::vector<Facet> facets, std::string name) {
  auto report = check_delzant(dim, facets, name);
  if (!report.valid) throw Error(report.code, report.message);
  return std::move(*report.polytope);
}

double DelzantPolytope::l(int i, std::span<const double> x) const {
  double s = offsets_(i);
  for (int k = 0; k < dim_; ++k) s += normals_(i, k) * x[k];
  return s;
}

double DelzantPolytope::depth(std::span<const double> x) const {
  double d = l(0, x);
  for (int i = 1; i < facet_count(); ++i) d = std::min(d, l(i, x));
  return d;
}

double DelzantPolytope::euclidean_depth(std::span<const double> x) const {
  double d = INFINITY;
  for (int i = 0; i < facet_count(); ++i) d = std::min(d, l(i, x) / normals_.row(i).norm());
  return d;
}

Rational moments(const DelzantPolytope& P, const Exponent& alpha) {
  if (static_cast<int>(alpha.size()) != P.dim()) throw Error(ErrorCode::InvalidInput, "multi-index length mismatch");
  return P.exact().integrate(Polynomial::monomial(alpha));
}

Rational integrate(const DelzantPolytope& P, const Polynomial& p) { return P.exact().integrate(p); }

Rational boundary_moment(const DelzantPolytope& P, const Polynomial& p) {
  Rational s = 0;
  for (int j = 0; j < P.facet_count(); ++j) s += P.exact().integrate_facet(j, p);
  return s;
}

std::vector<Rational> facet_measures(const DelzantPolytope& P) {
  std::vector<Rational> out;
  for (int j = 0; j < P.facet_count(); ++j)
    out.push_back(P.exact().integrate_facet(j, Polynomial::constant(P.dim(), 1)));
  return out;
}

namespace {

constexpr std::array<double, 3> kGaussNodes = {-0.7745966692414834, 0.0, 0.7745966692414834};
constexpr std::array<double, 3> kGaussWeights = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};

struct TriRule {
  double a, b, w;
};
constexpr std::array<TriRule, 6> kTriangleRule = {{
    {0.445948490915965, 0.445948490915965, 0.223381589678011},
    {0.445948490915965, 0.108103018168070, 0.223381589678011},
    {0.108103018168070, 0.445948490915965, 0.223381589678011},
    {0.091576213509771, 0.091576213509771, 0.109951743655322},
    {0.091576213509771, 0.816847572980459, 0.109951743655322},
    {0.816847572980459, 0.091576213509771, 0.109951743655322},
}};

}  // namespace

double boundary_integral(const DelzantPolytope& P, const PointFunction& f, double h) {
  const int n = P.dim();
  if (!(h > 0)) throw Error(ErrorCode::InvalidInput, "boundary_integral: h must be positive");
  const auto& hp = P.exact();
  double total = 0.0;
  for (int j = 0; j < P.facet_count(); ++j) {
    const RVec& a = hp.halfspaces()[j].normal;
    const Rational norm2 = dot(a, a);
    for (const auto& s : hp.facet_triangulation(j)) {
      std::vector<std::vector<double>> V;
      for (int id : s) V.push_back(to_double(hp.vertices()[id]));
      RMat M(n, RVec(n));
      for (int i = 0; i + 1 < n; ++i)
        for (int k = 0; k < n; ++k) M[k][i] = hp.vertices()[s[i + 1]][k] - hp.vertices()[s[0]][k];
      for (int k = 0; k < n; ++k) M[k][n - 1] = a[k];
      // sigma-measure of the simplex = factor / (n-1)!
      const double factor = to_double(abs(determinant(M)) / norm2);
      std::vector<double> x(n);
      if (n == 1) {
        total += factor * f(V[0]);
      } else if (n == 2) {
        double len = 0;
        for (int k = 0; k < 2; ++k) len += (V[1][k] - V[0][k]) * (V[1][k] - V[0][k]);
        const int m = std::max(1, static_cast<int>(std::ceil(std::sqrt(len) / h - 1e-12)));
        double acc = 0;
        for (int c = 0; c < m; ++c) {
          for (int q = 0; q < 3; ++q) {
            const double t = (c + 0.5 + 0.5 * kGaussNodes[q]) / m;
            for (int k = 0; k < 2; ++k) x[k] = V[0][k] + t * (V[1][k] - V[0][k]);
            acc += 0.5 * kGaussWeights[q] * f(x) / m;
          }
        }
        total += factor * acc;
      } else if (n == 3) {
        double longest = 0;
        for (int p = 0; p < 3; ++p)
          for (int q = p + 1; q < 3; ++q) {
            double d2 = 0;
            for (int k = 0; k < 3; ++k) d2 += (V[p][k] - V[q][k]) * (V[p][k] - V[q][k]);
            longest = std::max(longest, std::sqrt(d2));
          }
        const int m = std::max(1, static_cast<int>(std::ceil(longest / h - 1e-12)));
        auto point = [&](double u, double v, std::vector<double>& out) {
          for (int k = 0; k < 3; ++k) out[k] = V[0][k] + u * (V[1][k] - V[0][k]) + v * (V[2][k] - V[0][k]);
        };
        double acc = 0;
        auto sub = [&](std::array<double, 2> p0, std::array<double, 2> p1, std::array<double, 2> p2) {
          for (const auto& r : kTriangleRule) {
            const double u = p0[0] + r.a * (p1[0] - p0[0]) + r.b * (p2[0] - p0[0]);
            const double v = p0[1] + r.a * (p1[1] - p0[1]) + r.b * (p2[1] - p0[1]);
            point(u, v, x);
            acc += r.w * f(x);
          }
        };
        for (int i = 0; i < m; ++i)
          for (int k = 0; i + k < m; ++k) {
            const double u0 = double(i) / m, v0 = double(k) / m, d = 1.0 / m;
            sub({u0, v0}, {u0 + d, v0}, {u0, v0 + d});
            if (i + k + 1 < m) sub({u0 + d, v0}, {u0 + d, v0 + d}, {u0, v0 + d});
          }
        total += factor * 0.5 * acc / (double(m) * m);
      } else {
        throw Error(ErrorCode::InvalidInput, "boundary_integral supports n <= 3");
      }
    }
  }
  return total;
}

}  // namespace toricflow
