#include "toricflow/guillemin.hpp"

#include "toricflow/errors.hpp"

#include <algorithm>
#include <cmath>

namespace toricflow {

double guillemin_value(const DelzantPolytope& P, std::span<const double> x) {
  double s = 0.0;
  for (int i = 0; i < P.facet_count(); ++i) {
    double l = P.l(i, x);
    if (l < 0) {
      if (l < -1e-12) throw Error(ErrorCode::OutOfDomain, "point outside the polytope");
      l = 0;
    }
    if (l > 0) s += l * std::log(l);
  }
  return 0.5 * s;
}

Vec guillemin_gradient(const DelzantPolytope& P, std::span<const double> x) {
  const int n = P.dim();
  Vec g = Vec::Zero(n);
  for (int i = 0; i < P.facet_count(); ++i) {
    const double l = P.l(i, x);
    if (!(l > 0)) throw Error(ErrorCode::OutOfDomain, "gradient of u_G requested on the boundary");
    g += 0.5 * (std::log(l) + 1.0) * P.normals().row(i).transpose();
  }
  return g;
}

Mat guillemin_hessian(const DelzantPolytope& P, std::span<const double> x) {
  const int n = P.dim();
  Mat H = Mat::Zero(n, n);
  for (int i = 0; i < P.facet_count(); ++i) {
    const double l = P.l(i, x);
    if (!(l > 0)) throw Error(ErrorCode::OutOfDomain, "Hessian of u_G requested on the boundary");
    Vec ni = P.normals().row(i).transpose();
    H += (0.5 / l) * ni * ni.transpose();
  }
  return H;
}

namespace {

// All size-k subsets of {0, ..., m-1}.
std::vector<std::vector<int>> subsets(int m, int k) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur;
  auto rec = [&](auto&& self, int start) -> void {
    if (static_cast<int>(cur.size()) == k) {
      out.push_back(cur);
      return;
    }
    for (int i = start; i < m; ++i) {
      cur.push_back(i);
      self(self, i + 1);
      cur.pop_back();
    }
  };
  rec(rec, 0);
  return out;
}

Rational det(const RMat& M) {
  const auto n = M.size();
  if (n == 0) return 1;
  if (n == 1) return M[0][0];
  Rational s = 0;
  for (std::size_t c = 0; c < n; ++c) {
    RMat minor;
    for (std::size_t r = 1; r < n; ++r) {
      RVec row;
      for (std::size_t q = 0; q < n; ++q)
        if (q != c) row.push_back(M[r][q]);
      minor.push_back(row);
    }
    s += (c % 2 == 0 ? 1 : -1) * M[0][c] * det(minor);
  }
  return s;
}

RMat adjugate(const RMat& M) {
  const auto n = M.size();
  RMat out(n, RVec(n));
  if (n == 1) {
    out[0][0] = 1;
    return out;
  }
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b) {
      RMat minor;
      for (std::size_t r = 0; r < n; ++r) {
        if (r == b) continue;
        RVec row;
        for (std::size_t q = 0; q < n; ++q)
          if (q != a) row.push_back(M[r][q]);
        minor.push_back(row);
      }
      out[a][b] = ((a + b) % 2 == 0 ? 1 : -1) * det(minor);
    }
  return out;
}

}  // namespace

GuilleminInverse::GuilleminInverse(const DelzantPolytope& P) : P_(&P), n_(P.dim()) {
  const int n = n_;
  const int m = P.facet_count();
  std::vector<Polynomial> l;
  for (const auto& f : P.facets()) {
    RVec a;
    for (long v : f.normal) a.push_back(Rational(v));
    l.push_back(Polynomial::affine(a, f.offset));
  }
  auto product_outside = [&](const std::vector<int>& S) {
    Polynomial p = Polynomial::constant(n, 1);
    for (int i = 0; i < m; ++i)
      if (std::find(S.begin(), S.end(), i) == S.end()) p = p * l[i];
    return p;
  };
  // 2H = sum_i n_i n_i^T / l_i; by Cauchy-Binet det(2H) = D / prod l and
  // adj(2H) = A / prod l.
  Polynomial D(n);
  for (const auto& S : subsets(m, n)) {
    RMat N;
    for (int i : S) {
      RVec row;
      for (long v : P.facets()[i].normal) row.push_back(Rational(v));
      N.push_back(row);
    }
    const Rational d = det(N);
    D += product_outside(S) * (d * d);
  }
  std::vector<Polynomial> A(n * n, Polynomial(n));
  for (const auto& T : subsets(m, n - 1)) {
    RMat Q(n, RVec(n, Rational(0)));
    for (int i : T)
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) Q[a][b] += Rational(P.facets()[i].normal[a] * P.facets()[i].normal[b]);
    const RMat adj = adjugate(Q);
    const Polynomial pr = product_outside(T);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        if (adj[a][b] != 0) A[a * n + b] += pr * adj[a][b];
  }
  for (const auto& e : A) {
    A_.emplace_back(e);
    for (int k = 0; k < n; ++k) {
      dA_.emplace_back(e.derivative(k));
      for (int q = 0; q < n; ++q) d2A_.emplace_back(e.derivative(k).derivative(q));
    }
  }
  D_ = PolynomialD(D);
  for (int k = 0; k < n; ++k) {
    dD_.emplace_back(D.derivative(k));
    for (int q = 0; q < n; ++q) d2D_.emplace_back(D.derivative(k).derivative(q));
  }
}

GuilleminJet GuilleminInverse::jet(std::span<const double> x) const {
  const int n = n_;
  GuilleminJet j;
  if (P_->depth(x) > 0) j.H = guillemin_hessian(*P_, x);
  const double D = D_(x);
  Vec Dk(n);
  Mat Dkq(n, n);
  for (int k = 0; k < n; ++k) {
    Dk(k) = dD_[k](x);
    for (int q = 0; q < n; ++q) Dkq(k, q) = d2D_[k * n + q](x);
  }
  j.W = Mat::Zero(n, n);
  for (int k = 0; k < n; ++k) {
    j.dW[k] = Mat::Zero(n, n);
    for (int q = 0; q < n; ++q) j.d2W[k][q] = Mat::Zero(n, n);
  }
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      const int e = a * n + b;
      const double A = A_[e](x);
      j.W(a, b) = 2 * A / D;
      for (int k = 0; k < n; ++k) {
        const double Ak = dA_[e * n + k](x);
        j.dW[k](a, b) = 2 * (Ak * D - A * Dk(k)) / (D * D);
        for (int q = 0; q < n; ++q) {
          const double Aq = dA_[e * n + q](x);
          const double Akq = d2A_[(e * n + k) * n + q](x);
          j.d2W[k][q](a, b) = 2 * (Akq / D - (Ak * Dk(q) + Aq * Dk(k) + A * Dkq(k, q)) / (D * D) +
                                   2 * A * Dk(k) * Dk(q) / (D * D * D));
        }
      }
    }
  j.R = 0.0;
  for (int k = 0; k < n; ++k)
    for (int q = 0; q < n; ++q) j.R -= j.d2W[k][q](k, q);
  return j;
}

GuilleminJet guillemin_jet(const DelzantPolytope& P, std::span<const double> x) { return GuilleminInverse(P).jet(x); }

double boundary_limit(const DelzantPolytope& P, std::span<const double> x, const PointFunction& g, double step) {
  const int n = P.dim();
  const auto b = P.barycenter();
  std::vector<double> y(n);
  auto at = [&](double s) {
    for (int k = 0; k < n; ++k) y[k] = x[k] + s * (b[k] - x[k]);
    return g(y);
  };
  // Cubic extrapolation from s = step, 2 step, 4 step, 8 step.
  return (64.0 * at(step) - 56.0 * at(2 * step) + 14.0 * at(4 * step) - at(8 * step)) / 21.0;
}

double guillemin_scalar_curvature(const DelzantPolytope& P, std::span<const double> x) {
  return guillemin_jet(P, x).R;
}

}  // namespace toricflow
