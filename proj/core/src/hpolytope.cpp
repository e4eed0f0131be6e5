#include "toricflow/hpolytope.hpp"

#include "toricflow/errors.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace toricflow {

namespace {

template <class F>
void for_each_combination(int m, int k, F&& visit) {
  if (k > m) return;
  std::vector<int> idx(k);
  for (int i = 0; i < k; ++i) idx[i] = i;
  while (true) {
    visit(idx);
    int i = k - 1;
    while (i >= 0 && idx[i] == m - k + i) --i;
    if (i < 0) return;
    ++idx[i];
    for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}

}  // namespace

HPolytope::HPolytope(int dim, std::vector<Halfspace> halfspaces)
    : dim_(dim), halfspaces_(std::move(halfspaces)) {
  for (const auto& h : halfspaces_)
    if (static_cast<int>(h.normal.size()) != dim_)
      throw Error(ErrorCode::InvalidInput, "halfspace dimension mismatch");

  std::map<RVec, int, RVecLess> seen;
  const int m = static_cast<int>(halfspaces_.size());
  for_each_combination(m, dim_, [&](const std::vector<int>& idx) {
    RMat A(dim_);
    RVec b(dim_);
    for (int r = 0; r < dim_; ++r) {
      A[r] = halfspaces_[idx[r]].normal;
      b[r] = -halfspaces_[idx[r]].offset;
    }
    auto x = solve(A, b);
    if (!x) return;
    for (const auto& h : halfspaces_)
      if (h.value(*x) < 0) return;
    if (seen.count(*x)) return;
    seen.emplace(*x, static_cast<int>(vertices_.size()));
    vertices_.push_back(*x);
  });
  // Deterministic vertex order independent of constraint order.
  std::sort(vertices_.begin(), vertices_.end(), RVecLess{});
  active_.resize(vertices_.size());
  for (std::size_t v = 0; v < vertices_.size(); ++v)
    for (int j = 0; j < m; ++j)
      if (halfspaces_[j].value(vertices_[v]) == 0) active_[v].push_back(j);
}

std::vector<int> HPolytope::vertices_on(int j) const {
  std::vector<int> out;
  for (std::size_t v = 0; v < vertices_.size(); ++v)
    if (std::binary_search(active_[v].begin(), active_[v].end(), j)) out.push_back(static_cast<int>(v));
  return out;
}

int HPolytope::affine_dimension(const std::vector<int>& ids) const {
  if (ids.empty()) return -1;
  RMat diffs;
  for (std::size_t i = 1; i < ids.size(); ++i) {
    RVec d(dim_);
    for (int k = 0; k < dim_; ++k) d[k] = vertices_[ids[i]][k] - vertices_[ids[0]][k];
    diffs.push_back(d);
  }
  return rank(diffs);
}

bool HPolytope::full_dimensional() const {
  std::vector<int> all(vertices_.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
  return !all.empty() && affine_dimension(all) == dim_;
}

std::vector<std::vector<int>> HPolytope::triangulate(std::vector<int> face, int d) const {
  std::sort(face.begin(), face.end());
  if (d == 0) return {{face[0]}};
  const int apex = face[0];
  std::vector<std::vector<int>> out;
  std::set<std::vector<int>> done;
  for (std::size_t j = 0; j < halfspaces_.size(); ++j) {
    std::vector<int> sub;
    bool has_apex = false;
    for (int v : face) {
      if (std::binary_search(active_[v].begin(), active_[v].end(), static_cast<int>(j))) {
        sub.push_back(v);
        has_apex = has_apex || v == apex;
      }
    }
    if (has_apex || static_cast<int>(sub.size()) < d) continue;
    if (done.count(sub)) continue;
    if (affine_dimension(sub) != d - 1) continue;
    done.insert(sub);
    for (auto& s : triangulate(sub, d - 1)) {
      s.insert(s.begin(), apex);
      out.push_back(std::move(s));
    }
  }
  return out;
}

std::vector<std::vector<int>> HPolytope::triangulation() const {
  if (!full_dimensional()) return {};
  std::vector<int> all(vertices_.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
  return triangulate(all, dim_);
}

std::vector<std::vector<int>> HPolytope::facet_triangulation(int j) const {
  auto face = vertices_on(j);
  if (face.empty() || affine_dimension(face) != dim_ - 1) return {};
  return triangulate(face, dim_ - 1);
}

Rational HPolytope::integrate_simplex(const Polynomial& p, const std::vector<int>& simplex) const {
  const int d = static_cast<int>(simplex.size()) - 1;
  const RVec& v0 = vertices_[simplex[0]];
  std::vector<Polynomial> images;
  images.reserve(dim_);
  for (int k = 0; k < dim_; ++k) {
    Polynomial xk = Polynomial::constant(d, v0[k]);
    for (int i = 0; i < d; ++i)
      xk += Polynomial::variable(d, i) * (vertices_[simplex[i + 1]][k] - v0[k]);
    images.push_back(std::move(xk));
  }
  Polynomial q = p.compose(images);
  Rational s = 0;
  for (const auto& [beta, c] : q.terms()) s += c * standard_simplex_moment(beta);
  return s;
}

Rational HPolytope::integrate(const Polynomial& p) const {
  Rational total = 0;
  for (const auto& s : triangulation()) {
    RMat E(dim_, RVec(dim_));
    for (int i = 0; i < dim_; ++i)
      for (int k = 0; k < dim_; ++k) E[k][i] = vertices_[s[i + 1]][k] - vertices_[s[0]][k];
    total += abs(determinant(E)) * integrate_simplex(p, s);
  }
  return total;
}

Rational HPolytope::volume() const { return integrate(Polynomial::constant(dim_, 1)); }

Rational HPolytope::integrate_facet(int j, const Polynomial& p) const {
  const RVec& a = halfspaces_[j].normal;
  const Rational norm2 = dot(a, a);
  Rational total = 0;
  for (const auto& s : facet_triangulation(j)) {
    // |det[E | a]| / |a|^2 converts the parametrisation to Leb / |a|.
    RMat M(dim_, RVec(dim_));
    for (int i = 0; i + 1 < dim_; ++i)
      for (int k = 0; k < dim_; ++k) M[k][i] = vertices_[s[i + 1]][k] - vertices_[s[0]][k];
    for (int k = 0; k < dim_; ++k) M[k][dim_ - 1] = a[k];
    total += abs(determinant(M)) / norm2 * integrate_simplex(p, s);
  }
  return total;
}

}  // namespace toricflow
