#pragma once

#include "toricflow/polynomial.hpp"
#include "toricflow/rational.hpp"

#include <vector>

namespace toricflow {

// a . x + c >= 0 with rational data.
struct Halfspace {
  RVec normal;
  Rational offset;
  Rational value(const RVec& x) const { return dot(normal, x) + offset; }
};

// Exact bounded polyhedron given by halfspaces. Vertices come from all
// dim-subsets of the constraints; faces and triangulations are derived
// from vertex incidences.
class HPolytope {
 public:
  HPolytope() = default;
  HPolytope(int dim, std::vector<Halfspace> halfspaces);

  int dim() const { return dim_; }
  const std::vector<Halfspace>& halfspaces() const { return halfspaces_; }
  const std::vector<RVec>& vertices() const { return vertices_; }
  // Constraint indices tight at vertex v.
  const std::vector<int>& active(int v) const { return active_[v]; }
  std::vector<int> vertices_on(int j) const;

  bool empty() const { return vertices_.empty(); }
  int affine_dimension(const std::vector<int>& vertex_ids) const;
  bool full_dimensional() const;

  // Simplices (dim+1 vertex ids) covering the polytope.
  std::vector<std::vector<int>> triangulation() const;
  // Simplices (dim vertex ids) covering the face on constraint j; empty
  // when that face is not a facet.
  std::vector<std::vector<int>> facet_triangulation(int j) const;

  Rational volume() const;
  Rational integrate(const Polynomial& p) const;
  // Integral over the facet on constraint j against Leb / |a_j|.
  Rational integrate_facet(int j, const Polynomial& p) const;

 private:
  std::vector<std::vector<int>> triangulate(std::vector<int> face, int d) const;
  Rational integrate_simplex(const Polynomial& p, const std::vector<int>& simplex) const;

  int dim_ = 0;
  std::vector<Halfspace> halfspaces_;
  std::vector<RVec> vertices_;
  std::vector<std::vector<int>> active_;
};

}  // namespace toricflow
