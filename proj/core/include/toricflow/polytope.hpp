#pragma once

#include "toricflow/errors.hpp"
#include "toricflow/hpolytope.hpp"
#include "toricflow/rational.hpp"

#include <Eigen/Dense>

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace toricflow {

// l(x) = <normal, x> + offset, normal inward and primitive.
struct Facet {
  std::vector<long> normal;
  Rational offset;
};

struct DelzantReport;

class DelzantPolytope {
 public:
  // Validates and throws Error on failure; see check_delzant for a report.
  static DelzantPolytope create(int dim, std::vector<Facet> facets, std::string name = "");

  int dim() const { return dim_; }
  int facet_count() const { return static_cast<int>(facets_.size()); }
  const std::vector<Facet>& facets() const { return facets_; }
  const std::string& name() const { return name_; }
  const HPolytope& exact() const { return exact_; }
  const std::vector<RVec>& vertices() const { return exact_.vertices(); }

  // Row i holds n_i.
  const Eigen::MatrixXd& normals() const { return normals_; }
  const Eigen::VectorXd& offsets() const { return offsets_; }
  double l(int i, std::span<const double> x) const;
  // min_i l_i(x)
  double depth(std::span<const double> x) const;
  // min_i l_i(x) / |n_i|
  double euclidean_depth(std::span<const double> x) const;

  const Rational& volume() const { return volume_; }
  const RVec& barycenter_exact() const { return barycenter_; }
  std::vector<double> barycenter() const { return to_double(barycenter_); }

 private:
  DelzantPolytope() = default;
  friend DelzantReport check_delzant(int, const std::vector<Facet>&, const std::string&);

  int dim_ = 0;
  std::string name_;
  std::vector<Facet> facets_;
  HPolytope exact_;
  Eigen::MatrixXd normals_;
  Eigen::VectorXd offsets_;
  Rational volume_;
  RVec barycenter_;
};

struct DelzantReport {
  bool valid = false;
  ErrorCode code = ErrorCode::InvalidInput;
  std::string message;
  std::optional<DelzantPolytope> polytope;
};

DelzantReport check_delzant(int dim, const std::vector<Facet>& facets, const std::string& name = "");

// Exact integral of x^alpha over P.
Rational moments(const DelzantPolytope& P, const Exponent& alpha);
Rational integrate(const DelzantPolytope& P, const Polynomial& p);
// Exact integral of p over the boundary against dsigma.
Rational boundary_moment(const DelzantPolytope& P, const Polynomial& p);
// Exact sigma-measure of each facet.
std::vector<Rational> facet_measures(const DelzantPolytope& P);

using PointFunction = std::function<double(std::span<const double>)>;

// Composite quadrature of f over each facet against dsigma with cells of
// diameter at most h (Gauss rules of degree 5 on segments, 4 on triangles).
double boundary_integral(const DelzantPolytope& P, const PointFunction& f, double h);

}  // namespace toricflow
