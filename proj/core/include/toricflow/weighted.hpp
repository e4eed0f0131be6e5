#pragma once

#include "toricflow/flow.hpp"
#include "toricflow/polynomial.hpp"

#include <memory>
#include <vector>

namespace toricflow {

// Affine factor <p, z> + c raised to an integer power.
struct FactorGroup {
  std::vector<long> p;
  Rational c;
  int d = 0;
};

// Weight p(z) = (<p_sigma, z> + c_sigma) * prod_j (<p_j, z> + c_j)^{d_j}
// and the constants of the reduced scalar curvature.
struct WeightData {
  RVec p_sigma;
  Rational c_sigma = 1;
  std::vector<FactorGroup> groups;
  double scal_sigma = 0;
  std::vector<double> scal_j;

  // p = 1 with no curvature constants.
  static WeightData trivial(int dim);
};

// Validated weight on a polytope with exact and fast forms of p.
class WeightModel {
 public:
  // Throws NegativeAffineFactor when a factor is negative on P (or the
  // leading factor is not positive) and InvalidInput on malformed data.
  WeightModel(const DelzantPolytope& P, WeightData data);

  const WeightData& data() const { return data_; }
  const Polynomial& polynomial() const { return p_; }
  int dim() const { return dim_; }
  bool trivial() const;

  double p(std::span<const double> z) const { return pd_(z); }
  double dp(int r, std::span<const double> z) const { return dpd_[r](z); }
  double d2p(int r, int s, std::span<const double> z) const { return d2pd_[r][s](z); }
  // Scal_sigma / (<p_sigma,z>+c_sigma) + sum_j Scal_j / (<p_j,z>+c_j).
  double curvature_constant_term(std::span<const double> z) const;
  double factor(int j, std::span<const double> z) const;

 private:
  WeightData data_;
  int dim_;
  Polynomial p_;
  PolynomialD pd_;
  std::vector<PolynomialD> dpd_;
  std::vector<std::vector<PolynomialD>> d2pd_;
};

double weight(const WeightModel& w, std::span<const double> z);

// Exact integral of p over the dual cell of every node of the chart.
std::vector<double> weighted_cell_weights(const GridChart& chart, const WeightModel& w);

// R_g = constant terms - (1/p) d_r d_s (p u^{rs}) on field nodes, with the
// Guillemin part of u^{rs} differentiated analytically.
ScalarField weighted_scalar_curvature(const SymplecticPotential& u, const WeightModel& w);

struct Projection {
  std::vector<double> A;
  double B = 0;
  std::vector<double> perp;       // R + <A,z> + B on the field's nodes
  std::vector<double> residuals;  // sum of perp * b * weight for b in {1, z_1, ..}
};

// Weighted least squares projection of -R onto affine functions with the
// given node weights. Throws SingularMomentMatrix.
Projection project_affine(const GridChart& chart, const std::vector<int>& nodes, const std::vector<double>& R,
                          const std::vector<double>& weights);

// Projection of a field on its nodes against the cell integrals of p.
Projection extremal_projection(const WeightModel& w, const ScalarField& R);

// Discrete weighted Mabuchi functional: cell integrals of p as weights and
// the weighted curvature of the Guillemin potential as closure, extended to
// the boundary by its limit. Throws NonAdmissibleWeight if that limit does
// not exist.
DiscreteMabuchi weighted_functional(ChartPtr chart, const WeightModel& w, bool guillemin_part = true);

FlowModel weighted_model(ChartPtr chart, const WeightModel& w, bool guillemin_part = true);

RunResult weighted_flow(const WeightModel& w, const SymplecticPotential& u0, const FlowControls& controls);

// sqrt(integral of (u1 - u2)^2 p).
double weighted_distance(const SymplecticPotential& u1, const SymplecticPotential& u2, const WeightModel& w);

struct InteriorBoundReport {
  double weighted_l2 = 0;  // integral of u^2 p
  double max_abs_u = 0;
  double max_abs_du = 0;
  std::size_t nodes = 0;
};

// Bounds on the region at Euclidean distance >= epsilon from the boundary.
// Requires epsilon > 2h.
InteriorBoundReport interior_bound_probe(const SymplecticPotential& u, const WeightModel& w, double epsilon);

}  // namespace toricflow
