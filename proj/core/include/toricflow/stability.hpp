#pragma once

#include "toricflow/potential.hpp"

#include <optional>
#include <vector>

namespace toricflow {

// f(x) = max(0, <a, x> + b)
struct CreaseFunction {
  RVec a;
  Rational b;
  double operator()(std::span<const double> x) const;
};

// Coefficients (gradient..., constant) of theta, exact.
RVec extremal_affine_exact(const DelzantPolytope& P);
AffineFunction extremal_affine(const DelzantPolytope& P);
// L(a) on the basis {1, x_1, ..., x_n}, evaluated exactly for the given theta.
std::vector<double> extremal_residuals(const DelzantPolytope& P, const AffineFunction& theta);

// Constant theta = 2 |dP|_sigma / |P| for the unmodified flow.
AffineFunction average_scalar_curvature(const DelzantPolytope& P);

double l_functional(const DelzantPolytope& P, const AffineFunction& theta, const AffineFunction& f);
double l_functional(const DelzantPolytope& P, const AffineFunction& theta, const CreaseFunction& f);
Rational l_functional_exact(const DelzantPolytope& P, const RVec& theta, const CreaseFunction& f);
// Grid quadrature for a sampled potential: boundary by composite rules,
// interior by dual-cell weights.
double l_functional(const DelzantPolytope& P, const AffineFunction& theta, const SymplecticPotential& u);

// Integral over dP of f - (supporting affine function of f at x0).
Rational normalized_boundary_integral(const DelzantPolytope& P, const CreaseFunction& f, const RVec& x0);
// Crease meets the interior of P.
bool crease_cuts_interior(const DelzantPolytope& P, const CreaseFunction& f);

// M(u) - M(u_ref) with the discrete functional used by the flow.
double mabuchi_energy_rel(const SymplecticPotential& u, const AffineFunction& theta, const SymplecticPotential& u_ref);

struct ScanRow {
  CreaseFunction crease;
  double L = 0;
  double denom = 0;
  double ratio = 0;
};

struct StabilityReport {
  double lambda_estimate = 0;
  CreaseFunction worst;
  std::vector<ScanRow> rows;  // sorted lexicographically by (a, b)
};

// Default margin 1/10; x0 defaults to the barycenter.
StabilityReport pl_stability_scan(const DelzantPolytope& P, const AffineFunction& theta, int max_denominator,
                                  const Rational& depth_margin = Rational(1, 10),
                                  const std::optional<RVec>& x0 = std::nullopt);

}  // namespace toricflow
