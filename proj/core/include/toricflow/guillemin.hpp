#pragma once

#include "toricflow/polynomial.hpp"
#include "toricflow/polytope.hpp"

#include <Eigen/Dense>

#include <array>
#include <span>

namespace toricflow {

// Small dense types; n <= 3 keeps them on the stack.
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 3, 3>;
using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 3, 1>;

// Closed-form derivatives of u_G = 1/2 sum l_i ln l_i and of its inverse
// Hessian W = (D^2 u_G)^{-1}.
struct GuilleminJet {
  Mat H;
  Mat W;
  std::array<Mat, 3> dW;                  // dW[k] = d W / dx_k
  std::array<std::array<Mat, 3>, 3> d2W;  // d2W[k][l] = d^2 W / dx_k dx_l
  double R = 0.0;                         // -sum_kl d2W[k][l](k,l)
};

// W = 2 A / D with A and D polynomial and D > 0 on closed P, so the inverse
// Hessian and its derivatives are regular up to the boundary.
class GuilleminInverse {
 public:
  explicit GuilleminInverse(const DelzantPolytope& P);
  // W, dW, d2W and R at any x in closed P; H only when depth(x) > 0.
  GuilleminJet jet(std::span<const double> x) const;

 private:
  const DelzantPolytope* P_;
  int n_;
  std::vector<PolynomialD> A_, dA_, d2A_;  // entry (a, b), then derivative k, then (k, q)
  PolynomialD D_;
  std::vector<PolynomialD> dD_, d2D_;
};

double guillemin_value(const DelzantPolytope& P, std::span<const double> x);
Vec guillemin_gradient(const DelzantPolytope& P, std::span<const double> x);
// Requires depth(x) > 0.
Mat guillemin_hessian(const DelzantPolytope& P, std::span<const double> x);
GuilleminJet guillemin_jet(const DelzantPolytope& P, std::span<const double> x);

// Value at x in closed P of a function smooth up to the boundary but only
// evaluable in the interior: Richardson extrapolation along the ray to the
// barycenter, error O(step^3).
double boundary_limit(const DelzantPolytope& P, std::span<const double> x, const PointFunction& g,
                      double step = 2e-3);

// Depth below which curvature is taken as a boundary limit; direct
// evaluation loses digits closer to a facet.
inline constexpr double kDirectDepth = 1e-2;

// Scalar curvature of the Guillemin metric on closed P.
double guillemin_scalar_curvature(const DelzantPolytope& P, std::span<const double> x);

}  // namespace toricflow
