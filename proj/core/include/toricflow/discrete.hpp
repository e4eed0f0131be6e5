#pragma once

#include "toricflow/geometry.hpp"

#include <Eigen/SparseCore>

#include <vector>

namespace toricflow {

// Discrete relative Mabuchi functional on a chart,
//   M(f) = -sum_m w_m log det(H_m) + sum_m w_m W_G,m : D^2 f_m + sum_k w_k (c_k + a_k) f_k,
// with H = H_G + D^2 f on Hessian nodes, node weights w, closure
// curvature c (Guillemin scalar curvature extended to the boundary) and an
// affine part a sampled at the nodes (a = -theta for the modified flow).
// The middle terms are the summation-by-parts form of the boundary
// integral, so the Guillemin potential of an extremal polytope is an exact
// discrete critical point.
class DiscreteMabuchi {
 public:
  DiscreteMabuchi(ChartPtr chart, bool guillemin_part, std::vector<double> weights, std::vector<double> closure);

  // Lebesgue dual-cell weights and the Guillemin scalar curvature.
  static DiscreteMabuchi unweighted(ChartPtr chart, bool guillemin_part);

  const GridChart& chart() const { return *chart_; }
  const ChartPtr& chart_ptr() const { return chart_; }
  bool guillemin_part() const { return guillemin_part_; }
  const std::vector<double>& weights() const { return weights_; }
  const std::vector<double>& closure() const { return closure_; }

  HessianData hessians(const std::vector<double>& f) const;

  // Discrete scalar curvature R_k = c_k - (1/w_k) sum_m w_m A_{m,k} : C_m;
  // dM/df_k = w_k (R_k + a_k).
  std::vector<double> curvature(const HessianData& hd) const;

  // M(g) - M(f) for the same affine part.
  double energy_difference(const std::vector<double>& g, const std::vector<double>& f, const HessianData& hf,
                           const std::vector<double>& affine) const;

  // d^2 M / df_k df_l = sum_m w_m tr(W_m A_{m,k} W_m A_{m,l}).
  Eigen::SparseMatrix<double> second_variation(const HessianData& hd) const;

 private:
  ChartPtr chart_;
  bool guillemin_part_;
  std::vector<double> weights_;
  std::vector<double> closure_;
};

// Affine function sampled at chart nodes.
std::vector<double> sample_affine(const GridChart& chart, const AffineFunction& a);

}  // namespace toricflow
