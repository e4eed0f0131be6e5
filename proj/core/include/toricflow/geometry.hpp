#pragma once

#include "toricflow/potential.hpp"

#include <string>
#include <vector>

namespace toricflow {

template <class T>
struct FieldOnChart {
  ChartPtr chart;
  std::vector<int> nodes;
  std::vector<T> values;
  std::string label;
};

using ScalarField = FieldOnChart<double>;
using MatrixField = FieldOnChart<Mat>;

double max_abs(const ScalarField& field);
double max_value(const ScalarField& field);

// u_ij, u^ij and the correction C = u^ij - W_G at every Hessian node.
struct HessianData {
  std::vector<Mat> H;
  std::vector<Mat> W;
  std::vector<Mat> C;
  double min_eigenvalue = 0;
  int min_node = -1;
};

// Throws SingularHessian when min eig <= 1e-10 * trace at some Hessian node.
HessianData hessian_data(const SymplecticPotential& u);
HessianData hessian_data(const GridChart& chart, const std::vector<double>& f, bool guillemin_part);
// Hessian of f alone from the second-difference stencils.
Mat stencil_hessian(const GridChart& chart, int slot, const std::vector<double>& f);

MatrixField hessian(const SymplecticPotential& u);
MatrixField inverse_hessian(const SymplecticPotential& u);
ScalarField abreu_scalar_curvature(const SymplecticPotential& u);
ScalarField riemannian_norm(const SymplecticPotential& u);

// R_u and |Rm| from an already computed HessianData.
ScalarField abreu_scalar_curvature(const SymplecticPotential& u, const HessianData& hd);
ScalarField riemannian_norm(const SymplecticPotential& u, const HessianData& hd);

struct SegmentProfile {
  std::vector<double> t;
  std::vector<double> V;
  std::vector<double> V2;       // V''(t); +inf where a transverse facet is hit
  std::vector<double> inv;      // 1/V''
  std::vector<double> inv_d1;   // (1/V'')'
  std::vector<double> inv_d2;   // (1/V'')''
  std::vector<double> rm_local; // |Rm| at the nearest field node
  double endpoint_value_start = 0, endpoint_value_end = 0;
  double endpoint_slope_start = 0, endpoint_slope_end = 0;
  double max_rm = 0;
  // max_t (1/V'')''(t) - max_P |Rm|, and against the local |Rm|.
  double chord_excess = 0;
  double chord_excess_local = 0;
};

SegmentProfile segment_profile(const SymplecticPotential& u, std::span<const double> a, std::span<const double> b,
                               int samples);

}  // namespace toricflow
