#pragma once

#include "toricflow/grid.hpp"

#include <span>
#include <vector>

namespace toricflow {

struct AffineFunction {
  std::vector<double> gradient;
  double constant = 0.0;

  double operator()(std::span<const double> x) const {
    double s = constant;
    for (std::size_t k = 0; k < gradient.size(); ++k) s += gradient[k] * x[k];
    return s;
  }
  static AffineFunction constant_function(int n, double c) { return {std::vector<double>(n, 0.0), c}; }
};

enum class PotentialTag { Guillemin, Perturbed, Flowed };

// u = u_G + f with u_G = 1/2 sum l_i ln l_i in closed form and f sampled at
// every chart node. With the Guillemin part disabled u = f (test-only
// potentials such as quadratics).
class SymplecticPotential {
 public:
  SymplecticPotential(ChartPtr chart, std::vector<double> f, PotentialTag tag = PotentialTag::Perturbed,
                      bool guillemin_part = true);

  const DelzantPolytope& polytope() const { return chart_->polytope(); }
  const GridChart& chart() const { return *chart_; }
  const ChartPtr& chart_ptr() const { return chart_; }
  const std::vector<double>& f() const { return f_; }
  PotentialTag tag() const { return tag_; }
  bool has_guillemin_part() const { return guillemin_part_; }

  double nodal_value(int k) const;
  std::vector<double> nodal_values() const;

  SymplecticPotential with_f(std::vector<double> f, PotentialTag tag) const;
  SymplecticPotential plus_affine(const AffineFunction& a) const;

 private:
  ChartPtr chart_;
  std::vector<double> f_;
  PotentialTag tag_;
  bool guillemin_part_;
};

SymplecticPotential guillemin(ChartPtr chart);
// Guillemin part plus f sampled from a closed-form function.
SymplecticPotential perturbed(ChartPtr chart, const PointFunction& f);
// u = g sampled at the nodes, no Guillemin part.
SymplecticPotential sampled_without_guillemin(ChartPtr chart, const PointFunction& g);

bool same_chart(const GridChart& a, const GridChart& b);
void require_same_chart(const SymplecticPotential& a, const SymplecticPotential& b);

double evaluate(const SymplecticPotential& u, std::span<const double> x);
Vec gradient_at(const SymplecticPotential& u, std::span<const double> x);

SymplecticPotential normalize(const SymplecticPotential& u, std::span<const double> x0);
// Normalizes at the barycenter.
SymplecticPotential normalize(const SymplecticPotential& u);

double legendre_gap(const SymplecticPotential& u, const SymplecticPotential& u_ref);

}  // namespace toricflow
