#include "toricflow/potential.hpp"

#include "toricflow/errors.hpp"

#include <cmath>

namespace toricflow {

SymplecticPotential::SymplecticPotential(ChartPtr chart, std::vector<double> f, PotentialTag tag, bool guillemin_part)
    : chart_(std::move(chart)), f_(std::move(f)), tag_(tag), guillemin_part_(guillemin_part) {
  if (!chart_) throw Error(ErrorCode::InvalidInput, "potential without chart");
  if (f_.size() != chart_->size()) throw Error(ErrorCode::ChartMismatch, "f has wrong length for the chart");
  for (double v : f_)
    if (!std::isfinite(v)) throw Error(ErrorCode::InvalidInput, "f must be finite at every node");
}

double SymplecticPotential::nodal_value(int k) const {
  return f_[k] + (guillemin_part_ ? guillemin_value(polytope(), chart_->x(k)) : 0.0);
}

std::vector<double> SymplecticPotential::nodal_values() const {
  std::vector<double> u(f_.size());
  for (std::size_t k = 0; k < f_.size(); ++k) u[k] = nodal_value(static_cast<int>(k));
  return u;
}

SymplecticPotential SymplecticPotential::with_f(std::vector<double> f, PotentialTag tag) const {
  return SymplecticPotential(chart_, std::move(f), tag, guillemin_part_);
}

SymplecticPotential SymplecticPotential::plus_affine(const AffineFunction& a) const {
  std::vector<double> f = f_;
  for (std::size_t k = 0; k < f.size(); ++k) f[k] += a(chart_->x(static_cast<int>(k)));
  return SymplecticPotential(chart_, std::move(f), tag_, guillemin_part_);
}

SymplecticPotential guillemin(ChartPtr chart) {
  const std::size_t n = chart->size();
  return SymplecticPotential(std::move(chart), std::vector<double>(n, 0.0), PotentialTag::Guillemin, true);
}

SymplecticPotential perturbed(ChartPtr chart, const PointFunction& f) {
  std::vector<double> v(chart->size());
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = f(chart->x(static_cast<int>(k)));
  return SymplecticPotential(std::move(chart), std::move(v), PotentialTag::Perturbed, true);
}

SymplecticPotential sampled_without_guillemin(ChartPtr chart, const PointFunction& g) {
  std::vector<double> v(chart->size());
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = g(chart->x(static_cast<int>(k)));
  return SymplecticPotential(std::move(chart), std::move(v), PotentialTag::Perturbed, false);
}

bool same_chart(const GridChart& a, const GridChart& b) {
  if (&a == &b) return true;
  if (a.spacing() != b.spacing() || a.size() != b.size() || a.dim() != b.dim()) return false;
  const auto& fa = a.polytope().facets();
  const auto& fb = b.polytope().facets();
  if (fa.size() != fb.size()) return false;
  for (std::size_t i = 0; i < fa.size(); ++i)
    if (fa[i].normal != fb[i].normal || fa[i].offset != fb[i].offset) return false;
  return true;
}

void require_same_chart(const SymplecticPotential& a, const SymplecticPotential& b) {
  if (!same_chart(a.chart(), b.chart())) throw Error(ErrorCode::ChartMismatch, "potentials live on different charts");
}

double evaluate(const SymplecticPotential& u, std::span<const double> x) {
  const auto& P = u.polytope();
  if (P.depth(x) < -1e-12) throw Error(ErrorCode::OutOfDomain, "evaluate: point outside P");
  double v = interpolate(u.chart(), u.f(), x);
  if (u.has_guillemin_part()) v += guillemin_value(P, x);
  return v;
}

Vec gradient_at(const SymplecticPotential& u, std::span<const double> x) {
  const auto& P = u.polytope();
  const int n = P.dim();
  const double h = u.chart().spacing();
  if (P.depth(x) < 2 * h * (1 - 1e-12)) throw Error(ErrorCode::OutOfDomain, "gradient_at needs depth >= 2h");
  auto nodal = nodal_gradient(u.chart(), u.f());
  Vec g = u.has_guillemin_part() ? guillemin_gradient(P, x) : Vec::Zero(n);
  std::vector<double> comp(u.chart().size());
  for (int a = 0; a < n; ++a) {
    for (std::size_t k = 0; k < comp.size(); ++k) comp[k] = nodal[k](a);
    g(a) += interpolate(u.chart(), comp, x);
  }
  return g;
}

SymplecticPotential normalize(const SymplecticPotential& u, std::span<const double> x0) {
  const double u0 = evaluate(u, x0);
  Vec g = gradient_at(u, x0);
  AffineFunction shift;
  shift.gradient.resize(u.polytope().dim());
  shift.constant = -u0;
  for (int k = 0; k < u.polytope().dim(); ++k) {
    shift.gradient[k] = -g(k);
    shift.constant += g(k) * x0[k];
  }
  return u.plus_affine(shift);
}

SymplecticPotential normalize(const SymplecticPotential& u) {
  const auto b = u.polytope().barycenter();
  return normalize(u, b);
}

double legendre_gap(const SymplecticPotential& u, const SymplecticPotential& u_ref) {
  require_same_chart(u, u_ref);
  double gap = 0;
  for (std::size_t k = 0; k < u.f().size(); ++k) {
    double d = u.f()[k] - u_ref.f()[k];
    if (u.has_guillemin_part() != u_ref.has_guillemin_part()) {
      const double g = guillemin_value(u.polytope(), u.chart().x(static_cast<int>(k)));
      d += u.has_guillemin_part() ? g : -g;
    }
    gap = std::max(gap, std::abs(d));
  }
  return gap;
}

}  // namespace toricflow
