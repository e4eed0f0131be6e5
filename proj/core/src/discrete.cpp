#include "toricflow/discrete.hpp"

#include "toricflow/errors.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <cmath>

namespace toricflow {

DiscreteMabuchi::DiscreteMabuchi(ChartPtr chart, bool guillemin_part, std::vector<double> weights,
                                 std::vector<double> closure)
    : chart_(std::move(chart)), guillemin_part_(guillemin_part), weights_(std::move(weights)),
      closure_(std::move(closure)) {
  if (weights_.size() != chart_->size() || closure_.size() != chart_->size())
    throw Error(ErrorCode::ChartMismatch, "discrete functional data has wrong length");
  for (double w : weights_)
    if (!(w > 0)) throw Error(ErrorCode::InvalidInput, "node weights must be positive");
}

DiscreteMabuchi DiscreteMabuchi::unweighted(ChartPtr chart, bool guillemin_part) {
  auto w = chart->weights();
  std::vector<double> c = guillemin_part ? chart->guillemin().R : std::vector<double>(chart->size(), 0.0);
  return DiscreteMabuchi(std::move(chart), guillemin_part, std::move(w), std::move(c));
}

HessianData DiscreteMabuchi::hessians(const std::vector<double>& f) const {
  return hessian_data(*chart_, f, guillemin_part_);
}

std::vector<double> DiscreteMabuchi::curvature(const HessianData& hd) const {
  const auto& chart = *chart_;
  std::vector<double> acc(chart.size(), 0.0);
  const auto& hn = chart.hessian_nodes();
  for (std::size_t s = 0; s < hn.size(); ++s) {
    const double w = weights_[hn[s]];
    for (const auto& p : chart.stencil(static_cast<int>(s)))
      acc[p.node] += w * (p.A.array() * hd.C[s].array()).sum();
  }
  std::vector<double> R(chart.size());
  for (std::size_t k = 0; k < R.size(); ++k) R[k] = closure_[k] - acc[k] / weights_[k];
  return R;
}

double DiscreteMabuchi::energy_difference(const std::vector<double>& g, const std::vector<double>& f,
                                          const HessianData& hf, const std::vector<double>& affine) const {
  const auto& chart = *chart_;
  const int n = chart.dim();
  const auto& gc = chart.guillemin();
  std::vector<double> diff(g.size());
  for (std::size_t k = 0; k < g.size(); ++k) diff[k] = g[k] - f[k];
  const auto& hn = chart.hessian_nodes();
  double logdet = 0, closure_term = 0, linear = 0;
  for (std::size_t s = 0; s < hn.size(); ++s) {
    const Mat dH = stencil_hessian(chart, static_cast<int>(s), diff);
    Eigen::LLT<Mat> llt(hf.H[s]);
    Mat Linv = llt.matrixL().solve(Mat::Identity(n, n));
    Mat S = Linv * dH * Linv.transpose();
    Eigen::SelfAdjointEigenSolver<Mat> es(S, Eigen::EigenvaluesOnly);
    double ld = 0;
    for (int i = 0; i < n; ++i) {
      const double lam = es.eigenvalues()(i);
      if (!(lam > -1)) throw Error(ErrorCode::SingularHessian, "energy difference at a non-convex potential");
      ld += std::log1p(lam);
    }
    const double w = weights_[hn[s]];
    logdet += w * ld;
    if (guillemin_part_) closure_term += w * (gc.W[s].array() * dH.array()).sum();
  }
  for (std::size_t k = 0; k < g.size(); ++k) linear += weights_[k] * (closure_[k] + affine[k]) * diff[k];
  return -logdet + closure_term + linear;
}

Eigen::SparseMatrix<double> DiscreteMabuchi::second_variation(const HessianData& hd) const {
  const auto& chart = *chart_;
  const auto& hn = chart.hessian_nodes();
  std::vector<Eigen::Triplet<double>> trip;
  std::vector<Mat> WA;
  for (std::size_t s = 0; s < hn.size(); ++s) {
    const auto& st = chart.stencil(static_cast<int>(s));
    const double w = weights_[hn[s]];
    WA.resize(st.size());
    for (std::size_t p = 0; p < st.size(); ++p) WA[p] = hd.W[s] * st[p].A;
    for (std::size_t p = 0; p < st.size(); ++p)
      for (std::size_t q = 0; q < st.size(); ++q)
        trip.emplace_back(st[p].node, st[q].node, w * (WA[p].array() * WA[q].transpose().array()).sum());
  }
  const auto N = static_cast<Eigen::Index>(chart.size());
  Eigen::SparseMatrix<double> K(N, N);
  K.setFromTriplets(trip.begin(), trip.end());
  return K;
}

std::vector<double> sample_affine(const GridChart& chart, const AffineFunction& a) {
  std::vector<double> v(chart.size());
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = a(chart.x(static_cast<int>(k)));
  return v;
}

}  // namespace toricflow
