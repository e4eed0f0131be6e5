#include "toricflow/geometry.hpp"

#include "toricflow/errors.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <deque>
#include <sstream>

namespace toricflow {

double max_abs(const ScalarField& field) {
  double m = 0;
  for (double v : field.values) m = std::max(m, std::abs(v));
  return m;
}

double max_value(const ScalarField& field) {
  double m = -INFINITY;
  for (double v : field.values) m = std::max(m, v);
  return m;
}

Mat stencil_hessian(const GridChart& chart, int slot, const std::vector<double>& f) {
  const int n = chart.dim();
  Mat D = Mat::Zero(n, n);
  for (const auto& p : chart.stencil(slot)) D += p.A * f[p.node];
  return D;
}

HessianData hessian_data(const SymplecticPotential& u) {
  return hessian_data(u.chart(), u.f(), u.has_guillemin_part());
}

HessianData hessian_data(const GridChart& chart, const std::vector<double>& f, bool G) {
  const auto& gc = chart.guillemin();
  const auto& hn = chart.hessian_nodes();
  HessianData hd;
  hd.H.resize(hn.size());
  hd.W.resize(hn.size());
  hd.C.resize(hn.size());
  hd.min_eigenvalue = INFINITY;
  for (std::size_t s = 0; s < hn.size(); ++s) {
    Mat H = stencil_hessian(chart, static_cast<int>(s), f);
    if (G) H += gc.H[s];
    Eigen::SelfAdjointEigenSolver<Mat> es(H, Eigen::EigenvaluesOnly);
    const double lo = es.eigenvalues()(0);
    if (lo < hd.min_eigenvalue) {
      hd.min_eigenvalue = lo;
      hd.min_node = hn[s];
    }
    if (!(lo > 1e-10 * H.trace())) {
      std::ostringstream os;
      os << "Hessian not positive definite at node " << hn[s] << " (x =";
      for (int k = 0; k < chart.dim(); ++k) os << " " << chart.node(hn[s]).x[k];
      os << "), min eigenvalue " << lo;
      throw Error(ErrorCode::SingularHessian, os.str());
    }
    hd.H[s] = H;
    hd.W[s] = H.inverse();
    hd.C[s] = G ? Mat(hd.W[s] - gc.W[s]) : hd.W[s];
  }
  return hd;
}

namespace {

template <class T>
FieldOnChart<T> empty_field(const SymplecticPotential& u, const std::string& label) {
  FieldOnChart<T> f;
  f.chart = u.chart_ptr();
  f.nodes = u.chart().field_nodes();
  f.label = label;
  f.values.reserve(f.nodes.size());
  return f;
}

}  // namespace

MatrixField hessian(const SymplecticPotential& u) {
  auto hd = hessian_data(u);
  auto out = empty_field<Mat>(u, "hessian");
  for (int k : out.nodes) out.values.push_back(hd.H[u.chart().hessian_slot(k)]);
  return out;
}

MatrixField inverse_hessian(const SymplecticPotential& u) {
  auto hd = hessian_data(u);
  auto out = empty_field<Mat>(u, "inverse_hessian");
  for (int k : out.nodes) out.values.push_back(hd.W[u.chart().hessian_slot(k)]);
  return out;
}

ScalarField abreu_scalar_curvature(const SymplecticPotential& u, const HessianData& hd) {
  const auto& chart = u.chart();
  const auto& gc = chart.guillemin();
  auto out = empty_field<double>(u, "abreu_scalar_curvature");
  for (int k : out.nodes) {
    double R = u.has_guillemin_part() ? gc.R[k] : 0.0;
    for (const auto& p : chart.stencil(chart.hessian_slot(k)))
      R -= (p.A.array() * hd.C[chart.hessian_slot(p.node)].array()).sum();
    out.values.push_back(R);
  }
  return out;
}

ScalarField riemannian_norm(const SymplecticPotential& u, const HessianData& hd) {
  const auto& chart = u.chart();
  const auto& gc = chart.guillemin();
  const int n = chart.dim();
  auto out = empty_field<double>(u, "riemannian_norm");
  // X[k][l](i,j) = d^2 u^{ij} / dx_k dx_l
  std::array<std::array<Mat, 3>, 3> X;
  for (int k : out.nodes) {
    const int s = chart.hessian_slot(k);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) X[a][b] = u.has_guillemin_part() ? gc.d2W[s][a][b] : Mat(Mat::Zero(n, n));
    for (const auto& p : chart.stencil(s)) {
      const Mat& C = hd.C[chart.hessian_slot(p.node)];
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
          if (p.A(a, b) != 0) X[a][b] += p.A(a, b) * C;
    }
    double sq = 0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int a = 0; a < n; ++a)
          for (int b = 0; b < n; ++b) sq += X[a][b](i, j) * X[i][j](a, b);
    out.values.push_back(std::sqrt(std::max(0.0, sq)));
  }
  return out;
}

ScalarField abreu_scalar_curvature(const SymplecticPotential& u) { return abreu_scalar_curvature(u, hessian_data(u)); }
ScalarField riemannian_norm(const SymplecticPotential& u) { return riemannian_norm(u, hessian_data(u)); }

namespace {

// Fills non-Hessian nodes with the value of the nearest Hessian node (graph
// distance over axis neighbors).
std::vector<double> extend_from_hessian_nodes(const GridChart& chart, std::vector<double> v) {
  std::vector<bool> known(chart.size(), false);
  std::deque<int> queue;
  for (int k : chart.hessian_nodes()) {
    known[k] = true;
    queue.push_back(k);
  }
  while (!queue.empty()) {
    const int k = queue.front();
    queue.pop_front();
    for (int a = 0; a < chart.dim(); ++a)
      for (int s : {-1, 1}) {
        const int q = chart.neighbor(k, a, s);
        if (q >= 0 && !known[q]) {
          known[q] = true;
          v[q] = v[k];
          queue.push_back(q);
        }
      }
  }
  return v;
}

std::vector<double> first_derivative(const std::vector<double>& g, double dt) {
  const std::size_t m = g.size();
  std::vector<double> d(m);
  for (std::size_t j = 1; j + 1 < m; ++j) d[j] = (g[j + 1] - g[j - 1]) / (2 * dt);
  d[0] = (-3 * g[0] + 4 * g[1] - g[2]) / (2 * dt);
  d[m - 1] = (3 * g[m - 1] - 4 * g[m - 2] + g[m - 3]) / (2 * dt);
  return d;
}

std::vector<double> second_derivative(const std::vector<double>& g, double dt) {
  const std::size_t m = g.size();
  std::vector<double> d(m);
  for (std::size_t j = 1; j + 1 < m; ++j) d[j] = (g[j + 1] - 2 * g[j] + g[j - 1]) / (dt * dt);
  d[0] = (2 * g[0] - 5 * g[1] + 4 * g[2] - g[3]) / (dt * dt);
  d[m - 1] = (2 * g[m - 1] - 5 * g[m - 2] + 4 * g[m - 3] - g[m - 4]) / (dt * dt);
  return d;
}

}  // namespace

SegmentProfile segment_profile(const SymplecticPotential& u, std::span<const double> a, std::span<const double> b,
                               int samples) {
  const auto& P = u.polytope();
  const auto& chart = u.chart();
  const int n = P.dim();
  if (samples < 5) throw Error(ErrorCode::InvalidInput, "segment_profile needs at least 5 samples");
  Vec d(n);
  for (int k = 0; k < n; ++k) d(k) = b[k] - a[k];
  if (d.norm() == 0) throw Error(ErrorCode::InvalidInput, "segment endpoints coincide");

  SegmentProfile prof;
  const double dt = 1.0 / (samples - 1);
  std::vector<std::vector<double>> pts(samples, std::vector<double>(n));
  for (int j = 0; j < samples; ++j) {
    const double t = j * dt;
    for (int k = 0; k < n; ++k) pts[j][k] = a[k] + t * d(k);
    if (P.depth(pts[j]) < -1e-12) throw Error(ErrorCode::SegmentLeavesPolytope, "segment leaves the polytope");
    prof.t.push_back(t);
  }

  auto hd = hessian_data(u);
  std::vector<double> qf(chart.size(), 0.0);
  for (std::size_t s = 0; s < chart.hessian_nodes().size(); ++s) {
    const Mat Hf = stencil_hessian(chart, static_cast<int>(s), u.f());
    qf[chart.hessian_nodes()[s]] = d.dot(Hf * d);
  }
  qf = extend_from_hessian_nodes(chart, std::move(qf));

  for (int j = 0; j < samples; ++j) {
    prof.V.push_back(evaluate(u, pts[j]));
    double q = interpolate(chart, qf, pts[j]);
    bool transverse_hit = false;
    if (u.has_guillemin_part()) {
      for (int i = 0; i < P.facet_count(); ++i) {
        const double l = P.l(i, pts[j]);
        const double nd = P.normals().row(i).dot(d);
        if (l <= 1e-14) {
          if (std::abs(nd) > 1e-14) transverse_hit = true;
          continue;  // tangent direction: the 0/0 term vanishes
        }
        q += 0.5 * nd * nd / l;
      }
    }
    if (transverse_hit) {
      prof.V2.push_back(INFINITY);
      prof.inv.push_back(0.0);
    } else {
      prof.V2.push_back(q);
      prof.inv.push_back(1.0 / q);
    }
  }
  prof.inv_d1 = first_derivative(prof.inv, dt);
  prof.inv_d2 = second_derivative(prof.inv, dt);
  prof.endpoint_value_start = prof.inv.front();
  prof.endpoint_value_end = prof.inv.back();
  prof.endpoint_slope_start = prof.inv_d1.front();
  prof.endpoint_slope_end = prof.inv_d1.back();

  auto rm = riemannian_norm(u, hd);
  prof.max_rm = rm.values.empty() ? 0.0 : max_value(rm);
  prof.chord_excess = -INFINITY;
  prof.chord_excess_local = -INFINITY;
  for (int j = 0; j < samples; ++j) {
    double best = INFINITY, local = 0;
    for (std::size_t r = 0; r < rm.nodes.size(); ++r) {
      double dist = 0;
      for (int k = 0; k < n; ++k) {
        const double e = chart.node(rm.nodes[r]).x[k] - pts[j][k];
        dist += e * e;
      }
      if (dist < best) {
        best = dist;
        local = rm.values[r];
      }
    }
    prof.rm_local.push_back(local);
    prof.chord_excess = std::max(prof.chord_excess, prof.inv_d2[j] - prof.max_rm);
    prof.chord_excess_local = std::max(prof.chord_excess_local, prof.inv_d2[j] - local);
  }
  return prof;
}

}  // namespace toricflow
