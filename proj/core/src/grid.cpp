#include "toricflow/grid.hpp"

#include "toricflow/errors.hpp"

#include <cmath>
#include <map>

namespace toricflow {

namespace {

long floor_q(const Rational& q) {
  Integer num = boost::multiprecision::numerator(q);
  Integer den = boost::multiprecision::denominator(q);
  Integer f = num / den;
  if (num < 0 && f * den != num) f -= 1;
  return f.convert_to<long>();
}

long ceil_q(const Rational& q) { return -floor_q(-q); }

HPolytope cell_polytope(const GridChart& chart, int k) {
  const auto& P = chart.polytope();
  const int n = P.dim();
  std::vector<Halfspace> hs = P.exact().halfspaces();
  const auto& idx = chart.node(k).index;
  const Rational half(1, 2);
  for (int a = 0; a < n; ++a) {
    RVec e(n, Rational(0));
    e[a] = 1;
    hs.push_back({e, -(Rational(idx[a]) - half) * chart.spacing_exact()});
    RVec m(n, Rational(0));
    m[a] = -1;
    hs.push_back({m, (Rational(idx[a]) + half) * chart.spacing_exact()});
  }
  return HPolytope(n, std::move(hs));
}

using Offset = std::array<int, 3>;

int stencil_reach(const DelzantPolytope& P, const std::vector<Offset>& offsets) {
  int total = 0;
  for (int i = 0; i < P.facet_count(); ++i) {
    int worst = 0;
    for (const auto& o : offsets) {
      int s = 0;
      for (int k = 0; k < P.dim(); ++k) s += static_cast<int>(P.facets()[i].normal[k]) * o[k];
      worst = std::max(worst, -s);
    }
    total += worst;
  }
  return total;
}

Offset unit(int a, int s) {
  Offset o{0, 0, 0};
  o[a] = s;
  return o;
}

Offset combo(int a, int sa, int b, int sb) {
  Offset o{0, 0, 0};
  o[a] = sa;
  o[b] = sb;
  return o;
}

}  // namespace

int GridChart::find(const std::array<int, 3>& index) const {
  long flat = 0;
  for (int k = 0; k < dim_; ++k) {
    const int r = index[k] - lo_[k];
    if (r < 0 || r >= extent_[k]) return -1;
    flat = flat * extent_[k] + r;
  }
  return box_[flat];
}

int GridChart::neighbor(int k, int axis, int step) const {
  auto idx = nodes_[k].index;
  idx[axis] += step;
  return find(idx);
}

std::vector<double> GridChart::weights() const {
  std::vector<double> w(nodes_.size());
  for (std::size_t k = 0; k < nodes_.size(); ++k) w[k] = nodes_[k].weight;
  return w;
}

ChartPtr make_grid(const DelzantPolytope& P, double h) {
  return make_grid(std::make_shared<const DelzantPolytope>(P), h);
}

ChartPtr make_grid(std::shared_ptr<const DelzantPolytope> Pp, double h) {
  const DelzantPolytope& P = *Pp;
  const int n = P.dim();
  if (n > 3) throw Error(ErrorCode::InvalidInput, "grid charts support n <= 3");
  if (!(h > 0) || !std::isfinite(h)) throw Error(ErrorCode::InvalidInput, "spacing must be positive");

  const auto& verts = P.vertices();
  double min_dist = INFINITY;
  for (const auto& v : verts) {
    const auto vd = to_double(v);
    for (int i = 0; i < P.facet_count(); ++i) {
      const double l = P.l(i, vd);
      if (l > 0) min_dist = std::min(min_dist, l / P.normals().row(i).norm());
    }
  }
  if (!(h < 0.5 * min_dist))
    throw Error(ErrorCode::SpacingTooCoarse, "h = " + std::to_string(h) + " is not below half the minimal "
                                             "vertex-to-facet distance " + std::to_string(min_dist));

  auto chart = std::shared_ptr<GridChart>(new GridChart());
  GridChart& G = *chart;
  G.polytope_ = Pp;
  G.dim_ = n;
  G.h_ = h;
  G.h_exact_ = to_rational(h);
  const Rational& hq = G.h_exact_;

  for (int k = 0; k < n; ++k) {
    Rational lo = verts[0][k], hi = verts[0][k];
    for (const auto& v : verts) {
      if (v[k] < lo) lo = v[k];
      if (v[k] > hi) hi = v[k];
    }
    G.lo_[k] = static_cast<int>(floor_q(lo / hq));
    G.extent_[k] = static_cast<int>(ceil_q(hi / hq)) - G.lo_[k] + 1;
  }
  long box_size = 1;
  for (int k = 0; k < n; ++k) box_size *= G.extent_[k];
  G.box_.assign(static_cast<std::size_t>(box_size), -1);

  const int m = P.facet_count();
  std::vector<Rational> c_over_h(m);
  std::vector<long> abs_sum(m, 0);
  for (int i = 0; i < m; ++i) {
    c_over_h[i] = P.facets()[i].offset / hq;
    for (int k = 0; k < n; ++k) abs_sum[i] += std::labs(P.facets()[i].normal[k]);
  }

  std::vector<Rational> depth_h;  // depth / h, exact
  std::vector<bool> full_cell;
  bool any_interior = false;
  std::array<int, 3> idx{};
  for (long flat = 0; flat < box_size; ++flat) {
    long r = flat;
    for (int k = n - 1; k >= 0; --k) {
      idx[k] = G.lo_[k] + static_cast<int>(r % G.extent_[k]);
      r /= G.extent_[k];
    }
    Rational dmin;
    bool full = true;
    double edepth = INFINITY;
    bool inside = true;
    for (int i = 0; i < m && inside; ++i) {
      long s = 0;
      for (int k = 0; k < n; ++k) s += P.facets()[i].normal[k] * idx[k];
      Rational val = Rational(s) + c_over_h[i];
      if (val < 0) {
        inside = false;
        break;
      }
      if (i == 0 || val < dmin) dmin = val;
      if (val < Rational(abs_sum[i], 2)) full = false;
      edepth = std::min(edepth, to_double(val * hq) / P.normals().row(i).norm());
    }
    if (!inside) continue;
    GridNode node;
    node.index = idx;
    for (int k = 0; k < n; ++k) node.x[k] = h * idx[k];
    node.depth = to_double(dmin * hq);
    node.euclidean_depth = edepth;
    node.kind = dmin >= 1 ? NodeKind::Interior : NodeKind::BoundaryLayer;
    any_interior = any_interior || dmin >= 1;
    G.box_[flat] = static_cast<int>(G.nodes_.size());
    G.nodes_.push_back(node);
    depth_h.push_back(dmin);
    full_cell.push_back(full);
  }
  if (!any_interior)
    throw Error(ErrorCode::SpacingTooCoarse, "no node has depth >= h");

  Rational cube = 1;
  for (int k = 0; k < n; ++k) cube *= hq;
  const double full_volume = to_double(cube);
  for (std::size_t k = 0; k < G.nodes_.size(); ++k) {
    G.nodes_[k].weight = full_cell[k] ? full_volume : to_double(cell_polytope(G, static_cast<int>(k)).volume());
    G.total_weight_ += G.nodes_[k].weight;
  }

  // Mixed stencils: prefer the shape that reaches least far across facets.
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) G.mixed_[a][b] = MixedStencil::Cross;
  for (int a = 0; a < n; ++a) {
    for (int b = a + 1; b < n; ++b) {
      std::vector<Offset> cross = {combo(a, 1, b, 1), combo(a, 1, b, -1), combo(a, -1, b, 1), combo(a, -1, b, -1)};
      std::vector<Offset> axes = {unit(a, 1), unit(a, -1), unit(b, 1), unit(b, -1)};
      std::vector<Offset> diag = axes, anti = axes;
      diag.push_back(combo(a, 1, b, 1));
      diag.push_back(combo(a, -1, b, -1));
      anti.push_back(combo(a, 1, b, -1));
      anti.push_back(combo(a, -1, b, 1));
      const int rc = stencil_reach(P, cross), rd = stencil_reach(P, diag), ra = stencil_reach(P, anti);
      MixedStencil choice = MixedStencil::Cross;
      if (rd < rc && rd <= ra) choice = MixedStencil::Diagonal;
      else if (ra < rc && ra < rd) choice = MixedStencil::AntiDiagonal;
      G.mixed_[a][b] = G.mixed_[b][a] = choice;
    }
  }

  const double ih2 = 1.0 / (h * h);
  G.hessian_slot_.assign(G.nodes_.size(), -1);
  for (std::size_t k = 0; k < G.nodes_.size(); ++k) {
    if (!(depth_h[k] > 0)) continue;
    std::map<Offset, Mat> coeff;
    auto add = [&](const Offset& o, int a, int b, double c) {
      auto it = coeff.find(o);
      if (it == coeff.end()) it = coeff.emplace(o, Mat::Zero(n, n)).first;
      it->second(a, b) += c;
      if (a != b) it->second(b, a) += c;
    };
    const Offset center{0, 0, 0};
    for (int a = 0; a < n; ++a) {
      add(unit(a, 1), a, a, ih2);
      add(unit(a, -1), a, a, ih2);
      add(center, a, a, -2 * ih2);
      for (int b = a + 1; b < n; ++b) {
        switch (G.mixed_[a][b]) {
          case MixedStencil::Cross:
            add(combo(a, 1, b, 1), a, b, 0.25 * ih2);
            add(combo(a, -1, b, -1), a, b, 0.25 * ih2);
            add(combo(a, 1, b, -1), a, b, -0.25 * ih2);
            add(combo(a, -1, b, 1), a, b, -0.25 * ih2);
            break;
          case MixedStencil::AntiDiagonal:
            for (const auto& o : {unit(a, 1), unit(a, -1), unit(b, 1), unit(b, -1)}) add(o, a, b, 0.5 * ih2);
            add(combo(a, 1, b, -1), a, b, -0.5 * ih2);
            add(combo(a, -1, b, 1), a, b, -0.5 * ih2);
            add(center, a, b, -ih2);
            break;
          case MixedStencil::Diagonal:
            for (const auto& o : {unit(a, 1), unit(a, -1), unit(b, 1), unit(b, -1)}) add(o, a, b, -0.5 * ih2);
            add(combo(a, 1, b, 1), a, b, 0.5 * ih2);
            add(combo(a, -1, b, -1), a, b, 0.5 * ih2);
            add(center, a, b, ih2);
            break;
        }
      }
    }
    std::vector<StencilPoint> pts;
    bool ok = true;
    for (const auto& [o, A] : coeff) {
      std::array<int, 3> q = G.nodes_[k].index;
      for (int a = 0; a < n; ++a) q[a] += o[a];
      const int id = G.find(q);
      if (id < 0) {
        ok = false;
        break;
      }
      if (A.cwiseAbs().maxCoeff() == 0) continue;
      pts.push_back({id, A});
    }
    if (!ok) continue;
    G.hessian_slot_[k] = static_cast<int>(G.hessian_nodes_.size());
    G.hessian_nodes_.push_back(static_cast<int>(k));
    G.stencils_.push_back(std::move(pts));
  }

  G.is_field_node_.assign(G.nodes_.size(), false);
  for (int k : G.hessian_nodes_) {
    if (depth_h[k] < 2) continue;
    bool ok = true;
    for (const auto& p : G.stencils_[G.hessian_slot_[k]]) ok = ok && G.hessian_slot_[p.node] >= 0;
    if (!ok) continue;
    G.is_field_node_[k] = true;
    G.field_nodes_.push_back(k);
  }

  auto& gc = G.guillemin_;
  const std::size_t ns = G.hessian_nodes_.size();
  gc.H.resize(ns);
  gc.W.resize(ns);
  gc.dW.resize(ns);
  gc.d2W.resize(ns);
  gc.inverse = std::make_shared<const GuilleminInverse>(P);
  for (std::size_t s = 0; s < ns; ++s) {
    auto jet = gc.inverse->jet(G.x(G.hessian_nodes_[s]));
    gc.H[s] = jet.H;
    gc.W[s] = jet.W;
    gc.dW[s] = jet.dW;
    gc.d2W[s] = jet.d2W;
  }
  gc.R.resize(G.nodes_.size());
  for (std::size_t k = 0; k < G.nodes_.size(); ++k) gc.R[k] = gc.inverse->jet(G.x(static_cast<int>(k))).R;
  return chart;
}

Rational cell_measure(const GridChart& chart, int k, const Polynomial& density) {
  return cell_polytope(chart, k).integrate(density);
}

double interpolate(const GridChart& chart, const std::vector<double>& values, std::span<const double> x) {
  const int n = chart.dim();
  const double h = chart.spacing();
  std::array<int, 3> base{};
  std::array<double, 3> frac{};
  bool on_node = true;
  std::array<int, 3> nearest{};
  for (int k = 0; k < n; ++k) {
    const double t = x[k] / h;
    base[k] = static_cast<int>(std::floor(t));
    frac[k] = t - base[k];
    nearest[k] = static_cast<int>(std::lround(t));
    if (std::abs(t - nearest[k]) > 1e-10) on_node = false;
  }
  if (on_node) {
    const int id = chart.find(nearest);
    if (id >= 0) return values[id];
  }
  const int corners = 1 << n;
  std::vector<int> ids;
  std::vector<int> bits;
  for (int c = 0; c < corners; ++c) {
    std::array<int, 3> q = base;
    for (int k = 0; k < n; ++k) q[k] += (c >> k) & 1;
    const int id = chart.find(q);
    if (id >= 0) {
      ids.push_back(id);
      bits.push_back(c);
    }
  }
  if (static_cast<int>(ids.size()) == corners) {
    double s = 0;
    for (int c = 0; c < corners; ++c) {
      double w = 1;
      for (int k = 0; k < n; ++k) w *= ((c >> k) & 1) ? frac[k] : 1 - frac[k];
      s += w * values[ids[c]];
    }
    return s;
  }
  if (static_cast<int>(ids.size()) >= n + 1) {
    Eigen::MatrixXd A(ids.size(), n + 1);
    Eigen::VectorXd b(ids.size());
    for (std::size_t r = 0; r < ids.size(); ++r) {
      A(r, 0) = 1;
      for (int k = 0; k < n; ++k) A(r, k + 1) = (chart.node(ids[r]).x[k] - x[k]) / h;
      b(r) = values[ids[r]];
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
    if (qr.rank() == n + 1) return qr.solve(b)(0);
  }
  // Degenerate corner set: nearest node.
  int best = -1;
  double best_d = INFINITY;
  for (std::size_t k = 0; k < chart.size(); ++k) {
    double d = 0;
    for (int a = 0; a < n; ++a) d += (chart.node(k).x[a] - x[a]) * (chart.node(k).x[a] - x[a]);
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(k);
    }
  }
  return values[best];
}

std::vector<Vec> nodal_gradient(const GridChart& chart, const std::vector<double>& values) {
  const int n = chart.dim();
  const double h = chart.spacing();
  std::vector<Vec> g(chart.size(), Vec::Zero(n));
  for (std::size_t k = 0; k < chart.size(); ++k) {
    const int id = static_cast<int>(k);
    for (int a = 0; a < n; ++a) {
      const int p = chart.neighbor(id, a, 1), q = chart.neighbor(id, a, -1);
      if (p >= 0 && q >= 0) {
        g[k](a) = (values[p] - values[q]) / (2 * h);
      } else if (p >= 0) {
        const int p2 = chart.neighbor(id, a, 2);
        g[k](a) = p2 >= 0 ? (-3 * values[k] + 4 * values[p] - values[p2]) / (2 * h) : (values[p] - values[k]) / h;
      } else if (q >= 0) {
        const int q2 = chart.neighbor(id, a, -2);
        g[k](a) = q2 >= 0 ? (3 * values[k] - 4 * values[q] + values[q2]) / (2 * h) : (values[k] - values[q]) / h;
      }
    }
  }
  return g;
}

}  // namespace toricflow
