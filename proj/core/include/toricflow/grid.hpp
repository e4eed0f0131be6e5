#pragma once

#include "toricflow/guillemin.hpp"
#include "toricflow/polytope.hpp"

#include <array>
#include <memory>
#include <span>
#include <vector>

namespace toricflow {

enum class NodeKind { Interior, BoundaryLayer };

struct GridNode {
  std::array<int, 3> index{};
  std::array<double, 3> x{};
  double depth = 0;            // min_i l_i(x)
  double euclidean_depth = 0;  // min_i l_i(x) / |n_i|
  NodeKind kind = NodeKind::BoundaryLayer;
  double weight = 0;  // Lebesgue measure of the dual cell intersected with P
};

// Contribution of node value f_node to the second-difference matrix at a
// stencil center: D^2 f = sum A * f_node.
struct StencilPoint {
  int node;
  Mat A;
};

enum class MixedStencil { Cross, Diagonal, AntiDiagonal };

// Guillemin inverse-Hessian data at Hessian-available nodes, flattened.
struct GuilleminCache {
  std::vector<Mat> H;
  std::vector<Mat> W;
  std::vector<std::array<Mat, 3>> dW;
  std::vector<std::array<std::array<Mat, 3>, 3>> d2W;
  std::vector<double> R;  // at every node
  std::shared_ptr<const GuilleminInverse> inverse;
};

class GridChart {
 public:
  const DelzantPolytope& polytope() const { return *polytope_; }
  const std::shared_ptr<const DelzantPolytope>& polytope_ptr() const { return polytope_; }
  int dim() const { return dim_; }
  double spacing() const { return h_; }
  const Rational& spacing_exact() const { return h_exact_; }
  // Nodes sit at h * index (the origin is the lattice origin).
  std::span<const double> origin() const { return {origin_.data(), static_cast<std::size_t>(dim_)}; }

  std::size_t size() const { return nodes_.size(); }
  const std::vector<GridNode>& nodes() const { return nodes_; }
  const GridNode& node(int k) const { return nodes_[k]; }
  std::span<const double> x(int k) const { return {nodes_[k].x.data(), static_cast<std::size_t>(dim_)}; }
  // Node id for an integer index, -1 when outside closed P.
  int find(const std::array<int, 3>& index) const;
  int neighbor(int k, int axis, int step) const;
  double total_weight() const { return total_weight_; }
  std::vector<double> weights() const;

  // Nodes whose full second-difference stencil lies in closed P and depth > 0.
  const std::vector<int>& hessian_nodes() const { return hessian_nodes_; }
  int hessian_slot(int k) const { return hessian_slot_[k]; }
  const std::vector<StencilPoint>& stencil(int slot) const { return stencils_[slot]; }
  // Nodes of depth >= 2h whose stencil points are all Hessian nodes.
  const std::vector<int>& field_nodes() const { return field_nodes_; }
  bool is_field_node(int k) const { return is_field_node_[k]; }
  MixedStencil mixed_stencil(int a, int b) const { return mixed_[a][b]; }

  const GuilleminCache& guillemin() const { return guillemin_; }

 private:
  friend std::shared_ptr<const GridChart> make_grid(std::shared_ptr<const DelzantPolytope> P, double h);
  GridChart() = default;

  std::shared_ptr<const DelzantPolytope> polytope_;
  int dim_ = 0;
  double h_ = 0;
  Rational h_exact_;
  std::array<double, 3> origin_{};
  std::array<int, 3> lo_{};
  std::array<int, 3> extent_{};
  std::vector<int> box_;
  std::vector<GridNode> nodes_;
  double total_weight_ = 0;
  std::vector<int> hessian_nodes_;
  std::vector<int> hessian_slot_;
  std::vector<std::vector<StencilPoint>> stencils_;
  std::vector<int> field_nodes_;
  std::vector<bool> is_field_node_;
  std::array<std::array<MixedStencil, 3>, 3> mixed_{};
  GuilleminCache guillemin_;
};

using ChartPtr = std::shared_ptr<const GridChart>;

ChartPtr make_grid(std::shared_ptr<const DelzantPolytope> P, double h);
ChartPtr make_grid(const DelzantPolytope& P, double h);

// Multilinear interpolation of nodal values; cells cut by the boundary fall
// back to an affine least-squares fit through the available corners.
double interpolate(const GridChart& chart, const std::vector<double>& values, std::span<const double> x);

// Per-node gradient by centered differences (one-sided second order where a
// neighbor is missing).
std::vector<Vec> nodal_gradient(const GridChart& chart, const std::vector<double>& values);

// Exact Lebesgue measure of the dual cell of node k intersected with P,
// and the exact integral of a polynomial over it.
Rational cell_measure(const GridChart& chart, int k, const Polynomial& density);

}  // namespace toricflow
