#include "toricflow/errors.hpp"
#include "toricflow/io.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace toricflow;

namespace {

std::shared_ptr<const DelzantPolytope> load(const char* name) {
  return std::make_shared<const DelzantPolytope>(read_polytope(std::string(TEST_DATA_DIR) + "/" + name + ".json"));
}

WeightData weight_file(const char* name) { return read_weight(std::string(TEST_DATA_DIR) + "/" + name + ".json"); }

double bump(std::span<const double> x) { return 0.02 * x[0] * x[0] * (1 - x[0]) * (1 - x[0]); }

}  // namespace

TEST(Weight, TrivialIsOne) {
  auto P = load("triangle");
  WeightModel w(*P, WeightData::trivial(2));
  EXPECT_TRUE(w.trivial());
  EXPECT_EQ(weight(w, std::vector<double>{0.2, 0.3}), 1.0);
}

TEST(Weight, BundleProfile) {
  auto P = load("interval");
  WeightModel w(*P, weight_file("weight_bundle_flat"));
  EXPECT_DOUBLE_EQ(weight(w, std::vector<double>{0.5}), 0.25);
  EXPECT_EQ(weight(w, std::vector<double>{0.0}), 0.0);
}

TEST(Weight, NegativeFactorRejected) {
  auto P = load("interval");
  auto d = weight_file("weight_bundle_flat");
  d.groups[1].c = Rational(1, 2);
  try {
    WeightModel w(*P, d);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NegativeAffineFactor);
  }
  auto e = WeightData::trivial(1);
  e.c_sigma = -1;
  EXPECT_THROW(WeightModel(*P, e), Error);
}

TEST(WeightedCurvature, ReducesToAbreu) {
  auto P = load("triangle");
  auto chart = make_grid(P, 1.0 / 16);
  auto u = perturbed(chart, [](std::span<const double> x) { return 0.05 * x[0] * x[0] * x[1]; });
  WeightModel w(*P, WeightData::trivial(2));
  auto a = abreu_scalar_curvature(u);
  auto b = weighted_scalar_curvature(u, w);
  ASSERT_EQ(a.nodes, b.nodes);
  for (std::size_t q = 0; q < a.values.size(); ++q) EXPECT_NEAR(a.values[q], b.values[q], 1e-12);
}

TEST(WeightedCurvature, ConstantShift) {
  auto P = load("triangle");
  auto chart = make_grid(P, 1.0 / 16);
  auto u = perturbed(chart, [](std::span<const double> x) { return 0.05 * x[0] * x[0] * x[1]; });
  auto d = WeightData::trivial(2);
  d.scal_sigma = 2;
  d.c_sigma = 2;
  auto a = abreu_scalar_curvature(u);
  auto b = weighted_scalar_curvature(u, WeightModel(*P, d));
  // constant factor 2 leaves the divergence term unchanged
  for (std::size_t q = 0; q < a.values.size(); ++q) EXPECT_NEAR(b.values[q], a.values[q] + 1.0, 1e-12);
}

TEST(WeightedCurvature, BundleOracle) {
  // p = z(1-z): R_g = 4(6z^2 - 6z + 1) / (z(z-1)) for the Guillemin potential.
  auto P = load("interval");
  auto chart = make_grid(P, 1.0 / 64);
  auto R = weighted_scalar_curvature(guillemin(chart), WeightModel(*P, weight_file("weight_bundle_flat")));
  for (std::size_t q = 0; q < R.nodes.size(); ++q) {
    const double z = chart->x(R.nodes[q])[0];
    EXPECT_NEAR(R.values[q], 4 * (6 * z * z - 6 * z + 1) / (z * (z - 1)), 1e-9);
    if (std::abs(z - 0.5) < 1e-12) EXPECT_NEAR(R.values[q], 8.0, 1e-10);
    if (std::abs(z - 0.25) < 1e-12) EXPECT_NEAR(R.values[q], 8.0 / 3, 1e-10);
  }
}

TEST(WeightedCurvature, BundleWithCurvatureConstantsIsConstant) {
  auto P = load("interval");
  auto chart = make_grid(P, 1.0 / 64);
  auto R = weighted_scalar_curvature(guillemin(chart), WeightModel(*P, weight_file("weight_bundle")));
  for (double v : R.values) EXPECT_NEAR(v, 24.0, 1e-9);
}

TEST(Projection, Examples) {
  auto P = load("interval");
  auto chart = make_grid(P, 1.0 / 32);
  WeightModel w(*P, WeightData::trivial(1));
  ScalarField c{chart, {}, {}, "c"}, z{chart, {}, {}, "z"};
  for (int k : chart->field_nodes()) {
    c.nodes.push_back(k);
    c.values.push_back(3.5);
    z.nodes.push_back(k);
    z.values.push_back(chart->x(k)[0]);
  }
  auto pc = extremal_projection(w, c);
  EXPECT_NEAR(pc.A[0], 0.0, 1e-12);
  EXPECT_NEAR(pc.B, -3.5, 1e-12);
  for (double v : pc.perp) EXPECT_NEAR(v, 0.0, 1e-12);
  auto pz = extremal_projection(w, z);
  for (double v : pz.perp) EXPECT_NEAR(v, 0.0, 1e-12);
}

TEST(Projection, OrthogonalAndIdempotent) {
  auto P = load("interval");
  auto chart = make_grid(P, 1.0 / 64);
  WeightModel w(*P, weight_file("weight_bundle_flat"));
  auto R = weighted_scalar_curvature(perturbed(chart, bump), w);
  auto pr = extremal_projection(w, R);
  for (double r : pr.residuals) EXPECT_LT(std::abs(r), 1e-10);
  ScalarField perp{chart, R.nodes, pr.perp, "perp"};
  auto again = extremal_projection(w, perp);
  EXPECT_NEAR(again.A[0], 0.0, 1e-10);
  EXPECT_NEAR(again.B, 0.0, 1e-10);
}

TEST(Projection, SingularMomentMatrix) {
  auto P = load("triangle");
  auto chart = make_grid(P, 1.0 / 16);
  // Nodes on one line leave the moment matrix rank deficient.
  std::vector<int> nodes;
  std::vector<double> R, wts;
  for (std::size_t k = 0; k < chart->size(); ++k)
    if (chart->x(static_cast<int>(k))[1] == 0.0) {
      nodes.push_back(static_cast<int>(k));
      R.push_back(1.0);
      wts.push_back(1.0);
    }
  try {
    project_affine(*chart, nodes, R, wts);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SingularMomentMatrix);
  }
}

TEST(WeightedFlow, ReducesToFlow) {
  auto P = load("triangle");
  auto chart = make_grid(P, 1.0 / 12);
  auto u = perturbed(chart, [](std::span<const double> x) { return 0.05 * x[0] * x[0] * x[1]; });
  FlowControls c;
  c.t_max = 2e-3;
  auto a = run(*P, u, extremal_affine(*P), c);
  auto b = weighted_flow(WeightModel(*P, WeightData::trivial(2)), u, c);
  EXPECT_TRUE(b.trace.weighted);
  ASSERT_EQ(a.trace.rows.size(), b.trace.rows.size());
  for (std::size_t i = 0; i < a.trace.rows.size(); ++i) {
    const auto &x = a.trace.rows[i], &y = b.trace.rows[i];
    EXPECT_NEAR(x.t, y.t, 1e-12);
    EXPECT_NEAR(x.calabi_energy, y.calabi_energy, 1e-8);
    EXPECT_NEAR(y.weighted_energy, y.calabi_energy, 1e-12);
    EXPECT_NEAR(x.mabuchi_rel, y.mabuchi_rel, 1e-8);
    EXPECT_NEAR(x.sup_residual, y.sup_residual, 1e-8);
    EXPECT_NEAR(x.max_f, y.max_f, 1e-8);
    EXPECT_NEAR(x.dist_to_target, y.dist_to_target, 1e-8);
    EXPECT_NEAR(y.B, -12.0, 1e-8);
  }
}

TEST(WeightedFlow, StationaryAtExtremalProfile) {
  auto P = load("interval");
  auto chart = make_grid(P, 1.0 / 64);
  auto r = weighted_flow(WeightModel(*P, weight_file("weight_bundle")), guillemin(chart), {});
  EXPECT_EQ(r.status, RunStatus::Converged);
  EXPECT_EQ(r.trace.rows.size(), 1u);
}

TEST(WeightedFlow, PerturbedProfileDecreasesEnergyAndDistance) {
  auto P = load("interval");
  auto chart = make_grid(P, 1.0 / 64);
  WeightModel w(*P, weight_file("weight_bundle"));
  auto u0 = perturbed(chart, bump);
  FlowControls c;
  std::vector<SymplecticPotential> states{u0};
  c.checkpoint_every = 1;
  c.on_checkpoint = [&](const FlowState& s, long) { states.push_back(s.u); };
  auto r = weighted_flow(w, u0, c);
  EXPECT_EQ(r.status, RunStatus::Converged);
  const auto& rows = r.trace.rows;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    EXPECT_LT(rows[i].weighted_energy, rows[i - 1].weighted_energy);
    EXPECT_LT(rows[i].orthogonality_residual, 1e-10);
  }
  for (std::size_t i = 1; i < states.size(); ++i)
    EXPECT_LE(weighted_distance(states[i], r.final_state.u, w),
              weighted_distance(states[i - 1], r.final_state.u, w) + 1e-10);
  // Weighted gradient identity on the accepted steps.
  int good = 0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const double rate = (rows[i].mabuchi_rel - rows[i - 1].mabuchi_rel) / rows[i].dt;
    const double E = 0.5 * (rows[i].weighted_energy + rows[i - 1].weighted_energy);
    if (std::abs(rate + E) < 0.05 * E) ++good;
  }
  EXPECT_GE(good, 0.9 * (rows.size() - 1));
}

TEST(WeightedFlow, NonAdmissibleWeight) {
  auto P = load("interval");
  auto chart = make_grid(P, 1.0 / 32);
  try {
    weighted_flow(WeightModel(*P, weight_file("weight_bundle_flat")), guillemin(chart), {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NonAdmissibleWeight);
  }
}

TEST(WeightedDistance, ReducesToDistance) {
  auto P = load("triangle");
  auto chart = make_grid(P, 1.0 / 16);
  auto u = perturbed(chart, [](std::span<const double> x) { return 0.05 * x[0] * x[1]; });
  auto G = guillemin(chart);
  EXPECT_NEAR(weighted_distance(u, G, WeightModel(*P, WeightData::trivial(2))), distance(u, G), 1e-14);
}

TEST(InteriorBound, ConstantPotential) {
  auto P = load("interval");
  auto chart = make_grid(P, 1.0 / 64);
  WeightModel w(*P, weight_file("weight_bundle_flat"));
  auto u = sampled_without_guillemin(chart, [](std::span<const double>) { return -0.7; });
  auto r = interior_bound_probe(u, w, 0.25);
  EXPECT_NEAR(r.weighted_l2, 0.49 / 6, 1e-14);
  EXPECT_DOUBLE_EQ(r.max_abs_u, 0.7);
  EXPECT_NEAR(r.max_abs_du, 0.0, 1e-12);
}

TEST(InteriorBound, GuilleminQuarter) {
  auto P = load("interval");
  auto chart = make_grid(P, 1.0 / 64);
  WeightModel w(*P, weight_file("weight_bundle_flat"));
  auto r = interior_bound_probe(guillemin(chart), w, 0.25);
  // |u| peaks at the midpoint, |Du| at the edge of the region.
  const double z = 0.25;
  EXPECT_NEAR(r.max_abs_u, std::log(2.0) / 2, 1e-12);
  EXPECT_NEAR(r.max_abs_du, 0.5 * std::log((1 - z) / z), 1e-10);
  EXPECT_GT(r.weighted_l2, 0.0);
  EXPECT_TRUE(std::isfinite(r.weighted_l2));
}

TEST(InteriorBound, EpsilonTooSmall) {
  auto P = load("interval");
  auto chart = make_grid(P, 1.0 / 16);
  try {
    interior_bound_probe(guillemin(chart), WeightModel(*P, WeightData::trivial(1)), 0.1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::PreconditionFailed);
  }
}
