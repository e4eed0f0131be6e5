#include "toricflow/errors.hpp"
#include "toricflow/flow.hpp"
#include "toricflow/io.hpp"
#include "toricflow/stability.hpp"

#include <gtest/gtest.h>

#include <chrono>
#include <cmath>
#include <random>

using namespace toricflow;

namespace {

std::shared_ptr<const DelzantPolytope> load(const char* name) {
  return std::make_shared<const DelzantPolytope>(read_polytope(std::string(TEST_DATA_DIR) + "/" + name + ".json"));
}

}  // namespace

struct ThetaCase {
  const char* name;
  int constant;
};

class Theta : public ::testing::TestWithParam<ThetaCase> {};

TEST_P(Theta, ExactConstantAndResiduals) {
  auto P = load(GetParam().name);
  const auto t0 = std::chrono::steady_clock::now();
  const RVec th = extremal_affine_exact(*P);
  EXPECT_LT(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(), 1.0);
  const int n = P->dim();
  EXPECT_EQ(th[n], GetParam().constant);
  for (int i = 0; i < n; ++i) EXPECT_EQ(th[i], 0);
  for (double r : extremal_residuals(*P, extremal_affine(*P))) EXPECT_LT(std::abs(r), 1e-12);
}

INSTANTIATE_TEST_SUITE_P(Polytopes, Theta,
                         ::testing::Values(ThetaCase{"interval", 4}, ThetaCase{"square", 8}, ThetaCase{"triangle", 12}));

TEST(Theta, NonConstantOnTrapezoid) {
  auto P = load("trapezoid");
  const auto th = extremal_affine(*P);
  EXPECT_GT(std::abs(th.gradient[0]) + std::abs(th.gradient[1]), 1e-6);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> d(-3, 3);
  for (int i = 0; i < 20; ++i) {
    AffineFunction a{{d(rng), d(rng)}, d(rng)};
    const double scale = 1 + std::abs(a.gradient[0]) + std::abs(a.gradient[1]) + std::abs(a.constant);
    EXPECT_LT(std::abs(l_functional(*P, th, a)), 1e-12 * scale);
  }
}

TEST(Theta, UnmodifiedUsesAverageCurvature) {
  EXPECT_NEAR(average_scalar_curvature(*load("triangle")).constant, 12.0, 1e-14);
  EXPECT_NEAR(average_scalar_curvature(*load("trapezoid")).constant, 2.0 * (1 + 3 + 2 + 1) / 2.5, 1e-12);
}

TEST(LFunctional, CreaseOnInterval) {
  auto P = load("interval");
  CreaseFunction f{{Rational(1)}, Rational(-1, 2)};
  EXPECT_EQ(l_functional_exact(*P, {Rational(0), Rational(4)}, f), Rational(1, 2));
  EXPECT_NEAR(l_functional(*P, extremal_affine(*P), f), 0.5, 1e-14);
}

TEST(LFunctional, GuilleminOnInterval) {
  auto P = load("interval");
  auto G = guillemin(make_grid(P, 1.0 / 256));
  EXPECT_NEAR(l_functional(*P, extremal_affine(*P), G), 1.0, 1e-3);
}

TEST(LFunctional, Linearity) {
  auto P = load("triangle");
  const auto th = extremal_affine(*P);
  CreaseFunction f{{Rational(1), Rational(2)}, Rational(-1, 2)};
  CreaseFunction g{{Rational(-1), Rational(1)}, Rational(1, 5)};
  AffineFunction a{{0.3, -0.7}, 0.2};
  // 2f + 3g - a evaluated through the sampled form on a fine grid.
  auto chart = make_grid(P, 1.0 / 64);
  auto combo = sampled_without_guillemin(chart, [&](std::span<const double> x) { return 2 * f(x) + 3 * g(x) - a(x); });
  auto ff = sampled_without_guillemin(chart, [&](std::span<const double> x) { return f(x); });
  auto gg = sampled_without_guillemin(chart, [&](std::span<const double> x) { return g(x); });
  auto aa = sampled_without_guillemin(chart, [&](std::span<const double> x) { return a(x); });
  const double lhs = l_functional(*P, th, combo);
  const double rhs = 2 * l_functional(*P, th, ff) + 3 * l_functional(*P, th, gg) - l_functional(*P, th, aa);
  EXPECT_NEAR(lhs, rhs, 1e-10);
  const double exact = 2 * l_functional(*P, th, f) + 3 * l_functional(*P, th, g);
  EXPECT_NEAR(to_double(l_functional_exact(*P, extremal_affine_exact(*P), f)) * 2 +
                  to_double(l_functional_exact(*P, extremal_affine_exact(*P), g)) * 3,
              exact, 1e-10);
}

TEST(Crease, MissingTheInteriorIsExcluded) {
  auto P = load("interval");
  EXPECT_FALSE(crease_cuts_interior(*P, CreaseFunction{{Rational(1)}, Rational(-2)}));
  EXPECT_TRUE(crease_cuts_interior(*P, CreaseFunction{{Rational(1)}, Rational(-1, 3)}));
  const auto rep = pl_stability_scan(*P, extremal_affine(*P), 4);
  for (const auto& r : rep.rows) EXPECT_TRUE(crease_cuts_interior(*P, r.crease));
}

TEST(Scan, IntervalPositiveWithMidpointMinimizer) {
  auto P = load("interval");
  const auto rep = pl_stability_scan(*P, extremal_affine(*P), 4);
  EXPECT_GT(rep.lambda_estimate, 0.0);
  const double crease = -to_double(rep.worst.b) / to_double(rep.worst.a[0]);
  EXPECT_NEAR(crease, 0.5, 0.15);
  double mn = INFINITY;
  for (const auto& r : rep.rows) {
    mn = std::min(mn, r.ratio);
    EXPECT_GT(r.L, 0.0);
  }
  EXPECT_EQ(mn, rep.lambda_estimate);
}

TEST(Scan, TrianglePositive) {
  auto P = load("triangle");
  const auto rep = pl_stability_scan(*P, extremal_affine(*P), 3);
  EXPECT_GT(rep.lambda_estimate, 0.0);
  EXPECT_FALSE(rep.rows.empty());
}

TEST(Scan, RowsSortedAndDeterministic) {
  auto P = load("square");
  const auto a = pl_stability_scan(*P, extremal_affine(*P), 3);
  const auto b = pl_stability_scan(*P, extremal_affine(*P), 3);
  ASSERT_EQ(a.rows.size(), b.rows.size());
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    EXPECT_EQ(a.rows[i].crease.a, b.rows[i].crease.a);
    EXPECT_EQ(a.rows[i].ratio, b.rows[i].ratio);
  }
}

TEST(Scan, EmptyFamily) {
  auto P = load("interval");
  try {
    pl_stability_scan(*P, extremal_affine(*P), 2, Rational(3, 4));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyFamily);
  }
}

TEST(Mabuchi, RelativeExamples) {
  auto P = load("triangle");
  auto chart = make_grid(P, 1.0 / 16);
  const auto th = extremal_affine(*P);
  auto u = perturbed(chart, [](std::span<const double> x) { return 0.05 * x[0] * x[1] * x[1]; });
  auto G = guillemin(chart);
  EXPECT_NEAR(mabuchi_energy_rel(u, th, u), 0.0, 1e-14);
  EXPECT_NEAR(mabuchi_energy_rel(u.plus_affine(AffineFunction{{1.0, 2.0}, -1.0}), th, u), 0.0, 1e-12);
  EXPECT_NEAR(mabuchi_energy_rel(u, th, G) + mabuchi_energy_rel(G, th, u), 0.0, 1e-10);
  EXPECT_GT(mabuchi_energy_rel(u, th, G), 0.0);
}

TEST(Mabuchi, DirectionalDerivative) {
  auto P = load("interval");
  auto chart = make_grid(P, 1.0 / 64);
  const auto th = extremal_affine(*P);
  auto u = perturbed(chart, [](std::span<const double> x) { return 0.05 * x[0] * x[0] * (1 - x[0]) * (1 - x[0]); });
  // The nodal drift theta - R is the exact gradient of the discrete functional.
  const auto dr = drift(u, th);
  auto v = [](double x) { return x > 0.25 && x < 0.75 ? std::pow(std::sin(2 * M_PI * (x - 0.25)), 4) : 0.0; };
  double expected = 0;
  for (std::size_t k = 0; k < chart->size(); ++k)
    expected -= chart->node(static_cast<int>(k)).weight * dr[k] * v(chart->x(static_cast<int>(k))[0]);
  const double s = 1e-5;
  auto shifted = [&](double sgn) {
    auto f = u.f();
    for (std::size_t k = 0; k < f.size(); ++k) f[k] += sgn * s * v(chart->x(static_cast<int>(k))[0]);
    return u.with_f(f, PotentialTag::Perturbed);
  };
  auto central = [&](double scale) {
    return (mabuchi_energy_rel(shifted(scale), th, u) - mabuchi_energy_rel(shifted(-scale), th, u)) / (2 * scale * s);
  };
  // Richardson-corrected central difference, error O(s^4).
  const double fd = (4 * central(1) - central(2)) / 3;
  EXPECT_NEAR(fd, expected, 1e-4 * std::abs(expected));
}
