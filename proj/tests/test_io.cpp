#include "toricflow/errors.hpp"
#include "toricflow/io.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace toricflow;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::InvalidInput;
}

std::string temp_file(const std::string& name, const std::string& body) {
  const auto path = (std::filesystem::temp_directory_path() / name).string();
  std::ofstream(path) << body;
  return path;
}

}  // namespace

TEST(PolytopeFile, RationalOffsets) {
  const auto spec = parse_polytope_spec(
      R"({"name": "i", "dim": 1, "facets": [{"normal": [1], "offset": "1/3"}, {"normal": [-1], "offset": 0.5}]})");
  EXPECT_EQ(spec.facets[0].offset, Rational(1, 3));
  EXPECT_EQ(spec.facets[1].offset, Rational(1, 2));
}

TEST(PolytopeFile, Rejections) {
  EXPECT_EQ(code_of([] { parse_polytope_spec(R"({"dim": 1, "facets": [{"normal": [1.5], "offset": 0}]})"); }),
            ErrorCode::ParseError);
  EXPECT_EQ(code_of([] { parse_polytope_spec(R"({"dim": 1})"); }), ErrorCode::ParseError);
  EXPECT_EQ(code_of([] { parse_polytope_spec("{not json"); }), ErrorCode::ParseError);
  EXPECT_EQ(code_of([] { parse_polytope_spec(R"({"dim": 1, "facets": [], "colour": 2})"); }), ErrorCode::ParseError);
}

TEST(WeightFile, Parses) {
  const auto w = read_weight(std::string(TEST_DATA_DIR) + "/weight_bundle.json");
  ASSERT_EQ(w.groups.size(), 2u);
  EXPECT_EQ(w.groups[1].p, std::vector<long>{-1});
  EXPECT_EQ(w.groups[1].c, 1);
  EXPECT_EQ(w.groups[1].d, 1);
  EXPECT_EQ(w.scal_j, (std::vector<double>{4, 4}));
  EXPECT_EQ(code_of([] { parse_weight(R"({"p_sigma": [0], "c_sigma": 1, "groups": [{"p": [1], "c": 0, "d": -1}]})"); }),
            ErrorCode::ParseError);
}

TEST(Config, UnknownKeysRejected) {
  const auto good = temp_file("toricflow_cfg_good.json", R"({"h": "1/8", "tol": 0.01})");
  const auto cfg = read_config(good, {"h", "tol"});
  EXPECT_EQ(cfg.at("h"), "1/8");
  EXPECT_EQ(cfg.at("tol"), "0.01");
  const auto bad = temp_file("toricflow_cfg_bad.json", R"({"h": "1/8", "speed": 3})");
  EXPECT_EQ(code_of([&] { read_config(bad, {"h", "tol"}); }), ErrorCode::InvalidInput);
  std::filesystem::remove(good);
  std::filesystem::remove(bad);
}

TEST(Trace, ColumnOrder) {
  FlowTrace t;
  t.rows.resize(1);
  std::ostringstream a;
  write_trace(a, t, 2);
  EXPECT_EQ(a.str().substr(0, a.str().find('\n')),
            "t,dt,calabi_energy,mabuchi_rel,sup_residual,max_rm,dist_to_start,dist_to_target,min_hessian_eig,max_f");
  t.weighted = true;
  t.rows[0].A = {1, 2};
  std::ostringstream b;
  write_trace(b, t, 2);
  EXPECT_NE(b.str().find("max_f,weighted_energy,A1,A2,B\n"), std::string::npos);
}

TEST(Checkpoint, HeaderAndBitExactValues) {
  auto P = std::make_shared<const DelzantPolytope>(read_polytope(std::string(TEST_DATA_DIR) + "/square.json"));
  auto chart = make_grid(P, 1.0 / 8);
  auto u = perturbed(chart, [](std::span<const double> x) { return std::exp(x[0]) / 3 + x[1] * 1e-17; });
  std::ostringstream out;
  write_checkpoint(out, u, 0.125);
  EXPECT_EQ(out.str().substr(0, out.str().find('\n')), "# polytope=square h=0.125 t=0.125");
  const auto path = temp_file("toricflow_ckpt.txt", out.str());
  const auto cp = read_checkpoint(path);
  EXPECT_EQ(cp.t, 0.125);
  auto v = load_potential(chart, cp);
  EXPECT_EQ(v.f(), u.f());
  auto other = make_grid(P, 1.0 / 4);
  EXPECT_EQ(code_of([&] { load_potential(other, cp); }), ErrorCode::ChartMismatch);
  std::filesystem::remove(path);
}

TEST(Scan, CsvWithFooter) {
  auto P = read_polytope(std::string(TEST_DATA_DIR) + "/interval.json");
  const auto rep = pl_stability_scan(P, extremal_affine(P), 2);
  std::ostringstream out;
  write_scan(out, rep, 1);
  const auto s = out.str();
  EXPECT_EQ(s.substr(0, s.find('\n')), "a1,b,L,denom,ratio");
  EXPECT_NE(s.find("# lambda_estimate="), std::string::npos);
  EXPECT_NE(s.find("# minimizer a=("), std::string::npos);
}

TEST(ErrorClasses, ValidationVersusNumerical) {
  EXPECT_TRUE(is_validation_error(ErrorCode::ParseError));
  EXPECT_TRUE(is_validation_error(ErrorCode::NonUnimodularVertex));
  EXPECT_FALSE(is_validation_error(ErrorCode::SingularHessian));
  EXPECT_FALSE(is_validation_error(ErrorCode::StepUnderflow));
  EXPECT_STREQ(error_name(ErrorCode::EmptyFamily), "EmptyFamily");
}
