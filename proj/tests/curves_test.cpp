#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "pklab/catalog.hpp"
#include "pklab/curves.hpp"
#include "pklab/errors.hpp"
#include "pklab/pcproj.hpp"

using namespace pklab;

namespace {

struct Liouville {
  NormalForm nf = preset(Family::RealLiouville);
  ParaKahlerTriple t = build(nf);
  TensorField gh = companion_metric(t.g, *t.A, nf.box);
  Point p0 = nf.box.center();
  Vec4 v0{0.1, -0.075, 0.15, 0.125};  // box widths are 1
};

}  // namespace

TEST(Curves, FlatGeodesicIsStraight) {
  Box b = Box::parse("-1:1,-1:1,-1:1,-1:1");
  Point p{0.1, -0.2, 0.3, 0.0};
  Vec4 v(0.3, 0.1, -0.2, 0.4);
  Curve c = integrate_geodesic(flat_neutral_metric(), b, p, v, 1e-3, 1000);
  ASSERT_EQ(c.samples.size(), 1001u);
  EXPECT_FALSE(c.exited_box);
  for (const auto& s : c.samples)
    for (int i = 0; i < 4; ++i) {
      EXPECT_NEAR(s.x[i], p[i] + s.t * v[i], 1e-12);
      EXPECT_NEAR(s.v[i], v[i], 1e-12);
    }
}

TEST(Curves, ConservedQuantities) {
  Liouville L;
  Curve c = integrate_geodesic(L.t.g, L.nf.box, L.p0, L.v0, 1e-3, 1000);
  ASSERT_FALSE(c.exited_box);
  EXPECT_LT(energy_drift(L.t.g, c), 1e-8);
  auto kf = canonical_killing_fields(L.t, *L.t.A);
  EXPECT_LT(momentum_drift(L.t.g, kf.TV[0], c), 1e-8);
  EXPECT_LT(momentum_drift(L.t.g, kf.TV[1], c), 1e-8);
  // V_1 is not Killing, so its momentum moves
  EXPECT_GT(momentum_drift(L.t.g, kf.V[0], c), 1e-4);
}

TEST(Curves, GeodesicsAreTPlanar) {
  Liouville L;
  Curve c = integrate_geodesic(L.t.g, L.nf.box, L.p0, L.v0, 1e-3, 1000);
  EXPECT_LT(t_planarity_residual(L.t.g, L.t.T, c), 1e-10);
  // acceleration itself is (numerically) zero for the metric that generated the curve
  for (const auto& s : c.samples) EXPECT_LT(s.acc_cov.norm(), 1e-9);
}

TEST(Curves, CompanionGeodesicsAreTPlanar) {
  Liouville L;
  Curve c = integrate_geodesic(L.gh, L.nf.box, L.p0, L.v0, 1e-3, 1000);
  ASSERT_FALSE(c.exited_box);
  EXPECT_LT(energy_drift(L.gh, c), 1e-8);
  EXPECT_LT(t_planarity_residual(L.t.g, L.t.T, c), 1e-6);
  // but they are not g-geodesics
  double acc = 0.0;
  for (const auto& s : c.samples) acc = std::max(acc, s.acc_cov.norm());
  EXPECT_GT(acc, 1e-3);
}

TEST(Curves, UnrelatedMetricIsNotTPlanar) {
  Liouville L;
  Curve c = integrate_geodesic(flat_neutral_metric(), L.nf.box, L.p0, L.v0, 1e-3, 1000);
  EXPECT_GT(t_planarity_residual(L.t.g, L.t.T, c), 1e-3);
}

TEST(Curves, FourthOrderConvergence) {
  Liouville L;
  auto cv = planarity_convergence(L.gh, L.t.g, L.t.T, L.nf.box, L.p0, L.v0 * 2.0, {4e-3, 2e-3, 1e-3}, 0.4);
  ASSERT_EQ(cv.order.size(), 2u);
  for (double o : cv.order) {
    EXPECT_GT(o, 3.5);
    EXPECT_LT(o, 4.5);
  }
}

TEST(Curves, ReparameterizationKeepsPlanarity) {
  Liouville L;
  // t = s + 0.3 s^2: x'' = -Gamma(x', x') + (t''/t') x'
  Forcing rep = [](double s, const Point&, const Vec4& v) { return Vec4(0.6 / (1.0 + 0.6 * s) * v); };
  Curve c = integrate_forced(L.gh, L.nf.box, L.p0, L.v0, 1e-3, 600, rep);
  ASSERT_FALSE(c.exited_box);
  EXPECT_LT(t_planarity_residual(L.t.g, L.t.T, c), 1e-6);
  // a T v term keeps the curve T-planar too
  Forcing tv = [T = L.t.T](double s, const Point& x, const Vec4& v) { return Vec4(std::sin(3 * s) * (eval_matrix(T, x) * v)); };
  Curve d = integrate_forced(L.t.g, L.nf.box, L.p0, L.v0, 1e-3, 600, tv);
  EXPECT_LT(t_planarity_residual(L.t.g, L.t.T, d), 1e-6);
  // a fixed direction does not
  Forcing push = [](double, const Point&, const Vec4&) { return Vec4(0.0, 0.0, 0.0, 0.5); };
  Curve e = integrate_forced(L.t.g, L.nf.box, L.p0, L.v0, 1e-3, 600, push);
  EXPECT_GT(t_planarity_residual(L.t.g, L.t.T, e), 1e-3);
}

TEST(Curves, StopsAtBoxExit) {
  Liouville L;
  Curve c = integrate_geodesic(L.t.g, L.nf.box, L.p0, Vec4(3.0, 0.0, 0.0, 0.0), 1e-3, 1000);
  EXPECT_TRUE(c.exited_box);
  EXPECT_LT(c.samples.size(), 1001u);
  for (const auto& s : c.samples) EXPECT_TRUE(L.nf.box.contains(s.x));
  EXPECT_THROW(integrate_geodesic(L.t.g, L.nf.box, {0, 0, 0, 0}, L.v0, 1e-3, 10), DomainError);
}

TEST(Curves, Errors) {
  Liouville L;
  Curve still = integrate_geodesic(L.t.g, L.nf.box, L.p0, Vec4::Zero(), 1e-3, 20);
  EXPECT_THROW(t_planarity_residual(L.t.g, L.t.T, still), DomainError);
  Curve tiny = integrate_geodesic(L.t.g, L.nf.box, L.p0, L.v0, 1e-3, 3);
  EXPECT_THROW(t_planarity_residual(L.t.g, L.t.T, tiny), DomainError);
  // g = 2 x1 dx1 dx3 + 2 dx2 dx4 degenerates at x1 = 0
  TensorField deg{0, 2,
                  [](Coords x) {
                    JetVec e(16, Jet::constant(0.0, 4, x[0].order()));
                    e[2] = e[8] = x[0];
                    e[7] = e[13] = Jet::constant(1.0, 4, x[0].order());
                    return e;
                  },
                  0, "degenerate"};
  Box b = Box::parse("-1:1,-1:1,-1:1,-1:1");
  EXPECT_THROW(integrate_geodesic(deg, b, {0, 0, 0, 0}, L.v0, 1e-3, 10), DegenerateMetricError);
}

TEST(Curves, CsvExport) {
  Liouville L;
  Curve c = integrate_geodesic(L.gh, L.nf.box, L.p0, L.v0, 1e-3, 50);
  t_planarity_residual(L.t.g, L.t.T, c);
  std::ostringstream os;
  write_csv(os, c);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line, "t,x1,x2,x3,x4,v1,v2,v3,v4,residual");
  int rows = 0;
  while (std::getline(is, line)) {
    ++rows;
    EXPECT_EQ(std::count(line.begin(), line.end(), ','), 9);
  }
  EXPECT_EQ(rows, 51);
}
