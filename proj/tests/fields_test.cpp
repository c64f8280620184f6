#include <gtest/gtest.h>

#include <cmath>

#include "pklab/errors.hpp"
#include "pklab/fields.hpp"

using namespace pklab;

namespace {

// Euclidean metric on R^4
TensorField euclid() { return constant_tensor(0, 2, Mat4::Identity(), "delta"); }

VectorField rotation12() {
  VectorField X;
  X.label = "-x2 d1 + x1 d2";
  X.fn = [](Coords x) {
    JetVec v(4, Jet::constant(0.0, 4, x[0].order()));
    v[0] = -x[1];
    v[1] = x[0];
    return v;
  };
  return X;
}

}  // namespace

TEST(Fields, BoxParseAndContains) {
  Box b = Box::parse("0:1,-1:1,2:3,0.5:0.75");
  EXPECT_DOUBLE_EQ(b.lo[2], 2.0);
  EXPECT_DOUBLE_EQ(b.hi[3], 0.75);
  EXPECT_TRUE(b.contains(b.center()));
  EXPECT_FALSE(b.contains({2, 0, 2.5, 0.6}));
  EXPECT_THROW(Box::parse("0:1,0:1,0:1"), ConfigError);
  EXPECT_THROW(Box::parse("1:0,0:1,0:1,0:1"), ConfigError);
  EXPECT_THROW(Box::parse("a:b,0:1,0:1,0:1"), ConfigError);
}

TEST(Fields, HaltonDeterministicAndInside) {
  Box b = Box::parse("0:1,2:3,-1:0,5:6");
  auto p = sample_points(b, 50, 7), q = sample_points(b, 50, 7), r = sample_points(b, 50, 8);
  ASSERT_EQ(p.size(), 50u);
  EXPECT_EQ(p, q);
  EXPECT_NE(p, r);
  for (const auto& x : p) EXPECT_TRUE(b.contains(x));
}

TEST(Fields, InverseOfKnownMatrix) {
  Mat4 g;
  g << 0, 0, 1, 0, 0, 0, 0, 1, 1, 0, 0, 0, 0, 1, 0, 0;
  EXPECT_TRUE(metric_inverse(g).isApprox(g));
  Mat4 s = Mat4::Zero();
  EXPECT_THROW(metric_inverse(s), DegenerateMetricError);
}

TEST(Fields, JetDeterminantMatchesEigen) {
  auto x = seed_point({0.3, -0.7, 1.1, 0.4}, 2);
  JetVec e;
  for (int i = 0; i < 16; ++i) e.push_back(x[i % 4] * (i + 1.0) + static_cast<double>(i == i / 4 * 5));
  JetMat m(4, e);
  EXPECT_NEAR(det(m).value(), m.value4().determinant(), 1e-10);
  JetMat mi = inverse(m);
  EXPECT_TRUE((mi.value4() * m.value4()).isApprox(Mat4::Identity(), 1e-10));
}

TEST(Fields, GradientOfCoordinate) {
  Vec4 gr = gradient(euclid(), coordinate_function(2), {1, 2, 3, 4});
  EXPECT_TRUE(gr.isApprox(Vec4(0, 0, 1, 0)));
}

TEST(Fields, RotationIsKilling) {
  Mat4 L = lie_derivative_metric(euclid(), rotation12(), {0.3, 0.2, -1, 2});
  EXPECT_LT(max_abs(L), 1e-14);
}

TEST(Fields, DilationScalesMetric) {
  VectorField X;
  X.fn = [](Coords x) { return JetVec(x.begin(), x.end()); };
  Mat4 L = lie_derivative_metric(euclid(), X, {0.3, 0.2, -1, 2});
  EXPECT_TRUE(L.isApprox(2 * Mat4::Identity()));
}

TEST(Fields, BracketOfCoordinateFields) {
  // [d1, x1 d2] = d2
  VectorField d1 = constant_vector(Vec4(1, 0, 0, 0));
  VectorField Y;
  Y.fn = [](Coords x) {
    JetVec v(4, Jet::constant(0.0, 4, x[0].order()));
    v[1] = x[0];
    return v;
  };
  EXPECT_TRUE(lie_bracket(d1, Y, {0.5, 0.5, 0.5, 0.5}).isApprox(Vec4(0, 1, 0, 0)));
}

TEST(Fields, LieDerivativeOfEndoAlongRotation) {
  // rotation generator commutes with the rotation-invariant endo diag(1,1,2,2)
  Mat4 D = Vec4(1, 1, 2, 2).asDiagonal();
  Mat4 L = lie_derivative_endo(constant_tensor(1, 1, D), rotation12(), {0.1, 0.9, 0.2, 0.3});
  EXPECT_LT(max_abs(L), 1e-14);
  // diag(1,2,1,1) is not invariant
  Mat4 E = Vec4(1, 2, 1, 1).asDiagonal();
  Mat4 M = lie_derivative_endo(constant_tensor(1, 1, E), rotation12(), {0.1, 0.9, 0.2, 0.3});
  EXPECT_GT(max_abs(M), 0.5);
}

TEST(Fields, ClosedAndNonClosedForms) {
  Mat4 w = Mat4::Zero();
  w(0, 2) = 1;
  w(2, 0) = -1;
  auto d = exterior_derivative_2form(constant_tensor(0, 2, w), {0, 0, 0, 0});
  EXPECT_LT(max_abs(d), 1e-15);
  // x4 dx1 ^ dx2 has d = dx4 ^ dx1 ^ dx2
  TensorField v{0, 2,
                [](Coords x) {
                  JetVec e(16, Jet::constant(0.0, 4, x[0].order()));
                  e[1] = x[3];
                  e[4] = -x[3];
                  return e;
                },
                0, "x4 dx1^dx2"};
  auto dv = exterior_derivative_2form(v, {1, 1, 1, 1});
  EXPECT_NEAR(std::abs(dv[3 * 16 + 0 * 4 + 1]), 1.0, 1e-14);
  TensorField bad = constant_tensor(0, 2, Mat4::Identity());
  EXPECT_THROW(exterior_derivative_2form(bad, {0, 0, 0, 0}), MalformedTensorError);
}

TEST(Fields, NijenhuisVanishesForConstantAndDetectsTwist) {
  Mat4 T = Vec4(1, 1, -1, -1).asDiagonal();
  auto N = nijenhuis(constant_tensor(1, 1, T), {0.2, 0.1, 0.3, 0.4});
  EXPECT_LT(max_abs(N), 1e-15);
  // S = x3 d1 (x) dx2 + d3 (x) dx1: by hand N^1_12 = 1, N^1_21 = -1
  TensorField S{1, 1,
                [](Coords x) {
                  JetVec e(16, Jet::constant(0.0, 4, x[0].order()));
                  e[1] = x[2];
                  e[8] = Jet::constant(1.0, 4, x[0].order());
                  return e;
                },
                0, "S"};
  auto M = nijenhuis(S, {0.2, 0.7, 0.3, 0.4});
  EXPECT_NEAR(M[0 * 16 + 0 * 4 + 1], 1.0, 1e-14);
  EXPECT_NEAR(M[0 * 16 + 1 * 4 + 0], -1.0, 1e-14);
}

TEST(Fields, NormalizedResidual) {
  EXPECT_DOUBLE_EQ(normalized(2.0, 0.5), 2.0);
  EXPECT_DOUBLE_EQ(normalized(2.0, 4.0), 0.5);
}
