#include <gtest/gtest.h>

#include <cmath>

#include "pklab/catalog.hpp"
#include "pklab/curvature.hpp"
#include "pklab/errors.hpp"

using namespace pklab;

TEST(Catalog, FamilyNamesRoundTrip) {
  for (Family f : all_families()) EXPECT_EQ(parse_family(family_name(f)), f);
  EXPECT_THROW(parse_family("liouville"), ConfigError);
}

TEST(Catalog, UnknownPresetAndParameter) {
  EXPECT_THROW(preset(Family::RealLiouville, "nope"), ConfigError);
  auto nf = preset(Family::RealLiouville);
  EXPECT_THROW(set_param(nf, "mu", "x1"), ConfigError);
  EXPECT_THROW(set_param(nf, "rho", "x2"), ConfigError);  // rho depends on x1 only
  EXPECT_THROW(set_param(nf, "eps", "x1"), ConfigError);
  EXPECT_NO_THROW(set_param(nf, "rho", "x1^2 + 1"));
}

TEST(Catalog, ConstraintViolationsAreReported) {
  auto nf = preset(Family::RealLiouville);
  set_param(nf, "rho", "x1 - 2.5");  // vanishes inside x1 in (2,3)
  EXPECT_THROW(build(nf), ConstraintError);
  nf = preset(Family::RealLiouville);
  set_param(nf, "sigma", "x2 + 1.5");  // crosses rho
  EXPECT_THROW(build(nf), ConstraintError);
  nf = preset(Family::RealLiouville);
  set_param(nf, "eps", "2");
  EXPECT_THROW(build(nf), ConstraintError);
}

TEST(Catalog, ComplexNeedsHolomorphicProfile) {
  auto nf = preset(Family::ComplexLiouville);
  set_param(nf, "R", "x1^2");
  EXPECT_THROW(build(nf), ConstraintError);
}

TEST(Catalog, LogOutsideDomainIsAConstraintError) {
  auto nf = preset(Family::RealLiouville);
  set_param(nf, "rho", "log(x1 - 2.5)");
  EXPECT_THROW(build(nf), ConstraintError);
}

TEST(Catalog, DimD1RejectsWrongDependence) {
  auto nf = preset(Family::DimD1);
  EXPECT_THROW(set_param(nf, "F", "x3*phi"), ConfigError);
  nf = preset(Family::DimD1);
  set_param(nf, "F", "x2");  // F_x4 = 0
  EXPECT_THROW(build(nf), ConstraintError);
}

TEST(Catalog, RealLiouvilleMetricValues) {
  auto t = build(preset(Family::RealLiouville));
  Point p{2.5, 1.0, 0, 0};
  Mat4 g = eval_matrix(t.g, p);
  double d = 1.5;
  EXPECT_NEAR(g(0, 0), d, 1e-14);
  EXPECT_NEAR(g(1, 1), d, 1e-14);
  EXPECT_NEAR(g(2, 2), -2 / d, 1e-14);
  EXPECT_NEAR(g(2, 3), -(1.0 + 2.5) / d, 1e-14);
  EXPECT_NEAR(g(3, 3), -(1.0 + 6.25) / d, 1e-14);
  Mat4 A = eval_matrix(*t.A, p);
  EXPECT_NEAR(A.trace(), 2 * (2.5 + 1.0), 1e-14);
  // A is g-symmetric
  EXPECT_LT(max_abs(Mat4(g * A - (g * A).transpose())), 1e-13);
}

TEST(Catalog, ComplexLiouvilleEigenvalues) {
  auto t = build(preset(Family::ComplexLiouville, "z-squared"));
  Point p{1.1, 0.7, 0.1, -0.2};
  Mat4 A = eval_matrix(*t.A, p);
  double R = 1.1 * 1.1 - 0.49, I = 2 * 1.1 * 0.7;
  Eigen::ComplexEigenSolver<Mat4> es(A);
  int found = 0;
  for (int i = 0; i < 4; ++i)
    if (std::abs(es.eigenvalues()[i] - std::complex<double>(R, I)) < 1e-9) ++found;
  EXPECT_EQ(found, 2);
}

TEST(Catalog, EinsteinPresetsSatisfyTheirSystems) {
  struct Case {
    Family f;
    const char* name;
  };
  for (Case c : {Case{Family::RealLiouville, "einstein-lambda1"}, Case{Family::RealLiouville, "companion-einstein"},
                 Case{Family::ComplexLiouville, "einstein-flat"}, Case{Family::ComplexLiouville, "einstein-lambda1"},
                 Case{Family::DimD2First, "einstein"}}) {
    auto nf = preset(c.f, c.name);
    for (const auto& p : sample_points(nf.box, 20, 1))
      EXPECT_LT(einstein_system_residual(nf, p), 1e-10) << family_name(c.f) << " " << c.name;
  }
}

TEST(Catalog, EinsteinPresetsAreEinstein) {
  struct Case {
    Family f;
    const char* name;
  };
  for (Case c : {Case{Family::RealLiouville, "einstein-lambda1"}, Case{Family::RealLiouville, "companion-einstein"},
                 Case{Family::ComplexLiouville, "einstein-flat"}, Case{Family::ComplexLiouville, "einstein-lambda1"},
                 Case{Family::DimD2First, "einstein"}}) {
    auto nf = preset(c.f, c.name);
    auto t = build(nf);
    double lambda = *nf.constant("lambda");
    for (const auto& p : sample_points(nf.box, 10, 1)) {
      Mat4 g = eval_matrix(t.g, p);
      double res = max_abs(einstein_residual(t.g, lambda, p)) / std::max(1.0, max_abs(g) * std::abs(lambda));
      EXPECT_LT(res, 1e-8) << family_name(c.f) << " " << c.name;
    }
  }
}

TEST(Catalog, ComplexDerivedIdentities) {
  for (const char* name : {"einstein-flat", "einstein-lambda1"}) {
    auto nf = preset(Family::ComplexLiouville, name);
    ComplexLiouvilleConstants k{*nf.constant("lambda"), nf.constant_or("a", 0),
                                {nf.constant_or("h1", 0), nf.constant_or("h2", 0)},
                                {nf.constant_or("d1", 0), nf.constant_or("d2", 0)}};
    for (const auto& p : sample_points(nf.box, 10, 2))
      EXPECT_LT(complex_liouville_derived_residual(profile(nf.params["R"], {"x1", "x2"}, "R"),
                                                   profile(nf.params["I"], {"x1", "x2"}, "I"), k, p),
                1e-9)
          << name;
  }
}

TEST(Catalog, FitRecoversConstants) {
  auto rho = profile("-6/x1^2", {"x1"}, "rho"), sigma = profile("6/x2^2", {"x2"}, "sigma");
  auto fit = fit_real_liouville_constants(rho, sigma, 1, 1.0, sample_points(Box::parse("1.5:2.5,0.5:1,0:1,0:1"), 20, 1));
  EXPECT_NEAR(fit.constants.k, 0, 1e-8);
  EXPECT_NEAR(fit.constants.h, 0, 1e-8);
  EXPECT_NEAR(fit.constants.c1, 0, 1e-8);
  EXPECT_NEAR(fit.constants.c2, 0, 1e-8);
  EXPECT_LT(fit.residual_first, 1e-9);
}

TEST(Catalog, PredictedCompanionConstants) {
  EXPECT_NEAR(*predicted_companion_constant(preset(Family::RealLiouville, "companion-einstein")), 1.5, 1e-15);
  EXPECT_NEAR(*predicted_companion_constant(preset(Family::ComplexLiouville, "einstein-flat")), -6, 1e-15);
  EXPECT_NEAR(*predicted_companion_constant(preset(Family::DimD2First, "einstein")), -2, 1e-15);
  EXPECT_FALSE(predicted_companion_constant(preset(Family::RealLiouville)).has_value());
}
