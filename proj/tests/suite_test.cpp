#include <gtest/gtest.h>

#include <algorithm>

#include "pklab/errors.hpp"
#include "pklab/suite.hpp"

using namespace pklab;

namespace {

SuiteConfig config(Family f, const std::string& p, std::vector<std::string> checks) {
  SuiteConfig c;
  c.form = preset(f, p);
  c.checks = std::move(checks);
  c.points = 8;
  return c;
}

}  // namespace

TEST(Suite, ConfigValidation) {
  SuiteConfig c = config(Family::RealLiouville, "default", {"benenti", "nonsense"});
  EXPECT_THROW(c.validate(), ConfigError);
  c.checks = {"benenti"};
  EXPECT_NO_THROW(c.validate());
  c.tolerances["benenti"] = 0.0;
  EXPECT_THROW(c.validate(), ConfigError);
  c.tolerances["benenti"] = -1e-3;
  EXPECT_THROW(c.validate(), ConfigError);
  c.tolerances.clear();
  c.points = 0;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Suite, ApplicableGroups) {
  auto g = applicable_groups(preset(Family::RealLiouville, "einstein-lambda1"));
  EXPECT_NE(std::find(g.begin(), g.end(), "family-einstein"), g.end());
  EXPECT_EQ(std::find(g.begin(), g.end(), "flatness"), g.end());
  g = applicable_groups(preset(Family::DimD2Second));
  EXPECT_NE(std::find(g.begin(), g.end(), "flatness"), g.end());
  EXPECT_EQ(std::find(g.begin(), g.end(), "einstein"), g.end());
}

TEST(Suite, EinsteinPresetPassesEverything) {
  SuiteConfig c;
  c.form = preset(Family::RealLiouville, "einstein-lambda1");
  SuiteResult r = run(c);
  EXPECT_TRUE(r.report.all_pass()) << r.report.to_text();
  for (const char* name : {"parakahler.nabla_t", "benenti.equation", "killing.metric", "rank.D",
                           "companion.connection_difference", "ricci_diff.identity", "einstein.metric",
                           "einstein.companion", "family_einstein.spread", "geodesic.t_planarity"})
    EXPECT_NE(r.report.find(name), nullptr) << name;
  EXPECT_TRUE(std::is_sorted(r.report.entries.begin(), r.report.entries.end(),
                             [](const CheckEntry& a, const CheckEntry& b) { return a.name < b.name; }));
  EXPECT_EQ(r.curves.size(), 10u);
}

TEST(Suite, Flatness) {
  EXPECT_TRUE(run(config(Family::DimD2Second, "default", {"flatness"})).report.all_pass());
  // asking a curved metric whether it is flat is a failing check, not an error
  auto r = run(config(Family::RealLiouville, "default", {"flatness"}));
  EXPECT_FALSE(r.report.all_pass());
}

TEST(Suite, EinsteinNeedsLambda) {
  EXPECT_THROW(run(config(Family::RealLiouville, "default", {"einstein"})), ConfigError);
  EXPECT_THROW(run(config(Family::DimD2Second, "default", {"family-einstein"})), ConfigError);
}

TEST(Suite, ToleranceOverrides) {
  auto c = config(Family::RealLiouville, "default", {"benenti"});
  c.tolerances["benenti"] = 1e-30;
  c.tolerances["benenti.non_parallel"] = 2.0;
  auto r = run(c).report;
  EXPECT_EQ(r.find("benenti.equation")->tolerance, 1e-30);
  EXPECT_FALSE(r.find("benenti.equation")->pass);
  EXPECT_EQ(r.find("benenti.non_parallel")->tolerance, 2.0);
  EXPECT_TRUE(r.find("benenti.non_parallel")->pass);
  c.tolerances = {{"nothing.here", 1.0}};
  EXPECT_THROW(run(c), ConfigError);
}

TEST(Suite, Deterministic) {
  auto c = config(Family::ComplexLiouville, "z-squared", {"parakahler", "benenti", "rank"});
  c.seed = 42;
  auto a = run(c).report.to_json().dump(), b = run(c).report.to_json().dump();
  EXPECT_EQ(a, b);
  c.seed = 43;
  EXPECT_NE(run(c).report.to_json().dump(), a);
}

TEST(Suite, ConstraintViolation) {
  auto c = config(Family::RealLiouville, "default", {"benenti"});
  set_param(c.form, "rho", "x1 - 2.5");  // vanishes inside the box
  EXPECT_THROW(run(c), ConstraintError);
}

TEST(Suite, DemoEinstein) {
  EinsteinDemo d = demo_einstein(10, 1, {0, 1, 2}, {0, 1});
  auto row = [&](double a, double b) {
    return *std::find_if(d.rows.begin(), d.rows.end(), [&](const DemoRow& r) { return r.alpha == a && r.beta == b; });
  };
  EXPECT_NEAR(row(2, 1).lambda_tilde, 8.0, 1e-8);
  EXPECT_NEAR(row(1, 0).lambda_tilde, 1.0, 1e-10);
  EXPECT_NEAR(row(0, 1).lambda_tilde, 0.0, 1e-10);
  EXPECT_TRUE(row(0, 0).skipped);
  EXPECT_FALSE(row(2, 1).note.empty());  // 2 + rho crosses zero inside the box
  EXPECT_TRUE(d.report().all_pass());
}
