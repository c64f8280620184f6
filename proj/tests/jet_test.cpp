#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <random>

#include "pklab/ad_check.hpp"
#include "pklab/errors.hpp"
#include "pklab/jet.hpp"

using namespace pklab;

namespace {

Jet random_jet(std::mt19937_64& rng, int dim, int order) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Jet j(dim, order);
  for (auto& c : j.coeffs()) c = u(rng);
  return j;
}

double max_diff(const Jet& a, const Jet& b) {
  double m = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a.coeffs()[k] - b.coeffs()[k]));
  return m;
}

}  // namespace

TEST(JetLayout, SizeMatchesMultiIndexCount) {
  EXPECT_EQ(jet_size(4, 3), 35u);
  EXPECT_EQ(Jet(4, 3).size(), 35u);
  EXPECT_EQ(Jet(2, 2).size(), 6u);
  EXPECT_EQ(Jet(1, 5).size(), 6u);
}

TEST(JetSeed, VariableHasUnitSlope) {
  Jet x = seed_variable(0, 2.0, 2, 2);
  EXPECT_EQ(x.value(), 2.0);
  EXPECT_EQ(x.d(0), 1.0);
  EXPECT_EQ(x.d(1), 0.0);
  for (std::size_t k = 3; k < x.size(); ++k) EXPECT_EQ(x.coeffs()[k], 0.0);

  Jet y = seed_variable(1, 0.0, 2, 1);
  EXPECT_EQ(y.value(), 0.0);
  EXPECT_EQ(y.d(1), 1.0);
  EXPECT_EQ(y.d(0), 0.0);
}

TEST(JetSeed, IndexOutOfRange) {
  EXPECT_THROW(seed_variable(2, 1.0, 2, 1), std::out_of_range);
  EXPECT_THROW(seed_variable(-1, 1.0, 2, 1), std::out_of_range);
}

TEST(JetArithmetic, SquareAtThree) {
  Jet x = seed_variable(0, 3.0, 1, 2);
  Jet f = x * x;
  std::array<int, 1> two{2};
  EXPECT_DOUBLE_EQ(f.value(), 9.0);
  EXPECT_DOUBLE_EQ(f.d(0), 6.0);
  EXPECT_DOUBLE_EQ(f.coeff(two), 1.0);
  EXPECT_DOUBLE_EQ(extract_partial(f, two), 2.0);
}

TEST(JetArithmetic, MixedPartialOfProduct) {
  Jet x = seed_variable(0, 2.0, 2, 2), y = seed_variable(1, 5.0, 2, 2);
  Jet f = x * y;
  std::array<int, 2> a{1, 1}, z{0, 0};
  EXPECT_DOUBLE_EQ(extract_partial(f, a), 1.0);
  EXPECT_DOUBLE_EQ(extract_partial(f, z), 10.0);
}

TEST(JetArithmetic, ProductMatchesPolynomialMultiplication) {
  // (1 + 2x + 3y)(4 - x + y^2) truncated at order 2
  Jet x = seed_variable(0, 0.0, 2, 2), y = seed_variable(1, 0.0, 2, 2);
  Jet p = 1.0 + 2.0 * x + 3.0 * y;
  Jet q = 4.0 - x + y * y;
  Jet r = p * q;
  auto c = [&](int a, int b) {
    std::array<int, 2> al{a, b};
    return r.coeff(al);
  };
  EXPECT_DOUBLE_EQ(c(0, 0), 4.0);
  EXPECT_DOUBLE_EQ(c(1, 0), 7.0);
  EXPECT_DOUBLE_EQ(c(0, 1), 12.0);
  EXPECT_DOUBLE_EQ(c(2, 0), -2.0);
  EXPECT_DOUBLE_EQ(c(1, 1), -3.0);
  EXPECT_DOUBLE_EQ(c(0, 2), 1.0);
}

TEST(JetArithmetic, MixedOrdersTruncateToLower) {
  Jet a = seed_variable(0, 1.0, 2, 3), b = seed_variable(1, 1.0, 2, 1);
  EXPECT_EQ((a * b).order(), 1);
  EXPECT_EQ((a + b).order(), 1);
  EXPECT_EQ((b - a).order(), 1);
}

TEST(JetArithmetic, DerivativeLowersOrder) {
  Jet x = seed_variable(0, 2.0, 2, 3), y = seed_variable(1, -1.0, 2, 3);
  Jet f = x * x * y;  // d/dx = 2xy
  Jet g = f.derivative(0);
  EXPECT_EQ(g.order(), 2);
  EXPECT_DOUBLE_EQ(g.value(), -4.0);
  EXPECT_DOUBLE_EQ(g.d(0), -2.0);
  EXPECT_DOUBLE_EQ(g.d(1), 4.0);
  EXPECT_DOUBLE_EQ(g.d(0, 1), 2.0);
}

TEST(JetElementary, LogAtOne) {
  Jet x = seed_variable(0, 1.0, 1, 2);
  Jet f = log(x);
  std::array<int, 1> two{2};
  EXPECT_DOUBLE_EQ(f.value(), 0.0);
  EXPECT_DOUBLE_EQ(f.d(0), 1.0);
  EXPECT_DOUBLE_EQ(extract_partial(f, two), -1.0);
}

TEST(JetElementary, SqrtOfSquare) {
  Jet x = seed_variable(0, 2.0, 1, 1);
  Jet f = sqrt(x * x);
  EXPECT_DOUBLE_EQ(f.value(), 2.0);
  EXPECT_DOUBLE_EQ(f.d(0), 1.0);
}

TEST(JetElementary, ReciprocalOfZeroIsDomainError) {
  Jet z = Jet::constant(0.0, 2, 2);
  try {
    reciprocal(z);
    FAIL() << "expected a domain error";
  } catch (const DomainError& e) {
    std::string msg = e.what();
    EXPECT_NE(msg.find("reciprocal"), std::string::npos);
    EXPECT_NE(msg.find("0"), std::string::npos);
  }
  EXPECT_THROW(log(Jet::constant(-1.0, 1, 1)), DomainError);
  EXPECT_THROW(sqrt(Jet::constant(0.0, 1, 1)), DomainError);
  EXPECT_THROW(pow(Jet::constant(-2.0, 1, 1), 0.5), DomainError);
}

TEST(JetElementary, IntegerPowerAcceptsNegativeBase) {
  Jet x = seed_variable(0, -2.0, 1, 3);
  Jet f = pow(x, 3.0);
  EXPECT_DOUBLE_EQ(f.value(), -8.0);
  EXPECT_DOUBLE_EQ(f.d(0), 12.0);
  Jet g = pow(x, -2.0);
  EXPECT_DOUBLE_EQ(g.value(), 0.25);
  EXPECT_NEAR(g.d(0), 0.25, 1e-15);  // -2 x^-3
}

TEST(JetElementary, SinCosPythagoras) {
  std::mt19937_64 rng(7);
  Jet x = random_jet(rng, 3, 4);
  Jet s = sin(x), c = cos(x);
  Jet one = s * s + c * c;
  EXPECT_NEAR(one.value(), 1.0, 1e-14);
  for (std::size_t k = 1; k < one.size(); ++k) EXPECT_NEAR(one.coeffs()[k], 0.0, 1e-13);
}

TEST(JetElementary, ExpLogInverse) {
  std::mt19937_64 rng(11);
  Jet x = random_jet(rng, 4, 3);
  EXPECT_LT(max_diff(log(exp(x)), x), 1e-13);
}

TEST(JetPartial, OrderExceeded) {
  Jet x = seed_variable(0, 1.0, 2, 1);
  std::array<int, 2> a{2, 0};
  EXPECT_THROW(extract_partial(x, a), std::out_of_range);
}

TEST(JetProperties, RingAxioms) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    Jet a = random_jet(rng, 4, 3), b = random_jet(rng, 4, 3), c = random_jet(rng, 4, 3);
    EXPECT_LT(max_diff((a * b) * c, a * (b * c)), 1e-13);
    EXPECT_LT(max_diff(a * (b + c), a * b + a * c), 1e-13);
    EXPECT_LT(max_diff(a * b, b * a), 1e-15);
  }
}

TEST(JetProperties, Leibniz) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    Jet a = random_jet(rng, 4, 2), b = random_jet(rng, 4, 2);
    Jet p = a * b;
    for (int i = 0; i < 4; ++i) EXPECT_NEAR(p.d(i), a.value() * b.d(i) + b.value() * a.d(i), 1e-13);
  }
}

TEST(JetProperties, DivisionInvertsMultiplication) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    Jet a = random_jet(rng, 4, 3), b = random_jet(rng, 4, 3);
    b += 3.0;
    EXPECT_LT(max_diff((a * b) / b, a), 1e-12);
  }
}

TEST(JetOracle, RandomCompositionsMatchFiniteDifferences) {
  AdCheckResult r = jet_fd_agreement(200, 42);
  EXPECT_EQ(r.compositions, 200);
  EXPECT_EQ(r.comparisons, 200 * 34);
  EXPECT_LT(r.max_error, 1e-6) << r.worst;
}
