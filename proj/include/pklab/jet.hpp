// Truncated multivariate Taylor series ("jets") for forward-mode AD.
//
// A jet of order K in d variables stores the Taylor coefficients c_alpha for
// all multi-indices |alpha| <= K in graded-lex order. Products truncate at K,
// so every partial up to order K is exact up to rounding.
#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace pklab {

namespace detail {
struct JetLayout;
}

enum class Elementary { Exp, Log, Sqrt, Pow, Sin, Cos, Reciprocal };

std::string to_string(Elementary f);

class Jet {
 public:
  Jet() = default;  // empty jet, only useful as a placeholder
  Jet(int dim, int order);

  static Jet constant(double value, int dim, int order);
  static Jet variable(int i, double value, int dim, int order);

  int dim() const;
  int order() const;
  bool empty() const { return !layout_; }
  std::size_t size() const { return c_.size(); }

  double value() const { return c_.empty() ? 0.0 : c_[0]; }

  // raw Taylor coefficient for a multi-index (zero if |alpha| > order is an error)
  double coeff(std::span<const int> alpha) const;
  // coefficient times alpha!
  double partial(std::span<const int> alpha) const;
  // first partial d/dx_i at the base point
  double d(int i) const;
  // second partial d^2/dx_i dx_j
  double d(int i, int j) const;

  const std::vector<double>& coeffs() const { return c_; }
  std::vector<double>& coeffs() { return c_; }
  // multi-index of slot k in graded-lex order
  std::vector<int> multi_index(std::size_t k) const;

  // the jet of d/dx_i, one order lower
  Jet derivative(int i) const;
  Jet truncated(int order) const;

  Jet& operator+=(const Jet& o);
  Jet& operator-=(const Jet& o);
  Jet& operator*=(const Jet& o);
  Jet& operator/=(const Jet& o);
  Jet& operator+=(double s);
  Jet& operator-=(double s);
  Jet& operator*=(double s);
  Jet& operator/=(double s);
  Jet operator-() const;

  friend Jet operator+(Jet a, const Jet& b) { return a += b; }
  friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
  friend Jet operator*(const Jet& a, const Jet& b);
  friend Jet operator/(const Jet& a, const Jet& b);
  friend Jet operator+(Jet a, double s) { return a += s; }
  friend Jet operator+(double s, Jet a) { return a += s; }
  friend Jet operator-(Jet a, double s) { return a -= s; }
  friend Jet operator-(double s, const Jet& a) { return -a + s; }
  friend Jet operator*(Jet a, double s) { return a *= s; }
  friend Jet operator*(double s, Jet a) { return a *= s; }
  friend Jet operator/(Jet a, double s) { return a /= s; }
  friend Jet operator/(double s, const Jet& a);

 private:
  Jet(std::shared_ptr<const detail::JetLayout> layout, std::vector<double> c)
      : layout_(std::move(layout)), c_(std::move(c)) {}
  friend Jet apply(Elementary f, const Jet& x, double r);
  friend Jet compose(const Jet& x, std::span<const double> taylor);

  std::shared_ptr<const detail::JetLayout> layout_;
  std::vector<double> c_;
};

// f(x) via Taylor composition; r is the exponent for Elementary::Pow
Jet apply(Elementary f, const Jet& x, double r = 0.0);

// sum_k taylor[k] * (x - x0)^k, taylor[k] = f^(k)(x0)/k!
Jet compose(const Jet& x, std::span<const double> taylor);

inline Jet exp(const Jet& x) { return apply(Elementary::Exp, x); }
inline Jet log(const Jet& x) { return apply(Elementary::Log, x); }
inline Jet sqrt(const Jet& x) { return apply(Elementary::Sqrt, x); }
inline Jet sin(const Jet& x) { return apply(Elementary::Sin, x); }
inline Jet cos(const Jet& x) { return apply(Elementary::Cos, x); }
inline Jet reciprocal(const Jet& x) { return apply(Elementary::Reciprocal, x); }
Jet pow(const Jet& x, double r);
// exact repeated multiplication; negative n goes through reciprocal
Jet ipow(const Jet& x, int n);

// spec-facing helpers
inline Jet seed_variable(int i, double value, int dim, int order) {
  return Jet::variable(i, value, dim, order);
}
inline double extract_partial(const Jet& x, std::span<const int> alpha) {
  return x.partial(alpha);
}

// number of multi-indices with |alpha| <= K in d variables
std::size_t jet_size(int dim, int order);

}  // namespace pklab
