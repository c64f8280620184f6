// Charts, scalar/tensor fields evaluated through jets, and the basic
// tensor algebra on them (inverse, gradient, Lie derivatives, d, Nijenhuis).
//
// Component layout is row-major: a (1,1) tensor T^i_j sits at [i*4 + j], a
// (0,2) tensor g_ij at [i*4 + j]. Rank-3 arrays use [a*16 + b*4 + c].
#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "pklab/jet.hpp"

namespace pklab {

inline constexpr int kDim = 4;

using Point = std::array<double, kDim>;
using Vec4 = Eigen::Vector4d;
using Mat4 = Eigen::Matrix4d;
using Tensor3 = std::array<double, 64>;
using Tensor4 = std::array<double, 256>;
using Coords = std::span<const Jet>;
using JetVec = std::vector<Jet>;

struct Box {
  std::array<double, kDim> lo{}, hi{};

  bool contains(const Point& p) const;
  Point center() const;
  std::string to_string() const;
  // "lo:hi,lo:hi,lo:hi,lo:hi"
  static Box parse(const std::string& text);
};

struct Chart {
  Box box;
  std::string label;
};

// loss = how many derivatives the evaluation rule consumes, so evaluating
// with seed order K yields jets of order K - loss
struct ScalarField {
  std::function<Jet(Coords)> fn;
  int loss = 0;
  std::string label;
  Jet operator()(Coords x) const { return fn(x); }
};

struct VectorField {
  std::function<JetVec(Coords)> fn;
  int loss = 0;
  std::string label;
  JetVec operator()(Coords x) const { return fn(x); }
};

struct TensorField {
  int up = 0, down = 0;
  std::function<JetVec(Coords)> fn;
  int loss = 0;
  std::string label;
  JetVec operator()(Coords x) const { return fn(x); }
};

JetVec seed_point(const Point& p, int order);

// deterministic Halton points strictly inside the box; the seed picks the
// start index of the sequence
std::vector<Point> sample_points(const Box& box, int n, std::uint64_t seed);

// square matrix of jets
class JetMat {
 public:
  JetMat() = default;
  JetMat(int n, JetVec entries);
  static JetMat identity(int n, const Jet& proto);
  static JetMat from(const TensorField& f, Coords x);

  int n() const { return n_; }
  int order() const;
  Jet& operator()(int i, int j) { return a_[i * n_ + j]; }
  const Jet& operator()(int i, int j) const { return a_[i * n_ + j]; }
  const JetVec& entries() const { return a_; }

  JetMat transpose() const;
  JetMat derivative(int k) const;
  Eigen::MatrixXd value() const;
  Mat4 value4() const;

  JetMat& operator+=(const JetMat& o);
  JetMat& operator-=(const JetMat& o);
  JetMat& operator*=(const Jet& s);
  JetMat& operator*=(double s);
  friend JetMat operator+(JetMat a, const JetMat& b) { return a += b; }
  friend JetMat operator-(JetMat a, const JetMat& b) { return a -= b; }
  friend JetMat operator*(const JetMat& a, const JetMat& b);
  friend JetMat operator*(JetMat a, const Jet& s) { return a *= s; }
  friend JetMat operator*(const Jet& s, JetMat a) { return a *= s; }
  friend JetMat operator*(JetMat a, double s) { return a *= s; }
  friend JetMat operator*(double s, JetMat a) { return a *= s; }

 private:
  int n_ = 0;
  JetVec a_;
};

JetVec mat_vec(const JetMat& m, const JetVec& v);
Jet trace(const JetMat& m);
Jet det(const JetMat& m);
// throws DegenerateMetricError when the base-point matrix is singular
JetMat inverse(const JetMat& m);
Vec4 value(const JetVec& v);

// ---- jet-level algebra ----------------------------------------------------
// (grad f)^i = g^{ij} d_j f, one order lower than f
JetVec gradient(const JetMat& ginv, const Jet& f);
JetVec differential(const Jet& f);

// ---- field builders -------------------------------------------------------
TensorField constant_tensor(int up, int down, const Mat4& m, std::string label = "const");
VectorField constant_vector(const Vec4& v, std::string label = "const");
ScalarField coordinate_function(int i);
VectorField gradient_field(const TensorField& g, const ScalarField& f);
VectorField apply_endo(const TensorField& T, const VectorField& X);
ScalarField trace_field(const TensorField& A);

// ---- point-level operations -----------------------------------------------
Mat4 eval_matrix(const TensorField& f, const Point& p);
Vec4 eval_vector(const VectorField& f, const Point& p);
double eval_scalar(const ScalarField& f, const Point& p);

Mat4 metric_inverse(const TensorField& g, const Point& p);
Mat4 metric_inverse(const Mat4& g);
Vec4 gradient(const TensorField& g, const ScalarField& f, const Point& p);
Mat4 lie_derivative_metric(const TensorField& g, const VectorField& X, const Point& p);
// (L_X T)^i_j for a (1,1) tensor
Mat4 lie_derivative_endo(const TensorField& T, const VectorField& X, const Point& p);
Vec4 lie_bracket(const VectorField& X, const VectorField& Y, const Point& p);
Tensor3 exterior_derivative_2form(const TensorField& w, const Point& p);
// N^i_{jk} at [i*16 + j*4 + k]
Tensor3 nijenhuis(const TensorField& T, const Point& p);

// musical isomorphisms with a pointwise metric
inline Vec4 flat(const Mat4& g, const Vec4& v) { return g * v; }
inline Vec4 sharp(const Mat4& ginv, const Vec4& w) { return ginv * w; }

// ---- residual helpers -----------------------------------------------------
double frobenius(const Mat4& m);
double frobenius(std::span<const double> a);
double max_abs(std::span<const double> a);
double max_abs(const Mat4& m);
// raw / max(scale, 1), with raw < 1e-12 mapped to its raw value
double normalized(double raw, double scale);

}  // namespace pklab
