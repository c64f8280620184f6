// Levi-Civita connection, covariant derivatives, Riemann/Ricci and
// Einstein residuals, all carried by jets.
//
// Index conventions:
//   Gamma^k_ij        [k*16 + i*4 + j]
//   R^k_lij           [k*64 + l*16 + i*4 + j]
//   R^k_lij = d_i Gamma^k_lj - d_j Gamma^k_li + Gamma^k_ir Gamma^r_lj - Gamma^k_jr Gamma^r_li
//   Ric_lj  = R^k_lkj
#pragma once

#include <array>

#include "pklab/fields.hpp"

namespace pklab {

// Christoffel symbols as jets, one order below the metric
struct Connection {
  JetVec gamma;  // 64 entries
  const Jet& operator()(int k, int i, int j) const { return gamma[k * 16 + i * 4 + j]; }
  int order() const { return gamma.empty() ? -1 : gamma[0].order(); }
  Tensor3 values() const;
};

Connection levi_civita(const JetMat& g, const JetMat& ginv);
Connection levi_civita(const JetMat& g);

// needs a connection of order >= 1
Tensor4 riemann(const Connection& c);
Mat4 ricci(const Connection& c);

// (nabla_k A)^i_j for all k, values only; A needs order >= 1
std::array<Mat4, 4> covariant_derivative_endo(const Connection& c, const JetMat& A);
// (nabla_k w)_ij for a (0,2) tensor
std::array<Mat4, 4> covariant_derivative_form(const Connection& c, const JetMat& w);

// metric and its connection at one point, with jets of order >= need
struct LocalMetric {
  LocalMetric(const TensorField& g, const Point& p, int need);
  LocalMetric(const TensorField& g, Coords x);

  JetVec x;
  JetMat g, ginv;
  Connection gamma;
};

// ---- point-level operations -------------------------------------------------
struct ConnectionCoefficients {
  Tensor3 gamma{};
  std::array<Tensor3, 4> dgamma{};  // d_m Gamma^k_ij at dgamma[m]
  double operator()(int k, int i, int j) const { return gamma[k * 16 + i * 4 + j]; }
};

ConnectionCoefficients christoffel(const TensorField& g, const Point& p);
// (nabla_X A)^i_j
Mat4 covariant_derivative_endo(const TensorField& g, const TensorField& A, const Vec4& X, const Point& p);
Tensor4 riemann(const TensorField& g, const Point& p);
Mat4 ricci(const TensorField& g, const Point& p);
Mat4 einstein_residual(const TensorField& g, double lambda, const Point& p);
// diagnostic only: Ric_ab / g_ab at the largest |g_ab|
double estimate_einstein_constant(const TensorField& g, const Point& p);

// max_k |(nabla_k g)_ij|, should vanish
double metricity_residual(const TensorField& g, const Point& p);
// max |R^k_lij + R^k_ijl + R^k_jli|
double bianchi_residual(const Tensor4& R);
// lowers the first index: R_klij = g_km R^m_lij
Tensor4 lower_riemann(const Tensor4& R, const Mat4& g);

}  // namespace pklab
