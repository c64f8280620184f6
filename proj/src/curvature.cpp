#include "pklab/curvature.hpp"

#include <algorithm>
#include <cmath>

namespace pklab {

Tensor3 Connection::values() const {
  Tensor3 t{};
  for (int k = 0; k < 64; ++k) t[k] = gamma[k].value();
  return t;
}

Connection levi_civita(const JetMat& g, const JetMat& ginv) {
  // first kind: [ij,l] = 1/2 (d_i g_jl + d_j g_il - d_l g_ij)
  std::array<JetMat, 4> dg;
  for (int m = 0; m < 4; ++m) dg[m] = g.derivative(m);
  JetVec first(64);
  for (int i = 0; i < 4; ++i)
    for (int j = i; j < 4; ++j)
      for (int l = 0; l < 4; ++l) {
        Jet v = (dg[i](j, l) + dg[j](i, l) - dg[l](i, j)) * 0.5;
        first[i * 16 + j * 4 + l] = v;
        first[j * 16 + i * 4 + l] = v;
      }
  Connection c;
  c.gamma.resize(64);
  for (int k = 0; k < 4; ++k)
    for (int i = 0; i < 4; ++i)
      for (int j = i; j < 4; ++j) {
        Jet s = ginv(k, 0) * first[i * 16 + j * 4 + 0];
        for (int l = 1; l < 4; ++l) s += ginv(k, l) * first[i * 16 + j * 4 + l];
        c.gamma[k * 16 + i * 4 + j] = s;
        c.gamma[k * 16 + j * 4 + i] = s;
      }
  return c;
}

Connection levi_civita(const JetMat& g) { return levi_civita(g, inverse(g)); }

Tensor4 riemann(const Connection& c) {
  if (c.order() < 1) throw std::invalid_argument("riemann: connection jets need order >= 1");
  Tensor3 G = c.values();
  auto Gv = [&](int k, int i, int j) { return G[k * 16 + i * 4 + j]; };
  Tensor4 R{};
  for (int k = 0; k < 4; ++k)
    for (int l = 0; l < 4; ++l)
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
          if (j == i) continue;
          double s = c(k, l, j).d(i) - c(k, l, i).d(j);
          for (int r = 0; r < 4; ++r) s += Gv(k, i, r) * Gv(r, l, j) - Gv(k, j, r) * Gv(r, l, i);
          R[k * 64 + l * 16 + i * 4 + j] = s;
        }
  return R;
}

Mat4 ricci(const Connection& c) {
  Tensor4 R = riemann(c);
  Mat4 ric = Mat4::Zero();
  for (int l = 0; l < 4; ++l)
    for (int j = 0; j < 4; ++j)
      for (int k = 0; k < 4; ++k) ric(l, j) += R[k * 64 + l * 16 + k * 4 + j];
  return ric;
}

std::array<Mat4, 4> covariant_derivative_endo(const Connection& c, const JetMat& A) {
  Tensor3 G = c.values();
  Mat4 a = A.value4();
  std::array<Mat4, 4> out;
  for (int k = 0; k < 4; ++k)
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) {
        double s = A(i, j).d(k);
        for (int m = 0; m < 4; ++m) s += G[i * 16 + k * 4 + m] * a(m, j) - G[m * 16 + k * 4 + j] * a(i, m);
        out[k](i, j) = s;
      }
  return out;
}

std::array<Mat4, 4> covariant_derivative_form(const Connection& c, const JetMat& w) {
  Tensor3 G = c.values();
  Mat4 a = w.value4();
  std::array<Mat4, 4> out;
  for (int k = 0; k < 4; ++k)
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) {
        double s = w(i, j).d(k);
        for (int m = 0; m < 4; ++m) s -= G[m * 16 + k * 4 + i] * a(m, j) + G[m * 16 + k * 4 + j] * a(i, m);
        out[k](i, j) = s;
      }
  return out;
}

LocalMetric::LocalMetric(const TensorField& gf, const Point& p, int need)
    : LocalMetric(gf, seed_point(p, need + gf.loss)) {}

LocalMetric::LocalMetric(const TensorField& gf, Coords xs) : x(xs.begin(), xs.end()) {
  g = JetMat::from(gf, x);
  ginv = inverse(g);
  gamma = levi_civita(g, ginv);
}

ConnectionCoefficients christoffel(const TensorField& g, const Point& p) {
  LocalMetric lm(g, p, 2);
  ConnectionCoefficients cc;
  cc.gamma = lm.gamma.values();
  for (int m = 0; m < 4; ++m)
    for (int k = 0; k < 64; ++k) cc.dgamma[m][k] = lm.gamma.gamma[k].d(m);
  return cc;
}

Mat4 covariant_derivative_endo(const TensorField& g, const TensorField& A, const Vec4& X, const Point& p) {
  auto x = seed_point(p, 1 + std::max(g.loss, A.loss));
  LocalMetric lm(g, x);
  auto nab = covariant_derivative_endo(lm.gamma, JetMat::from(A, x));
  Mat4 out = Mat4::Zero();
  for (int k = 0; k < 4; ++k) out += X[k] * nab[k];
  return out;
}

Tensor4 riemann(const TensorField& g, const Point& p) { return riemann(LocalMetric(g, p, 2).gamma); }

Mat4 ricci(const TensorField& g, const Point& p) { return ricci(LocalMetric(g, p, 2).gamma); }

Mat4 einstein_residual(const TensorField& g, double lambda, const Point& p) {
  LocalMetric lm(g, p, 2);
  return ricci(lm.gamma) - lambda * lm.g.value4();
}

double estimate_einstein_constant(const TensorField& g, const Point& p) {
  LocalMetric lm(g, p, 2);
  Mat4 gv = lm.g.value4();
  Mat4 ric = ricci(lm.gamma);
  int bi = 0, bj = 0;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      if (std::abs(gv(i, j)) > std::abs(gv(bi, bj))) {
        bi = i;
        bj = j;
      }
  return ric(bi, bj) / gv(bi, bj);
}

double metricity_residual(const TensorField& g, const Point& p) {
  LocalMetric lm(g, p, 1);
  auto ng = covariant_derivative_form(lm.gamma, lm.g);
  double m = 0.0;
  for (const auto& a : ng) m = std::max(m, max_abs(a));
  return m;
}

double bianchi_residual(const Tensor4& R) {
  double m = 0.0;
  auto at = [&](int k, int l, int i, int j) { return R[k * 64 + l * 16 + i * 4 + j]; };
  for (int k = 0; k < 4; ++k)
    for (int l = 0; l < 4; ++l)
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) m = std::max(m, std::abs(at(k, l, i, j) + at(k, i, j, l) + at(k, j, l, i)));
  return m;
}

Tensor4 lower_riemann(const Tensor4& R, const Mat4& g) {
  Tensor4 out{};
  for (int k = 0; k < 4; ++k)
    for (int rest = 0; rest < 64; ++rest) {
      double s = 0.0;
      for (int m = 0; m < 4; ++m) s += g(k, m) * R[m * 64 + rest];
      out[k * 64 + rest] = s;
    }
  return out;
}

}  // namespace pklab
