#include "pklab/curves.hpp"

#include <Eigen/QR>
#include <cmath>
#include <iomanip>
#include <ostream>

#include "pklab/curvature.hpp"
#include "pklab/errors.hpp"
#include "pklab/report.hpp"

namespace pklab {

namespace {

Point shift(const Point& p, const Vec4& d, double s) {
  Point q = p;
  for (int i = 0; i < 4; ++i) q[i] += s * d[i];
  return q;
}

struct BoxExit {};

struct State {
  Point x;
  Vec4 v;
};

}  // namespace

Vec4 christoffel_contract(const TensorField& g, const Point& p, const Vec4& v, const Vec4& w) {
  LocalMetric lm(g, p, 1);
  Vec4 out = Vec4::Zero();
  for (int k = 0; k < 4; ++k)
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) out[k] += lm.gamma(k, i, j).value() * v[i] * w[j];
  return out;
}

Curve integrate_forced(const TensorField& g, const Box& box, const Point& p0, const Vec4& v0, double h, int N,
                       const Forcing& force) {
  if (!box.contains(p0)) throw DomainError("initial point outside the box");
  if (!(h > 0) || N < 0) throw DomainError("step must be positive");
  auto rhs = [&](double t, const Point& x, const Vec4& v) {
    if (!box.contains(x)) throw BoxExit{};
    Vec4 a = -christoffel_contract(g, x, v, v);
    if (force) a += force(t, x, v);
    return a;
  };

  Curve c;
  c.h = h;
  c.samples.reserve(N + 1);
  State s{p0, v0};
  c.samples.push_back({0.0, s.x, s.v});
  for (int n = 0; n < N; ++n) {
    double t = n * h;
    try {
      Vec4 k1x = s.v, k1v = rhs(t, s.x, s.v);
      Vec4 k2x = s.v + 0.5 * h * k1v, k2v = rhs(t + 0.5 * h, shift(s.x, k1x, 0.5 * h), k2x);
      Vec4 k3x = s.v + 0.5 * h * k2v, k3v = rhs(t + 0.5 * h, shift(s.x, k2x, 0.5 * h), k3x);
      Vec4 k4x = s.v + h * k3v, k4v = rhs(t + h, shift(s.x, k3x, h), k4x);
      State next{shift(s.x, k1x + 2 * k2x + 2 * k3x + k4x, h / 6), s.v + h / 6 * (k1v + 2 * k2v + 2 * k3v + k4v)};
      if (!box.contains(next.x)) throw BoxExit{};
      s = next;
    } catch (const BoxExit&) {
      c.exited_box = true;
      break;
    }
    c.samples.push_back({(n + 1) * h, s.x, s.v});
  }
  return c;
}

Curve integrate_geodesic(const TensorField& g, const Box& box, const Point& p0, const Vec4& v0, double h, int N) {
  return integrate_forced(g, box, p0, v0, h, N, nullptr);
}

void covariant_acceleration(const TensorField& g, Curve& c) {
  const int n = static_cast<int>(c.samples.size());
  if (n < 5) throw DomainError("curve needs at least 5 samples");
  for (auto& s : c.samples) s.acc_cov = Vec4::Zero();
  std::vector<Vec4> acc(n, Vec4::Zero());
  parallel_for(n - 4, [&](int k) {
    int i = k + 2;
    const auto& S = c.samples;
    Vec4 dv = (S[i - 2].v - 8 * S[i - 1].v + 8 * S[i + 1].v - S[i + 2].v) / (12 * c.h);
    acc[i] = dv + christoffel_contract(g, S[i].x, S[i].v, S[i].v);
  });
  for (int i = 2; i < n - 2; ++i) c.samples[i].acc_cov = acc[i];
}

double t_planarity_residual(const TensorField& g, const TensorField& T, Curve& c) {
  covariant_acceleration(g, c);
  const int n = static_cast<int>(c.samples.size());
  std::vector<double> r(n, 0.0);
  std::vector<int> bad(n, 0);
  parallel_for(n - 4, [&](int k) {
    int i = k + 2;
    const auto& s = c.samples[i];
    double vn = s.v.norm();
    if (vn < 1e-10) {
      bad[i] = 1;
      return;
    }
    Eigen::Matrix<double, 4, 2> B;
    B.col(0) = s.v;
    B.col(1) = eval_matrix(T, s.x) * s.v;
    // Tv parallel to v (v in T+ or T-) leaves a one-dimensional span
    Eigen::ColPivHouseholderQR<Eigen::Matrix<double, 4, 2>> qr(B);
    qr.setThreshold(1e-12);
    Vec4 fit = B * qr.solve(s.acc_cov);
    r[i] = (s.acc_cov - fit).norm() / std::max(vn * vn, 1.0);
  });
  double worst = 0.0;
  for (int i = 0; i < n; ++i) {
    if (bad[i]) throw DomainError("degenerate velocity on the curve");
    c.samples[i].residual = r[i];
    worst = std::max(worst, r[i]);
  }
  return worst;
}

double energy_drift(const TensorField& g, const Curve& c) {
  double e0 = 0.0, worst = 0.0;
  for (size_t i = 0; i < c.samples.size(); ++i) {
    const auto& s = c.samples[i];
    double e = s.v.dot(eval_matrix(g, s.x) * s.v);
    if (i == 0) e0 = e;
    worst = std::max(worst, std::abs(e - e0));
  }
  return worst;
}

double momentum_drift(const TensorField& g, const VectorField& X, const Curve& c) {
  double m0 = 0.0, worst = 0.0;
  for (size_t i = 0; i < c.samples.size(); ++i) {
    const auto& s = c.samples[i];
    double m = s.v.dot(eval_matrix(g, s.x) * eval_vector(X, s.x));
    if (i == 0) m0 = m;
    worst = std::max(worst, std::abs(m - m0));
  }
  return worst;
}

Convergence planarity_convergence(const TensorField& integrate_with, const TensorField& g, const TensorField& T,
                                  const Box& box, const Point& p0, const Vec4& v0, const std::vector<double>& hs,
                                  double t_end) {
  Convergence out;
  for (double h : hs) {
    int N = static_cast<int>(std::lround(t_end / h));
    Curve c = integrate_geodesic(integrate_with, box, p0, v0, h, N);
    if (c.exited_box) throw DomainError("convergence curve left the box");
    out.h.push_back(h);
    out.residual.push_back(t_planarity_residual(g, T, c));
  }
  for (size_t i = 1; i < out.residual.size(); ++i)
    out.order.push_back(std::log2(out.residual[i - 1] / out.residual[i]) / std::log2(out.h[i - 1] / out.h[i]));
  return out;
}

void write_csv(std::ostream& os, const Curve& c) {
  os << "t,x1,x2,x3,x4,v1,v2,v3,v4,residual\n";
  os << std::setprecision(17);
  for (const auto& s : c.samples) {
    os << s.t;
    for (double x : s.x) os << ',' << x;
    for (int i = 0; i < 4; ++i) os << ',' << s.v[i];
    os << ',' << s.residual << '\n';
  }
}

}  // namespace pklab
