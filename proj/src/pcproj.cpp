#include "pklab/pcproj.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "pklab/errors.hpp"

namespace pklab {

namespace {

const Mat4 kId = Mat4::Identity();

double max_of(std::initializer_list<double> v) { return *std::max_element(v.begin(), v.end()); }

double max_abs3(const Tensor3& t) { return max_abs(std::span<const double>(t.data(), t.size())); }

Vec4 lambda_values(const JetMat& Ginv, const JetMat& A) { return 0.25 * value(gradient(Ginv, trace(A))); }

JetVec scaled(JetVec v, double s) {
  for (auto& e : v) e *= s;
  return v;
}

std::string num(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

}  // namespace

// ---- Lambda and the Benenti equation ---------------------------------------------

Vec4 lambda_field(const TensorField& g, const TensorField& A, const Point& p) {
  auto x = seed_point(p, 1 + std::max(g.loss, A.loss));
  JetMat G = JetMat::from(g, x);
  return lambda_values(inverse(G), JetMat::from(A, x));
}

double trace_duality_residual(const TensorField& g, const TensorField& A, const Point& p) {
  auto x = seed_point(p, 1 + std::max(g.loss, A.loss));
  JetMat G = JetMat::from(g, x);
  Jet tr = trace(JetMat::from(A, x));
  Vec4 L = lambda_values(inverse(G), JetMat::from(A, x));
  Mat4 gv = G.value4();
  Vec4 dtr = value(differential(tr));
  double worst = 0.0;
  std::array<Vec4, 5> dirs = {Vec4(1, 0, 0, 0), Vec4(0, 1, 0, 0), Vec4(0, 0, 1, 0), Vec4(0, 0, 0, 1),
                              Vec4(0.3, -0.7, 1.1, 0.5)};
  for (const auto& X : dirs) {
    double lhs = dtr.dot(X), rhs = 4.0 * L.dot(gv * X);
    worst = std::max(worst, normalized(std::abs(lhs - rhs), std::max(std::abs(lhs), std::abs(rhs))));
  }
  return worst;
}

double benenti_residual(const ParaKahlerTriple& t, const TensorField& A, const Point& p) {
  auto x = seed_point(p, 1 + std::max(t.loss(), A.loss));
  JetMat G = JetMat::from(t.g, x), T = JetMat::from(t.T, x), Am = JetMat::from(A, x);
  JetMat Gi = inverse(G);
  auto nab = covariant_derivative_endo(levi_civita(G, Gi), Am);
  Mat4 g = G.value4(), tv = T.value4();
  Vec4 L = lambda_values(Gi, Am);
  Vec4 Lb = g * L, TL = tv * L, TLb = g * TL;
  Mat4 gT = g * tv;
  double raw = 0.0, scale = 0.0;
  for (int k = 0; k < 4; ++k) {
    Mat4 a = Mat4::Zero(), b = Mat4::Zero(), c = Mat4::Zero(), d = Mat4::Zero();
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) {
        a(i, j) = g(k, j) * L[i];
        b(i, j) = Lb[j] * (i == k ? 1.0 : 0.0);
        c(i, j) = gT(j, k) * TL[i];
        d(i, j) = TLb[j] * tv(i, k);
      }
    Mat4 rhs = a + b - c - d;
    raw = std::max(raw, max_abs(Mat4(nab[k] - rhs)));
    scale = max_of({scale, max_abs(nab[k]), max_abs(a), max_abs(b), max_abs(c), max_abs(d)});
  }
  return normalized(raw, scale);
}

double hamiltonian_trace(const ParaKahlerTriple& t, const TensorField& A, const Point& p) {
  Mat4 g = eval_matrix(t.g, p), tv = eval_matrix(t.T, p), a = eval_matrix(A, p);
  Mat4 w = tv.transpose() * g;
  Mat4 phi = (a * tv).transpose() * g;
  Mat4 wi = w.inverse();
  return -0.5 * (wi.array() * phi.array()).sum();
}

double hamiltonian_form_residual(const ParaKahlerTriple& t, const TensorField& A, const Point& p) {
  auto x = seed_point(p, 1 + std::max(t.loss(), A.loss));
  JetMat G = JetMat::from(t.g, x), T = JetMat::from(t.T, x), Am = JetMat::from(A, x);
  JetMat Gi = inverse(G);
  JetMat Phi = (Am * T).transpose() * G;
  auto nab = covariant_derivative_form(levi_civita(G, Gi), Phi);
  Mat4 g = G.value4(), tv = T.value4(), gi = Gi.value4();
  // tau = tr A / 2, which is the pinned value of -(1/2) omega^{ij} phi_ij
  Vec4 dtau = 0.5 * value(differential(trace(Am)));
  Vec4 tgt = g * (tv * (gi * dtau));
  auto wedge = [](const Vec4& a, const Vec4& b) { return Mat4(a * b.transpose() - b * a.transpose()); };
  double raw = 0.0, scale = 0.0;
  for (int k = 0; k < 4; ++k) {
    Vec4 Xb = g.col(k), TXb = g * tv.col(k);
    Mat4 u = wedge(dtau, TXb), v = wedge(tgt, Xb);
    Mat4 lhs = 2.0 * nab[k];
    raw = std::max(raw, max_abs(Mat4(lhs - u + v)));
    scale = max_of({scale, max_abs(lhs), max_abs(u), max_abs(v)});
  }
  return normalized(raw, scale);
}

// ---- companion metrics ---------------------------------------------------------------

Mat4 a_from_pair(const Mat4& g, const Mat4& gh) {
  double r = gh.determinant() / g.determinant();
  if (!(r > 0.0)) throw DomainError("a_from_pair: det(gh)/det(g) = " + num(r) + " is not positive");
  return std::pow(r, 1.0 / 6.0) * gh.inverse() * g;
}

TensorField a_from_pair(const TensorField& g, const TensorField& gh) {
  TensorField A;
  A.up = A.down = 1;
  A.loss = std::max(g.loss, gh.loss);
  A.label = "A(" + g.label + ", " + gh.label + ")";
  A.fn = [g, gh](Coords x) {
    JetMat G = JetMat::from(g, x), H = JetMat::from(gh, x);
    Jet r = det(H) / det(G);
    if (!(r.value() > 0.0)) throw DomainError("a_from_pair: det(gh)/det(g) = " + num(r.value()) + " is not positive");
    return (inverse(H) * G * pow(r, 1.0 / 6.0)).entries();
  };
  return A;
}

TensorField companion_metric(const TensorField& g, const TensorField& A) {
  TensorField h;
  h.up = 0;
  h.down = 2;
  h.loss = std::max(g.loss, A.loss);
  h.label = "companion(" + g.label + ")";
  h.fn = [g, A](Coords x) {
    JetMat G = JetMat::from(g, x), Am = JetMat::from(A, x);
    Jet d = det(Am);
    if (!(d.value() > 0.0)) throw DomainError("companion metric: det A = " + num(d.value()) + " <= 0");
    return (G * inverse(Am) * pow(d, -0.5)).entries();
  };
  return h;
}

TensorField companion_metric(const TensorField& g, const TensorField& A, const Box& box, int points) {
  for (const auto& p : sample_points(box, points, 0xa11ce)) {
    double d = eval_matrix(A, p).determinant();
    if (!(d > 0.0)) {
      std::ostringstream os;
      os << "companion metric needs det A > 0; det A = " << d << " at (" << p[0] << ", " << p[1] << ", " << p[2]
         << ", " << p[3] << ")";
      throw ConstraintError(os.str());
    }
  }
  return companion_metric(g, A);
}

PsiPotential psi_potential(const TensorField& A, const Point& p) {
  auto x = seed_point(p, 1 + A.loss);
  Jet d = det(JetMat::from(A, x));
  if (!(d.value() > 0.0)) throw DomainError("psi: det A = " + num(d.value()) + " <= 0");
  Jet psi = log(d) * -0.25;
  return {psi.value(), value(differential(psi))};
}

double psi_lambda_residual(const TensorField& g, const TensorField& A, const Point& p) {
  Vec4 Psi = psi_potential(A, p).dpsi;
  Vec4 L = lambda_field(g, A, p);
  Mat4 gv = eval_matrix(g, p), ai = eval_matrix(A, p).inverse();
  Vec4 rhs = -ai.transpose() * (gv * L);
  return normalized((Psi - rhs).cwiseAbs().maxCoeff(), std::max(Psi.cwiseAbs().maxCoeff(), rhs.cwiseAbs().maxCoeff()));
}

double sqrt_det_exp_residual(const TensorField& A, const Point& p) {
  Mat4 a = eval_matrix(A, p);
  double blk = a.block<2, 2>(0, 0).determinant();
  double e = std::exp(-2.0 * psi_potential(A, p).psi);
  return normalized(std::abs(blk - e), std::max(std::abs(blk), e));
}

namespace {

struct PairLocal {
  JetVec x;
  JetMat G, H, Gi, Hi;
  Connection gam, gamh;
  JetVec psi_d;  // Psi = d psi as jets
};

PairLocal make_pair(const TensorField& g, const TensorField& gh, const Point& p, int need) {
  PairLocal l;
  l.x = seed_point(p, need + 1 + std::max(g.loss, gh.loss));
  l.G = JetMat::from(g, l.x);
  l.H = JetMat::from(gh, l.x);
  l.Gi = inverse(l.G);
  l.Hi = inverse(l.H);
  l.gam = levi_civita(l.G, l.Gi);
  l.gamh = levi_civita(l.H, l.Hi);
  Jet r = det(l.H) / det(l.G);
  if (!(r.value() > 0.0)) throw DomainError("det(gh)/det(g) = " + num(r.value()) + " is not positive");
  Jet detA = det(l.Hi * l.G * pow(r, 1.0 / 6.0));
  l.psi_d = differential(log(detA) * -0.25);
  return l;
}

}  // namespace

double connection_difference_residual(const TensorField& g, const TensorField& gh, const TensorField& T,
                                      const Point& p) {
  PairLocal l = make_pair(g, gh, p, 0);
  Mat4 tv = eval_matrix(T, p);
  Vec4 Psi = value(l.psi_d);
  Vec4 PsiT = tv.transpose() * Psi;
  Tensor3 a = l.gam.values(), b = l.gamh.values();
  double raw = 0.0;
  for (int k = 0; k < 4; ++k)
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) {
        double rhs = Psi[i] * (k == j) + Psi[j] * (k == i) + PsiT[i] * tv(k, j) + PsiT[j] * tv(k, i);
        raw = std::max(raw, std::abs(b[k * 16 + i * 4 + j] - a[k * 16 + i * 4 + j] - rhs));
      }
  return normalized(raw, std::max(max_abs3(a), max_abs3(b)));
}

double christoffel_trace_residual(const TensorField& g, const TensorField& gh, const Point& p) {
  PairLocal l = make_pair(g, gh, p, 0);
  Vec4 Psi = value(l.psi_d);
  Tensor3 a = l.gam.values(), b = l.gamh.values();
  double raw = 0.0;
  for (int i = 0; i < 4; ++i) {
    double tr = 0.0;
    for (int j = 0; j < 4; ++j) tr += b[j * 16 + i * 4 + j] - a[j * 16 + i * 4 + j];
    raw = std::max(raw, std::abs(Psi[i] - tr / 6.0));
  }
  return normalized(raw, std::max(max_abs3(a), max_abs3(b)));
}

// ---- weighted tensor sigma -------------------------------------------------------------

Mat4 sigma_from_metric(const Mat4& g) {
  double d = g.determinant();
  if (d == 0.0) throw DegenerateMetricError("sigma: singular metric", d);
  return std::pow(std::abs(d), 1.0 / 6.0) * g.inverse();
}

TensorField sigma_field(const TensorField& g) {
  TensorField s;
  s.up = 2;
  s.down = 0;
  s.loss = g.loss;
  s.label = "sigma(" + g.label + ")";
  s.fn = [g](Coords x) {
    JetMat G = JetMat::from(g, x);
    Jet d = det(G);
    if (d.value() < 0) d = -d;
    return (inverse(G) * pow(d, 1.0 / 6.0)).entries();
  };
  return s;
}

TensorField weighted_product(const TensorField& A, const TensorField& sigma) {
  TensorField s;
  s.up = 2;
  s.down = 0;
  s.loss = std::max(A.loss, sigma.loss);
  s.label = A.label + " " + sigma.label;
  s.fn = [A, sigma](Coords x) { return (JetMat::from(A, x) * JetMat::from(sigma, x)).entries(); };
  return s;
}

namespace {

// weighted covariant derivative: D[i*16 + j*4 + k] = nabla_i s^jk, plus the scale of its terms
std::pair<Tensor3, double> weighted_nabla(const Connection& c, const JetMat& S) {
  Tensor3 D{};
  double scale = 0.0;
  for (int i = 0; i < 4; ++i) {
    double tr = 0.0;
    for (int q = 0; q < 4; ++q) tr += c(q, i, q).value();
    for (int j = 0; j < 4; ++j)
      for (int k = 0; k < 4; ++k) {
        double a = S(j, k).d(i), b = 0.0, e = 0.0;
        for (int m = 0; m < 4; ++m) {
          b += c(j, i, m).value() * S(m, k).value();
          e += c(k, i, m).value() * S(j, m).value();
        }
        double w = -tr / 3.0 * S(j, k).value();
        D[i * 16 + j * 4 + k] = a + b + e + w;
        scale = max_of({scale, std::abs(a), std::abs(b), std::abs(e), std::abs(w)});
      }
  }
  return {D, scale};
}

}  // namespace

double sigma_parallel_residual(const TensorField& g, const Point& p) {
  auto x = seed_point(p, 1 + g.loss);
  LocalMetric lm(g, x);
  auto [D, scale] = weighted_nabla(lm.gamma, JetMat::from(sigma_field(g), x));
  return normalized(max_abs3(D), scale);
}

double sigma_para_hermitian_residual(const TensorField& g, const TensorField& T, const Point& p) {
  Mat4 s = sigma_from_metric(eval_matrix(g, p)), tv = eval_matrix(T, p);
  Mat4 a = tv * s, b = s * tv.transpose();
  return normalized(max_abs(Mat4(a + b)), std::max(max_abs(a), max_abs(b)));
}

Tensor3 mobility_tensor(const TensorField& metric, const TensorField& sigma_hat, const TensorField& T,
                        const Point& p) {
  auto x = seed_point(p, 1 + std::max({metric.loss, sigma_hat.loss, T.loss}));
  LocalMetric lm(metric, x);
  auto [D, scale] = weighted_nabla(lm.gamma, JetMat::from(sigma_hat, x));
  (void)scale;
  Mat4 tv = JetMat::from(T, x).value4();
  Vec4 L = Vec4::Zero();
  for (int k = 0; k < 4; ++k)
    for (int l = 0; l < 4; ++l) L[k] += D[l * 16 + l * 4 + k];
  Vec4 TL = tv * L;
  Tensor3 R{};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      for (int k = 0; k < 4; ++k) {
        double corr = (i == j) * L[k] + (i == k) * L[j] - tv(j, i) * TL[k] - tv(k, i) * TL[j];
        R[i * 16 + j * 4 + k] = D[i * 16 + j * 4 + k] - 0.25 * corr;
      }
  return R;
}

double mobility_residual(const TensorField& metric, const TensorField& sigma_hat, const TensorField& T,
                         const Point& p) {
  auto x = seed_point(p, 1 + std::max({metric.loss, sigma_hat.loss, T.loss}));
  LocalMetric lm(metric, x);
  auto [D, scale] = weighted_nabla(lm.gamma, JetMat::from(sigma_hat, x));
  return normalized(max_abs3(mobility_tensor(metric, sigma_hat, T, p)), std::max(scale, max_abs3(D)));
}

// ---- eigenvalues ---------------------------------------------------------------------

Jet mu1_jet(const JetMat& A) { return trace(A) * 0.5; }

Jet mu2_jet(const JetMat& A) {
  Jet m1 = mu1_jet(A);
  return (m1 * m1 - trace(A * A) * 0.5) * 0.5;
}

std::string to_string(Spectrum::Type t) {
  switch (t) {
    case Spectrum::Type::Real: return "r";
    case Spectrum::Type::Complex: return "c";
    case Spectrum::Type::Singular: return "singular";
  }
  return "?";
}

Spectrum eigen_decompose(const Mat4& A) {
  Spectrum s;
  s.mu1 = 0.5 * A.trace();
  s.mu2 = 0.5 * (s.mu1 * s.mu1 - 0.5 * (A * A).trace());
  s.discriminant = s.mu1 * s.mu1 - 4.0 * s.mu2;
  double tol = 1e-10 * std::max(1.0, s.mu1 * s.mu1);
  if (std::abs(s.discriminant) < tol) {
    s.type = Spectrum::Type::Singular;
    s.rho = s.sigma = 0.5 * s.mu1;
  } else if (s.discriminant > 0) {
    s.type = Spectrum::Type::Real;
    double q = std::sqrt(s.discriminant);
    s.rho = 0.5 * (s.mu1 + q);
    s.sigma = 0.5 * (s.mu1 - q);
  } else {
    s.type = Spectrum::Type::Complex;
    double q = std::sqrt(-s.discriminant);
    s.rho = {0.5 * s.mu1, 0.5 * q};
    s.sigma = {0.5 * s.mu1, -0.5 * q};
  }
  return s;
}

Spectrum eigen_decompose(const TensorField& A, const Point& p) { return eigen_decompose(eval_matrix(A, p)); }

double mu_polynomial(const Mat4& A, double t) {
  Spectrum s = eigen_decompose(A);
  return t * t - s.mu1 * t + s.mu2;
}

// ---- the (alpha, beta) family --------------------------------------------------------

TensorField family_metric(const TensorField& g, const TensorField& A, double alpha, double beta) {
  TensorField f;
  f.up = 0;
  f.down = 2;
  f.loss = std::max(g.loss, A.loss);
  f.label = "g[" + num(alpha) + "," + num(beta) + "]";
  f.fn = [g, A, alpha, beta](Coords x) {
    JetMat G = JetMat::from(g, x), Am = JetMat::from(A, x);
    JetMat At = Am * beta + JetMat::identity(4, Am(0, 0)) * alpha;
    Jet m2 = mu2_jet(At);
    if (std::abs(m2.value()) < 1e-12)
      throw DomainError("family metric: A~ degenerate (mu2 = " + num(m2.value()) + ")");
    return (G * inverse(At) * reciprocal(m2)).entries();
  };
  return f;
}

TensorField family_metric_from_pair(const TensorField& g, const TensorField& gh, double alpha, double beta) {
  return family_metric(g, a_from_pair(g, gh), alpha, beta);
}

FamilyConstant einstein_family_constant(const TensorField& g, const TensorField& gh, double lambda,
                                        double lambda_hat, double alpha, double beta, const Point& p) {
  TensorField A = a_from_pair(g, gh);
  Mat4 gv = eval_matrix(g, p), a = eval_matrix(A, p);
  Vec4 L = lambda_field(g, A, p);
  Mat4 at = beta * a + alpha * kId;
  FamilyConstant out;
  out.mu2 = eigen_decompose(at).mu2;
  if (std::abs(out.mu2) < 1e-12) throw DomainError("family metric: A~ degenerate");
  double q1 = L.dot(gv * a.inverse() * L);
  double q2 = L.dot(gv * at.inverse() * L);
  double sq = std::sqrt(a.determinant());
  // lambda-tilde with the factor 2(n+1) = 6, labels matching A~ = beta A + alpha Id
  out.lambda_tilde =
      6.0 * out.mu2 * (lambda_hat * beta / (6.0 * sq) + beta * q1 - beta * beta * q2 + lambda * alpha / 6.0);
  TensorField gt = family_metric(g, A, alpha, beta);
  Mat4 gtv = eval_matrix(gt, p);
  out.ricci_residual = frobenius(Mat4(ricci(gt, p) - out.lambda_tilde * gtv)) / std::max(frobenius(gtv), 1e-300);
  return out;
}

// ---- canonical Killing fields and D ---------------------------------------------------

KillingFields canonical_killing_fields(const ParaKahlerTriple& t, const TensorField& A) {
  KillingFields kf;
  kf.mu[0] = {[A](Coords x) { return mu1_jet(JetMat::from(A, x)); }, A.loss, "mu1"};
  kf.mu[1] = {[A](Coords x) { return mu2_jet(JetMat::from(A, x)); }, A.loss, "mu2"};
  for (int i = 0; i < 2; ++i) {
    kf.V[i] = gradient_field(t.g, kf.mu[i]);
    kf.V[i].label = "V" + std::to_string(i + 1);
    kf.TV[i] = apply_endo(t.T, kf.V[i]);
    kf.TV[i].label = "TV" + std::to_string(i + 1);
  }
  return kf;
}

namespace {

struct EigenGradients {
  bool complex = false;
  double rho_re = 0, rho_im = 0, sigma = 0;
  Vec4 g_rho = Vec4::Zero(), g_sigma = Vec4::Zero();  // real type
  Vec4 g_re = Vec4::Zero(), g_im = Vec4::Zero();      // complex type: grad R, grad I
};

EigenGradients eigen_gradients(const JetMat& Ginv, const JetMat& A) {
  Jet m1 = mu1_jet(A), m2 = mu2_jet(A);
  Jet disc = m1 * m1 - m2 * 4.0;
  double dv = disc.value();
  if (std::abs(dv) < 1e-10 * std::max(1.0, m1.value() * m1.value()))
    throw DomainError("singular spectrum: discriminant " + num(dv));
  EigenGradients e;
  if (dv > 0) {
    Jet q = sqrt(disc);
    Jet r = (m1 + q) * 0.5, s = (m1 - q) * 0.5;
    e.rho_re = r.value();
    e.sigma = s.value();
    e.g_rho = value(gradient(Ginv, r));
    e.g_sigma = value(gradient(Ginv, s));
  } else {
    e.complex = true;
    Jet q = sqrt(-disc);
    Jet R = m1 * 0.5, I = q * 0.5;
    e.rho_re = R.value();
    e.rho_im = I.value();
    e.g_re = value(gradient(Ginv, R));
    e.g_im = value(gradient(Ginv, I));
  }
  return e;
}

}  // namespace

double eigen_gradient_residual(const ParaKahlerTriple& t, const TensorField& A, const Point& p) {
  auto x = seed_point(p, 1 + std::max(t.loss(), A.loss));
  JetMat G = JetMat::from(t.g, x), Am = JetMat::from(A, x);
  EigenGradients e = eigen_gradients(inverse(G), Am);
  Mat4 a = Am.value4();
  double as = max_abs(a);
  auto inf = [](const Vec4& v) { return v.cwiseAbs().maxCoeff(); };
  if (!e.complex) {
    Vec4 r1 = a * e.g_rho - e.rho_re * e.g_rho, r2 = a * e.g_sigma - e.sigma * e.g_sigma;
    double s1 = std::max(as, std::abs(e.rho_re)) * inf(e.g_rho), s2 = std::max(as, std::abs(e.sigma)) * inf(e.g_sigma);
    return std::max(normalized(inf(r1), s1), normalized(inf(r2), s2));
  }
  // (A - rho)(gR + i gI) = 0, rho = R + iI; the sigma equation is its conjugate
  Vec4 re = a * e.g_re - e.rho_re * e.g_re + e.rho_im * e.g_im;
  Vec4 im = a * e.g_im - e.rho_re * e.g_im - e.rho_im * e.g_re;
  double s = std::max(as, std::hypot(e.rho_re, e.rho_im)) * std::max(inf(e.g_re), inf(e.g_im));
  return std::max(normalized(inf(re), s), normalized(inf(im), s));
}

TableRow classify_row(int rank, GradientClass a, GradientClass b) {
  using G = GradientClass;
  auto is = [&](G x, G y) { return (a == x && b == y) || (a == y && b == x); };
  switch (rank) {
    case 4:
      if (is(G::NonIsotropic, G::NonIsotropic)) return TableRow::Rank4Real;
      if (is(G::Complex, G::Complex)) return TableRow::Rank4Complex;
      break;
    case 3:
      if (is(G::IsotropicPlus, G::NonIsotropic)) return TableRow::Rank3PlusNonIso;
      if (is(G::IsotropicMinus, G::NonIsotropic)) return TableRow::Rank3MinusNonIso;
      break;
    case 2:
      if (is(G::NonIsotropic, G::Zero)) return TableRow::Rank2NonIsoZero;
      if (is(G::IsotropicPlus, G::IsotropicPlus)) return TableRow::Rank2PlusPlus;
      if (is(G::IsotropicMinus, G::IsotropicMinus)) return TableRow::Rank2MinusMinus;
      if (is(G::IsotropicPlus, G::IsotropicMinus)) return TableRow::Rank2PlusMinus;
      break;
    case 1:
      if (is(G::IsotropicPlus, G::Zero)) return TableRow::Rank1PlusZero;
      if (is(G::IsotropicMinus, G::Zero)) return TableRow::Rank1MinusZero;
      break;
    default: break;
  }
  return TableRow::Unknown;
}

DRank distribution_D_rank(const ParaKahlerTriple& t, const TensorField& A, const Point& p) {
  auto x = seed_point(p, 1 + std::max(t.loss(), A.loss));
  JetMat G = JetMat::from(t.g, x), T = JetMat::from(t.T, x), Am = JetMat::from(A, x);
  JetMat Gi = inverse(G);
  Mat4 g = G.value4(), tv = T.value4();
  Vec4 v1 = value(gradient(Gi, mu1_jet(Am))), v2 = value(gradient(Gi, mu2_jet(Am)));
  Mat4 M;
  M.col(0) = v1;
  M.col(1) = v2;
  M.col(2) = tv * v1;
  M.col(3) = tv * v2;
  Eigen::JacobiSVD<Mat4> svd(M);
  DRank out;
  Vec4 sv = svd.singularValues();
  for (int i = 0; i < 4; ++i) out.singular_values[i] = sv[i];
  const double top = sv[0];
  // a decision is ambiguous when the tested quantity is within 10x of its threshold
  auto decide = [&](double q, double thr) {
    if (q > thr / 10 && q < thr * 10) out.indeterminate = true;
    return q < thr;
  };
  if (top < 1e-12) {
    out.rank = 0;
  } else {
    for (int i = 0; i < 4; ++i)
      if (!decide(sv[i], 1e-8 * top)) ++out.rank;
  }

  EigenGradients e = eigen_gradients(Gi, Am);
  if (e.complex) {
    out.rho = out.sigma = GradientClass::Complex;
  } else {
    double zscale = std::max(1.0, top);
    auto classify = [&](const Vec4& v) {
      double nv = v.cwiseAbs().maxCoeff();
      if (decide(nv, 1e-8 * zscale)) return GradientClass::Zero;
      if (decide(((tv - kId) * v).cwiseAbs().maxCoeff() / nv, 1e-8)) return GradientClass::IsotropicPlus;
      if (decide(((tv + kId) * v).cwiseAbs().maxCoeff() / nv, 1e-8)) return GradientClass::IsotropicMinus;
      double gvv = std::abs(v.dot(g * v)) / (std::max(1.0, max_abs(g)) * nv * nv);
      if (decide(gvv, 1e-8)) {
        out.indeterminate = true;  // null but in neither eigendistribution
        return GradientClass::Indeterminate;
      }
      return GradientClass::NonIsotropic;
    };
    out.rho = classify(e.g_rho);
    out.sigma = classify(e.g_sigma);
  }
  out.row = classify_row(out.rank, out.rho, out.sigma);
  return out;
}

// ---- Ricci difference ----------------------------------------------------------------

double ricci_difference_residual(const TensorField& g, const TensorField& gh, const TensorField& T,
                                 const Point& p) {
  PairLocal l = make_pair(g, gh, p, 1);
  Mat4 ric = ricci(l.gam), rich = ricci(l.gamh);
  Mat4 tv = eval_matrix(T, p);
  Vec4 Psi = value(l.psi_d);
  Vec4 PsiT = tv.transpose() * Psi;
  Mat4 nabla = Mat4::Zero();
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      double v = l.psi_d[j].d(i);
      for (int k = 0; k < 4; ++k) v -= l.gam(k, i, j).value() * Psi[k];
      nabla(i, j) = v;
    }
  Mat4 pp = Psi * Psi.transpose(), qq = PsiT * PsiT.transpose();
  // factor 2(n+1) with n = 2
  Mat4 rhs = -6.0 * (nabla - pp - qq);
  double raw = max_abs(Mat4(rich - ric - rhs));
  return normalized(raw, max_of({max_abs(ric), max_abs(rich), 6 * max_abs(nabla), 6 * max_abs(pp), 6 * max_abs(qq)}));
}

double ricci_lambda_form_residual(const TensorField& g, const TensorField& A, const Point& p) {
  TensorField gh = companion_metric(g, A);
  auto x = seed_point(p, 2 + std::max(g.loss, A.loss));
  LocalMetric lg(g, x), lh(gh, x);
  JetMat Am = JetMat::from(A, x);
  JetVec L = scaled(gradient(lg.ginv, trace(Am)), 0.25);
  Vec4 Lv = value(L);
  Mat4 NL = Mat4::Zero();  // NL(m, i) = nabla_i Lambda^m
  for (int m = 0; m < 4; ++m)
    for (int i = 0; i < 4; ++i) {
      double v = L[m].d(i);
      for (int k = 0; k < 4; ++k) v += lg.gamma(m, i, k).value() * Lv[k];
      NL(m, i) = v;
    }
  Mat4 gv = lg.g.value4(), ai = Am.value4().inverse();
  Mat4 gai = gv * ai;
  double q = Lv.dot(gai * Lv);
  Mat4 u = 6.0 * (gai * NL).transpose(), w = 6.0 * q * gai.transpose();
  Mat4 ric = ricci(lg.gamma), rich = ricci(lh.gamma);
  double raw = max_abs(Mat4(rich - ric - u + w));
  return normalized(raw, max_of({max_abs(ric), max_abs(rich), max_abs(u), max_abs(w)}));
}

double nabla_a_norm(const TensorField& g, const TensorField& A, const Point& p) {
  auto x = seed_point(p, 1 + std::max(g.loss, A.loss));
  LocalMetric lm(g, x);
  auto nab = covariant_derivative_endo(lm.gamma, JetMat::from(A, x));
  double m = 0.0;
  for (const auto& n : nab) m = std::max(m, frobenius(n));
  return m;
}

}  // namespace pklab
