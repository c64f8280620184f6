#include "pklab/catalog.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "pklab/errors.hpp"

namespace pklab {

namespace {

const std::vector<std::string> kCoordNames = {"x1", "x2", "x3", "x4"};
const std::vector<std::string> kWithPhi = {"x1", "x2", "x3", "x4", "phi"};

Jet zero_like(const Jet& j) { return Jet::constant(0.0, j.dim(), j.order()); }
Jet one_like(const Jet& j) { return Jet::constant(1.0, j.dim(), j.order()); }

JetVec zeros(const Jet& proto) { return JetVec(16, zero_like(proto)); }

void sym(JetVec& e, int i, int j, const Jet& v) {
  e[i * 4 + j] = v;
  e[j * 4 + i] = v;
}

ScalarField deriv(const ScalarField& f, int i) {
  ScalarField d;
  d.label = "d" + std::to_string(i + 1) + "(" + f.label + ")";
  d.loss = f.loss + 1;
  d.fn = [f, i](Coords x) { return f(x).derivative(i); };
  return d;
}

ScalarField difference(const ScalarField& a, const ScalarField& b) {
  ScalarField d;
  d.label = a.label + " - " + b.label;
  d.loss = std::max(a.loss, b.loss);
  d.fn = [a, b](Coords x) { return a(x) - b(x); };
  return d;
}

ScalarField shifted(const ScalarField& a, double c) {
  ScalarField d;
  d.label = a.label + " - " + std::to_string(c);
  d.loss = a.loss;
  d.fn = [a, c](Coords x) { return a(x) - c; };
  return d;
}

std::string point_string(const Point& p) {
  std::ostringstream os;
  os << "(" << p[0] << ", " << p[1] << ", " << p[2] << ", " << p[3] << ")";
  return os.str();
}

}  // namespace

std::string family_name(Family f) {
  switch (f) {
    case Family::RealLiouville: return "real-liouville";
    case Family::ComplexLiouville: return "complex-liouville";
    case Family::DimD2First: return "dim-d2-1";
    case Family::DimD2Second: return "dim-d2-2";
    case Family::DimD2SecondNeg: return "dim-d2-2neg";
    case Family::DimD2Fourth: return "dim-d2-4";
    case Family::DimD1: return "dim-d1";
    case Family::DimD1Neg: return "dim-d1neg";
  }
  return "?";
}

std::vector<Family> all_families() {
  return {Family::RealLiouville, Family::ComplexLiouville, Family::DimD2First, Family::DimD2Second,
          Family::DimD2SecondNeg, Family::DimD2Fourth, Family::DimD1, Family::DimD1Neg};
}

Family parse_family(const std::string& name) {
  for (Family f : all_families())
    if (family_name(f) == name) return f;
  std::string known;
  for (Family f : all_families()) known += (known.empty() ? "" : ", ") + family_name(f);
  throw ConfigError("unknown family '" + name + "' (known: " + known + ")");
}

void certify_box(const std::vector<Constraint>& cs, const Box& box, int points) {
  auto pts = sample_points(box, points, 0x5eedull);
  for (const auto& c : cs) {
    int sign = 0;
    for (const auto& p : pts) {
      double v;
      try {
        auto x = seed_point(p, c.f.loss);
        v = c.f(x).value();
      } catch (const std::exception& e) {
        throw ConstraintError(c.what + ": evaluation fails at " + point_string(p) + ": " + e.what());
      }
      if (!std::isfinite(v)) throw ConstraintError(c.what + ": non-finite value at " + point_string(p));
      if (c.must_vanish) {
        if (std::abs(v) > c.tol) {
          std::ostringstream os;
          os << c.what << " violated at " << point_string(p) << " (residual " << v << ")";
          throw ConstraintError(os.str());
        }
        continue;
      }
      int s = v > 1e-12 ? 1 : v < -1e-12 ? -1 : 0;
      if (s == 0 || (sign != 0 && s != sign)) {
        std::ostringstream os;
        os << c.what << " violated on the box " << box.to_string() << " near " << point_string(p) << " (value " << v
           << ")";
        throw ConstraintError(os.str());
      }
      sign = s;
    }
  }
}

ScalarField profile(const std::string& text, const std::vector<std::string>& allowed, const std::string& name) {
  Expression e = Expression::parse(text, kCoordNames);
  for (const auto& v : e.free_variables())
    if (std::find(allowed.begin(), allowed.end(), v) == allowed.end()) {
      std::string a;
      for (const auto& s : allowed) a += (a.empty() ? "" : ", ") + s;
      throw ConfigError("profile " + name + " = \"" + text + "\" depends on " + v + " (allowed: " + a + ")");
    }
  ScalarField f;
  f.label = name + " = " + text;
  f.fn = [e](Coords x) { return e.eval(x); };
  return f;
}

// ---- real Liouville ------------------------------------------------------------

ParaKahlerTriple build_real_liouville(const ScalarField& rho, const ScalarField& sigma, int eps, const Box& box) {
  if (eps != 1 && eps != -1) throw ConstraintError("real Liouville: eps must be +1 or -1");
  certify_box({{"rho != 0", rho},
               {"sigma != 0", sigma},
               {"rho' != 0", deriv(rho, 0)},
               {"sigma' != 0", deriv(sigma, 1)},
               {"rho != sigma", difference(rho, sigma)}},
              box);
  const int loss = 1 + std::max(rho.loss, sigma.loss);
  const double e = eps;

  auto metric = [rho, sigma, e](Coords x) {
    Jet r = rho(x), s = sigma(x);
    Jet rp = r.derivative(0), sp = s.derivative(1);
    Jet d = r - s;
    Jet id = reciprocal(d);
    Jet a = rp * rp, b = sp * sp * e;
    JetVec g = zeros(rp);
    g[0] = d;
    g[5] = d * e;
    g[10] = -(a + b) * id;
    sym(g, 2, 3, -(a * s + b * r) * id);
    g[15] = -(a * s * s + b * r * r) * id;
    return g;
  };
  auto omega = [rho, sigma](Coords x) {
    Jet r = rho(x), s = sigma(x);
    Jet rp = r.derivative(0), sp = s.derivative(1);
    JetVec w = zeros(rp);
    auto wedge = [&](int i, int j, const Jet& v) {
      w[i * 4 + j] = v;
      w[j * 4 + i] = -v;
    };
    wedge(0, 2, rp);
    wedge(0, 3, rp * s);
    wedge(1, 2, sp);
    wedge(1, 3, sp * r);
    return w;
  };

  ParaKahlerTriple t;
  t.chart = {box, "real Liouville"};
  t.g = {0, 2, metric, loss, "g"};
  // omega_ij = g_kj T^k_i  =>  T = (omega g^-1)^t
  t.T = {1, 1,
         [metric, omega](Coords x) {
           JetMat G(4, metric(x)), W(4, omega(x));
           return (W * inverse(G)).transpose().entries();
         },
         loss, "T"};
  t.A = TensorField{1, 1,
                    [rho, sigma](Coords x) {
                      Jet r = rho(x), s = sigma(x);
                      JetVec a = zeros(r);
                      a[0] = r;
                      a[5] = s;
                      a[10] = r + s;
                      a[11] = r * s;
                      a[14] = -one_like(r);
                      return a;
                    },
                    std::max(rho.loss, sigma.loss), "A"};
  t.meta.family = family_name(Family::RealLiouville);
  t.meta.params = {rho.label, sigma.label, "eps = " + std::to_string(eps)};
  t.meta.expected_rank = 4;
  t.meta.expected_row = TableRow::Rank4Real;
  return t;
}

// ---- complex Liouville ---------------------------------------------------------

namespace {

JetVec complex_liouville_metric(const ScalarField& Rf, const ScalarField& If, Coords x) {
  Jet R = Rf(x), I = If(x);
  Jet a = R.derivative(0), b = I.derivative(0);  // rho_z = a + i b
  Jet iI = reciprocal(I);
  Jet ab2 = a * b * 2.0;        // Im(rho_z^2)
  Jet re2 = a * a - b * b;      // Re(rho_z^2)
  JetVec g = zeros(a);
  sym(g, 0, 1, I);
  g[10] = ab2 * 4.0 * iI;
  sym(g, 2, 3, (ab2 * R - re2 * I) * 4.0 * iI);
  g[15] = (ab2 * (R * R - I * I) - re2 * R * I * 2.0) * 4.0 * iI;
  return g;
}

JetVec complex_liouville_omega(const ScalarField& Rf, const ScalarField& If, Coords x) {
  Jet R = Rf(x), I = If(x);
  Jet a = R.derivative(0), b = I.derivative(0);
  JetVec w = zeros(a);
  auto wedge = [&](int i, int j, const Jet& v) {
    w[i * 4 + j] = v;
    w[j * 4 + i] = -v;
  };
  // c = rho_z conj(rho) = (aR + bI) + i(bR - aI)
  wedge(0, 2, a * 2.0);
  wedge(1, 2, b * -2.0);
  wedge(0, 3, (a * R + b * I) * 2.0);
  wedge(1, 3, (b * R - a * I) * -2.0);
  return w;
}

// the (3,4) block must equal minus the leaf metric written with R, I and
// their x1, x2 derivatives
double complex_leaf_mismatch(const ScalarField& Rf, const ScalarField& If, const Point& p) {
  auto x = seed_point(p, 1 + std::max(Rf.loss, If.loss));
  Jet R = Rf(x), I = If(x);
  double r = R.value(), i = I.value(), r1 = R.d(0), r2 = R.d(1), i1 = I.d(0), i2 = I.d(1);
  double f = 4.0 / i;
  double gy00 = f * 2 * r1 * r2;
  double gy01 = f * (i * (r1 * i2 + r2 * i1) + 2 * r * r1 * r2);
  double gy11 = f * 2 * (r * r1 + i * i1) * (r * r2 + i * i2);
  JetMat G(4, complex_liouville_metric(Rf, If, x));
  Mat4 g = G.value4();
  double scale = std::max({1.0, std::abs(gy00), std::abs(gy01), std::abs(gy11)});
  double m = std::max({std::abs(g(2, 2) + gy00), std::abs(g(2, 3) + gy01), std::abs(g(3, 3) + gy11)});
  return m / scale;
}

}  // namespace

ParaKahlerTriple build_complex_liouville(const ScalarField& R, const ScalarField& I, const Box& box) {
  ScalarField cr1, cr2, mod2, modz2;
  cr1.loss = cr2.loss = modz2.loss = 1 + std::max(R.loss, I.loss);
  mod2.loss = std::max(R.loss, I.loss);
  cr1.fn = [R, I](Coords x) {
    Jet a = R(x), b = I(x);
    double s = std::max({1.0, std::abs(a.d(0)), std::abs(b.d(1))});
    return (a.derivative(0) - b.derivative(1)) / s;
  };
  cr2.fn = [R, I](Coords x) {
    Jet a = R(x), b = I(x);
    double s = std::max({1.0, std::abs(a.d(1)), std::abs(b.d(0))});
    return (a.derivative(1) + b.derivative(0)) / s;
  };
  mod2.fn = [R, I](Coords x) {
    Jet a = R(x), b = I(x);
    return a * a + b * b;
  };
  modz2.fn = [R, I](Coords x) {
    Jet a = R(x).derivative(0), b = I(x).derivative(0);
    return a * a + b * b;
  };
  certify_box({{"Cauchy-Riemann R_x1 = I_x2", cr1, true},
               {"Cauchy-Riemann R_x2 = -I_x1", cr2, true},
               {"I != 0", I},
               {"rho != 0", mod2},
               {"rho_z != 0", modz2}},
              box);

  for (const auto& p : sample_points(box, 8, 7)) {
    double m = complex_leaf_mismatch(R, I, p);
    if (!(m < 1e-9))
      throw std::logic_error("complex Liouville: real expansion disagrees with the leaf block form (" +
                             std::to_string(m) + ")");
  }

  const int loss = 1 + std::max(R.loss, I.loss);
  auto metric = [R, I](Coords x) { return complex_liouville_metric(R, I, x); };
  auto omega = [R, I](Coords x) { return complex_liouville_omega(R, I, x); };
  ParaKahlerTriple t;
  t.chart = {box, "complex Liouville"};
  t.g = {0, 2, metric, loss, "g"};
  t.T = {1, 1,
         [metric, omega](Coords x) {
           JetMat G(4, metric(x)), W(4, omega(x));
           return (W * inverse(G)).transpose().entries();
         },
         loss, "T"};
  t.A = TensorField{1, 1,
                    [R, I](Coords x) {
                      Jet r = R(x), i = I(x);
                      JetVec a = zeros(r);
                      a[0] = r;
                      a[1] = -i;
                      a[4] = i;
                      a[5] = r;
                      a[10] = r * 2.0;
                      a[11] = r * r + i * i;
                      a[14] = -one_like(r);
                      return a;
                    },
                    std::max(R.loss, I.loss), "A"};
  t.meta.family = family_name(Family::ComplexLiouville);
  t.meta.params = {R.label, I.label};
  t.meta.expected_rank = 4;
  t.meta.expected_row = TableRow::Rank4Complex;
  return t;
}

// ---- dim D = 2 ------------------------------------------------------------------

ParaKahlerTriple build_dimD2_case1(const ScalarField& rho, const ScalarField& mu, const ScalarField& nu, double c,
                                   const Box& box) {
  if (c == 0.0 || !std::isfinite(c)) throw ConstraintError("dim D=2 first family: c must be a nonzero real");
  certify_box({{"mu != 0", mu},
               {"rho' != 0", deriv(rho, 1)},
               {"nu_x4 != 0", deriv(nu, 3)},
               {"rho != c", shifted(rho, c)}},
              box);
  const int loss = 1 + std::max({rho.loss, mu.loss, nu.loss});
  ParaKahlerTriple t;
  t.chart = {box, "dim D=2 (1)"};
  t.g = {0, 2,
         [rho, mu, nu, c](Coords x) {
           Jet r = rho(x), m = mu(x), n = nu(x);
           Jet rp = r.derivative(1), n4 = n.derivative(3);
           Jet q = rp / m;
           JetVec g = zeros(rp);
           g[0] = q;
           sym(g, 0, 2, -(n * q));
           g[5] = -(m * rp);
           g[10] = n * n * q;
           sym(g, 2, 3, (c - r) * n4);
           return g;
         },
         loss, "g"};
  t.T = {1, 1,
         [mu, nu](Coords x) {
           Jet m = mu(x), n = nu(x);
           Jet im = reciprocal(m);
           JetVec T = zeros(m);
           T[1] = -m;
           T[2] = n;
           T[4] = -im;
           T[6] = n * im;
           T[10] = one_like(m);
           T[15] = -one_like(m);
           return T;
         },
         std::max(mu.loss, nu.loss), "T"};
  t.A = TensorField{1, 1,
                    [rho, nu, c](Coords x) {
                      Jet r = rho(x), n = nu(x);
                      JetVec a = zeros(r);
                      a[0] = a[5] = r;
                      a[10] = a[15] = one_like(r) * c;
                      a[2] = (c - r) * n;
                      return a;
                    },
                    std::max(rho.loss, nu.loss), "A"};
  t.meta.family = family_name(Family::DimD2First);
  t.meta.params = {rho.label, mu.label, nu.label, "c = " + std::to_string(c)};
  t.meta.expected_rank = 2;
  t.meta.expected_row = TableRow::Rank2NonIsoZero;
  return t;
}

ParaKahlerTriple build_dimD2_case2(const ScalarField& rho, const ScalarField& sigma, const Box& box, bool negate_T) {
  certify_box({{"rho != 0", rho},
               {"sigma != 0", sigma},
               {"rho' != 0", deriv(rho, 2)},
               {"sigma' != 0", deriv(sigma, 3)},
               {"rho != sigma", difference(rho, sigma)}},
              box);
  const int loss = 1 + std::max(rho.loss, sigma.loss);
  ParaKahlerTriple t;
  t.chart = {box, negate_T ? "dim D=2 (3)" : "dim D=2 (2)"};
  t.g = {0, 2,
         [rho, sigma](Coords x) {
           Jet r = rho(x), s = sigma(x);
           Jet rp = r.derivative(2), sp = s.derivative(3);
           JetVec g = zeros(rp);
           sym(g, 0, 2, rp);
           sym(g, 0, 3, sp);
           sym(g, 1, 2, s * rp);
           sym(g, 1, 3, r * sp);
           return g;
         },
         loss, "g"};
  t.T = adapted_structure(negate_T);
  t.A = TensorField{1, 1,
                    [rho, sigma](Coords x) {
                      Jet r = rho(x), s = sigma(x);
                      JetVec a = zeros(r);
                      a[0] = r + s;
                      a[1] = r * s;
                      a[4] = -one_like(r);
                      a[10] = r;
                      a[15] = s;
                      return a;
                    },
                    std::max(rho.loss, sigma.loss), "A"};
  t.meta.family = family_name(negate_T ? Family::DimD2SecondNeg : Family::DimD2Second);
  t.meta.params = {rho.label, sigma.label};
  t.meta.expected_rank = 2;
  t.meta.expected_row = negate_T ? TableRow::Rank2MinusMinus : TableRow::Rank2PlusPlus;
  t.meta.flat = true;
  t.meta.adapted = true;
  return t;
}

ParaKahlerTriple build_dimD2_case4(const ScalarField& rho, const ScalarField& sigma, double k, const Box& box) {
  if (!std::isfinite(k)) throw ConstraintError("dim D=2 fourth family: k must be finite");
  certify_box({{"rho != 0", rho},
               {"sigma != 0", sigma},
               {"rho' != 0", deriv(rho, 2)},
               {"sigma' != 0", deriv(sigma, 3)},
               {"rho != sigma", difference(rho, sigma)}},
              box);
  const int loss = 1 + std::max(rho.loss, sigma.loss);
  ParaKahlerTriple t;
  t.chart = {box, "dim D=2 (4)"};
  t.g = {0, 2,
         [rho, sigma](Coords x) {
           Jet r = rho(x), s = sigma(x);
           Jet rp = r.derivative(2), sp = s.derivative(3);
           JetVec g = zeros(rp);
           sym(g, 0, 2, rp);
           sym(g, 0, 3, -sp);
           sym(g, 1, 2, s * rp);
           sym(g, 1, 3, -(r * sp));
           return g;
         },
         loss, "g"};
  t.T = {1, 1,
         [rho, sigma](Coords x) {
           Jet r = rho(x), s = sigma(x);
           Jet id = reciprocal(r - s);
           JetVec T = zeros(r);
           T[0] = (r + s) * id;
           T[1] = r * s * id * 2.0;
           T[4] = id * -2.0;
           T[5] = -(r + s) * id;
           T[10] = -one_like(r);
           T[15] = one_like(r);
           return T;
         },
         std::max(rho.loss, sigma.loss), "T"};
  t.A = TensorField{1, 1,
                    [rho, sigma, k](Coords x) {
                      Jet r = rho(x), s = sigma(x);
                      Jet rp = r.derivative(2), sp = s.derivative(3);
                      Jet kd = reciprocal(r - s) * k;
                      JetVec a = zeros(rp);
                      a[0] = r + s;
                      a[1] = r * s;
                      a[2] = -(s * rp * kd);
                      a[3] = -(r * sp * kd);
                      a[4] = -one_like(rp);
                      a[6] = rp * kd;
                      a[7] = sp * kd;
                      a[10] = r;
                      a[15] = s;
                      return a;
                    },
                    loss, "A"};
  t.meta.family = family_name(Family::DimD2Fourth);
  t.meta.params = {rho.label, sigma.label, "k = " + std::to_string(k)};
  t.meta.expected_rank = 2;
  t.meta.expected_row = TableRow::Rank2PlusMinus;
  t.meta.flat = true;
  return t;
}

// ---- dim D = 1 ------------------------------------------------------------------

ParaKahlerTriple build_dimD1(const ScalarField& rho, const Expression& F, const ScalarField& phi, double c,
                             const Box& box, bool negate_T) {
  if (c == 0.0 || !std::isfinite(c)) throw ConstraintError("dim D=1 family: c must be a nonzero real");
  for (const auto& v : F.free_variables())
    if (v != "x2" && v != "phi") throw ConfigError("dim D=1 family: F may depend only on x2 and phi, not " + v);
  ScalarField Ff;
  Ff.label = "F = " + F.text();
  Ff.loss = phi.loss;
  Ff.fn = [F, phi](Coords x) {
    JetVec v(x.begin(), x.end());
    v.push_back(phi(x));
    return F.eval(v);
  };
  certify_box({{"rho != 0", rho},
               {"rho' != 0", deriv(rho, 2)},
               {"F_x4 != 0", deriv(Ff, 3)},
               {"rho != c", shifted(rho, c)}},
              box);
  const int loss = 1 + std::max(rho.loss, Ff.loss);
  ParaKahlerTriple t;
  t.chart = {box, negate_T ? "dim D=1 (2)" : "dim D=1 (1)"};
  t.g = {0, 2,
         [rho, Ff, c](Coords x) {
           Jet r = rho(x), f = Ff(x);
           Jet rp = r.derivative(2);
           Jet rc = r - c;
           JetVec g = zeros(rp);
           sym(g, 0, 2, rp);
           sym(g, 1, 2, (rc * f).derivative(2));
           sym(g, 1, 3, rc * f.derivative(3));
           return g;
         },
         loss, "g"};
  t.T = adapted_structure(negate_T);
  t.A = TensorField{1, 1,
                    [rho, Ff, c](Coords x) {
                      Jet r = rho(x), f = Ff(x);
                      Jet f3 = f.derivative(2), f4 = f.derivative(3);
                      JetVec a = zeros(f3);
                      a[0] = r;
                      a[1] = (r - c) * f;
                      a[5] = one_like(f3) * c;
                      a[10] = r;
                      a[14] = (c - r) * f3 / f4;
                      a[15] = one_like(f3) * c;
                      return a;
                    },
                    loss, "A"};
  t.meta.family = family_name(negate_T ? Family::DimD1Neg : Family::DimD1);
  t.meta.params = {rho.label, Ff.label, phi.label, "c = " + std::to_string(c)};
  t.meta.expected_rank = 1;
  t.meta.expected_row = negate_T ? TableRow::Rank1MinusZero : TableRow::Rank1PlusZero;
  t.meta.adapted = true;
  return t;
}

// ---- normal forms -----------------------------------------------------------------

namespace {

struct ParamSpec {
  std::string name;
  std::vector<std::string> vars;  // empty: constant
  std::string fallback;          // used when not given ("" = required or optional constant)
  bool required;
};

std::vector<ParamSpec> specs_for(Family f) {
  std::vector<ParamSpec> s;
  auto einstein = [&](std::initializer_list<const char*> names) {
    for (const char* n : names) s.push_back({n, {}, "", false});
  };
  switch (f) {
    case Family::RealLiouville:
      s = {{"rho", {"x1"}, "", true}, {"sigma", {"x2"}, "", true}, {"eps", {}, "1", false}};
      einstein({"lambda", "lambda_hat", "h", "k", "c1", "c2"});
      break;
    case Family::ComplexLiouville:
      s = {{"R", {"x1", "x2"}, "", true}, {"I", {"x1", "x2"}, "", true}};
      einstein({"lambda", "lambda_hat", "a", "h1", "h2", "d1", "d2"});
      break;
    case Family::DimD2First:
      s = {{"rho", {"x2"}, "", true},
           {"mu", {"x2"}, "", true},
           {"nu", {"x3", "x4"}, "", true},
           {"c", {}, "", true},
           {"f", {"x3"}, "0", false},
           {"h", {"x3"}, "0", false}};
      einstein({"lambda", "lambda_hat", "c1", "c2"});
      break;
    case Family::DimD2Second:
    case Family::DimD2SecondNeg:
      s = {{"rho", {"x3"}, "", true}, {"sigma", {"x4"}, "", true}};
      einstein({"lambda", "lambda_hat"});
      break;
    case Family::DimD2Fourth:
      s = {{"rho", {"x3"}, "", true}, {"sigma", {"x4"}, "", true}, {"k", {}, "1", false}};
      einstein({"lambda", "lambda_hat"});
      break;
    case Family::DimD1:
    case Family::DimD1Neg:
      s = {{"rho", {"x3"}, "", true},
           {"F", {"x2", "phi"}, "", true},
           {"phi", {"x3", "x4"}, "x3 + x4", false},
           {"c", {}, "", true}};
      einstein({"lambda", "lambda_hat"});
      break;
  }
  return s;
}

const ParamSpec& spec_of(Family f, const std::string& name, const std::vector<ParamSpec>& specs) {
  for (const auto& s : specs)
    if (s.name == name) return s;
  std::string a;
  for (const auto& s : specs) a += (a.empty() ? "" : ", ") + s.name;
  throw ConfigError("unknown parameter '" + name + "' for family " + family_name(f) + " (allowed: " + a + ")");
}

Box make_box(std::array<double, 4> lo, std::array<double, 4> hi) {
  Box b;
  b.lo = lo;
  b.hi = hi;
  return b;
}

std::string param_text(const NormalForm& nf, const ParamSpec& s) {
  if (auto it = nf.params.find(s.name); it != nf.params.end()) return it->second;
  if (s.required) throw ConfigError("family " + family_name(nf.family) + " needs parameter '" + s.name + "'");
  return s.fallback;
}

ScalarField profile_of(const NormalForm& nf, const std::string& name) {
  auto specs = specs_for(nf.family);
  const auto& s = spec_of(nf.family, name, specs);
  return profile(param_text(nf, s), s.vars, name);
}

}  // namespace

std::optional<double> NormalForm::constant(const std::string& name) const {
  auto it = params.find(name);
  if (it == params.end()) return std::nullopt;
  Expression e = Expression::parse(it->second, {});
  std::vector<double> none;
  return e.eval(std::span<const double>(none));
}

double NormalForm::constant_or(const std::string& name, double fallback) const {
  auto v = constant(name);
  return v ? *v : fallback;
}

std::vector<std::string> allowed_params(Family f) {
  std::vector<std::string> out;
  for (const auto& s : specs_for(f)) out.push_back(s.name);
  return out;
}

void set_param(NormalForm& nf, const std::string& name, const std::string& text) {
  auto specs = specs_for(nf.family);
  const auto& s = spec_of(nf.family, name, specs);
  if (s.vars.empty()) {
    Expression e = Expression::parse(text, {});
    if (!e.is_constant()) throw ConfigError("parameter '" + name + "' must be a constant");
  } else {
    Expression e = Expression::parse(text, name == "F" ? kWithPhi : kCoordNames);
    for (const auto& v : e.free_variables())
      if (std::find(s.vars.begin(), s.vars.end(), v) == s.vars.end()) {
        std::string a;
        for (const auto& q : s.vars) a += (a.empty() ? "" : ", ") + q;
        throw ConfigError("parameter " + name + " = \"" + text + "\" depends on " + v + " (allowed: " + a + ")");
      }
  }
  nf.params[name] = text;
}

std::vector<std::string> preset_names(Family f) {
  switch (f) {
    case Family::RealLiouville: return {"default", "einstein-lambda1", "companion-einstein"};
    case Family::ComplexLiouville: return {"default", "z-squared", "einstein-flat", "einstein-lambda1"};
    case Family::DimD2First: return {"default", "einstein"};
    case Family::DimD2Fourth: return {"default", "k0"};
    case Family::DimD1: return {"default", "flat"};
    default: return {"default"};
  }
}

NormalForm preset(Family f, const std::string& name) {
  NormalForm nf;
  nf.family = f;
  nf.preset = name;
  auto known = preset_names(f);
  if (std::find(known.begin(), known.end(), name) == known.end()) {
    std::string a;
    for (const auto& k : known) a += (a.empty() ? "" : ", ") + k;
    throw ConfigError("unknown preset '" + name + "' for family " + family_name(f) + " (known: " + a + ")");
  }
  auto& p = nf.params;
  switch (f) {
    case Family::RealLiouville:
      if (name == "default") {
        p = {{"rho", "x1"}, {"sigma", "x2"}, {"eps", "1"}};
        nf.box = make_box({2, 0.5, -0.5, -0.5}, {3, 1.5, 0.5, 0.5});
      } else if (name == "einstein-lambda1") {
        p = {{"rho", "-6/x1^2"}, {"sigma", "6/x2^2"}, {"eps", "1"}, {"lambda", "1"}, {"h", "0"},
             {"k", "0"},         {"c1", "0"},         {"c2", "0"},  {"lambda_hat", "0"}};
        nf.box = make_box({1.5, 0.5, -0.5, -0.5}, {2.5, 1.0, 0.5, 0.5});
      } else {
        // eps c1 + c2 = 0 with g Ricci-flat
        p = {{"rho", "x1"}, {"sigma", "x2"}, {"eps", "-1"}, {"lambda", "0"},        {"h", "0"},
             {"k", "0"},    {"c1", "3"},     {"c2", "3"},   {"lambda_hat", "1.5"}};
        nf.box = make_box({2, 0.5, -0.5, -0.5}, {3, 1.5, 0.5, 0.5});
      }
      break;
    case Family::ComplexLiouville:
      nf.box = make_box({0.5, 0.5, -0.5, -0.5}, {1.5, 1.5, 0.5, 0.5});
      if (name == "default") {
        p = {{"R", "x1"}, {"I", "x2"}};
      } else if (name == "z-squared") {
        p = {{"R", "x1^2 - x2^2"}, {"I", "2*x1*x2"}};
      } else if (name == "einstein-flat") {
        // rho = z solves rho_z^2 + d = 0 with d = -1
        p = {{"R", "x1"}, {"I", "x2"}, {"lambda", "0"}, {"a", "0"}, {"h1", "0"},
             {"h2", "0"}, {"d1", "-1"}, {"d2", "0"},    {"lambda_hat", "-6"}};
      } else {
        // rho = 24/(lambda z^2) solves rho_z^2 = lambda rho^3 / 6
        p = {{"R", "24*(x1^2 - x2^2)/(x1^2 + x2^2)^2"},
             {"I", "-48*x1*x2/(x1^2 + x2^2)^2"},
             {"lambda", "1"},
             {"a", "0"},
             {"h1", "0"},
             {"h2", "0"},
             {"d1", "0"},
             {"d2", "0"},
             {"lambda_hat", "0"}};
      }
      break;
    case Family::DimD2First:
      nf.box = make_box({-0.5, 2, 0.5, 1}, {0.5, 3, 1.5, 2});
      if (name == "default") {
        p = {{"rho", "x2"}, {"mu", "1"}, {"nu", "x3*x4"}, {"c", "1"}};
      } else {
        p = {{"rho", "x2"},
             {"mu", "3*(x2 - 1)/(2*(x2 - 1)^3 + 6*(x2 - 1)^2)"},
             {"nu", "1/(x3 + x4)"},
             {"c", "1"},
             {"lambda", "1"},
             {"c1", "0"},
             {"c2", "6"},
             {"f", "0"},
             {"h", "0"},
             {"lambda_hat", "-2"}};
      }
      break;
    case Family::DimD2Second:
    case Family::DimD2SecondNeg:
      p = {{"rho", "x3"}, {"sigma", "x4 + 2"}};
      nf.box = make_box({-0.5, -0.5, 0.5, 1}, {0.5, 0.5, 1.5, 2});
      break;
    case Family::DimD2Fourth:
      p = {{"rho", "x3"}, {"sigma", "x4 + 3"}, {"k", name == "k0" ? "0" : "1"}};
      nf.box = make_box({-0.5, -0.5, 0.5, 1}, {0.5, 0.5, 1.5, 2});
      break;
    case Family::DimD1:
    case Family::DimD1Neg:
      if (name == "flat") {
        // F = alpha(phi) beta(x2) + gamma(x2)
        p = {{"rho", "x3"}, {"F", "exp(phi)*x2 + x2^2"}, {"phi", "x3 + x4"}, {"c", "1"}, {"lambda", "0"}};
      } else {
        p = {{"rho", "x3"}, {"F", "x2*phi"}, {"phi", "x4"}, {"c", "1"}};
      }
      nf.box = make_box({-0.5, 1, 2, 0.5}, {0.5, 2, 3, 1.5});
      break;
  }
  return nf;
}

ParaKahlerTriple build(const NormalForm& nf) {
  auto specs = specs_for(nf.family);
  for (const auto& [k, v] : nf.params) spec_of(nf.family, k, specs);  // reject unknown names
  auto cst = [&](const std::string& n) {
    const auto& s = spec_of(nf.family, n, specs);
    Expression e = Expression::parse(param_text(nf, s), {});
    std::vector<double> none;
    return e.eval(std::span<const double>(none));
  };
  ParaKahlerTriple t;
  switch (nf.family) {
    case Family::RealLiouville: {
      double e = cst("eps");
      if (e != 1.0 && e != -1.0) throw ConstraintError("real Liouville: eps must be +1 or -1");
      t = build_real_liouville(profile_of(nf, "rho"), profile_of(nf, "sigma"), static_cast<int>(e), nf.box);
      break;
    }
    case Family::ComplexLiouville:
      t = build_complex_liouville(profile_of(nf, "R"), profile_of(nf, "I"), nf.box);
      break;
    case Family::DimD2First:
      t = build_dimD2_case1(profile_of(nf, "rho"), profile_of(nf, "mu"), profile_of(nf, "nu"), cst("c"), nf.box);
      break;
    case Family::DimD2Second:
    case Family::DimD2SecondNeg:
      t = build_dimD2_case2(profile_of(nf, "rho"), profile_of(nf, "sigma"), nf.box,
                            nf.family == Family::DimD2SecondNeg);
      break;
    case Family::DimD2Fourth:
      t = build_dimD2_case4(profile_of(nf, "rho"), profile_of(nf, "sigma"), cst("k"), nf.box);
      break;
    case Family::DimD1:
    case Family::DimD1Neg: {
      const auto& fs = spec_of(nf.family, "F", specs);
      Expression F = Expression::parse(param_text(nf, fs), kWithPhi);
      t = build_dimD1(profile_of(nf, "rho"), F, profile_of(nf, "phi"), cst("c"), nf.box,
                      nf.family == Family::DimD1Neg);
      if (nf.preset == "flat") t.meta.flat = true;
      break;
    }
  }
  return t;
}

// ---- Einstein systems -------------------------------------------------------------

double real_liouville_einstein_residual(const ScalarField& rho, const ScalarField& sigma, int eps,
                                        const RealLiouvilleConstants& k, const Point& p) {
  auto x = seed_point(p, 1 + std::max(rho.loss, sigma.loss));
  Jet r = rho(x), s = sigma(x);
  double rv = r.value(), sv = s.value(), rp = r.d(0), sp = s.d(1), e = eps;
  double t1[] = {3 * rp * rp, 2 * k.lambda * rv * rv * rv, 3 * k.k * rv * rv, 6 * k.h * rv, k.c1};
  double t2[] = {3 * sp * sp, e * 2 * k.lambda * sv * sv * sv, e * 3 * k.k * sv * sv, e * 6 * k.h * sv, k.c2};
  double r1 = t1[0] + t1[1] - t1[2] - t1[3] - t1[4];
  double r2 = t2[0] - t2[1] + t2[2] + t2[3] - t2[4];
  return std::max(normalized(std::abs(r1), max_abs(t1)), normalized(std::abs(r2), max_abs(t2)));
}

double complex_liouville_einstein_residual(const ScalarField& R, const ScalarField& I,
                                           const ComplexLiouvilleConstants& k, const Point& p) {
  using C = std::complex<double>;
  auto x = seed_point(p, 1 + std::max(R.loss, I.loss));
  Jet Rj = R(x), Ij = I(x);
  C rho(Rj.value(), Ij.value()), rz(Rj.d(0), Ij.d(0));
  C terms[] = {rz * rz, k.lambda / 6.0 * rho * rho * rho, k.a * rho * rho, 2.0 * k.h * rho, k.d};
  C e = terms[0] - terms[1] - terms[2] - terms[3] + terms[4];
  double scale = 0.0;
  for (const auto& t : terms) scale = std::max(scale, std::abs(t));
  return normalized(std::abs(e), scale);
}

double complex_liouville_derived_residual(const ScalarField& R, const ScalarField& I,
                                          const ComplexLiouvilleConstants& k, const Point& p) {
  auto x = seed_point(p, 2 + std::max(R.loss, I.loss));
  Jet Rj = R(x), Ij = I(x);
  double r = Rj.value(), i = Ij.value(), i1 = Ij.d(0), i2 = Ij.d(1), i11 = Ij.d(0, 0), i12 = Ij.d(0, 1);
  double L = k.lambda, a = k.a, h1 = k.h.real(), h2 = k.h.imag(), d1 = k.d.real(), d2 = k.d.imag();
  double f1[] = {h1 * i, L * r * r * i / 4, a * r * i, -L * i * i * i / 12, h2 * r, -d2 / 2};
  double f2[] = {-L * r * i * i / 2, L * r * r * r / 6, -a * i * i, a * r * r, -2 * h2 * i, 2 * h1 * r, -d1};
  double s1[] = {L * r * i / 2, a * i, h2};
  double s2[] = {L * r * r / 4, -L * i * i / 4, a * r, h1};
  auto sum = [](std::span<const double> v) {
    double s = 0.0;
    for (double q : v) s += q;
    return s;
  };
  double e1 = i1 * i2 - sum(f1), e2 = i2 * i2 - i1 * i1 - sum(f2), e3 = i11 - sum(s1), e4 = i12 - sum(s2);
  double m = 0.0;
  m = std::max(m, normalized(std::abs(e1), std::max(std::abs(i1 * i2), max_abs(f1))));
  m = std::max(m, normalized(std::abs(e2), std::max({i2 * i2, i1 * i1, max_abs(f2)})));
  m = std::max(m, normalized(std::abs(e3), std::max(std::abs(i11), max_abs(s1))));
  m = std::max(m, normalized(std::abs(e4), std::max(std::abs(i12), max_abs(s2))));
  return m;
}

double dimD2_first_einstein_residual(const ScalarField& rho, const ScalarField& mu, const ScalarField& nu,
                                     const DimD2FirstConstants& k, const Point& p) {
  int loss = 1 + std::max({rho.loss, mu.loss, nu.loss, k.f.fn ? k.f.loss : 0, k.h.fn ? k.h.loss : 0});
  auto x = seed_point(p, loss);
  Jet r = rho(x), n = nu(x);
  double rc = r.value() - k.c, rp = r.d(1), m = mu(x).value(), nv = n.value(), n3 = n.d(2);
  double f = k.f.fn ? k.f(x).value() : 0.0, h = k.h.fn ? k.h(x).value() : 0.0;
  double den = 2 * k.lambda * rc * rc * rc + k.c2 * rc * rc + k.c1;
  double target = 3 * rc * rp / den;
  double r1 = normalized(std::abs(m - target), std::max(std::abs(m), std::abs(target)));
  double t2[] = {n3, k.c2 * nv * nv / 6, f * nv, h};
  double r2 = normalized(std::abs(t2[0] + t2[1] - t2[2] - t2[3]), max_abs(t2));
  return std::max(r1, r2);
}

double einstein_system_residual(const NormalForm& nf, const Point& p) {
  auto need = [&](const std::string& n) {
    auto v = nf.constant(n);
    if (!v) throw ConfigError("Einstein system for " + family_name(nf.family) + " needs constant '" + n + "'");
    return *v;
  };
  switch (nf.family) {
    case Family::RealLiouville: {
      RealLiouvilleConstants k{need("lambda"), nf.constant_or("h", 0), nf.constant_or("k", 0), need("c1"),
                               need("c2")};
      return real_liouville_einstein_residual(profile_of(nf, "rho"), profile_of(nf, "sigma"),
                                              static_cast<int>(nf.constant_or("eps", 1)), k, p);
    }
    case Family::ComplexLiouville: {
      ComplexLiouvilleConstants k{need("lambda"), nf.constant_or("a", 0),
                                  {nf.constant_or("h1", 0), nf.constant_or("h2", 0)},
                                  {nf.constant_or("d1", 0), nf.constant_or("d2", 0)}};
      return complex_liouville_einstein_residual(profile_of(nf, "R"), profile_of(nf, "I"), k, p);
    }
    case Family::DimD2First: {
      DimD2FirstConstants k{need("lambda"), need("c"), need("c1"), need("c2"), profile_of(nf, "f"),
                            profile_of(nf, "h")};
      return dimD2_first_einstein_residual(profile_of(nf, "rho"), profile_of(nf, "mu"), profile_of(nf, "nu"), k, p);
    }
    default: throw ConfigError("no Einstein system for family " + family_name(nf.family));
  }
}

RealLiouvilleFit fit_real_liouville_constants(const ScalarField& rho, const ScalarField& sigma, int eps,
                                              double lambda, const std::vector<Point>& pts) {
  const int n = static_cast<int>(pts.size());
  Eigen::MatrixXd M(2 * n, 4);
  Eigen::VectorXd b(2 * n);
  const double e = eps;
  for (int q = 0; q < n; ++q) {
    auto x = seed_point(pts[q], 1 + std::max(rho.loss, sigma.loss));
    Jet r = rho(x), s = sigma(x);
    double rv = r.value(), sv = s.value(), rp = r.d(0), sp = s.d(1);
    // unknowns (k, h, c1, c2)
    M.row(2 * q) << -3 * rv * rv, -6 * rv, -1, 0;
    b(2 * q) = -(3 * rp * rp + 2 * lambda * rv * rv * rv);
    M.row(2 * q + 1) << 3 * e * sv * sv, 6 * e * sv, 0, -1;
    b(2 * q + 1) = -(3 * sp * sp - 2 * e * lambda * sv * sv * sv);
  }
  Eigen::VectorXd u = M.colPivHouseholderQr().solve(b);
  Eigen::VectorXd res = M * u - b;
  RealLiouvilleFit fit;
  fit.constants = {lambda, u(1), u(0), u(2), u(3)};
  for (int q = 0; q < n; ++q) {
    fit.residual_first = std::max(fit.residual_first, std::abs(res(2 * q)));
    fit.residual_second = std::max(fit.residual_second, std::abs(res(2 * q + 1)));
  }
  return fit;
}

std::optional<double> predicted_companion_constant(const NormalForm& nf) {
  if (!nf.constant("lambda")) return std::nullopt;
  double lambda = *nf.constant("lambda");
  switch (nf.family) {
    case Family::RealLiouville: {
      auto c1 = nf.constant("c1"), c2 = nf.constant("c2");
      if (!c1 || !c2) return std::nullopt;
      if (std::abs(nf.constant_or("eps", 1) * *c1 + *c2) > 1e-12) return std::nullopt;
      return 0.5 * *c1;
    }
    case Family::ComplexLiouville:
      if (nf.constant_or("h2", 0) != 0.0 || nf.constant_or("d2", 0) != 0.0) return std::nullopt;
      return 6.0 * nf.constant_or("d1", 0);
    case Family::DimD2First: {
      auto c1 = nf.constant("c1"), c2 = nf.constant("c2");
      if (!c1 || !c2 || *c1 != 0.0) return std::nullopt;
      double c = nf.constant_or("c", 1);
      return c * c * (lambda * c - 0.5 * *c2);
    }
    default: return std::nullopt;
  }
}

}  // namespace pklab
