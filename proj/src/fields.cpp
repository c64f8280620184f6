#include "pklab/fields.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "pklab/errors.hpp"

namespace pklab {

bool Box::contains(const Point& p) const {
  for (int i = 0; i < kDim; ++i)
    if (!(p[i] > lo[i] && p[i] < hi[i])) return false;
  return true;
}

Point Box::center() const {
  Point c;
  for (int i = 0; i < kDim; ++i) c[i] = 0.5 * (lo[i] + hi[i]);
  return c;
}

std::string Box::to_string() const {
  std::ostringstream os;
  os.precision(17);
  for (int i = 0; i < kDim; ++i) os << (i ? "," : "") << lo[i] << ":" << hi[i];
  return os.str();
}

Box Box::parse(const std::string& text) {
  Box b;
  std::stringstream ss(text);
  std::string item;
  int i = 0;
  while (std::getline(ss, item, ',')) {
    if (i >= kDim) throw ConfigError("box \"" + text + "\": more than 4 intervals");
    auto colon = item.find(':');
    if (colon == std::string::npos) throw ConfigError("box \"" + text + "\": interval '" + item + "' lacks ':'");
    try {
      std::size_t u1 = 0, u2 = 0;
      std::string a = item.substr(0, colon), c = item.substr(colon + 1);
      b.lo[i] = std::stod(a, &u1);
      b.hi[i] = std::stod(c, &u2);
      if (a.find_first_not_of(" ", u1) != std::string::npos || c.find_first_not_of(" ", u2) != std::string::npos)
        throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw ConfigError("box \"" + text + "\": cannot parse interval '" + item + "'");
    }
    if (!std::isfinite(b.lo[i]) || !std::isfinite(b.hi[i]) || !(b.lo[i] < b.hi[i]))
      throw ConfigError("box \"" + text + "\": interval '" + item + "' is empty or infinite");
    ++i;
  }
  if (i != kDim) throw ConfigError("box \"" + text + "\": expected 4 intervals");
  return b;
}

JetVec seed_point(const Point& p, int order) {
  JetVec x;
  x.reserve(kDim);
  for (int i = 0; i < kDim; ++i) x.push_back(Jet::variable(i, p[i], kDim, order));
  return x;
}

namespace {

double radical_inverse(std::uint64_t k, std::uint64_t base) {
  double inv = 1.0 / static_cast<double>(base), f = inv, r = 0.0;
  while (k > 0) {
    r += f * static_cast<double>(k % base);
    k /= base;
    f *= inv;
  }
  return r;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

}  // namespace

std::vector<Point> sample_points(const Box& box, int n, std::uint64_t seed) {
  static const std::uint64_t bases[kDim] = {2, 3, 5, 7};
  std::uint64_t start = 1 + splitmix64(seed) % 4096;
  std::vector<Point> pts(static_cast<std::size_t>(std::max(n, 0)));
  for (int k = 0; k < n; ++k) {
    for (int i = 0; i < kDim; ++i) {
      double u = radical_inverse(start + static_cast<std::uint64_t>(k), bases[i]);
      pts[k][i] = box.lo[i] + u * (box.hi[i] - box.lo[i]);
    }
  }
  return pts;
}

// ---- JetMat ---------------------------------------------------------------

JetMat::JetMat(int n, JetVec entries) : n_(n), a_(std::move(entries)) {
  if (static_cast<int>(a_.size()) != n * n) throw std::invalid_argument("JetMat: wrong entry count");
}

JetMat JetMat::identity(int n, const Jet& proto) {
  JetVec e;
  e.reserve(n * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) e.push_back(Jet::constant(i == j ? 1.0 : 0.0, proto.dim(), proto.order()));
  return JetMat(n, std::move(e));
}

JetMat JetMat::from(const TensorField& f, Coords x) {
  if (f.up + f.down != 2) throw std::invalid_argument("JetMat::from: field '" + f.label + "' is not rank 2");
  return JetMat(kDim, f(x));
}

int JetMat::order() const {
  int o = a_.empty() ? -1 : a_[0].order();
  for (const auto& e : a_) o = std::min(o, e.order());
  return o;
}

JetMat JetMat::transpose() const {
  JetVec e(a_.size());
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j) e[j * n_ + i] = a_[i * n_ + j];
  return JetMat(n_, std::move(e));
}

JetMat JetMat::derivative(int k) const {
  JetVec e;
  e.reserve(a_.size());
  for (const auto& v : a_) e.push_back(v.derivative(k));
  return JetMat(n_, std::move(e));
}

Eigen::MatrixXd JetMat::value() const {
  Eigen::MatrixXd m(n_, n_);
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j) m(i, j) = a_[i * n_ + j].value();
  return m;
}

Mat4 JetMat::value4() const {
  if (n_ != 4) throw std::invalid_argument("JetMat::value4 on non-4x4 matrix");
  return value();
}

JetMat& JetMat::operator+=(const JetMat& o) {
  for (std::size_t k = 0; k < a_.size(); ++k) a_[k] += o.a_[k];
  return *this;
}
JetMat& JetMat::operator-=(const JetMat& o) {
  for (std::size_t k = 0; k < a_.size(); ++k) a_[k] -= o.a_[k];
  return *this;
}
JetMat& JetMat::operator*=(const Jet& s) {
  for (auto& v : a_) v *= s;
  return *this;
}
JetMat& JetMat::operator*=(double s) {
  for (auto& v : a_) v *= s;
  return *this;
}

JetMat operator*(const JetMat& a, const JetMat& b) {
  const int n = a.n_;
  JetVec e;
  e.reserve(n * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      Jet s = a(i, 0) * b(0, j);
      for (int k = 1; k < n; ++k) s += a(i, k) * b(k, j);
      e.push_back(std::move(s));
    }
  return JetMat(n, std::move(e));
}

JetVec mat_vec(const JetMat& m, const JetVec& v) {
  JetVec r;
  r.reserve(m.n());
  for (int i = 0; i < m.n(); ++i) {
    Jet s = m(i, 0) * v[0];
    for (int k = 1; k < m.n(); ++k) s += m(i, k) * v[k];
    r.push_back(std::move(s));
  }
  return r;
}

Jet trace(const JetMat& m) {
  Jet s = m(0, 0);
  for (int i = 1; i < m.n(); ++i) s += m(i, i);
  return s;
}

namespace {

// Laplace expansion along the first row over the listed rows/columns;
// fine for n <= 4 and well defined when the base point is singular
Jet det_rec(const JetMat& m, std::vector<int>& rows, std::vector<int>& cols) {
  if (rows.size() == 1) return m(rows[0], cols[0]);
  if (rows.size() == 2) return m(rows[0], cols[0]) * m(rows[1], cols[1]) - m(rows[0], cols[1]) * m(rows[1], cols[0]);
  int r0 = rows.front();
  std::vector<int> sub_rows(rows.begin() + 1, rows.end());
  Jet acc;
  bool first = true;
  for (std::size_t c = 0; c < cols.size(); ++c) {
    std::vector<int> sub_cols;
    for (std::size_t k = 0; k < cols.size(); ++k)
      if (k != c) sub_cols.push_back(cols[k]);
    Jet term = m(r0, cols[c]) * det_rec(m, sub_rows, sub_cols);
    if (c % 2) term = -term;
    if (first) {
      acc = std::move(term);
      first = false;
    } else {
      acc += term;
    }
  }
  return acc;
}

}  // namespace

Jet det(const JetMat& m) {
  std::vector<int> rows(m.n()), cols(m.n());
  for (int i = 0; i < m.n(); ++i) rows[i] = cols[i] = i;
  return det_rec(m, rows, cols);
}

JetMat inverse(const JetMat& m) {
  const int n = m.n();
  Eigen::MatrixXd v = m.value();
  double d = v.determinant();
  double scale = v.cwiseAbs().maxCoeff();
  if (!std::isfinite(d) || std::abs(d) <= 1e-14 * std::pow(std::max(scale, 1e-300), n)) {
    std::ostringstream os;
    os << "degenerate matrix: |det| = " << std::abs(d);
    throw DegenerateMetricError(os.str(), std::abs(d));
  }
  // Gauss-Jordan on jets, pivoting on base-point values
  JetMat a = m;
  JetMat inv = JetMat::identity(n, m(0, 0).truncated(m.order()));
  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int r = col + 1; r < n; ++r)
      if (std::abs(a(r, col).value()) > std::abs(a(piv, col).value())) piv = r;
    if (piv != col)
      for (int j = 0; j < n; ++j) {
        std::swap(a(piv, j), a(col, j));
        std::swap(inv(piv, j), inv(col, j));
      }
    Jet rp = reciprocal(a(col, col));
    for (int j = 0; j < n; ++j) {
      a(col, j) *= rp;
      inv(col, j) *= rp;
    }
    for (int r = 0; r < n; ++r) {
      if (r == col) continue;
      Jet f = a(r, col);
      if (f.value() == 0.0) {
        bool all_zero = true;
        for (double c : f.coeffs()) all_zero = all_zero && c == 0.0;
        if (all_zero) continue;
      }
      for (int j = 0; j < n; ++j) {
        a(r, j) -= f * a(col, j);
        inv(r, j) -= f * inv(col, j);
      }
    }
  }
  return inv;
}

Vec4 value(const JetVec& v) {
  Vec4 r;
  for (int i = 0; i < kDim; ++i) r[i] = v[i].value();
  return r;
}

JetVec differential(const Jet& f) {
  JetVec r;
  r.reserve(f.dim());
  for (int j = 0; j < f.dim(); ++j) r.push_back(f.derivative(j));
  return r;
}

JetVec gradient(const JetMat& ginv, const Jet& f) { return mat_vec(ginv, differential(f)); }

// ---- builders ---------------------------------------------------------------

TensorField constant_tensor(int up, int down, const Mat4& m, std::string label) {
  TensorField t;
  t.up = up;
  t.down = down;
  t.label = std::move(label);
  t.fn = [m](Coords x) {
    JetVec e;
    e.reserve(16);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) e.push_back(Jet::constant(m(i, j), x[0].dim(), x[0].order()));
    return e;
  };
  return t;
}

VectorField constant_vector(const Vec4& v, std::string label) {
  VectorField f;
  f.label = std::move(label);
  f.fn = [v](Coords x) {
    JetVec e;
    for (int i = 0; i < 4; ++i) e.push_back(Jet::constant(v[i], x[0].dim(), x[0].order()));
    return e;
  };
  return f;
}

ScalarField coordinate_function(int i) {
  ScalarField f;
  f.label = "x" + std::to_string(i + 1);
  f.fn = [i](Coords x) { return x[i]; };
  return f;
}

VectorField gradient_field(const TensorField& g, const ScalarField& f) {
  VectorField v;
  v.label = "grad " + f.label;
  v.loss = std::max(g.loss, f.loss + 1);
  v.fn = [g, f](Coords x) { return gradient(inverse(JetMat::from(g, x)), f(x)); };
  return v;
}

VectorField apply_endo(const TensorField& T, const VectorField& X) {
  VectorField v;
  v.label = T.label + "(" + X.label + ")";
  v.loss = std::max(T.loss, X.loss);
  v.fn = [T, X](Coords x) { return mat_vec(JetMat::from(T, x), X(x)); };
  return v;
}

ScalarField trace_field(const TensorField& A) {
  ScalarField s;
  s.label = "tr " + A.label;
  s.loss = A.loss;
  s.fn = [A](Coords x) { return trace(JetMat::from(A, x)); };
  return s;
}

// ---- point-level ------------------------------------------------------------

Mat4 eval_matrix(const TensorField& f, const Point& p) {
  auto x = seed_point(p, f.loss);
  return JetMat::from(f, x).value4();
}

Vec4 eval_vector(const VectorField& f, const Point& p) {
  auto x = seed_point(p, f.loss);
  return value(f(x));
}

double eval_scalar(const ScalarField& f, const Point& p) {
  auto x = seed_point(p, f.loss);
  return f(x).value();
}

Mat4 metric_inverse(const Mat4& g) {
  double d = g.determinant();
  double scale = g.cwiseAbs().maxCoeff();
  if (!std::isfinite(d) || std::abs(d) <= 1e-14 * std::pow(std::max(scale, 1e-300), 4)) {
    std::ostringstream os;
    os << "degenerate metric: |det g| = " << std::abs(d);
    throw DegenerateMetricError(os.str(), std::abs(d));
  }
  return g.inverse();
}

Mat4 metric_inverse(const TensorField& g, const Point& p) { return metric_inverse(eval_matrix(g, p)); }

Vec4 gradient(const TensorField& g, const ScalarField& f, const Point& p) {
  auto x = seed_point(p, 1 + std::max(g.loss, f.loss));
  Mat4 gi = metric_inverse(JetMat::from(g, x).value4());
  Jet fj = f(x);
  Vec4 df;
  for (int j = 0; j < 4; ++j) df[j] = fj.d(j);
  return gi * df;
}

Mat4 lie_derivative_metric(const TensorField& g, const VectorField& X, const Point& p) {
  auto x = seed_point(p, 1 + std::max(g.loss, X.loss));
  JetMat G = JetMat::from(g, x);
  JetVec V = X(x);
  Mat4 out;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      double s = 0.0;
      for (int k = 0; k < 4; ++k)
        s += V[k].value() * G(i, j).d(k) + G(k, j).value() * V[k].d(i) + G(i, k).value() * V[k].d(j);
      out(i, j) = s;
    }
  return out;
}

Mat4 lie_derivative_endo(const TensorField& T, const VectorField& X, const Point& p) {
  auto x = seed_point(p, 1 + std::max(T.loss, X.loss));
  JetMat M = JetMat::from(T, x);
  JetVec V = X(x);
  Mat4 out;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      double s = 0.0;
      for (int k = 0; k < 4; ++k)
        s += V[k].value() * M(i, j).d(k) - M(k, j).value() * V[i].d(k) + M(i, k).value() * V[k].d(j);
      out(i, j) = s;
    }
  return out;
}

Vec4 lie_bracket(const VectorField& X, const VectorField& Y, const Point& p) {
  auto x = seed_point(p, 1 + std::max(X.loss, Y.loss));
  JetVec a = X(x), b = Y(x);
  Vec4 out;
  for (int i = 0; i < 4; ++i) {
    double s = 0.0;
    for (int k = 0; k < 4; ++k) s += a[k].value() * b[i].d(k) - b[k].value() * a[i].d(k);
    out[i] = s;
  }
  return out;
}

Tensor3 exterior_derivative_2form(const TensorField& w, const Point& p) {
  auto x = seed_point(p, 1 + w.loss);
  JetMat W = JetMat::from(w, x);
  Mat4 v = W.value4();
  double asym = (v + v.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-12 * std::max(1.0, v.cwiseAbs().maxCoeff())) {
    std::ostringstream os;
    os << "exterior_derivative_2form: '" << w.label << "' is not antisymmetric (|w + w^T| = " << asym << ")";
    throw MalformedTensorError(os.str());
  }
  Tensor3 out{};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      for (int k = 0; k < 4; ++k) out[i * 16 + j * 4 + k] = W(j, k).d(i) + W(k, i).d(j) + W(i, j).d(k);
  return out;
}

Tensor3 nijenhuis(const TensorField& T, const Point& p) {
  auto x = seed_point(p, 1 + T.loss);
  JetMat M = JetMat::from(T, x);
  Tensor3 out{};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      for (int k = 0; k < 4; ++k) {
        double s = 0.0;
        for (int m = 0; m < 4; ++m) {
          s += M(m, j).value() * M(i, k).d(m) - M(m, k).value() * M(i, j).d(m);
          s += M(i, m).value() * (M(m, j).d(k) - M(m, k).d(j));
        }
        out[i * 16 + j * 4 + k] = s;
      }
  return out;
}

double frobenius(const Mat4& m) { return m.norm(); }

double frobenius(std::span<const double> a) {
  double s = 0.0;
  for (double v : a) s += v * v;
  return std::sqrt(s);
}

double max_abs(std::span<const double> a) {
  double s = 0.0;
  for (double v : a) s = std::max(s, std::abs(v));
  return s;
}

double max_abs(const Mat4& m) { return m.cwiseAbs().maxCoeff(); }

double normalized(double raw, double scale) { return raw / std::max(scale, 1.0); }

}  // namespace pklab
