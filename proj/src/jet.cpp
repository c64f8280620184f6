#include "pklab/jet.hpp"

#include <array>
#include <cmath>
#include <map>
#include <mutex>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "pklab/errors.hpp"

namespace pklab {

namespace detail {

struct MulEntry {
  std::uint32_t a, b, out;
};

struct DerivEntry {
  std::uint32_t src;
  double factor;
};

struct JetLayout {
  int dim = 0;
  int order = 0;
  std::vector<std::vector<int>> alphas;  // graded-lex
  std::vector<int> degree;
  std::vector<int> code_to_index;        // base (order+1) encoding
  std::vector<MulEntry> mul;
  std::shared_ptr<const JetLayout> lower;     // order-1, null at order 0
  std::vector<std::vector<DerivEntry>> deriv;  // per variable, indexed by lower slot

  int encode(std::span<const int> a) const {
    int c = 0, base = 1;
    for (int i = 0; i < dim; ++i) {
      c += a[i] * base;
      base *= order + 1;
    }
    return c;
  }
  int index_of(std::span<const int> a) const { return code_to_index[encode(a)]; }
};

namespace {

// all multi-indices of total degree n, lexicographically descending
void degree_block(int dim, int n, int pos, std::vector<int>& cur,
                  std::vector<std::vector<int>>& out) {
  if (pos == dim - 1) {
    cur[pos] = n;
    out.push_back(cur);
    return;
  }
  for (int a = n; a >= 0; --a) {
    cur[pos] = a;
    degree_block(dim, n - a, pos + 1, cur, out);
  }
  cur[pos] = 0;
}

std::shared_ptr<const JetLayout> build_layout(int dim, int order);

std::shared_ptr<const JetLayout> cached_layout(int dim, int order) {
  thread_local std::map<std::pair<int, int>, std::shared_ptr<const JetLayout>> local;
  auto key = std::make_pair(dim, order);
  if (auto it = local.find(key); it != local.end()) return it->second;

  static std::mutex m;
  static std::map<std::pair<int, int>, std::shared_ptr<const JetLayout>> global;
  std::shared_ptr<const JetLayout> lay;
  {
    std::lock_guard<std::mutex> lk(m);
    if (auto it = global.find(key); it != global.end()) lay = it->second;
  }
  if (!lay) {
    // built outside the lock; lower orders recurse through the cache
    auto built = build_layout(dim, order);
    std::lock_guard<std::mutex> lk(m);
    auto [it, inserted] = global.emplace(key, built);
    lay = it->second;
  }
  local.emplace(key, lay);
  return lay;
}

std::shared_ptr<const JetLayout> build_layout(int dim, int order) {
  auto lay = std::make_shared<JetLayout>();
  lay->dim = dim;
  lay->order = order;
  std::vector<int> cur(dim, 0);
  for (int n = 0; n <= order; ++n) {
    std::size_t before = lay->alphas.size();
    degree_block(dim, n, 0, cur, lay->alphas);
    for (std::size_t k = before; k < lay->alphas.size(); ++k) lay->degree.push_back(n);
  }
  std::size_t ncode = 1;
  for (int i = 0; i < dim; ++i) ncode *= static_cast<std::size_t>(order + 1);
  lay->code_to_index.assign(ncode, -1);
  for (std::size_t k = 0; k < lay->alphas.size(); ++k)
    lay->code_to_index[lay->encode(lay->alphas[k])] = static_cast<int>(k);

  const std::size_t n = lay->alphas.size();
  std::vector<int> sum(dim);
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) {
      if (lay->degree[a] + lay->degree[b] > order) continue;
      for (int i = 0; i < dim; ++i) sum[i] = lay->alphas[a][i] + lay->alphas[b][i];
      lay->mul.push_back({static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b),
                          static_cast<std::uint32_t>(lay->index_of(sum))});
    }
  }

  if (order > 0) {
    lay->lower = cached_layout(dim, order - 1);
    lay->deriv.resize(dim);
    for (int i = 0; i < dim; ++i) {
      for (const auto& beta : lay->lower->alphas) {
        std::vector<int> up = beta;
        up[i] += 1;
        lay->deriv[i].push_back(
            {static_cast<std::uint32_t>(lay->index_of(up)), static_cast<double>(up[i])});
      }
    }
  }
  return lay;
}

}  // namespace
}  // namespace detail

std::string to_string(Elementary f) {
  switch (f) {
    case Elementary::Exp: return "exp";
    case Elementary::Log: return "log";
    case Elementary::Sqrt: return "sqrt";
    case Elementary::Pow: return "pow";
    case Elementary::Sin: return "sin";
    case Elementary::Cos: return "cos";
    case Elementary::Reciprocal: return "reciprocal";
  }
  return "?";
}

std::size_t jet_size(int dim, int order) {
  // C(dim + order, dim)
  std::size_t r = 1;
  for (int k = 1; k <= dim; ++k) r = r * static_cast<std::size_t>(order + k) / static_cast<std::size_t>(k);
  return r;
}

Jet::Jet(int dim, int order) {
  if (dim < 1 || order < 0) throw std::invalid_argument("jet: bad dim/order");
  layout_ = detail::cached_layout(dim, order);
  c_.assign(layout_->alphas.size(), 0.0);
}

Jet Jet::constant(double value, int dim, int order) {
  Jet j(dim, order);
  j.c_[0] = value;
  return j;
}

Jet Jet::variable(int i, double value, int dim, int order) {
  if (i < 0 || i >= dim) throw std::out_of_range("seed_variable: index " + std::to_string(i) + " out of range");
  Jet j(dim, order);
  j.c_[0] = value;
  if (order >= 1) j.c_[1 + i] = 1.0;  // degree-1 block is e_0, e_1, ... in lex-descending order
  return j;
}

int Jet::dim() const { return layout_ ? layout_->dim : 0; }
int Jet::order() const { return layout_ ? layout_->order : -1; }

std::vector<int> Jet::multi_index(std::size_t k) const { return layout_->alphas.at(k); }

double Jet::coeff(std::span<const int> alpha) const {
  if (static_cast<int>(alpha.size()) != dim()) throw std::invalid_argument("jet: multi-index has wrong length");
  int n = 0;
  for (int a : alpha) {
    if (a < 0) throw std::invalid_argument("jet: negative multi-index");
    n += a;
  }
  if (n > order())
    throw std::out_of_range("jet: requested order " + std::to_string(n) + " exceeds truncation order " +
                            std::to_string(order()));
  return c_[layout_->index_of(alpha)];
}

double Jet::partial(std::span<const int> alpha) const {
  double f = 1.0;
  for (int a : alpha)
    for (int k = 2; k <= a; ++k) f *= k;
  return coeff(alpha) * f;
}

double Jet::d(int i) const {
  if (order() < 1) throw std::out_of_range("jet: first partial needs order >= 1");
  return c_[1 + i];
}

double Jet::d(int i, int j) const {
  std::array<int, 16> a{};
  if (dim() > 16) throw std::invalid_argument("jet: dim too large for d(i,j)");
  a[i] += 1;
  a[j] += 1;
  return partial(std::span<const int>(a.data(), dim()));
}

Jet Jet::derivative(int i) const {
  if (order() < 1) throw std::out_of_range("jet: cannot differentiate an order-0 jet");
  if (i < 0 || i >= dim()) throw std::out_of_range("jet: derivative index out of range");
  const auto& tab = layout_->deriv[i];
  std::vector<double> out(tab.size());
  for (std::size_t k = 0; k < tab.size(); ++k) out[k] = tab[k].factor * c_[tab[k].src];
  return Jet(layout_->lower, std::move(out));
}

Jet Jet::truncated(int ord) const {
  if (ord > order()) throw std::out_of_range("jet: cannot raise truncation order");
  if (ord == order()) return *this;
  auto lay = detail::cached_layout(dim(), ord);
  std::vector<double> out(c_.begin(), c_.begin() + static_cast<std::ptrdiff_t>(lay->alphas.size()));
  return Jet(lay, std::move(out));
}

namespace {
void check_compatible(const Jet& a, const Jet& b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("jet: empty operand");
  if (a.dim() != b.dim()) throw std::invalid_argument("jet: dimension mismatch");
}
}  // namespace

// mixed orders truncate to the lower one; the lower layout is a prefix
Jet& Jet::operator+=(const Jet& o) {
  check_compatible(*this, o);
  if (o.order() < order()) *this = truncated(o.order());
  for (std::size_t k = 0; k < c_.size(); ++k) c_[k] += o.c_[k];
  return *this;
}

Jet& Jet::operator-=(const Jet& o) {
  check_compatible(*this, o);
  if (o.order() < order()) *this = truncated(o.order());
  for (std::size_t k = 0; k < c_.size(); ++k) c_[k] -= o.c_[k];
  return *this;
}

Jet operator*(const Jet& a, const Jet& b) {
  check_compatible(a, b);
  const Jet& lo = a.order() <= b.order() ? a : b;
  const auto& lay = lo.layout_;
  std::vector<double> out(lay->alphas.size(), 0.0);
  const double* x = a.c_.data();
  const double* y = b.c_.data();
  for (const auto& e : lay->mul) out[e.out] += x[e.a] * y[e.b];
  return Jet(lay, std::move(out));
}

Jet& Jet::operator*=(const Jet& o) { return *this = *this * o; }
Jet& Jet::operator/=(const Jet& o) { return *this = *this * reciprocal(o); }
Jet operator/(const Jet& a, const Jet& b) { return a * reciprocal(b); }
Jet operator/(double s, const Jet& a) { return reciprocal(a) * s; }

Jet& Jet::operator+=(double s) {
  c_[0] += s;
  return *this;
}
Jet& Jet::operator-=(double s) {
  c_[0] -= s;
  return *this;
}
Jet& Jet::operator*=(double s) {
  for (auto& v : c_) v *= s;
  return *this;
}
Jet& Jet::operator/=(double s) {
  for (auto& v : c_) v /= s;
  return *this;
}
Jet Jet::operator-() const {
  Jet r = *this;
  for (auto& v : r.c_) v = -v;
  return r;
}

Jet compose(const Jet& x, std::span<const double> taylor) {
  const int K = x.order();
  if (static_cast<int>(taylor.size()) < K + 1) throw std::invalid_argument("compose: too few Taylor coefficients");
  Jet h = x;
  h.c_[0] = 0.0;
  Jet r = Jet::constant(taylor[K], x.dim(), K);
  for (int k = K - 1; k >= 0; --k) {
    r = r * h;
    r.c_[0] += taylor[k];
  }
  return r;
}

namespace {

[[noreturn]] void domain_fail(Elementary f, double c, const char* need) {
  std::ostringstream os;
  os << to_string(f) << ": constant term " << c << " outside domain (" << need << ")";
  throw DomainError(os.str());
}

bool is_integer(double r) { return std::isfinite(r) && r == std::floor(r); }

}  // namespace

Jet apply(Elementary f, const Jet& x, double r) {
  if (x.empty()) throw std::invalid_argument("jet: empty operand");
  const int K = x.order();
  const double c = x.value();
  if (!std::isfinite(c)) domain_fail(f, c, "finite");
  std::vector<double> t(K + 1);
  switch (f) {
    case Elementary::Exp: {
      double e = std::exp(c), fact = 1.0;
      for (int k = 0; k <= K; ++k) {
        if (k > 0) fact *= k;
        t[k] = e / fact;
      }
      break;
    }
    case Elementary::Log: {
      if (!(c > 0)) domain_fail(f, c, "> 0");
      t[0] = std::log(c);
      double p = 1.0;
      for (int k = 1; k <= K; ++k) {
        p *= c;
        t[k] = ((k % 2) ? 1.0 : -1.0) / (k * p);
      }
      break;
    }
    case Elementary::Sqrt:
    case Elementary::Pow:
    case Elementary::Reciprocal: {
      double e = f == Elementary::Sqrt ? 0.5 : f == Elementary::Reciprocal ? -1.0 : r;
      if (f == Elementary::Sqrt && !(c > 0)) domain_fail(f, c, "> 0");
      if (f == Elementary::Reciprocal && c == 0.0) domain_fail(f, c, "!= 0");
      if (f == Elementary::Pow) {
        if (is_integer(e)) {
          if (e < 0 && c == 0.0) domain_fail(f, c, "!= 0 for negative exponent");
        } else if (!(c > 0)) {
          domain_fail(f, c, "> 0 for non-integer exponent");
        }
      }
      // binomial series c^e * sum C(e,k) (h/c)^k
      double base = std::pow(c, e), binom = 1.0, ck = 1.0;
      for (int k = 0; k <= K; ++k) {
        if (k > 0) {
          binom *= (e - (k - 1)) / k;
          ck *= c;
        }
        t[k] = base * binom / ck;
      }
      break;
    }
    case Elementary::Sin:
    case Elementary::Cos: {
      double s = std::sin(c), co = std::cos(c), fact = 1.0;
      // derivative cycle starting at sin: sin, cos, -sin, -cos
      const double cyc_sin[4] = {s, co, -s, -co};
      const double cyc_cos[4] = {co, -s, -co, s};
      for (int k = 0; k <= K; ++k) {
        if (k > 0) fact *= k;
        t[k] = (f == Elementary::Sin ? cyc_sin[k % 4] : cyc_cos[k % 4]) / fact;
      }
      break;
    }
  }
  return compose(x, t);
}

Jet ipow(const Jet& x, int n) {
  if (n < 0) return ipow(reciprocal(x), -n);
  Jet result = Jet::constant(1.0, x.dim(), x.order());
  Jet b = x;
  while (n > 0) {
    if (n & 1) result = result * b;
    n >>= 1;
    if (n) b = b * b;
  }
  return result;
}

Jet pow(const Jet& x, double r) {
  if (is_integer(r) && std::abs(r) <= 64) return ipow(x, static_cast<int>(r));
  return apply(Elementary::Pow, x, r);
}

}  // namespace pklab
