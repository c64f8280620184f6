#include "pklab/ad_check.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "pklab/expression.hpp"
#include "pklab/fields.hpp"

namespace pklab {

namespace {

const std::vector<std::string> kNames = {"x1", "x2", "x3", "x4"};

std::string gen(std::mt19937_64& rng, int depth) {
  std::uniform_int_distribution<int> pick(0, 99);
  std::uniform_real_distribution<double> cst(0.5, 2.0);
  std::ostringstream os;
  os.precision(6);
  if (depth == 0 || pick(rng) < 20) {
    if (pick(rng) < 75) return kNames[pick(rng) % 4];
    os << cst(rng);
    return os.str();
  }
  std::string a = gen(rng, depth - 1);
  switch (pick(rng) % 11) {
    case 0: return "(" + a + " + " + gen(rng, depth - 1) + ")";
    case 1: return "(" + a + " - " + gen(rng, depth - 1) + ")";
    case 2: return "(" + a + ")*(" + gen(rng, depth - 1) + ")";
    case 3: return "exp(0.5*sin(" + a + "))";
    case 4: return "log(2 + cos(" + a + "))";
    case 5: return "sqrt(1 + (" + a + ")^2)";
    case 6: return "(1 + (" + a + ")^2)^(-0.5)";
    case 7: return "1/(2 + sin(" + a + "))";
    case 8: return "(2 + cos(" + a + "))^1.7";
    case 9: return "sin(" + a + ")";
    default: return "cos(" + a + ")*" + gen(rng, depth - 1);
  }
}

double plain(const Expression& e, Point p) { return e.eval(std::span<const double>(p.data(), 4)); }

Jet jet_at(const Expression& e, const Point& p, int order) {
  auto x = seed_point(p, order);
  return e.eval(x);
}

}  // namespace

std::string random_composition(std::uint64_t seed, int depth) {
  std::mt19937_64 rng(seed);
  return gen(rng, depth);
}

AdCheckResult jet_fd_agreement(int compositions, std::uint64_t seed, double h) {
  AdCheckResult res;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coord(-1.0, 1.0);
  auto record = [&](double jet, double fd, const std::string& what) {
    double err = std::abs(jet - fd) / std::max(1.0, std::abs(fd));
    ++res.comparisons;
    if (err > res.max_error || !std::isfinite(err)) {
      res.max_error = std::isfinite(err) ? err : INFINITY;
      res.worst = what;
    }
  };
  for (int c = 0; c < compositions; ++c) {
    std::string text = gen(rng, 3);
    Expression e = Expression::parse(text, kNames);
    Point p;
    for (auto& v : p) v = coord(rng);
    Jet f = jet_at(e, p, 3);
    ++res.compositions;

    auto shifted = [&](int i, double s) {
      Point q = p;
      q[i] += s;
      return q;
    };
    for (int i = 0; i < 4; ++i) {
      double fd = (plain(e, shifted(i, h)) - plain(e, shifted(i, -h))) / (2 * h);
      record(f.d(i), fd, text + " d" + std::to_string(i));
    }
    for (int i = 0; i < 4; ++i) {
      Jet fp = jet_at(e, shifted(i, h), 1), fm = jet_at(e, shifted(i, -h), 1);
      for (int j = i; j < 4; ++j)
        record(f.d(i, j), (fp.d(j) - fm.d(j)) / (2 * h),
               text + " d" + std::to_string(i) + std::to_string(j));
    }
    for (int i = 0; i < 4; ++i) {
      Jet fp = jet_at(e, shifted(i, h), 2), fm = jet_at(e, shifted(i, -h), 2);
      for (int j = i; j < 4; ++j)
        for (int k = j; k < 4; ++k) {
          std::array<int, 4> a{};
          a[i] += 1;
          a[j] += 1;
          a[k] += 1;
          record(f.partial(a), (fp.d(j, k) - fm.d(j, k)) / (2 * h),
                 text + " d" + std::to_string(i) + std::to_string(j) + std::to_string(k));
        }
    }
  }
  return res;
}

}  // namespace pklab
