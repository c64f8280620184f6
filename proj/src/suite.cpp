#include "pklab/suite.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <set>
#include <sstream>

#include "pklab/curvature.hpp"
#include "pklab/errors.hpp"
#include "pklab/pcproj.hpp"

namespace pklab {

namespace {

constexpr double kSkip = -1.0;  // "not applicable at this point", flagged

struct Spec {
  std::string name;
  double tol;
  std::string anchor;
  std::string skip_note = "not applicable at this point";
};

// evaluates fn at every point (in parallel) and accumulates one entry per spec
void over_points(VerificationReport& rep, const std::vector<Point>& pts, const std::vector<Spec>& specs,
                 const std::function<std::vector<double>(const Point&)>& fn) {
  const int n = static_cast<int>(pts.size());
  std::vector<std::vector<double>> res(n);
  std::vector<std::string> err(n);
  parallel_for(n, [&](int k) {
    try {
      res[k] = fn(pts[k]);
      if (res[k].size() != specs.size()) throw std::logic_error("residual count mismatch");
    } catch (const std::exception& e) {
      err[k] = e.what();
    }
  });
  for (size_t s = 0; s < specs.size(); ++s) {
    CheckAccumulator acc(specs[s].name, specs[s].tol, specs[s].anchor);
    for (int k = 0; k < n; ++k) {
      if (!err[k].empty()) {
        acc.error(err[k]);
      } else if (res[k][s] == kSkip) {
        acc.flag(specs[s].skip_note);
      } else {
        acc.add(res[k][s]);
      }
    }
    rep.add(acc.entry());
  }
}

TensorField shifted_by_identity(const TensorField& A, double t) {
  TensorField B = A;
  B.label = A.label + " - t Id";
  B.fn = [A, t](Coords x) {
    auto e = A(x);
    for (int i = 0; i < 4; ++i) e[i * 5] = e[i * 5] - t;
    return e;
  };
  return B;
}

// ---- groups --------------------------------------------------------------------------

void benenti_group(VerificationReport& rep, const ParaKahlerTriple& t, const std::vector<Point>& pts) {
  const TensorField& A = *t.A;
  TensorField shifted = shifted_by_identity(A, 2.5);
  KillingFields kf = canonical_killing_fields(t, A);
  // grad rho, grad sigma are complex conjugates in the complex case
  const bool real = t.meta.expected_row != TableRow::Rank4Complex;
  std::vector<Spec> specs = {
      {"benenti.equation", 1e-9, "nabla A = X^b(x)L + L^b(x)X - (TX)^b(x)TL - (TL)^b(x)TX"},
      {"benenti.hamiltonian_form", 1e-9, "phi = g(AT.,.) is a Hamiltonian 2-form"},
      {"benenti.hamiltonian_trace", 1e-10, "-(1/2) tr_omega phi = tr A / 2"},
      {"benenti.trace_duality", 1e-9, "Lambda = grad(tr A) / 4"},
      {"benenti.linearity", 1e-9, "A - t Id solves the same equation"},
      {"benenti.eigen_gradients", 1e-9, "A grad rho = rho grad rho, A grad sigma = sigma grad sigma"},
      {"benenti.non_parallel", 1.0, "A is not parallel: 1e-3 / |nabla A| < 1"},
  };
  if (real) specs.push_back({"benenti.eigen_orthogonal", 1e-9, "g(grad rho, grad sigma) = 0", "repeated eigenvalues"});
  over_points(rep, pts, specs, [&](const Point& p) {
    Mat4 a = eval_matrix(A, p);
    double tr = hamiltonian_trace(t, A, p);
    std::vector<double> r = {benenti_residual(t, A, p),
                             hamiltonian_form_residual(t, A, p),
                             normalized(std::abs(tr - 0.5 * a.trace()), std::abs(a.trace())),
                             trace_duality_residual(t.g, A, p),
                             benenti_residual(t, shifted, p),
                             eigen_gradient_residual(t, A, p),
                             1e-3 / std::max(nabla_a_norm(t.g, A, p), 1e-300)};
    if (!real) return r;
    Spectrum s = eigen_decompose(a);
    double gap = s.rho.real() - s.sigma.real();
    if (s.type != Spectrum::Type::Real || std::abs(gap) < 1e-6) {
      r.push_back(kSkip);
      return r;
    }
    // mu1 = rho + sigma, mu2 = rho sigma
    Vec4 v1 = eval_vector(kf.V[0], p), v2 = eval_vector(kf.V[1], p);
    double rho = s.rho.real(), sig = s.sigma.real();
    Vec4 gr = (rho * v1 - v2) / gap, gs = (v2 - sig * v1) / gap;
    Mat4 g = eval_matrix(t.g, p);
    r.push_back(normalized(std::abs(gr.dot(g * gs)), gr.norm() * gs.norm() * max_abs(g)));
    return r;
  });
}

void killing_group(VerificationReport& rep, const ParaKahlerTriple& t, const std::vector<Point>& pts) {
  KillingFields kf = canonical_killing_fields(t, *t.A);
  const bool rank4 = t.meta.expected_rank == 4;
  std::vector<Spec> specs = {
      {"killing.metric", 1e-9, "L_{TV_i} g = 0"},
      {"killing.hamiltonian", 1e-9, "omega(TV_i, .) = d mu_i"},
      {"killing.t_invariance_tv", 1e-9, "L_{TV_i} T = 0"},
      {"killing.t_invariance_v", 1e-9, "L_{V_i} T = 0"},
      {"killing.brackets", 1e-8, "V_1, V_2, TV_1, TV_2 mutually commute"},
      {"killing.d_orthogonal", 1e-9, "g(V_i, T V_j) = 0"},
  };
  if (rank4) specs.push_back({"killing.leaf_geodesic", 1e-8, "g(nabla_{V_i} V_j, T V_h) = 0 (leaves of D totally geodesic)"});
  over_points(rep, pts, specs, [&](const Point& p) {
    Mat4 g = eval_matrix(t.g, p), T = eval_matrix(t.T, p), w = fundamental_form(t, p);
    double gs = max_abs(g), ts = max_abs(T);
    std::array<Vec4, 4> f;  // V1, V2, TV1, TV2
    for (int i = 0; i < 2; ++i) {
      f[i] = eval_vector(kf.V[i], p);
      f[i + 2] = eval_vector(kf.TV[i], p);
    }
    double metric = 0, ham = 0, ttv = 0, tv = 0, br = 0, orth = 0, leaf = 0;
    auto x = seed_point(p, 1 + std::max({kf.mu[0].loss, kf.mu[1].loss, kf.V[0].loss, kf.V[1].loss}));
    for (int i = 0; i < 2; ++i) {
      double vs = std::max(f[i].norm(), f[i + 2].norm());
      metric = std::max(metric, normalized(max_abs(lie_derivative_metric(t.g, kf.TV[i], p)), gs * std::max(vs, 1.0)));
      Jet mu = kf.mu[i](x);
      Vec4 dmu(mu.d(0), mu.d(1), mu.d(2), mu.d(3));
      Vec4 lhs = w.transpose() * f[i + 2];
      ham = std::max(ham, normalized((lhs - dmu).cwiseAbs().maxCoeff(), std::max(lhs.cwiseAbs().maxCoeff(), dmu.cwiseAbs().maxCoeff())));
      ttv = std::max(ttv, normalized(max_abs(lie_derivative_endo(t.T, kf.TV[i], p)), ts * std::max(vs, 1.0)));
      tv = std::max(tv, normalized(max_abs(lie_derivative_endo(t.T, kf.V[i], p)), ts * std::max(vs, 1.0)));
      for (int j = 0; j < 2; ++j)
        orth = std::max(orth, normalized(std::abs(f[i].dot(g * f[j + 2])), gs * f[i].norm() * f[j + 2].norm()));
    }
    std::array<const VectorField*, 4> fields = {&kf.V[0], &kf.V[1], &kf.TV[0], &kf.TV[1]};
    double fs = 1.0;
    for (const auto& v : f) fs = std::max(fs, v.norm());
    for (int i = 0; i < 4; ++i)
      for (int j = i + 1; j < 4; ++j)
        br = std::max(br, normalized(lie_bracket(*fields[i], *fields[j], p).cwiseAbs().maxCoeff(), fs * fs));
    std::vector<double> r = {metric, ham, ttv, tv, br, orth};
    if (rank4) {
      LocalMetric lm(t.g, p, 1);
      std::array<JetVec, 2> vj = {kf.V[0](x), kf.V[1](x)};
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
          // nabla_{V_i} V_j = V_i^a d_a V_j + Gamma(V_i, V_j)
          Vec4 nab = Vec4::Zero();
          for (int k = 0; k < 4; ++k)
            for (int a = 0; a < 4; ++a) {
              nab[k] += f[i][a] * vj[j][k].d(a);
              for (int b = 0; b < 4; ++b) nab[k] += lm.gamma(k, a, b).value() * f[i][a] * f[j][b];
            }
          for (int h = 0; h < 2; ++h)
            leaf = std::max(leaf, normalized(std::abs(nab.dot(g * f[h + 2])), gs * std::max(nab.norm(), 1.0) * f[h + 2].norm()));
        }
      r.push_back(leaf);
    }
    return r;
  });
}

void rank_group(VerificationReport& rep, const ParaKahlerTriple& t, const std::vector<Point>& pts) {
  const int n = static_cast<int>(pts.size());
  std::vector<DRank> d(n);
  std::vector<std::string> err(n);
  parallel_for(n, [&](int k) {
    try {
      d[k] = distribution_D_rank(t, *t.A, pts[k]);
    } catch (const std::exception& e) {
      err[k] = e.what();
    }
  });
  CheckAccumulator rank("rank.D", 0.5, "rank of D = span(grad mu_1, grad mu_2, T grad mu_1, T grad mu_2) is " +
                                           std::to_string(t.meta.expected_rank));
  CheckAccumulator row("rank.table_row", 0.5, "gradient types match table row " + to_string(t.meta.expected_row));
  for (int k = 0; k < n; ++k) {
    if (!err[k].empty()) {
      rank.error(err[k]);
      row.error(err[k]);
      continue;
    }
    if (d[k].indeterminate) {
      rank.flag("singular value near the rank threshold");
      row.flag("singular value near the rank threshold");
    }
    rank.add(std::abs(d[k].rank - t.meta.expected_rank));
    row.add(d[k].row == t.meta.expected_row ? 0.0 : 1.0);
  }
  rep.add(rank.entry());
  rep.add(row.entry());
}

void companion_group(VerificationReport& rep, const ParaKahlerTriple& t, const TensorField& gh,
                     const std::vector<Point>& pts) {
  const TensorField& A = *t.A;
  TensorField sg = sigma_field(t.g), sh = weighted_product(A, sg), sgh = sigma_field(gh);
  TensorField flat = flat_neutral_metric();
  std::vector<Spec> specs = {
      {"companion.a_round_trip", 1e-10, "A = (det gh / det g)^(1/6) gh^-1 g recovers A"},
      {"companion.connection_difference", 1e-9, "Gh - G is built from Psi = d psi and T"},
      {"companion.christoffel_trace", 1e-9, "Psi_i = (Gh^j_ij - G^j_ij) / 6"},
      {"companion.psi_lambda", 1e-9, "Psi = -g(Lambda, A^-1 .)"},
      {"companion.sigma_parallel", 1e-9, "sigma(g), sigma(gh) are parallel weighted tensors"},
      {"companion.weighted_tensor", 1e-10, "sigma(gh) = A sigma(g)"},
      {"companion.mobility_g", 1e-9, "A sigma(g) solves the mobility equation for nabla^g"},
      {"companion.mobility_ghat", 1e-9, "A sigma(g) solves the mobility equation for nabla^gh"},
      {"companion.mobility_invariance", 1e-9, "mobility operator is the same for nabla^g and nabla^gh"},
      {"companion.negative_control", 1.0, "unrelated flat metric is not pc-equivalent: 1e-3 / residual < 1"},
  };
  if (t.meta.adapted) specs.push_back({"companion.sqrt_det", 1e-9, "det of the T+ block of A = exp(-2 psi)"});
  // a para-Hermitian weighted tensor that is not a solution
  TensorField bump{2, 0,
                   [sg](Coords x) {
                     auto e = sg(x);
                     Jet f = x[0] * x[2] * 0.1 + 1.0;
                     for (auto& v : e) v = v * f;
                     return e;
                   },
                   sg.loss, "f sigma"};
  over_points(rep, pts, specs, [&](const Point& p) {
    Mat4 a = eval_matrix(A, p), back = eval_matrix(a_from_pair(t.g, gh), p);
    Mat4 s_hat = eval_matrix(sh, p), s_gh = eval_matrix(sgh, p);
    double inv = 0.0, scale = 0.0;
    for (const TensorField* s : {&sh, &bump}) {
      Tensor3 m1 = mobility_tensor(t.g, *s, t.T, p), m2 = mobility_tensor(gh, *s, t.T, p);
      for (int k = 0; k < 64; ++k) {
        inv = std::max(inv, std::abs(m1[k] - m2[k]));
        scale = std::max({scale, std::abs(m1[k]), std::abs(m2[k])});
      }
    }
    std::vector<double> r = {
        normalized(max_abs(Mat4(back - a)), max_abs(a)),
        connection_difference_residual(t.g, gh, t.T, p),
        christoffel_trace_residual(t.g, gh, p),
        psi_lambda_residual(t.g, A, p),
        std::max(sigma_parallel_residual(t.g, p), sigma_parallel_residual(gh, p)),
        normalized(max_abs(Mat4(s_gh - s_hat)), max_abs(s_hat)),
        mobility_residual(t.g, sh, t.T, p),
        mobility_residual(gh, sh, t.T, p),
        normalized(inv, scale),
        1e-3 / std::max(connection_difference_residual(t.g, flat, t.T, p), 1e-300),
    };
    if (t.meta.adapted) r.push_back(sqrt_det_exp_residual(A, p));
    return r;
  });
}

void ricci_group(VerificationReport& rep, const ParaKahlerTriple& t, const TensorField& gh,
                 const std::vector<Point>& pts) {
  over_points(rep, pts,
              {{"ricci_diff.identity", 1e-8, "Ric(gh) - Ric(g) = -6 (nabla Psi - Psi Psi - (Psi T)(Psi T))"},
               {"ricci_diff.lambda_form", 1e-8, "Ric(gh) - Ric(g) in terms of Lambda and A^-1"}},
              [&](const Point& p) {
                return std::vector<double>{ricci_difference_residual(t.g, gh, t.T, p),
                                           ricci_lambda_form_residual(t.g, *t.A, p)};
              });
}

double relative_einstein(const TensorField& g, double lambda, const Point& p) {
  Mat4 gv = eval_matrix(g, p);
  return frobenius(einstein_residual(g, lambda, p)) / frobenius(gv);
}

bool has_system(Family f) {
  return f == Family::RealLiouville || f == Family::ComplexLiouville || f == Family::DimD2First;
}

std::optional<double> companion_constant(const NormalForm& nf) {
  if (auto c = predicted_companion_constant(nf)) return c;
  return nf.constant("lambda_hat");
}

void einstein_group(VerificationReport& rep, const NormalForm& nf, const ParaKahlerTriple& t, const TensorField& gh,
                    const std::vector<Point>& pts) {
  double lambda = *nf.constant("lambda");
  auto lh = companion_constant(nf);
  std::vector<Spec> specs = {{"einstein.metric", 1e-8, "|Ric(g) - lambda g| / |g| with lambda = " + std::to_string(lambda)}};
  if (has_system(nf.family)) specs.push_back({"einstein.system", 1e-9, "profiles solve the family's Einstein system"});
  if (lh) specs.push_back({"einstein.companion", 1e-8, "|Ric(gh) - lambda_hat gh| / |gh| with lambda_hat = " + std::to_string(*lh)});
  over_points(rep, pts, specs, [&](const Point& p) {
    std::vector<double> r = {relative_einstein(t.g, lambda, p)};
    if (has_system(nf.family)) r.push_back(einstein_system_residual(nf, p));
    if (lh) r.push_back(relative_einstein(gh, *lh, p));
    return r;
  });
}

// grid for the suite; the demo uses its own
const std::vector<std::pair<double, double>> kFamilyGrid = {{1, 0}, {0, 1}, {2, 1}, {1, -1}, {3, 2}, {-1, 0.5}};

bool near_degenerate(const Spectrum& s, double alpha, double beta) {
  double m2 = alpha * alpha + alpha * beta * s.mu1 + beta * beta * s.mu2;
  double scale = std::abs(alpha) + std::abs(beta) * std::max(std::abs(s.rho), std::abs(s.sigma));
  return std::abs(m2) < 1e-6 * std::max(1.0, scale * scale);
}

void family_group(VerificationReport& rep, const NormalForm& nf, const ParaKahlerTriple& t, const TensorField& gh,
                  const std::vector<Point>& pts) {
  double lambda = *nf.constant("lambda");
  double lh = *companion_constant(nf);
  const int n = static_cast<int>(pts.size()), m = static_cast<int>(kFamilyGrid.size());
  struct Cell {
    FamilyConstant fc;
    bool skip = false;
    std::string err;
  };
  std::vector<Cell> cells(n * m);
  std::vector<double> sign(n, 1.0);
  parallel_for(n * m, [&](int k) {
    int q = k / m, c = k % m;
    auto [al, be] = kFamilyGrid[c];
    try {
      Spectrum s = eigen_decompose(*t.A, pts[q]);
      if (c == 0) sign[q] = s.mu2 < 0 ? -1.0 : 1.0;
      if (near_degenerate(s, al, be)) {
        cells[k].skip = true;
        return;
      }
      cells[k].fc = einstein_family_constant(t.g, gh, lambda, lh, al, be, pts[q]);
    } catch (const std::exception& e) {
      cells[k].err = e.what();
    }
  });
  CheckAccumulator spread("family_einstein.spread", 1e-8, "lambda~ of every (alpha, beta) member is constant");
  CheckAccumulator ric("family_einstein.ricci", 1e-8, "Ric(g~) = lambda~ g~ for the family metrics");
  CheckAccumulator ends("family_einstein.endpoints", 1e-8, "(1,0) gives lambda, (0,1) gives lambda_hat");
  for (int c = 0; c < m; ++c) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo, sum = 0.0;
    int used = 0;
    for (int q = 0; q < n; ++q) {
      const Cell& cell = cells[q * m + c];
      if (!cell.err.empty()) {
        ric.error(cell.err);
        continue;
      }
      if (cell.skip) {
        ric.flag("det A~ near zero at a sample point");
        continue;
      }
      double l = cell.fc.lambda_tilde;
      lo = std::min(lo, l);
      hi = std::max(hi, l);
      sum += l;
      ++used;
      ric.add(cell.fc.ricci_residual);
      if (c == 0) ends.add(normalized(std::abs(l - lambda), std::abs(lambda)));
      if (c == 1) ends.add(normalized(std::abs(l - sign[q] * lh), std::abs(lh)));
    }
    if (used > 0) spread.add((hi - lo) / std::max(1.0, std::abs(sum / used)));
  }
  rep.add(spread.entry());
  rep.add(ric.entry());
  rep.add(ends.entry());
}

void flatness_group(VerificationReport& rep, const ParaKahlerTriple& t, const std::vector<Point>& pts) {
  over_points(rep, pts, {{"flatness.riemann", 1e-9, "Riemann tensor vanishes"}}, [&](const Point& p) {
    Tensor4 R = riemann(t.g, p);
    return std::vector<double>{max_abs(R)};
  });
}

void geodesic_group(VerificationReport& rep, const ParaKahlerTriple& t, const TensorField& gh, const Box& box,
                    std::uint64_t seed, std::vector<Curve>& curves) {
  const int ncurves = 10;
  Point c = box.center();
  Vec4 w;
  for (int i = 0; i < 4; ++i) w[i] = box.hi[i] - box.lo[i];
  auto starts = sample_points(box, ncurves, seed);
  auto dirs = sample_points(box, ncurves, seed + 7919);
  std::vector<Point> p0(ncurves);
  std::vector<Vec4> v0(ncurves);
  for (int k = 0; k < ncurves; ++k)
    for (int i = 0; i < 4; ++i) {
      p0[k][i] = c[i] + 0.4 * (starts[k][i] - c[i]);
      v0[k][i] = 0.1 * w[i] * 2.0 * (dirs[k][i] - c[i]) / w[i];
    }

  struct Out {
    Curve curve;
    double plan = 0, energy = 0, flat = 0;
    std::string err;
  };
  std::vector<Out> out(ncurves);
  TensorField flat = flat_neutral_metric();
  parallel_for(ncurves, [&](int k) {
    try {
      out[k].curve = integrate_geodesic(gh, box, p0[k], v0[k], 1e-3, 1000);
      out[k].plan = t_planarity_residual(t.g, t.T, out[k].curve);
      out[k].energy = energy_drift(gh, out[k].curve);
      // straight lines, fast enough to cross the box (they stop at its boundary)
      Curve cf = integrate_geodesic(flat, box, p0[k], Vec4(10.0 * v0[k]), 1e-3, 1000);
      out[k].flat = 1e-3 / std::max(t_planarity_residual(t.g, t.T, cf), 1e-300);
    } catch (const std::exception& e) {
      out[k].err = e.what();
    }
  });
  CheckAccumulator plan("geodesic.t_planarity", 1e-6, "companion geodesics are T-planar for (g, T)");
  CheckAccumulator energy("geodesic.energy_drift", 1e-8, "gh(v, v) is conserved along gh-geodesics");
  CheckAccumulator neg("geodesic.negative_control", 1.0, "flat-metric geodesics are not T-planar: 1e-3 / residual < 1");
  for (auto& o : out) {
    if (!o.err.empty()) {
      for (auto* a : {&plan, &energy, &neg}) a->error(o.err);
      continue;
    }
    if (o.curve.exited_box) plan.flag("curve left the box before N = 1000 steps");
    plan.add(o.plan);
    energy.add(o.energy);
    neg.add(o.flat);
    curves.push_back(std::move(o.curve));
  }
  rep.add(plan.entry());
  rep.add(energy.entry());
  rep.add(neg.entry());

  // a fast curve from the centre, so that truncation error dominates round-off
  CheckAccumulator order("geodesic.convergence_order", 0.5, "T-planarity residual decays like h^4 (|order - 4|)");
  Vec4 vc(0.2 * w[0], -0.15 * w[1], 0.3 * w[2], 0.25 * w[3]);
  try {
    std::optional<Convergence> cv;
    for (int attempt = 0; attempt < 4 && !cv; ++attempt, vc *= 0.5) {
      try {
        cv = planarity_convergence(gh, t.g, t.T, box, c, vc, {4e-3, 2e-3, 1e-3}, 0.4);
      } catch (const DomainError&) {
      }
    }
    if (!cv) throw DomainError("convergence curve leaves the box");
    for (size_t i = 0; i < cv->order.size(); ++i) {
      if (cv->residual[i] < 1e-11) {
        order.flag("residual at the round-off floor, order not observable");
        continue;
      }
      order.add(std::abs(cv->order[i] - 4.0));
    }
    if (order.entry().points == 0) order.add(0.0);
  } catch (const std::exception& e) {
    order.error(e.what());
  }
  rep.add(order.entry());
}

void apply_tolerances(VerificationReport& rep, const std::map<std::string, double>& tols) {
  // shorter keys first so that more specific overrides win
  std::vector<std::pair<std::string, double>> keys(tols.begin(), tols.end());
  std::stable_sort(keys.begin(), keys.end(), [](const auto& a, const auto& b) { return a.first.size() < b.first.size(); });
  for (auto [key, tol] : keys) {
    std::string prefix = key;
    std::replace(prefix.begin(), prefix.end(), '-', '_');
    bool hit = false;
    for (auto& e : rep.entries)
      if (e.name == prefix || e.name.rfind(prefix + ".", 0) == 0) {
        rep.set_tolerance(e, tol);
        hit = true;
      }
    if (!hit) throw ConfigError("tolerance override '" + key + "' matches no check");
  }
}

}  // namespace

const std::vector<std::string>& check_groups() {
  static const std::vector<std::string> g = {"parakahler", "benenti",  "killing",  "rank",
                                             "companion",  "ricci-diff", "einstein", "family-einstein",
                                             "flatness",   "geodesic"};
  return g;
}

void SuiteConfig::validate() const {
  const auto& all = check_groups();
  for (const auto& c : checks)
    if (std::find(all.begin(), all.end(), c) == all.end()) throw ConfigError("unknown check '" + c + "'");
  if (points < 1) throw ConfigError("sample count must be positive");
  for (const auto& [k, v] : tolerances)
    if (!(v > 0) || !std::isfinite(v)) throw ConfigError("tolerance for '" + k + "' must be positive");
}

std::vector<std::string> applicable_groups(const NormalForm& nf) {
  std::vector<std::string> g = {"parakahler", "benenti", "killing", "rank", "companion", "ricci-diff"};
  if (nf.constant("lambda")) {
    g.push_back("einstein");
    if (companion_constant(nf)) g.push_back("family-einstein");
  }
  if (build(nf).meta.flat) g.push_back("flatness");
  g.push_back("geodesic");
  return g;
}

SuiteResult run(const SuiteConfig& config) {
  auto start = std::chrono::steady_clock::now();
  config.validate();
  const NormalForm& nf = config.form;
  ParaKahlerTriple t = build(nf);

  std::vector<std::string> groups = config.checks.empty() ? applicable_groups(nf) : config.checks;
  std::set<std::string> want(groups.begin(), groups.end());
  if ((want.count("einstein") || want.count("family-einstein")) && !nf.constant("lambda"))
    throw ConfigError("einstein checks need a constant 'lambda' (use --param lambda=...)");
  if (want.count("family-einstein") && !companion_constant(nf))
    throw ConfigError("family-einstein needs the companion constant 'lambda_hat'");

  auto pts = sample_points(nf.box, config.points, config.seed);
  bool need_gh = want.count("companion") || want.count("ricci-diff") || want.count("einstein") ||
                 want.count("family-einstein") || want.count("geodesic");
  std::optional<TensorField> gh;
  if (need_gh) gh = companion_metric(t.g, *t.A, nf.box);

  SuiteResult res;
  VerificationReport& rep = res.report;
  if (want.count("parakahler")) rep.merge(validate(t, {config.points, config.seed}));
  if (want.count("benenti")) benenti_group(rep, t, pts);
  if (want.count("killing")) killing_group(rep, t, pts);
  if (want.count("rank")) rank_group(rep, t, pts);
  if (want.count("companion")) companion_group(rep, t, *gh, pts);
  if (want.count("ricci-diff")) ricci_group(rep, t, *gh, pts);
  if (want.count("einstein")) einstein_group(rep, nf, t, *gh, pts);
  if (want.count("family-einstein")) family_group(rep, nf, t, *gh, pts);
  if (want.count("flatness")) flatness_group(rep, t, pts);
  if (want.count("geodesic")) geodesic_group(rep, t, *gh, nf.box, config.seed, res.curves);
  apply_tolerances(rep, config.tolerances);
  rep.sort();

  nlohmann::ordered_json c;
  c["family"] = family_name(nf.family);
  c["preset"] = nf.preset;
  nlohmann::ordered_json params = nlohmann::ordered_json::object();
  for (const auto& [k, v] : nf.params) params[k] = v;
  c["params"] = params;
  c["box"] = nf.box.to_string();
  c["checks"] = std::vector<std::string>(want.begin(), want.end());
  c["points"] = config.points;
  c["seed"] = config.seed;
  nlohmann::ordered_json tol = nlohmann::ordered_json::object();
  for (const auto& [k, v] : config.tolerances) tol[k] = v;
  c["tolerances"] = tol;
  rep.config = c;
  rep.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return res;
}

// ---- demo ---------------------------------------------------------------------------------

VerificationReport EinsteinDemo::report() const {
  CheckAccumulator disc("demo.lambda_alpha_cubed", 1e-8, "lambda~ = lambda alpha^3 over the (alpha, beta) grid");
  CheckAccumulator spread("demo.spread", 1e-8, "lambda~ is the same at every sample point");
  CheckAccumulator ric("demo.ricci", 1e-8, "Ric(g~) = lambda~ g~");
  for (const auto& r : rows) {
    std::ostringstream os;
    os << "(" << r.alpha << "," << r.beta << ") " << r.note;
    if (r.skipped) {
      for (auto* a : {&disc, &spread, &ric}) a->flag(os.str());
      continue;
    }
    if (!r.note.empty())
      for (auto* a : {&disc, &spread, &ric}) a->flag(os.str());
    disc.add(r.discrepancy);
    spread.add(r.spread);
    ric.add(r.ricci_residual);
  }
  VerificationReport rep;
  rep.add(disc.entry());
  rep.add(ric.entry());
  rep.add(spread.entry());
  rep.sort();
  return rep;
}

EinsteinDemo demo_einstein(int points, std::uint64_t seed, const std::vector<double>& alphas,
                           const std::vector<double>& betas) {
  const std::vector<double> grid = {-2, -1, 0, 1, 2};
  const auto& as = alphas.empty() ? grid : alphas;
  const auto& bs = betas.empty() ? grid : betas;
  NormalForm nf = preset(Family::RealLiouville, "einstein-lambda1");
  ParaKahlerTriple t = build(nf);
  TensorField gh = companion_metric(t.g, *t.A, nf.box);
  EinsteinDemo demo;
  demo.lambda = *nf.constant("lambda");
  double lh = *companion_constant(nf);

  auto pts = sample_points(nf.box, points, seed);
  const int n = static_cast<int>(pts.size());
  std::vector<Spectrum> spec(n);
  parallel_for(n, [&](int q) { spec[q] = eigen_decompose(*t.A, pts[q]); });
  // dense scan for sign changes of mu2(A~)
  auto scan = sample_points(nf.box, 2000, seed + 1);
  std::vector<Spectrum> dense(scan.size());
  parallel_for(static_cast<int>(scan.size()), [&](int q) { dense[q] = eigen_decompose(*t.A, scan[q]); });

  for (double al : as)
    for (double be : bs) {
      DemoRow row;
      row.alpha = al;
      row.beta = be;
      row.expected = demo.lambda * al * al * al;
      std::vector<double> lt(n, 0.0), rr(n, 0.0);
      std::vector<char> use(n, 0);
      parallel_for(n, [&](int q) {
        if (near_degenerate(spec[q], al, be)) return;
        FamilyConstant fc = einstein_family_constant(t.g, gh, demo.lambda, lh, al, be, pts[q]);
        lt[q] = fc.lambda_tilde;
        rr[q] = fc.ricci_residual;
        use[q] = 1;
      });
      double lo = std::numeric_limits<double>::infinity(), hi = -lo, sum = 0.0;
      for (int q = 0; q < n; ++q) {
        if (!use[q]) continue;
        ++row.points;
        lo = std::min(lo, lt[q]);
        hi = std::max(hi, lt[q]);
        sum += lt[q];
        row.ricci_residual = std::max(row.ricci_residual, rr[q]);
      }
      if (row.points == 0) {
        row.skipped = true;
        row.note = "A~ degenerate at every sample point, skipped";
      } else {
        row.lambda_tilde = sum / row.points;
        row.spread = (hi - lo) / std::max(1.0, std::abs(row.lambda_tilde));
        row.discrepancy = std::abs(row.lambda_tilde - row.expected) / std::max(1.0, std::abs(row.expected));
        bool pos = false, neg = false;
        for (const auto& s : dense) {
          double m2 = al * al + al * be * s.mu1 + be * be * s.mu2;
          pos = pos || m2 > 0;
          neg = neg || m2 < 0;
        }
        if (pos && neg) row.note = "det A~ vanishes on a hypersurface in the box";
        if (row.points < n) row.note += (row.note.empty() ? "" : "; ") + std::to_string(n - row.points) + " point(s) dropped";
      }
      demo.rows.push_back(row);
    }
  return demo;
}

}  // namespace pklab
