#include "pklab/parakahler.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <sstream>

#include "pklab/curvature.hpp"
#include "pklab/errors.hpp"

namespace pklab {

std::string to_string(GradientClass c) {
  switch (c) {
    case GradientClass::Zero: return "zero";
    case GradientClass::IsotropicPlus: return "isotropic-T+";
    case GradientClass::IsotropicMinus: return "isotropic-T-";
    case GradientClass::NonIsotropic: return "non-isotropic";
    case GradientClass::Complex: return "complex";
    case GradientClass::Indeterminate: return "indeterminate";
  }
  return "?";
}

std::string to_string(TableRow r) {
  switch (r) {
    case TableRow::Rank4Real: return "rank4-real";
    case TableRow::Rank4Complex: return "rank4-complex";
    case TableRow::Rank3PlusNonIso: return "rank3-plus-noniso";
    case TableRow::Rank3MinusNonIso: return "rank3-minus-noniso";
    case TableRow::Rank2NonIsoZero: return "rank2-noniso-zero";
    case TableRow::Rank2PlusPlus: return "rank2-plus-plus";
    case TableRow::Rank2MinusMinus: return "rank2-minus-minus";
    case TableRow::Rank2PlusMinus: return "rank2-plus-minus";
    case TableRow::Rank1PlusZero: return "rank1-plus-zero";
    case TableRow::Rank1MinusZero: return "rank1-minus-zero";
    case TableRow::Unknown: return "unknown";
  }
  return "?";
}

int table_row_rank(TableRow r) {
  switch (r) {
    case TableRow::Rank4Real:
    case TableRow::Rank4Complex: return 4;
    case TableRow::Rank3PlusNonIso:
    case TableRow::Rank3MinusNonIso: return 3;
    case TableRow::Rank2NonIsoZero:
    case TableRow::Rank2PlusPlus:
    case TableRow::Rank2MinusMinus:
    case TableRow::Rank2PlusMinus: return 2;
    case TableRow::Rank1PlusZero:
    case TableRow::Rank1MinusZero: return 1;
    case TableRow::Unknown: return 0;
  }
  return 0;
}

int ParaKahlerTriple::loss() const {
  int l = std::max(g.loss, T.loss);
  if (A) l = std::max(l, A->loss);
  return l;
}

TensorField flat_neutral_metric() {
  Mat4 g = Mat4::Zero();
  g(0, 2) = g(2, 0) = 1.0;
  g(1, 3) = g(3, 1) = 1.0;
  return constant_tensor(0, 2, g, "flat neutral metric");
}

TensorField adapted_structure(bool negate) {
  Mat4 t = Mat4::Zero();
  double s = negate ? -1.0 : 1.0;
  t(0, 0) = t(1, 1) = s;
  t(2, 2) = t(3, 3) = -s;
  return constant_tensor(1, 1, t, negate ? "-T0" : "T0");
}

ParaKahlerTriple flat_triple(const Box& box) {
  ParaKahlerTriple t;
  t.chart = {box, "flat"};
  t.g = flat_neutral_metric();
  t.T = adapted_structure();
  t.meta.family = "flat";
  t.meta.flat = true;
  t.meta.adapted = true;
  return t;
}

Mat4 fundamental_form(const ParaKahlerTriple& t, const Point& p) {
  return eval_matrix(t.T, p).transpose() * eval_matrix(t.g, p);
}

TensorField fundamental_form_field(const TensorField& g, const TensorField& T) {
  TensorField w;
  w.up = 0;
  w.down = 2;
  w.loss = std::max(g.loss, T.loss);
  w.label = "omega";
  w.fn = [g, T](Coords x) { return (JetMat::from(T, x).transpose() * JetMat::from(g, x)).entries(); };
  return w;
}

VerificationReport validate(const ParaKahlerTriple& t, const SampleSpec& s) {
  auto pts = sample_points(t.chart.box, s.points, s.seed);
  const int n = static_cast<int>(pts.size());

  enum { TSq, Trace, ParaHerm, GSym, Sig, WAnti, WClosed, Nij, NablaT, Blocks, NChecks };
  struct PointResult {
    std::array<double, NChecks> r{};
    std::string err;
    bool near_degenerate = false;
  };
  std::vector<PointResult> res(n);

  parallel_for(n, [&](int k) {
    PointResult& out = res[k];
    try {
      auto x = seed_point(pts[k], t.seed_order(1));
      JetMat G = JetMat::from(t.g, x), T = JetMat::from(t.T, x);
      Mat4 g = G.value4(), tv = T.value4();
      const Mat4 I = Mat4::Identity();
      double ts = std::max(1.0, max_abs(tv));

      out.r[TSq] = normalized(frobenius(tv * tv - I), ts * ts);
      out.r[Trace] = normalized(std::abs(tv.trace()), ts);
      Mat4 ph = tv.transpose() * g * tv;
      out.r[ParaHerm] = normalized(frobenius(ph + g), std::max(max_abs(ph), max_abs(g)));
      out.r[GSym] = normalized(frobenius(g - g.transpose()), max_abs(g));

      Eigen::SelfAdjointEigenSolver<Mat4> es(0.5 * (g + g.transpose()));
      int pos = 0, neg = 0;
      for (int i = 0; i < 4; ++i) {
        double ev = es.eigenvalues()[i];
        if (std::abs(ev) < 1e-10)
          out.near_degenerate = true;
        else if (ev > 0)
          ++pos;
        else
          ++neg;
      }
      out.r[Sig] = (!out.near_degenerate && !(pos == 2 && neg == 2)) ? 1.0 : 0.0;

      JetMat W = T.transpose() * G;
      Mat4 w = W.value4();
      double ws = max_abs(w);
      out.r[WAnti] = normalized(frobenius(w + w.transpose()), ws);
      double dw = 0.0, dws = 0.0;
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
          for (int k2 = 0; k2 < 4; ++k2) {
            double a = W(j, k2).d(i), b = W(k2, i).d(j), c = W(i, j).d(k2);
            dw = std::max(dw, std::abs(a + b + c));
            dws = std::max({dws, std::abs(a), std::abs(b), std::abs(c)});
          }
      out.r[WClosed] = normalized(dw, dws);

      double nij = 0.0, nijs = 0.0;
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
          for (int k2 = 0; k2 < 4; ++k2) {
            double v = 0.0;
            for (int m = 0; m < 4; ++m) {
              double terms[4] = {T(m, j).value() * T(i, k2).d(m), -T(m, k2).value() * T(i, j).d(m),
                                 T(i, m).value() * T(m, j).d(k2), -T(i, m).value() * T(m, k2).d(j)};
              for (double q : terms) {
                v += q;
                nijs = std::max(nijs, std::abs(q));
              }
            }
            nij = std::max(nij, std::abs(v));
          }
      out.r[Nij] = normalized(nij, nijs);

      Connection gam = levi_civita(G);
      auto nt = covariant_derivative_endo(gam, T);
      double ntr = 0.0, nts = 0.0;
      for (int k2 = 0; k2 < 4; ++k2) {
        ntr = std::max(ntr, max_abs(nt[k2]));
        for (int i = 0; i < 4; ++i)
          for (int j = 0; j < 4; ++j) nts = std::max(nts, std::abs(T(i, j).d(k2)));
      }
      Tensor3 gv = gam.values();
      out.r[NablaT] = normalized(ntr, std::max(nts, max_abs(gv) * ts));

      if (t.meta.adapted) {
        // T+ = span(d1,d2), T- = span(d3,d4) must be isotropic
        double b = std::max(g.block<2, 2>(0, 0).cwiseAbs().maxCoeff(), g.block<2, 2>(2, 2).cwiseAbs().maxCoeff());
        out.r[Blocks] = normalized(b, max_abs(g));
      }
    } catch (const std::exception& e) {
      out.err = e.what();
    }
  });

  struct Spec {
    int id;
    const char* name;
    double tol;
    const char* anchor;
  };
  std::vector<Spec> specs = {
      {TSq, "parakahler.t_squared", 1e-11, "T^2 = Id"},
      {Trace, "parakahler.trace_free", 1e-11, "tr T = 0 (equal-dimensional eigendistributions)"},
      {ParaHerm, "parakahler.para_hermitian", 1e-10, "g(T.,T.) = -g"},
      {GSym, "parakahler.metric_symmetric", 1e-12, "g_ij = g_ji"},
      {Sig, "parakahler.signature", 0.5, "g has neutral signature (2,2)"},
      {WAnti, "parakahler.omega_antisymmetric", 1e-11, "omega = g(T.,.) is a 2-form"},
      {WClosed, "parakahler.omega_closed", 1e-9, "d omega = 0"},
      {Nij, "parakahler.nijenhuis", 1e-9, "Nijenhuis tensor of T vanishes"},
      {NablaT, "parakahler.nabla_t", 1e-9, "nabla T = 0"},
  };
  if (t.meta.adapted) specs.push_back({Blocks, "parakahler.isotropic_blocks", 1e-10, "T+ and T- are g-isotropic"});

  VerificationReport rep;
  for (const auto& sp : specs) {
    CheckAccumulator acc(sp.name, sp.tol, sp.anchor);
    for (const auto& r : res) {
      if (!r.err.empty()) {
        acc.error(r.err);
        continue;
      }
      if (sp.id == Sig && r.near_degenerate) {
        acc.flag("near-degenerate metric eigenvalue");
        acc.add(0.0);
        continue;
      }
      acc.add(r.r[sp.id]);
    }
    rep.add(acc.entry());
  }
  return rep;
}

bool null_coordinate_check(const ParaKahlerTriple& t, const SampleSpec& s) {
  Mat4 blk = Mat4::Zero();
  blk(0, 0) = blk(1, 1) = 1.0;
  blk(2, 2) = blk(3, 3) = -1.0;
  bool plus = true, minus = true;
  for (const auto& p : sample_points(t.chart.box, s.points, s.seed)) {
    Mat4 tv = eval_matrix(t.T, p);
    plus = plus && max_abs(tv - blk) < 1e-12;
    minus = minus && max_abs(tv + blk) < 1e-12;
  }
  return plus || minus;
}

}  // namespace pklab
