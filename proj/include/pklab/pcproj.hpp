// pc-projective machinery for a para-Kahler triple: the Benenti equation and
// its Hamiltonian 2-form version, companion metrics, psi / Psi, the weighted
// tensor sigma and its mobility equation, the (alpha, beta) family, eigenvalues
// and mu-invariants, canonical Killing fields, the distribution D and the
// Ricci-difference identity.
//
// Residuals are normalized: raw / max(scale, 1) with scale the largest term.
#pragma once

#include <array>
#include <complex>
#include <string>

#include "pklab/curvature.hpp"
#include "pklab/parakahler.hpp"

namespace pklab {

// ---- Lambda and the Benenti equation ---------------------------------------------
// Lambda = grad(tr A) / 4
Vec4 lambda_field(const TensorField& g, const TensorField& A, const Point& p);
// max over coordinate X and one fixed oblique X of |X(tr A) - 4 g(Lambda, X)|
double trace_duality_residual(const TensorField& g, const TensorField& A, const Point& p);

// nabla_X A = X^b (x) L + L^b (x) X - (TX)^b (x) TL - (TL)^b (x) TX over X = d_k
double benenti_residual(const ParaKahlerTriple& t, const TensorField& A, const Point& p);
// 2 nabla_X phi = d tau ^ (TX)^b - (T grad tau)^b ^ X^b with phi = g(AT., .),
// tau = -(1/2) omega^{ij} phi_ij (= tr A / 2)
double hamiltonian_form_residual(const ParaKahlerTriple& t, const TensorField& A, const Point& p);
double hamiltonian_trace(const ParaKahlerTriple& t, const TensorField& A, const Point& p);

// ---- companion metrics ---------------------------------------------------------------
// A = (det gh / det g)^(1/6) gh^-1 g; DomainError if the ratio is not positive
Mat4 a_from_pair(const Mat4& g, const Mat4& gh);
TensorField a_from_pair(const TensorField& g, const TensorField& gh);

// gh = (det A)^(-1/2) g A^-1 with the positive root; DomainError where det A <= 0
TensorField companion_metric(const TensorField& g, const TensorField& A);
// same, after checking det A > 0 on sample points of the box (ConstraintError)
TensorField companion_metric(const TensorField& g, const TensorField& A, const Box& box, int points = 200);

struct PsiPotential {
  double psi = 0.0;
  Vec4 dpsi = Vec4::Zero();
};
// psi = -log(det A) / 4
PsiPotential psi_potential(const TensorField& A, const Point& p);
// Psi(X) + g(Lambda, A^-1 X)
double psi_lambda_residual(const TensorField& g, const TensorField& A, const Point& p);
// adapted charts: det of the T+ block of A vs exp(-2 psi)
double sqrt_det_exp_residual(const TensorField& A, const Point& p);

// Gh - G = Psi_i d^k_j + Psi_j d^k_i + Psi_p T^p_i T^k_j + Psi_p T^p_j T^k_i
double connection_difference_residual(const TensorField& g, const TensorField& gh, const TensorField& T,
                                      const Point& p);
// Psi_i vs (Gh^j_ij - G^j_ij) / 6
double christoffel_trace_residual(const TensorField& g, const TensorField& gh, const Point& p);

// ---- weighted tensor sigma -------------------------------------------------------------
// sigma^ij = |det g|^(1/6) g^ij
Mat4 sigma_from_metric(const Mat4& g);
TensorField sigma_field(const TensorField& g);
// sigma_hat = A sigma(g), i.e. sigma_hat^jk = A^j_m sigma^mk
TensorField weighted_product(const TensorField& A, const TensorField& sigma);
// weighted covariant derivative of sigma(g) with the connection of g
double sigma_parallel_residual(const TensorField& g, const Point& p);
// T sigma + sigma T^t
double sigma_para_hermitian_residual(const TensorField& g, const TensorField& T, const Point& p);

// nabla_i s^jk - (d^j_i L^k + d^k_i L^j - T^j_i T^k_p L^p - T^k_i T^j_p L^p) / 4,
// L^k = nabla_l s^lk, with the connection of `metric`; [i*16 + j*4 + k]
Tensor3 mobility_tensor(const TensorField& metric, const TensorField& sigma_hat, const TensorField& T,
                        const Point& p);
double mobility_residual(const TensorField& metric, const TensorField& sigma_hat, const TensorField& T,
                         const Point& p);

// ---- the (alpha, beta) family --------------------------------------------------------
// A~ = beta A + alpha Id; g~ = g A~^-1 / mu2(A~), the signed root of det A~.
// (1,0) gives g, (0,1) gives sign(mu2(A)) times the companion metric.
TensorField family_metric(const TensorField& g, const TensorField& A, double alpha, double beta);
TensorField family_metric_from_pair(const TensorField& g, const TensorField& gh, double alpha, double beta);

struct FamilyConstant {
  double lambda_tilde = 0.0;
  double ricci_residual = 0.0;  // |Ric(g~) - lambda_tilde g~| / |g~|
  double mu2 = 0.0;             // mu2(A~) at the point
};
// lambda_hat is the Einstein constant of the (positive-root) companion metric gh
FamilyConstant einstein_family_constant(const TensorField& g, const TensorField& gh, double lambda,
                                        double lambda_hat, double alpha, double beta, const Point& p);

// ---- eigenvalues and mu-invariants -----------------------------------------------------
struct Spectrum {
  enum class Type { Real, Complex, Singular };
  Type type = Type::Singular;
  double mu1 = 0.0, mu2 = 0.0, discriminant = 0.0;
  std::complex<double> rho, sigma;  // rho: larger real root, or positive imaginary part
};
std::string to_string(Spectrum::Type t);

// mu1 = tr A / 2, mu2 = (mu1^2 - tr(A^2)/2) / 2
Spectrum eigen_decompose(const Mat4& A);
Spectrum eigen_decompose(const TensorField& A, const Point& p);
// t^2 - mu1 t + mu2
double mu_polynomial(const Mat4& A, double t);
Jet mu1_jet(const JetMat& A);
Jet mu2_jet(const JetMat& A);

// ---- canonical Killing fields and D ---------------------------------------------------
struct KillingFields {
  std::array<ScalarField, 2> mu;
  std::array<VectorField, 2> V;   // grad mu_i
  std::array<VectorField, 2> TV;  // T grad mu_i
};
KillingFields canonical_killing_fields(const ParaKahlerTriple& t, const TensorField& A);

// |A grad rho - rho grad rho| and the same for sigma (complex-linear in the complex case)
double eigen_gradient_residual(const ParaKahlerTriple& t, const TensorField& A, const Point& p);

struct DRank {
  int rank = 0;
  GradientClass rho = GradientClass::Indeterminate, sigma = GradientClass::Indeterminate;
  TableRow row = TableRow::Unknown;
  bool indeterminate = false;
  std::array<double, 4> singular_values{};
};
DRank distribution_D_rank(const ParaKahlerTriple& t, const TensorField& A, const Point& p);
TableRow classify_row(int rank, GradientClass a, GradientClass b);

// ---- Ricci difference ----------------------------------------------------------------
// Ric(gh) - Ric(g) + 6 (nabla Psi - Psi Psi - (Psi T)(Psi T))
double ricci_difference_residual(const TensorField& g, const TensorField& gh, const TensorField& T,
                                 const Point& p);
// Ric(gh) - Ric(g) - 6 g(A^-1 nabla_X Lambda, Y) + 6 g(A^-1 Lambda, Lambda) g(A^-1 X, Y)
double ricci_lambda_form_residual(const TensorField& g, const TensorField& A, const Point& p);

// max over k of the norm of nabla_k A (values)
double nabla_a_norm(const TensorField& g, const TensorField& A, const Point& p);

}  // namespace pklab
