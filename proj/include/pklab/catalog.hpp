// Normal-form constructors for the para-Kahler surfaces with a
// non-parallel Benenti tensor, named presets, and the Einstein systems.
//
// Families and their profile parameters:
//   real-liouville     rho(x1) sigma(x2) eps=+-1
//   complex-liouville  R(x1,x2) I(x1,x2), rho = R + iI holomorphic in z = x1 + i x2
//   dim-d2-1           rho(x2) mu(x2) nu(x3,x4) c != 0          (sigma = c)
//   dim-d2-2[neg]      rho(x3) sigma(x4)                        (T or -T)
//   dim-d2-4           rho(x3) sigma(x4) k
//   dim-d1[neg]        rho(x3) F(x2,phi) phi(x3,x4) c != 0      (sigma = c)
#pragma once

#include <complex>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pklab/expression.hpp"
#include "pklab/parakahler.hpp"

namespace pklab {

enum class Family { RealLiouville, ComplexLiouville, DimD2First, DimD2Second, DimD2SecondNeg, DimD2Fourth, DimD1, DimD1Neg };

std::string family_name(Family f);
Family parse_family(const std::string& name);  // ConfigError on unknown names
std::vector<Family> all_families();

// a profile must be nonzero (constant sign) on the box, or vanish (e.g. the
// Cauchy-Riemann residual)
struct Constraint {
  std::string what;
  ScalarField f;
  bool must_vanish = false;
  double tol = 1e-10;  // for must_vanish, relative to max(1, |terms|)
};

// dense Halton scan of the box (feasibility certificate); throws ConstraintError
void certify_box(const std::vector<Constraint>& cs, const Box& box, int points = 10000);

// profile from an expression in x1..x4; every free variable must be in allowed
ScalarField profile(const std::string& text, const std::vector<std::string>& allowed, const std::string& name);

// ---- constructors (throw ConstraintError) ---------------------------------------
ParaKahlerTriple build_real_liouville(const ScalarField& rho, const ScalarField& sigma, int eps, const Box& box);
ParaKahlerTriple build_complex_liouville(const ScalarField& R, const ScalarField& I, const Box& box);
ParaKahlerTriple build_dimD2_case1(const ScalarField& rho, const ScalarField& mu, const ScalarField& nu, double c,
                                   const Box& box);
ParaKahlerTriple build_dimD2_case2(const ScalarField& rho, const ScalarField& sigma, const Box& box,
                                   bool negate_T = false);
ParaKahlerTriple build_dimD2_case4(const ScalarField& rho, const ScalarField& sigma, double k, const Box& box);
// F is an expression in x2 and phi; phi an expression in x3, x4
ParaKahlerTriple build_dimD1(const ScalarField& rho, const Expression& F, const ScalarField& phi, double c,
                             const Box& box, bool negate_T = false);

// ---- configuration-level normal forms ------------------------------------------
struct NormalForm {
  Family family = Family::RealLiouville;
  std::string preset;
  std::map<std::string, std::string> params;  // profiles and constants, as expressions
  Box box;

  // constant parameter, or fallback when absent
  std::optional<double> constant(const std::string& name) const;
  double constant_or(const std::string& name, double fallback) const;
  bool has(const std::string& name) const { return params.count(name) > 0; }
};

std::vector<std::string> preset_names(Family f);
NormalForm preset(Family f, const std::string& name = "default");  // ConfigError on unknown
// parameter names a family accepts (profiles, structural constants, Einstein constants)
std::vector<std::string> allowed_params(Family f);
// applies NAME=EXPR overrides with validation; ConfigError on unknown names or bad variables
void set_param(NormalForm& nf, const std::string& name, const std::string& expr);
ParaKahlerTriple build(const NormalForm& nf);

// ---- Einstein systems ------------------------------------------------------------
struct RealLiouvilleConstants {
  double lambda = 0, h = 0, k = 0, c1 = 0, c2 = 0;
};
struct ComplexLiouvilleConstants {
  double lambda = 0, a = 0;
  std::complex<double> h, d;
};
struct DimD2FirstConstants {
  double lambda = 0, c = 1, c1 = 0, c2 = 0;
  ScalarField f, h;  // functions of x3
};

// each returns the largest normalized residual of the family's system at p
double real_liouville_einstein_residual(const ScalarField& rho, const ScalarField& sigma, int eps,
                                        const RealLiouvilleConstants& k, const Point& p);
double complex_liouville_einstein_residual(const ScalarField& R, const ScalarField& I,
                                           const ComplexLiouvilleConstants& k, const Point& p);
double dimD2_first_einstein_residual(const ScalarField& rho, const ScalarField& mu, const ScalarField& nu,
                                     const DimD2FirstConstants& k, const Point& p);
// the lower-order identities implied by the complex system (first and second derivatives of I)
double complex_liouville_derived_residual(const ScalarField& R, const ScalarField& I,
                                          const ComplexLiouvilleConstants& k, const Point& p);

// dispatch on a normal form, constants read from its params; ConfigError for
// families without a system
double einstein_system_residual(const NormalForm& nf, const Point& p);

// least-squares fit of (k, h, c1, c2) for given rho, sigma, eps, lambda
struct RealLiouvilleFit {
  RealLiouvilleConstants constants;
  double residual_first = 0.0, residual_second = 0.0;  // max abs over the points
};
RealLiouvilleFit fit_real_liouville_constants(const ScalarField& rho, const ScalarField& sigma, int eps,
                                              double lambda, const std::vector<Point>& pts);

// Einstein constant of the companion metric predicted by the family's system,
// if the conditions for it hold (eps c1 + c2 = 0; h, d real; c1 = 0)
std::optional<double> predicted_companion_constant(const NormalForm& nf);

}  // namespace pklab
