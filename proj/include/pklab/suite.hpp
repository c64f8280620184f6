// Verification suites over a catalog normal form: the runner behind pk-lab.
//
// Check groups and the entries they produce:
//   parakahler       parakahler.*            triple axioms
//   benenti          benenti.*               Benenti / Hamiltonian 2-form, Lambda, eigenvalue gradients
//   killing          killing.*               canonical Killing fields and the distribution D
//   rank             rank.*                  rank of D and the table row
//   companion        companion.*             companion metric, Psi, weighted tensor, mobility
//   ricci-diff       ricci_diff.*            Ricci difference identity
//   einstein         einstein.*              Einstein metric, system, companion constant
//   family-einstein  family_einstein.*       Einstein constant of the (alpha, beta) family
//   flatness         flatness.riemann
//   geodesic         geodesic.*              T-planarity of companion geodesics
#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "pklab/catalog.hpp"
#include "pklab/curves.hpp"
#include "pklab/report.hpp"

namespace pklab {

const std::vector<std::string>& check_groups();

struct SuiteConfig {
  NormalForm form;
  std::vector<std::string> checks;  // empty: every group applicable to the form
  int points = 20;
  std::uint64_t seed = 1;
  // exact entry name, or a group name / entry prefix ("benenti", "companion.mobility")
  std::map<std::string, double> tolerances;

  // ConfigError on unknown groups, non-positive tolerances or sample counts
  void validate() const;
};

// groups that make sense for a form (einstein only with lambda, flatness only on flat presets, ...)
std::vector<std::string> applicable_groups(const NormalForm& nf);

struct SuiteResult {
  VerificationReport report;
  std::vector<Curve> curves;  // companion geodesics of the geodesic group
};

// throws ConfigError (bad config) and ConstraintError (constructor preconditions)
SuiteResult run(const SuiteConfig& config);

// ---- the section 7 Einstein family ----------------------------------------------------
struct DemoRow {
  double alpha = 0.0, beta = 0.0;
  double lambda_tilde = 0.0;  // mean over the used points
  double expected = 0.0;      // lambda alpha^3
  double discrepancy = 0.0;   // |lambda_tilde - expected| / max(1, |expected|)
  double spread = 0.0;        // (max - min) / max(1, |mean|)
  double ricci_residual = 0.0;
  int points = 0;
  bool skipped = false;
  std::string note;
};

struct EinsteinDemo {
  double lambda = 1.0;
  std::vector<DemoRow> rows;
  VerificationReport report() const;
};

// alpha, beta over {-2,-1,0,1,2}; points where det A~ nearly vanishes are dropped, grid
// points with no usable point are skipped
EinsteinDemo demo_einstein(int points = 20, std::uint64_t seed = 1, const std::vector<double>& alphas = {},
                           const std::vector<double>& betas = {});

}  // namespace pklab
