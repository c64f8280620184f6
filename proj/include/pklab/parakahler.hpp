// Para-Kahler triples (g, T, A) on a chart box and their axiom checks.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pklab/fields.hpp"
#include "pklab/report.hpp"

namespace pklab {

// how grad rho / grad sigma sit relative to g and T
enum class GradientClass { Zero, IsotropicPlus, IsotropicMinus, NonIsotropic, Complex, Indeterminate };

// rows of the rank table; pairs are unordered
enum class TableRow {
  Rank4Real,
  Rank4Complex,
  Rank3PlusNonIso,
  Rank3MinusNonIso,
  Rank2NonIsoZero,
  Rank2PlusPlus,
  Rank2MinusMinus,
  Rank2PlusMinus,
  Rank1PlusZero,
  Rank1MinusZero,
  Unknown
};

std::string to_string(GradientClass c);
std::string to_string(TableRow r);
int table_row_rank(TableRow r);

struct TripleMeta {
  std::string family;
  std::vector<std::string> params;  // "rho = x1", ...
  int expected_rank = 0;
  TableRow expected_row = TableRow::Unknown;
  bool flat = false;
  bool adapted = false;  // T is the constant block diag(Id, -Id) (or its negative)
};

struct ParaKahlerTriple {
  Chart chart;
  TensorField g;  // (0,2)
  TensorField T;  // (1,1)
  std::optional<TensorField> A;
  TripleMeta meta;

  int loss() const;
  // seed order that leaves `need` derivatives on every field
  int seed_order(int need) const { return need + loss(); }
};

struct SampleSpec {
  int points = 20;
  std::uint64_t seed = 1;
};

// flat neutral metric 2dx1dx3 + 2dx2dx4 with T = diag(1,1,-1,-1)
TensorField flat_neutral_metric();
TensorField adapted_structure(bool negate = false);
ParaKahlerTriple flat_triple(const Box& box);

// omega_ij = g_kj T^k_i, i.e. omega = T^t g
Mat4 fundamental_form(const ParaKahlerTriple& t, const Point& p);
TensorField fundamental_form_field(const TensorField& g, const TensorField& T);

// every triple axiom at the sample points; names start with "parakahler."
VerificationReport validate(const ParaKahlerTriple& t, const SampleSpec& s = {});

// true iff T = diag(1,1,-1,-1) or its negative at every sample point
bool null_coordinate_check(const ParaKahlerTriple& t, const SampleSpec& s = {});

}  // namespace pklab
