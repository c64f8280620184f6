// Randomized check of jet partials against central finite differences.
#pragma once

#include <cstdint>
#include <string>

namespace pklab {

struct AdCheckResult {
  int compositions = 0;
  int comparisons = 0;
  double max_error = 0.0;  // |jet - fd| / max(1, |fd|)
  std::string worst;       // expression and partial with the largest error
};

// Random compositions of elementary functions in x1..x4. Order-1 partials
// are compared with central differences of plain double evaluation; order-k
// partials (k = 2, 3) with central differences of the order-(k-1) jet
// partials. Step h for all differences.
AdCheckResult jet_fd_agreement(int compositions, std::uint64_t seed, double h = 1e-5);

// a random expression string in x1..x4 (exposed for tests)
std::string random_composition(std::uint64_t seed, int depth = 3);

}  // namespace pklab
