#pragma once

#include <random>

#include "torus/integer_lattice.hpp"

namespace torus::testing {

// Random nonsingular integer lattice with entries in [-bound, bound] and 2 <= |det| <= max_det.
inline IntegerLattice random_lattice(std::mt19937_64& rng, int r, int bound, long max_det) {
  std::uniform_int_distribution<int> entry(-bound, bound);
  for (;;) {
    IntMatrix m(r, r);
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < r; ++j) m(i, j) = entry(rng);
    const BigInt det = abs(bareiss_determinant(m));
    if (det >= 2 && det <= max_det) return IntegerLattice(m);
  }
}

}  // namespace torus::testing
