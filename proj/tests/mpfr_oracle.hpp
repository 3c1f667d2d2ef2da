#pragma once

#include <boost/math/constants/constants.hpp>
#include <boost/multiprecision/mpfr.hpp>

#include <cmath>
#include <string>

#include "torus/spectral.hpp"

namespace torus::testing {

using Mp = boost::multiprecision::mpfr_float;

// round(prod_{v != 0} lambda_v / det) in MPFR, with enough digits for the whole integer.
inline BigInt tree_count_oracle(const IntegerLattice& lat) {
  const double digits = log_det_star_float(lat) / std::log(10.0);
  Mp::default_precision(static_cast<unsigned>(digits) + 40);
  const Mp pi = boost::math::constants::pi<Mp>();
  Mp prod = 1;
  for (const auto& v : dual_cosets(lat)) {
    if (v.is_zero()) continue;
    Mp lambda = 0;
    for (int k = 0; k < v.dim(); ++k) {
      const Mp s = sin(pi * Mp(v.numer[k]) / Mp(v.denom));
      lambda += 4 * s * s;
    }
    prod *= lambda;
  }
  const std::string q = Mp(round(prod / Mp(lat.det_abs().get_str()))).str(0, std::ios_base::fixed);
  return BigInt(q.substr(0, q.find('.')));
}

}  // namespace torus::testing
