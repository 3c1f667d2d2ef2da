#pragma once

#include <gmpxx.h>

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>

#include "torus/errors.hpp"

namespace torus {

using BigInt = mpz_class;
using BigRational = mpq_class;

inline std::string to_string(const BigInt& x) { return x.get_str(10); }

inline bool fits_int64(const BigInt& x) {
  static const BigInt lo(std::to_string(std::numeric_limits<std::int64_t>::min()));
  static const BigInt hi(std::to_string(std::numeric_limits<std::int64_t>::max()));
  return x >= lo && x <= hi;
}

inline std::int64_t to_int64(const BigInt& x) {
  if (!fits_int64(x)) throw CapExceeded("integer " + to_string(x) + " does not fit in 64 bits");
  // mpz_get_si is only guaranteed for long; long is 64-bit on the supported platforms.
  static_assert(sizeof(long) == 8);
  return static_cast<std::int64_t>(mpz_get_si(x.get_mpz_t()));
}

inline BigInt from_int64(std::int64_t x) {
  static_assert(sizeof(long) == 8);
  return BigInt(static_cast<long>(x));
}

// Natural log of |x| for x != 0, accurate for integers of any size.
inline double log_abs(const BigInt& x) {
  long exp2 = 0;
  const double mant = mpz_get_d_2exp(&exp2, x.get_mpz_t());
  return std::log(std::fabs(mant)) + static_cast<double>(exp2) * std::log(2.0);
}

inline std::int64_t floor_mod(std::int64_t a, std::int64_t m) {
  const std::int64_t r = a % m;
  return r < 0 ? r + m : r;
}

inline std::int64_t mul_mod(std::int64_t a, std::int64_t b, std::int64_t m) {
  const __int128 p = static_cast<__int128>(a) * b % m;
  return static_cast<std::int64_t>(p < 0 ? p + m : p);
}

}  // namespace torus
