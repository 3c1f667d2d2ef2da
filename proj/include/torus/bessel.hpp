#pragma once

// Exponentially scaled modified Bessel functions e^{-x} I_y(x) for integer
// order y >= 0 and real x >= 0. Unscaled I_y overflows long before the
// arguments used here (x ~ u^2 t), so only the scaled form is exposed.

#include <cmath>
#include <cstddef>
#include <vector>

#include "torus/constants.hpp"

namespace torus {

inline constexpr double kBesselSeriesLimit = 30.0;

namespace detail {

// e^{-x} sum_k (x/2)^{2k+y} / (k! (k+y)!)
inline double scaled_bessel_series(int y, double x) {
  const double log_first = y * std::log(0.5 * x) - std::lgamma(y + 1.0) - x;
  double term = std::exp(log_first);
  if (term == 0.0) return 0.0;
  const double q = 0.25 * x * x;
  double sum = term;
  for (int k = 1; k < 500; ++k) {
    term *= q / (static_cast<double>(k) * (k + y));
    sum += term;
    if (term < 1e-17 * sum) break;
  }
  return sum;
}

// Hankel expansion e^{-x} I_y(x) ~ (2 pi x)^{-1/2} sum_k (-1)^k a_k(y) / x^k.
// Returns a negative value when the series stops shrinking before reaching
// full precision, so the caller can fall back.
inline double scaled_bessel_hankel(int y, double x) {
  const double mu = 4.0 * y * y;
  double term = 1.0;
  double sum = 1.0;
  double prev = 1.0;
  for (int k = 1; k < 200; ++k) {
    const double odd = 2.0 * k - 1.0;
    term *= -(mu - odd * odd) / (8.0 * k * x);
    if (term == 0.0) break;
    if (std::fabs(term) > std::fabs(prev)) return -1.0;
    sum += term;
    if (std::fabs(term) < 1e-17 * std::fabs(sum)) return sum / std::sqrt(2.0 * kPi * x);
    prev = term;
  }
  return term == 0.0 ? sum / std::sqrt(2.0 * kPi * x) : -1.0;
}

}  // namespace detail

// e^{-x} I_y(x) for y = 0..max_order by Miller's backward recurrence
// I_{k-1} = (2k/x) I_k + I_{k+1}, normalised with e^{-x}(I_0 + 2 sum_k I_k) = 1.
inline std::vector<double> scaled_bessel_batch(int max_order, double x) {
  std::vector<double> out(static_cast<std::size_t>(max_order) + 1, 0.0);
  if (x == 0.0) {
    out[0] = 1.0;
    return out;
  }
  // Beyond order ~ 9 sqrt(x) + 30 the terms are below 1e-17 of the total.
  const int start = std::max(max_order, static_cast<int>(9.0 * std::sqrt(x))) + 30 + static_cast<int>(2.0 * std::sqrt(x));
  double above = 0.0;
  double current = 1e-280;
  double norm = 0.0;
  for (int k = start; k >= 1; --k) {
    if (k <= max_order) out[static_cast<std::size_t>(k)] = current;
    norm += 2.0 * current;
    const double below = (2.0 * k / x) * current + above;
    above = current;
    current = below;
    if (current > 1e250) {
      const double s = 1e-250;
      current *= s;
      above *= s;
      norm *= s;
      for (int j = k; j <= max_order; ++j) out[static_cast<std::size_t>(j)] *= s;
    }
  }
  out[0] = current;
  norm += current;
  for (double& v : out) v /= norm;
  return out;
}

// e^{-x} I_y(x). Power series for x <= 30, Hankel expansion above when it
// converges to full precision, Miller recurrence otherwise.
inline double scaled_bessel_i(int y, double x) {
  if (y < 0) y = -y;  // I_{-y} = I_y for integer order
  if (x == 0.0) return y == 0 ? 1.0 : 0.0;
  if (x <= kBesselSeriesLimit) return detail::scaled_bessel_series(y, x);
  if (static_cast<double>(y) * y <= 0.5 * x) {
    const double h = detail::scaled_bessel_hankel(y, x);
    if (h >= 0.0) return h;
  }
  return scaled_bessel_batch(y, x)[static_cast<std::size_t>(y)];
}

// Heat kernel of Z at time t: K(t, w) = e^{-2t} I_w(2t).
inline double heat_kernel_z(double t, int w) { return scaled_bessel_i(w, 2.0 * t); }

// Coefficients b_k with e^{-2t} I_0(2t) ~ (4 pi t)^{-1/2} sum_k b_k t^{-k}, t -> infinity.
inline std::vector<double> heat_kernel_z_asymptotic(int order) {
  std::vector<double> b(static_cast<std::size_t>(order) + 1);
  b[0] = 1.0;
  for (int k = 1; k <= order; ++k) {
    const double odd = 2.0 * k - 1.0;
    b[static_cast<std::size_t>(k)] = b[static_cast<std::size_t>(k) - 1] * odd * odd / (8.0 * k) / 2.0;
  }
  return b;
}

// Coefficients of (sum_k b_k z^k)^r truncated at z^order.
inline std::vector<double> series_power(const std::vector<double>& b, int r, int order) {
  std::vector<double> out(static_cast<std::size_t>(order) + 1, 0.0);
  out[0] = 1.0;
  for (int p = 0; p < r; ++p) {
    std::vector<double> next(out.size(), 0.0);
    for (std::size_t i = 0; i < out.size(); ++i)
      for (std::size_t j = 0; i + j < out.size() && j < b.size(); ++j) next[i + j] += out[i] * b[j];
    out.swap(next);
  }
  return out;
}

}  // namespace torus
