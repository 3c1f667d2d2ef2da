#pragma once

// Adaptive 15-point Gauss-Kronrod quadrature with global bisection, plus the
// two transforms every heat-trace integral here needs: a log variable for
// dt/t measures and an analytic power-law tail beyond a split point.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <queue>
#include <vector>

#include "torus/errors.hpp"

namespace torus {

struct QuadratureSpec {
  double split_point = 1000.0;  // T: numeric below, tail model above
  double rel_tol = 1e-10;
  double abs_tol = 1e-13;
  int tail_expansion_order = 6;
  int max_subdivisions = 2000;
};

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
  int intervals = 0;
};

// f(t) ~ sum_k coeffs[k] * t^{-(exponent + k)} as t -> infinity; exponent + k > 1.
struct PowerTail {
  double exponent = 2.0;
  std::vector<double> coeffs;

  // Integral of the model over [T, infinity).
  double integral_from(double t) const {
    double s = 0.0;
    for (std::size_t k = 0; k < coeffs.size(); ++k) {
      const double p = exponent + static_cast<double>(k);
      s += coeffs[k] * std::pow(t, 1.0 - p) / (p - 1.0);
    }
    return s;
  }
  // Contribution of the last retained term, a proxy for the truncation error.
  double truncation_bound(double t) const {
    if (coeffs.empty()) return 0.0;
    const double p = exponent + static_cast<double>(coeffs.size());
    return std::fabs(coeffs.back()) * std::pow(t, 1.0 - p) / (p - 1.0);
  }
};

namespace detail {

inline constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851, 0.864864423359769072789712788640926,
    0.741531185599394439863864773280788, 0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204, 0.104790010322250183839876322541518,
    0.140653259715525918745189590510238, 0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
// Gauss weights for nodes 1, 3, 5, 7 of the Kronrod set.
inline constexpr std::array<double, 4> kGaussWeights = {0.129484966168869693270611432679082,
                                                         0.279705391489276667901467771423780,
                                                         0.381830050505118944950369775488975,
                                                         0.417959183673469387755102040816327};

// `error` is the Kronrod-Gauss discrepancy; `noise` the rounding floor.
struct Segment {
  double a, b, value, error, noise;
  bool operator<(const Segment& o) const { return error < o.error; }
};

template <class F>
Segment gauss_kronrod_15(F& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const double fc = f(c);
  double kronrod = fc * kKronrodWeights[7];
  double gauss = fc * kGaussWeights[3];
  double absk = std::fabs(fc) * kKronrodWeights[7];
  for (int i = 0; i < 7; ++i) {
    const double dx = h * kKronrodNodes[static_cast<std::size_t>(i)];
    const double f1 = f(c - dx);
    const double f2 = f(c + dx);
    kronrod += kKronrodWeights[static_cast<std::size_t>(i)] * (f1 + f2);
    absk += kKronrodWeights[static_cast<std::size_t>(i)] * (std::fabs(f1) + std::fabs(f2));
    if (i % 2 == 1) gauss += kGaussWeights[static_cast<std::size_t>(i / 2)] * (f1 + f2);
  }
  const double value = kronrod * h;
  const double err = std::fabs((kronrod - gauss) * h);
  const double noise = 50.0 * std::numeric_limits<double>::epsilon() * absk * std::fabs(h);
  if (!std::isfinite(value)) throw ConvergenceError("integrand is not finite", value, err);
  return {a, b, value, err, noise};
}

}  // namespace detail

namespace detail {

template <class F>
QuadratureResult integrate_finite(F& f, double a, double b, const QuadratureSpec& spec) {
  const double min_width = 1e-18 * std::fabs(b - a);
  std::priority_queue<detail::Segment> heap;
  heap.push(detail::gauss_kronrod_15(f, a, b));
  double total = heap.top().value;
  double error = heap.top().error;
  double noise = heap.top().noise;
  int intervals = 1;
  // Rounding noise cannot be reduced by bisection, so it is not part of the target.
  while (error > std::max(spec.abs_tol, spec.rel_tol * std::fabs(total)) + noise) {
    if (intervals >= spec.max_subdivisions)
      throw ConvergenceError("quadrature did not converge within the subdivision limit", total, error + noise);
    const detail::Segment worst = heap.top();
    const double mid = 0.5 * (worst.a + worst.b);
    if (worst.b - worst.a <= min_width || mid <= worst.a || mid >= worst.b)
      throw ConvergenceError("quadrature cannot subdivide further (non-integrable singularity?)", total, error + noise);
    heap.pop();
    const detail::Segment left = detail::gauss_kronrod_15(f, worst.a, mid);
    const detail::Segment right = detail::gauss_kronrod_15(f, mid, worst.b);
    total += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    noise += left.noise + right.noise - worst.noise;
    heap.push(left);
    heap.push(right);
    ++intervals;
    // Recompute the running sums now and then to shed accumulated drift.
    if (intervals % 64 == 0) {
      auto copy = heap;
      total = error = noise = 0.0;
      while (!copy.empty()) {
        total += copy.top().value;
        error += copy.top().error;
        noise += copy.top().noise;
        copy.pop();
      }
    }
  }
  return {total, error + noise, intervals};
}

}  // namespace detail

// Integral of f over [a, b]; b may be +infinity (mapped by t = a + x/(1-x)).
template <class F>
QuadratureResult integrate_adaptive(F&& f, double a, double b, const QuadratureSpec& spec = {}) {
  if (std::isinf(b)) {
    auto g = [&](double x) {
      const double one_minus = 1.0 - x;
      return f(a + x / one_minus) / (one_minus * one_minus);
    };
    return detail::integrate_finite(g, 0.0, 1.0, spec);
  }
  return detail::integrate_finite(f, a, b, spec);
}

// Integral of f over [a, infinity): numeric on [a, T], `tail` on [T, infinity).
template <class F>
QuadratureResult integrate_adaptive(F&& f, double a, const PowerTail& tail, const QuadratureSpec& spec = {}) {
  const double t_split = std::max(a, spec.split_point);
  QuadratureResult res = integrate_adaptive(f, a, t_split, spec);
  res.value += tail.integral_from(t_split);
  res.error += tail.truncation_bound(t_split);
  return res;
}

// Integral of g(t) dt / t over [t_lo, t_hi], computed in u = log t. Optionally
// adds a tail for g(t) ~ sum_k c_k t^{-(q+k)} beyond t_hi (in the dt/t measure).
template <class G>
QuadratureResult integrate_log_measure(G&& g, double t_lo, double t_hi, const QuadratureSpec& spec = {},
                                       const std::optional<PowerTail>& tail_in_t = std::nullopt) {
  auto h = [&](double u) { return g(std::exp(u)); };
  QuadratureResult res = integrate_adaptive(h, std::log(t_lo), std::log(t_hi), spec);
  if (tail_in_t) {
    // g(t)/t has exponent q + 1.
    PowerTail shifted{tail_in_t->exponent + 1.0, tail_in_t->coeffs};
    res.value += shifted.integral_from(t_hi);
    res.error += shifted.truncation_bound(t_hi);
  }
  return res;
}

}  // namespace torus
