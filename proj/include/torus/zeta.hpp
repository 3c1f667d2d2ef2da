#pragma once

// Lattice constants c_r, the integrals I_r(s) and H_L(s) splitting the
// discrete log-determinant, Epstein zeta continuation and flat-torus heights.

#include <boost/math/special_functions/expint.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <array>
#include <cmath>
#include <mutex>
#include <optional>

#include "torus/bessel.hpp"
#include "torus/constants.hpp"
#include "torus/errors.hpp"
#include "torus/quadrature.hpp"
#include "torus/real_lattice.hpp"
#include "torus/spectral.hpp"
#include "torus/theta.hpp"

namespace torus {

inline constexpr int kMaxConstantDim = 8;

namespace detail {

inline QuadratureSpec precise_spec() {
  QuadratureSpec spec;
  spec.rel_tol = 1e-12;
  spec.abs_tol = 1e-14;
  spec.max_subdivisions = 5000;
  return spec;
}

// Tail model of (e^{-2t} I_0(2t))^r = (4 pi t)^{-r/2} sum_k B_k t^{-k}, times `scale`.
inline PowerTail heat_power_tail(int r, int order, double scale) {
  const auto b = series_power(heat_kernel_z_asymptotic(order), r, order);
  PowerTail tail{0.5 * r, {}};
  const double pre = scale * std::pow(4.0 * kPi, -0.5 * r);
  for (double bk : b) tail.coeffs.push_back(pre * bk);
  return tail;
}

// e^{-a t} - e^{-b t} without cancellation at small t.
inline double exp_difference(double a, double b, double t) {
  if (a <= b) return -std::exp(-a * t) * std::expm1(-(b - a) * t);
  return std::exp(-b * t) * std::expm1(-(a - b) * t);
}

}  // namespace detail

// (e^{-2t} I_0(2t))^r - e^{-2rt}, accurate as t -> 0.
inline double heat_power_excess(int r, double t) {
  if (2.0 * t <= kBesselSeriesLimit) {
    // I_0(2t) - 1 = sum_{k >= 1} t^{2k} / (k!)^2
    const double q = t * t;
    double term = q, sum = q;
    for (int k = 2; k < 200; ++k) {
      term *= q / (static_cast<double>(k) * k);
      sum += term;
      if (term < 1e-17 * sum) break;
    }
    return std::exp(-2.0 * r * t) * std::expm1(r * std::log1p(sum));
  }
  return std::pow(heat_kernel_z(t, 0), r) - std::exp(-2.0 * r * t);
}

struct CrConstant {
  int r = 0;
  double value = 0.0;
  double quadrature_error = 0.0;
};

// c_r = log 2r - int_0^inf ((e^{-2t} I_0(2t))^r - e^{-2rt}) dt/t
inline CrConstant c_constant(int r) {
  if (r < 1 || r > kMaxConstantDim) throw DimensionError("c_r needs 1 <= r <= 8");
  const QuadratureSpec spec = detail::precise_spec();
  const auto res = integrate_log_measure([r](double t) { return heat_power_excess(r, t); }, 1e-20, spec.split_point,
                                         spec, detail::heat_power_tail(r, spec.tail_expansion_order, 1.0));
  return {r, std::log(2.0 * r) - res.value, res.error};
}

// Memoized c_r value.
inline double c_value(int r) {
  static std::mutex mu;
  static std::array<std::optional<double>, kMaxConstantDim + 1> cache;
  if (r < 1 || r > kMaxConstantDim) throw DimensionError("c_r needs 1 <= r <= 8");
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = cache[static_cast<std::size_t>(r)];
  if (!slot) slot = c_constant(r).value;
  return *slot;
}

// I_r(s) = -int_0^inf (e^{-s^2 t} (e^{-2t} I_0(2t))^r - e^{-t}) dt/t
inline double script_i(int r, double s) {
  if (r < 1) throw DimensionError("r must be positive");
  const double s2 = s * s;
  const QuadratureSpec spec = detail::precise_spec();
  auto g = [r, s2](double t) {
    return std::exp(-s2 * t) * heat_power_excess(r, t) + detail::exp_difference(s2 + 2.0 * r, 1.0, t);
  };
  if (s2 == 0.0)
    return -integrate_log_measure(g, 1e-20, spec.split_point, spec, detail::heat_power_tail(r, spec.tail_expansion_order, 1.0))
                .value;
  const double t_hi = std::max(60.0, 50.0 / s2);
  return -integrate_log_measure(g, 1e-20, t_hi, spec).value;
}

// H_L(s) = -int_0^inf (e^{-s^2 t} [theta_L(t) - |det L| (e^{-2t} I_0(2t))^r - 1] + e^{-t}) dt/t.
// The bracket is the Bessel excess for t <= 1 and the spectral excess minus
// |det L| h^r for t > 1.
inline double script_h(const DiscreteTheta& th, double s) {
  const int r = th.dim();
  const double det = th.det();
  const double s2 = s * s;
  const QuadratureSpec spec = detail::precise_spec();

  auto small = [&](double t) { return std::exp(-s2 * t) * th.bessel_excess(t) + detail::exp_difference(1.0, s2, t); };
  const double lower = -integrate_log_measure(small, 1e-20, 1.0, spec).value;

  auto large = [&](double t) {
    return std::exp(-s2 * t) * (th.spectral_excess(t) - det * std::pow(heat_kernel_z(t, 0), r)) + std::exp(-t);
  };
  const double decay = 45.0 + std::log(det);
  double upper = 0.0;
  if (s2 == 0.0) {
    const double t_hi = std::max(1e3, decay / th.lambda_min());
    QuadratureSpec tail_spec = spec;
    tail_spec.split_point = t_hi;
    upper = -integrate_log_measure(large, 1.0, t_hi, tail_spec, detail::heat_power_tail(r, spec.tail_expansion_order, -det))
                 .value;
  } else {
    const double t_hi = std::max(60.0, decay / std::min(s2, 1.0));
    upper = -integrate_log_measure(large, 1.0, t_hi, spec).value;
  }
  return lower + upper;
}

inline double script_h(const IntegerLattice& lat, double s, std::int64_t cap = kDefaultFloatCap) {
  return script_h(DiscreteTheta(lat, cap), s);
}

struct IdentityCheck {
  double s = 0.0;
  double lhs = 0.0;  // sum_{v != 0} log(s^2 + lambda_v)
  double script_i = 0.0;
  double script_h = 0.0;
  double rhs = 0.0;  // |det L| I_r(s) + H_L(s)
  double residual = 0.0;
  std::optional<double> exact_lhs;  // log det* from the exact tree count, s = 0 only
  std::optional<double> exact_residual;
};

inline IdentityCheck spectral_log_identity_check(const IntegerLattice& lat, double s,
                                                 std::int64_t exact_cap = kDefaultExactCap,
                                                 std::int64_t float_cap = kDefaultFloatCap) {
  const DiscreteTheta th(lat, float_cap);
  IdentityCheck out;
  out.s = s;
  std::vector<double> logs;
  for (double l : th.nonzero_eigenvalues()) logs.push_back(std::log(s * s + l));
  out.lhs = pairwise_sum(logs);
  out.script_i = script_i(lat.dim(), s);
  out.script_h = script_h(th, s);
  out.rhs = th.det() * out.script_i + out.script_h;
  out.residual = std::fabs(out.lhs - out.rhs);
  if (s == 0.0 && lat.det_abs() <= exact_cap) {
    out.exact_lhs = log_abs(count_spanning_trees(lat, exact_cap).det_star);
    out.exact_residual = std::fabs(*out.exact_lhs - out.rhs);
  }
  return out;
}

// E_p(z) = int_1^inf e^{-z w} w^{-p} dw = z^{p-1} Gamma(1-p, z), z > 0.
inline double upper_incomplete_gamma(double a, double z) {
  if (a > 0) return boost::math::tgamma(a, z);
  if (a == 0) return boost::math::expint(1, z);
  // Gamma(a, z) = (Gamma(a+1, z) - z^a e^{-z}) / a
  const double steps = std::ceil(-a);
  double base = a + steps;
  double g = base > 0 ? boost::math::tgamma(base, z) : boost::math::expint(1, z);
  for (int k = 0; k < static_cast<int>(steps); ++k) {
    base -= 1.0;
    g = (g - std::exp(base * std::log(z) - z)) / base;
  }
  return g;
}

inline double generalized_expint(double p, double z) {
  return std::exp((p - 1.0) * std::log(z)) * upper_incomplete_gamma(1.0 - p, z);
}

// Z_A(s) = sum_{m != 0} (4 pi^2 |A* m|^2)^{-s}, continued to all real s != r/2
// by splitting the Mellin integral of Theta_A - 1 at tau = 1/(4 pi).
class EpsteinZeta {
 public:
  explicit EpsteinZeta(const RealLattice& a)
      : r_(a.dim()), volume_(a.volume()), direct_(a.basis()), dual_(a.dual_basis()) {}

  int dim() const noexcept { return r_; }

  double operator()(double s) const {
    const double half = 0.5 * r_;
    if (std::fabs(s - half) < 1e-14) throw PoleError("Epstein zeta has a pole at s = r/2");
    const double tau = 1.0 / (4.0 * kPi);
    // s F(s) / Gamma(s + 1); 1 / Gamma vanishes at the nonpositive integers.
    const double sp1 = s + 1.0;
    if (sp1 <= 0.0 && sp1 == std::floor(sp1)) return 0.0;
    const double rest = spectral_part(s, tau) + geometric_part(s, tau);
    return (s * rest - std::pow(tau, s)) / boost::math::tgamma(sp1);
  }

  // -Z'(0) by a five-point stencil.
  double minus_derivative_at_zero(double h = 1e-3) const {
    const double d = (-(*this)(2 * h) + 8 * (*this)(h) - 8 * (*this)(-h) + (*this)(-2 * h)) / (12 * h);
    return -d;
  }

 private:
  static double cutoff(double p, int r) { return 50.0 + 4.0 * std::fabs(p) + 2.0 * r; }

  // sum_{m != 0} tau^s E_{1-s}(pi |A* m|^2), using lambda tau = pi |A* m|^2.
  double spectral_part(double s, double tau) const {
    const double p = 1.0 - s;
    const double zmax = cutoff(p, r_);
    std::vector<double> terms;
    for (double n2 : dual_.norms_within(std::sqrt(zmax / kPi))) terms.push_back(generalized_expint(p, kPi * n2));
    return std::pow(tau, s) * pairwise_sum(terms);
  }

  // vol (4 pi)^{-r/2} tau^{s - r/2} [1/(s - r/2) + sum_{x != 0} E_{1+s-r/2}(pi |x|^2)]
  double geometric_part(double s, double tau) const {
    const double half = 0.5 * r_;
    const double p = 1.0 + s - half;
    const double zmax = cutoff(p, r_);
    std::vector<double> terms;
    for (double n2 : direct_.norms_within(std::sqrt(zmax / kPi))) terms.push_back(generalized_expint(p, kPi * n2));
    const double pre = std::pow(4.0 * kPi, -half) * std::pow(tau, s - half) * volume_;
    return pre * (1.0 / (s - half) + pairwise_sum(terms));
  }

  int r_;
  double volume_;
  GaussianLatticeSum direct_;
  GaussianLatticeSum dual_;
};

inline double epstein_zeta(const RealLattice& a, double s) { return EpsteinZeta(a)(s); }

// log det* of the flat torus by continuation: -Z_A'(0). Any volume.
inline double log_det_star_zeta(const RealLattice& a) { return EpsteinZeta(a).minus_derivative_at_zero(); }

struct HeightResult {
  double log_det_star = 0.0;
  double small_t_integral = 0.0;  // int_0^1 (Theta - (4 pi t)^{-r/2}) dt/t
  double large_t_integral = 0.0;  // int_1^inf (Theta - 1) dt/t
  double constant_terms = 0.0;    // gamma + (2/r) (4 pi)^{-r/2}
  double error = 0.0;
  double height() const { return -log_det_star; }
};

inline constexpr double kUnitVolumeTolerance = 1e-9;

// log det* = gamma + (2/r)(4 pi)^{-r/2} - int_0^1 (Theta - (4 pi t)^{-r/2}) dt/t - int_1^inf (Theta - 1) dt/t
inline HeightResult height(const RealLattice& a) {
  if (std::fabs(a.volume() - 1.0) > kUnitVolumeTolerance)
    throw DomainError("height needs a volume-one lattice; normalize first");
  const int r = a.dim();
  const ContinuousTheta theta(a);
  const QuadratureSpec spec = detail::precise_spec();

  const double m_direct = theta.direct_sum().min_norm_lower_bound();
  const double m_dual = theta.dual_sum().min_norm_lower_bound();
  // Beyond these the Gaussian excesses are below e^{-800}.
  const double t_lo = std::min(kThetaSwitch / 2, m_direct * m_direct / (4.0 * 800.0));
  const double t_hi = std::max(2.0, 800.0 / (4.0 * kPi * kPi * m_dual * m_dual));

  const auto geo = integrate_log_measure([&](double t) { return theta.geometric_excess(t); }, t_lo, kThetaSwitch, spec);
  const auto mid = integrate_log_measure(
      [&](double t) { return 1.0 + theta.spectral_excess(t) - std::pow(4.0 * kPi * t, -0.5 * r); }, kThetaSwitch, 1.0,
      spec);
  const auto big = integrate_log_measure([&](double t) { return theta.spectral_excess(t); }, 1.0, t_hi, spec);

  HeightResult h;
  h.small_t_integral = geo.value + mid.value;
  h.large_t_integral = big.value;
  h.constant_terms = kEulerGamma + (2.0 / r) * std::pow(4.0 * kPi, -0.5 * r);
  h.log_det_star = h.constant_terms - h.small_t_integral - h.large_t_integral;
  h.error = geo.error + mid.error + big.error;
  return h;
}

// gamma - log 4 pi + 2/r
inline double ss_bound(int r) { return kEulerGamma - std::log(4.0 * kPi) + 2.0 / r; }

struct SSBoundCheck {
  bool holds = false;
  double margin = 0.0;  // bound - log det*
  double log_det_star = 0.0;
  double bound = 0.0;
};

inline SSBoundCheck ss_bound_check(const RealLattice& a) {
  SSBoundCheck c;
  c.log_det_star = height(a).log_det_star;
  c.bound = ss_bound(a.dim());
  c.margin = c.bound - c.log_det_star;
  c.holds = c.margin > 0;
  return c;
}

}  // namespace torus
