#pragma once

// Heat traces of discrete tori (spectral and I-Bessel lattice sums) and of
// flat real tori (dual-lattice and Poisson-inverted Gaussian sums).

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "torus/bessel.hpp"
#include "torus/constants.hpp"
#include "torus/errors.hpp"
#include "torus/integer_lattice.hpp"
#include "torus/real_lattice.hpp"
#include "torus/spectral.hpp"

namespace torus {

inline constexpr double kBesselTailTolerance = 1e-13;
inline constexpr int kMaxBesselRadius = 4096;
inline constexpr double kMaxBoxPoints = 5e7;

// Upper bound for e^{-x} I_w(x), w >= 1: (1 + w/x)^{-w/2} / sqrt(x), capped at 1.
inline double bessel_decay_bound(int w, double x) {
  if (x == 0.0) return 0.0;
  const double log_b = -0.5 * w * std::log1p(w / x) - 0.5 * std::log(x);
  return std::min(1.0, std::exp(log_b));
}

// Smallest R with det * 2r * sum_{w > R} bound(w) < tol. Lattice points outside
// the box [-R, R]^r have some |y_k| > R, and the other factors sum to at most 1.
inline int certified_bessel_radius(double t, int r, double det, double tol = kBesselTailTolerance) {
  if (t == 0.0) return 0;
  const double x = 2.0 * t;
  const double scale = det * 2.0 * r;
  // Tail sums are evaluated from the far end; terms eventually fall faster than geometrically.
  std::vector<double> terms;
  int w = 1;
  for (;; ++w) {
    const double b = bessel_decay_bound(w, x);
    terms.push_back(b);
    if (w > 4 && b < 1e-40 && b < 1e-3 * terms[terms.size() - 2]) break;
    if (w > kMaxBesselRadius + 1) break;
  }
  double tail = 0.0;
  int radius = static_cast<int>(terms.size());
  for (int k = static_cast<int>(terms.size()); k >= 1; --k) {
    // tail = sum_{w > k}
    if (scale * tail >= tol) break;
    radius = k;
    tail += terms[static_cast<std::size_t>(k) - 1];
  }
  // radius is the smallest k with scale * sum_{w > k} < tol.
  if (radius > kMaxBesselRadius)
    throw DomainError("Bessel truncation bound unachievable within radius cap " + std::to_string(kMaxBesselRadius));
  return radius;
}

namespace detail {

// Integer points z in [-R, R]^r, lexicographic, passing `keep`.
template <class Keep>
std::vector<std::int64_t> box_points(int r, int radius, Keep&& keep) {
  if (std::pow(2.0 * radius + 1.0, r) > kMaxBoxPoints)
    throw DomainError("Bessel truncation box too large (radius " + std::to_string(radius) + ")");
  std::vector<std::int64_t> out;
  std::vector<std::int64_t> z(static_cast<std::size_t>(r), -radius);
  for (;;) {
    if (keep(z)) out.insert(out.end(), z.begin(), z.end());
    int k = r - 1;
    while (k >= 0 && z[static_cast<std::size_t>(k)] == radius) z[static_cast<std::size_t>(k--)] = -radius;
    if (k < 0) break;
    ++z[static_cast<std::size_t>(k)];
  }
  return out;
}

inline std::int64_t inf_norm(const std::int64_t* z, int r) {
  std::int64_t m = 0;
  for (int k = 0; k < r; ++k) m = std::max<std::int64_t>(m, z[k] < 0 ? -z[k] : z[k]);
  return m;
}

}  // namespace detail

// theta_L(t) = sum_v e^{-t lambda_v} = |det L| sum_{y in L Z^r} prod_k e^{-2t} I_{y_k}(2t).
// Keeps the spectrum and the lattice points of the last Bessel box.
class DiscreteTheta {
 public:
  explicit DiscreteTheta(const IntegerLattice& lat, std::int64_t cap = kDefaultFloatCap)
      : lat_(lat), quotient_(lat.quotient(cap)), det_(lat.det_abs().get_d()) {
    lambdas_ = eigenvalue_list(lat, cap);
    std::sort(lambdas_.begin(), lambdas_.end());
    lambdas_.erase(lambdas_.begin());
  }

  const IntegerLattice& lattice() const noexcept { return lat_; }
  int dim() const noexcept { return lat_.dim(); }
  double det() const noexcept { return det_; }
  const std::vector<double>& nonzero_eigenvalues() const noexcept { return lambdas_; }
  double lambda_min() const { return lambdas_.empty() ? std::numeric_limits<double>::infinity() : lambdas_.front(); }

  // sum_{v != 0} e^{-t lambda_v}
  double spectral_excess(double t) const {
    terms_.clear();
    for (double l : lambdas_) {
      if (t * l > 745.0) break;
      terms_.push_back(std::exp(-t * l));
    }
    return pairwise_sum(terms_);
  }
  double spectral(double t) const { return 1.0 + spectral_excess(t); }

  int certified_radius(double t) const { return certified_bessel_radius(t, dim(), det_); }

  // |det L| sum_{y != 0}: the Bessel branch minus its y = 0 term |det L| (e^{-2t} I_0(2t))^r.
  double bessel_excess(double t) const { return bessel_sum(t, false); }
  double bessel(double t) const { return bessel_sum(t, true); }

 private:
  double bessel_sum(double t, bool with_origin) const {
    const int r = dim();
    const int radius = certified_radius(t);
    if (radius > cached_radius_) {
      points_ = detail::box_points(r, radius, [&](const std::vector<std::int64_t>& z) {
        bool zero = std::all_of(z.begin(), z.end(), [](std::int64_t v) { return v == 0; });
        return !zero && quotient_.index_of(z) == 0;
      });
      cached_radius_ = radius;
    }
    const std::vector<double> k = scaled_bessel_batch(radius, 2.0 * t);
    terms_.clear();
    if (with_origin) terms_.push_back(std::pow(k[0], r));
    const std::size_t count = points_.size() / static_cast<std::size_t>(r);
    for (std::size_t p = 0; p < count; ++p) {
      const std::int64_t* z = points_.data() + p * static_cast<std::size_t>(r);
      if (detail::inf_norm(z, r) > radius) continue;
      double prod = 1.0;
      for (int j = 0; j < r; ++j) prod *= k[static_cast<std::size_t>(z[j] < 0 ? -z[j] : z[j])];
      terms_.push_back(prod);
    }
    return det_ * pairwise_sum(terms_);
  }

  IntegerLattice lat_;
  QuotientGroup quotient_;
  double det_;
  std::vector<double> lambdas_;
  mutable std::vector<std::int64_t> points_;
  mutable int cached_radius_ = -1;
  mutable std::vector<double> terms_;
};

inline double theta_discrete_spectral(const IntegerLattice& lat, double t, std::int64_t cap = kDefaultFloatCap) {
  if (t < 0) throw DomainError("t must be nonnegative");
  return DiscreteTheta(lat, cap).spectral(t);
}

struct DiscreteThetaEval {
  double spectral_value = 0.0;
  double bessel_value = 0.0;
  int truncation_radius = 0;
};

inline DiscreteThetaEval theta_discrete(const IntegerLattice& lat, double t, std::int64_t cap = kDefaultFloatCap) {
  if (t < 0) throw DomainError("t must be nonnegative");
  const DiscreteTheta th(lat, cap);
  return {th.spectral(t), th.bessel(t), th.certified_radius(t)};
}

inline double theta_discrete_bessel(const IntegerLattice& lat, double t, std::int64_t cap = kDefaultFloatCap) {
  return theta_discrete(lat, t, cap).bessel_value;
}

struct HeatKernelEval {
  double bessel = 0.0;    // sum_{y in L Z^r} K^{Z^r}(t, x - y)
  double spectral = 0.0;  // |det L|^{-1} sum_v e^{-t lambda_v} cos(2 pi <v, x>)
};

// Heat kernel of the discrete torus at (t, x), x any integer vector.
inline HeatKernelEval heat_kernel_torus(const IntegerLattice& lat, double t, const std::vector<std::int64_t>& x,
                                        std::int64_t cap = kDefaultFloatCap) {
  if (t < 0) throw DomainError("t must be nonnegative");
  const int r = lat.dim();
  if (static_cast<int>(x.size()) != r) throw DimensionError("point has the wrong dimension");
  const QuotientGroup q = lat.quotient(cap);
  const std::int64_t cls = q.index_of(x);

  HeatKernelEval out;
  const int radius = certified_bessel_radius(t, r, 1.0);
  const auto pts = detail::box_points(r, radius, [&](const std::vector<std::int64_t>& z) { return q.index_of(z) == cls; });
  const std::vector<double> k = scaled_bessel_batch(radius, 2.0 * t);
  std::vector<double> terms;
  for (std::size_t p = 0; p < pts.size(); p += static_cast<std::size_t>(r)) {
    double prod = 1.0;
    for (int j = 0; j < r; ++j) {
      const std::int64_t z = pts[p + static_cast<std::size_t>(j)];
      prod *= k[static_cast<std::size_t>(z < 0 ? -z : z)];
    }
    terms.push_back(prod);
  }
  out.bessel = pairwise_sum(terms);

  const DualCosetTable duals = dual_coset_table(lat, cap);
  terms.clear();
  for (std::int64_t i = 0; i < duals.count; ++i) {
    const DualCosetRep v = duals.rep(i);
    const double lambda = eigenvalue_of(v);
    const double phase = 2.0 * kPi * static_cast<double>(v.pairing_numerator(x)) / static_cast<double>(v.denom);
    terms.push_back(std::exp(-t * lambda) * std::cos(phase));
  }
  out.spectral = pairwise_sum(terms) / static_cast<double>(duals.count);
  return out;
}

// sum_{x in B Z^r, x != 0} e^{-a |x|^2}, with the truncation radius certified by
// the packing count #{x : |x| <= rho} <= (2 rho / m + 1)^r, m <= shortest vector.
class GaussianLatticeSum {
 public:
  explicit GaussianLatticeSum(Eigen::MatrixXd basis) : basis_(std::move(basis)), inv_(basis_.inverse()) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(basis_);
    m_lb_ = svd.singularValues().minCoeff();
  }

  int dim() const noexcept { return static_cast<int>(basis_.rows()); }
  double min_norm_lower_bound() const noexcept { return m_lb_; }

  // Bound on sum_{|x| > rho} e^{-a |x|^2} by shells of width delta.
  double tail_bound(double a, double rho) const {
    const double delta = 0.25 * std::min(m_lb_, 1.0 / std::sqrt(a));
    double total = 0.0;
    for (int j = 0; j < 100000; ++j) {
      const double lo = rho + j * delta;
      const double count = std::pow(2.0 * (lo + delta) / m_lb_ + 1.0, dim());
      const double term = count * std::exp(-a * lo * lo);
      total += term;
      if (a * lo * lo > 50.0 && term < 1e-3 * total) break;
      if (term == 0.0 && a * lo * lo > 745.0) break;
    }
    return total;
  }

  double radius_for(double a, double tol) const {
    double rho = m_lb_;
    while (tail_bound(a, rho) >= tol) rho *= 1.1;
    return rho;
  }

  double excess(double a, double tol = 1e-17) const {
    const double rho = radius_for(a, tol);
    ensure(rho);
    const double rho2 = rho * rho;
    terms_.clear();
    for (double n2 : norms2_) {
      if (n2 > rho2) break;
      terms_.push_back(std::exp(-a * n2));
    }
    return pairwise_sum(terms_);
  }

  // Sorted squared norms of the nonzero lattice vectors with |x| <= rho.
  std::vector<double> norms_within(double rho) const {
    ensure(rho);
    const auto end = std::upper_bound(norms2_.begin(), norms2_.end(), rho * rho);
    return {norms2_.begin(), end};
  }

 private:
  void ensure(double rho) const {
    if (rho <= cached_rho_) return;
    rho = std::max(rho, 1.25 * cached_rho_);
    const int r = dim();
    std::vector<long> bound(static_cast<std::size_t>(r));
    double box = 1.0;
    for (int i = 0; i < r; ++i) {
      bound[static_cast<std::size_t>(i)] = static_cast<long>(std::floor(rho * inv_.row(i).norm() + 1e-9));
      box *= 2.0 * bound[static_cast<std::size_t>(i)] + 1.0;
    }
    if (box > kMaxBoxPoints) throw DomainError("lattice sum needs too many points");
    norms2_.clear();
    std::vector<long> m(static_cast<std::size_t>(r));
    for (int i = 0; i < r; ++i) m[static_cast<std::size_t>(i)] = -bound[static_cast<std::size_t>(i)];
    Eigen::VectorXd mv(r);
    const double rho2 = rho * rho;
    for (;;) {
      bool nonzero = false;
      for (int i = 0; i < r; ++i) {
        mv(i) = static_cast<double>(m[static_cast<std::size_t>(i)]);
        nonzero = nonzero || m[static_cast<std::size_t>(i)] != 0;
      }
      if (nonzero) {
        const double n2 = (basis_ * mv).squaredNorm();
        if (n2 <= rho2) norms2_.push_back(n2);
      }
      int i = r - 1;
      while (i >= 0 && m[static_cast<std::size_t>(i)] == bound[static_cast<std::size_t>(i)]) {
        m[static_cast<std::size_t>(i)] = -bound[static_cast<std::size_t>(i)];
        --i;
      }
      if (i < 0) break;
      ++m[static_cast<std::size_t>(i)];
    }
    std::sort(norms2_.begin(), norms2_.end());
    cached_rho_ = rho;
  }

  Eigen::MatrixXd basis_;
  Eigen::MatrixXd inv_;
  double m_lb_ = 0.0;
  mutable std::vector<double> norms2_;
  mutable double cached_rho_ = 0.0;
  mutable std::vector<double> terms_;
};

enum class ThetaBranch { spectral, geometric };

struct ContinuousThetaEval {
  double value = 0.0;
  ThetaBranch branch = ThetaBranch::spectral;
};

inline constexpr double kThetaSwitch = 1.0 / (2.0 * kPi);

// Theta_A(t) = sum_m e^{-4 pi^2 t |A* m|^2} = vol (4 pi t)^{-r/2} sum_x e^{-|x|^2 / 4t}.
class ContinuousTheta {
 public:
  explicit ContinuousTheta(const RealLattice& a)
      : lattice_(a), direct_(a.basis()), dual_(a.dual_basis()), r_(a.dim()), volume_(a.volume()) {}

  const RealLattice& lattice() const noexcept { return lattice_; }
  const GaussianLatticeSum& direct_sum() const noexcept { return direct_; }
  const GaussianLatticeSum& dual_sum() const noexcept { return dual_; }

  // sum_{m != 0} e^{-4 pi^2 t |A* m|^2}
  double spectral_excess(double t) const { return dual_.excess(4.0 * kPi * kPi * t); }
  double spectral(double t) const { return 1.0 + spectral_excess(t); }

  double gaussian_prefactor(double t) const { return std::pow(4.0 * kPi * t, -0.5 * r_) * volume_; }
  // Theta_A(t) - vol (4 pi t)^{-r/2}
  double geometric_excess(double t) const { return gaussian_prefactor(t) * direct_.excess(0.25 / t); }
  double geometric(double t) const { return gaussian_prefactor(t) + geometric_excess(t); }

  ContinuousThetaEval operator()(double t) const {
    if (!(t > 0)) throw DomainError("t must be positive");
    if (t >= kThetaSwitch) return {spectral(t), ThetaBranch::spectral};
    return {geometric(t), ThetaBranch::geometric};
  }

 private:
  RealLattice lattice_;
  GaussianLatticeSum direct_;
  GaussianLatticeSum dual_;
  int r_;
  double volume_;
};

inline ContinuousThetaEval theta_continuous(const RealLattice& a, double t) { return ContinuousTheta(a)(t); }

struct ScalingReport {
  double limit = 0.0;
  std::vector<long> u;
  std::vector<double> values;
  std::vector<double> errors;
  // First index from which the error sequence is strictly decreasing; -1 if the last step increases.
  long decreasing_from = -1;
};

// N e^{-2 u^2 t} I_{N k}(2 u^2 t) against (alpha / sqrt(4 pi t)) e^{-(alpha k)^2 / 4t}, N = round(alpha u).
inline ScalingReport hk_scaling_limit_check(const std::vector<long>& u_seq, int k, double alpha, double t) {
  if (!(alpha > 0) || !(t > 0)) throw DomainError("alpha and t must be positive");
  ScalingReport rep;
  rep.limit = alpha / std::sqrt(4.0 * kPi * t) * std::exp(-(alpha * k) * (alpha * k) / (4.0 * t));
  for (long u : u_seq) {
    const long n = std::lround(alpha * static_cast<double>(u));
    const double v = static_cast<double>(n) * heat_kernel_z(static_cast<double>(u) * u * t, static_cast<int>(n * k));
    rep.u.push_back(u);
    rep.values.push_back(v);
    rep.errors.push_back(std::fabs(v - rep.limit));
  }
  const long m = static_cast<long>(rep.errors.size());
  if (m >= 2 && rep.errors[m - 1] < rep.errors[m - 2]) {
    long i = m - 1;
    while (i > 0 && rep.errors[i] < rep.errors[i - 1]) --i;
    rep.decreasing_from = i;
  }
  return rep;
}

}  // namespace torus
