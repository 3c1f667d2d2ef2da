#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "support.hpp"
#include "torus/real_lattice.hpp"
#include "torus/spectral.hpp"
#include "torus/zeta.hpp"

using namespace torus;
using torus::testing::random_lattice;

namespace {

// mpmath quad at 25 digits.
const double kCr[] = {0.0,
                      0.0,
                      1.166243616123275120553538,
                      1.673389302970196732283431,
                      1.999707644517312559687899,
                      2.242488059811381191795544,
                      2.436626962000715258295832,
                      2.598676304265610729343717,
                      2.737867663859306715193373};

// log(Im tau |eta(tau)|^4) for tau = i and tau = e^{2 pi i / 3}.
constexpr double kLogDetSquare = -1.054688280995671930616769;
constexpr double kLogDetHex = -1.033519275962615137141581;

RealLattice random_unit_lattice(std::mt19937_64& rng, int r) {
  std::uniform_real_distribution<double> u(-0.6, 0.6);
  Eigen::MatrixXd b = Eigen::MatrixXd::Identity(r, r);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < r; ++j) b(i, j) += u(rng);
  return RealLattice(b).unit_volume();
}

}  // namespace

TEST(CrConstant, ReferenceValues) {
  for (int r = 1; r <= 8; ++r) {
    const CrConstant c = c_constant(r);
    EXPECT_NEAR(c.value, kCr[r], 1e-10) << "r=" << r;
    EXPECT_LT(c.quadrature_error, 1e-9);
    EXPECT_EQ(c.r, r);
  }
  EXPECT_NEAR(c_value(2), 4.0 * kCatalan / kPi, 1e-10);
}

TEST(CrConstant, PositiveAndBelowLog2r) {
  EXPECT_NEAR(c_value(1), 0.0, 1e-9);
  for (int r = 2; r <= 8; ++r) {
    EXPECT_GT(c_value(r), 0.0);
    EXPECT_LT(c_value(r), std::log(2.0 * r));
  }
  EXPECT_THROW(c_constant(0), DimensionError);
  EXPECT_THROW(c_constant(9), DimensionError);
}

TEST(ScriptI, ClosedFormInDimensionOne) {
  // I_1(s) = arccosh((s^2 + 2) / 2)
  for (double s : {0.0, 0.1, 0.5, 1.0, 2.0, 7.0}) EXPECT_NEAR(script_i(1, s), std::acosh(0.5 * s * s + 1.0), 1e-10) << s;
}

TEST(ScriptI, ReferenceValues) {
  EXPECT_NEAR(script_i(2, 0.0), kCr[2], 1e-10);
  EXPECT_NEAR(script_i(2, 0.5), 1.281342981987027939, 1e-10);
  EXPECT_NEAR(script_i(2, 1.0), 1.507982602279513388, 1e-10);
  EXPECT_NEAR(script_i(3, 2.0), 2.269953839516423956, 1e-10);
  // I_r(0) = c_r
  for (int r = 1; r <= 4; ++r) EXPECT_NEAR(script_i(r, 0.0), c_value(r), 1e-10);
}

TEST(ScriptI, LogGrowth) {
  for (int r : {1, 2, 3}) {
    const double s = 1e3;
    EXPECT_NEAR(script_i(r, s) / std::log(s * s), 1.0, 1e-5) << r;
  }
}

TEST(ScriptH, LargeSBehaviour) {
  // sum_{v != 0} log(s^2 + lambda) - det I_r(s) = -log s^2 + O(s^-2)
  const auto lat = IntegerLattice::parse("2,1;0,3");
  for (double s : {30.0, 100.0}) EXPECT_NEAR(script_h(lat, s) / -std::log(s * s), 1.0, 1e-3) << s;
}

TEST(SpectralIdentity, Examples) {
  const auto two = spectral_log_identity_check(IntegerLattice::parse("2"), 1.0);
  EXPECT_NEAR(two.lhs, std::log(5.0), 1e-14);
  EXPECT_LT(two.residual, 1e-8);

  const auto three = spectral_log_identity_check(IntegerLattice::parse("3"), 0.0);
  EXPECT_NEAR(three.lhs, std::log(9.0), 1e-14);
  EXPECT_LT(three.residual, 1e-8);
  ASSERT_TRUE(three.exact_lhs.has_value());
  EXPECT_NEAR(*three.exact_lhs, std::log(9.0), 1e-15);
  EXPECT_LT(*three.exact_residual, 1e-8);

  const auto sq = spectral_log_identity_check(IntegerLattice::parse("2,0;0,2"), 0.0);
  EXPECT_NEAR(*sq.exact_lhs, std::log(128.0), 1e-14);
  EXPECT_LT(*sq.exact_residual, 1e-7);
}

TEST(SpectralIdentity, CycleAtZero) {
  // I_1(0) = 0, so H([[n]], 0) = log det* = 2 log n.
  for (long n : {2, 5, 17, 64}) EXPECT_NEAR(script_h(IntegerLattice::diagonal({n}), 0.0), 2.0 * std::log(n), 1e-8) << n;
}

TEST(SpectralIdentity, RandomLattices) {
  std::mt19937_64 rng(33);
  for (int trial = 0; trial < 10; ++trial) {
    const auto lat = random_lattice(rng, 2 + trial % 2, 5, 150);
    for (double s : {0.0, 0.5, 1.0, 2.0}) {
      const auto c = spectral_log_identity_check(lat, s);
      EXPECT_LT(c.residual, 1e-7) << lat.matrix().to_string() << " s=" << s;
      if (s == 0.0) {
        EXPECT_LT(*c.exact_residual, 1e-7);
      }
    }
  }
}

TEST(Epstein, ReferenceValues) {
  const double sq2 = epstein_zeta(named_lattice(NamedLattice::square, 2), 2.0);
  EXPECT_NEAR(sq2, 6.026812039691940 / std::pow(4 * kPi * kPi, 2), 1e-15);
  EXPECT_NEAR(epstein_zeta(named_lattice(NamedLattice::square, 1), 1.0), 1.0 / 12.0, 1e-13);
  // Z(s) = 2 (2 pi)^{-2s} zeta(2s)
  EXPECT_NEAR(epstein_zeta(named_lattice(NamedLattice::square, 1), 2.0), 2.0 * std::pow(2 * kPi, -4) * std::pow(kPi, 4) / 90,
              1e-15);
  EXPECT_NEAR(epstein_zeta(named_lattice(NamedLattice::square, 1), -0.5), -kPi / 3, 1e-11);  // 2 (2 pi) zeta(-1)
  EXPECT_NEAR(epstein_zeta(named_lattice(NamedLattice::square, 1), -1.0), 0.0, 1e-12);       // zeta(-2) = 0
}

TEST(Epstein, ValueAtZeroAndPole) {
  for (const auto& a : {named_lattice(NamedLattice::square, 1), named_lattice(NamedLattice::hexagonal_A2),
                        named_lattice(NamedLattice::fcc_D3)}) {
    EXPECT_NEAR(epstein_zeta(a, 0.0), -1.0, 1e-12);
    EXPECT_THROW(epstein_zeta(a, 0.5 * a.dim()), PoleError);
    EXPECT_GT(epstein_zeta(a, 0.5 * a.dim() + 0.3), 0.0);
  }
}

TEST(Epstein, NearThePole) {
  const EpsteinZeta z(named_lattice(NamedLattice::hexagonal_A2));
  EXPECT_GT(z(0.9), z(0.95));  // heading to -infinity from the left
  EXPECT_GT(z(1.05), z(1.1));  // and down from +infinity on the right
  EXPECT_GT(z(1.05), 0.0);
}

TEST(Epstein, MatchesDirectSum) {
  // sum over the dual lattice in a box; the tail beyond |m| = 400 is below 1e-12 relative at s = 3
  const RealLattice hex = named_lattice(NamedLattice::hexagonal_A2);
  const Eigen::MatrixXd d = hex.dual_basis();
  double direct = 0.0;
  for (int i = -400; i <= 400; ++i)
    for (int j = -400; j <= 400; ++j) {
      if (i == 0 && j == 0) continue;
      const Eigen::Vector2d v = d * Eigen::Vector2d(i, j);
      direct += std::pow(4 * kPi * kPi * v.squaredNorm(), -3.0);
    }
  EXPECT_NEAR(epstein_zeta(hex, 3.0), direct, 1e-10 * direct);
}

TEST(Epstein, ScaleCovariance) {
  for (const auto& a : {named_lattice(NamedLattice::hexagonal_A2), named_lattice(NamedLattice::fcc_D3)}) {
    for (double c : {0.5, 1.7, 3.0}) {
      const RealLattice ca = a.scaled(c);
      const double s = 2.0;
      EXPECT_NEAR(epstein_zeta(ca, s), std::pow(c, 2 * s) * epstein_zeta(a, s), 1e-12 * epstein_zeta(ca, s));
      EXPECT_NEAR(epstein_zeta(ca, 0.0), -1.0, 1e-11);
      EXPECT_NEAR(log_det_star_zeta(ca), log_det_star_zeta(a) + 2.0 * std::log(c), 1e-6);
    }
  }
}

TEST(Height, Circle) {
  EXPECT_NEAR(height(named_lattice(NamedLattice::square, 1)).log_det_star, 0.0, 1e-8);
  EXPECT_NEAR(log_det_star_zeta(named_lattice(NamedLattice::square, 1)), 0.0, 1e-8);
}

TEST(Height, TwoDimensionalReferenceValues) {
  const HeightResult sq = height(named_lattice(NamedLattice::square, 2));
  const HeightResult hex = height(named_lattice(NamedLattice::hexagonal_A2));
  EXPECT_NEAR(sq.log_det_star, kLogDetSquare, 1e-10);
  EXPECT_NEAR(hex.log_det_star, kLogDetHex, 1e-10);
  EXPECT_LT(hex.height(), sq.height());
  EXPECT_NEAR(sq.constant_terms - sq.small_t_integral - sq.large_t_integral, sq.log_det_star, 1e-15);
  EXPECT_LT(sq.error, 1e-9);
}

TEST(Height, DualPathAgreement) {
  std::vector<RealLattice> lats{named_lattice(NamedLattice::square, 2), named_lattice(NamedLattice::hexagonal_A2),
                                named_lattice(NamedLattice::square, 3), named_lattice(NamedLattice::fcc_D3)};
  std::mt19937_64 rng(8);
  for (int k = 0; k < 5; ++k) lats.push_back(random_unit_lattice(rng, 2 + k % 2));
  for (const auto& a : lats) {
    const double split = height(a).log_det_star;
    EXPECT_NEAR(split, log_det_star_zeta(a), 1e-6) << "r=" << a.dim();
  }
}

TEST(Height, VolumeOneUpperBound) {
  const auto sq = ss_bound_check(named_lattice(NamedLattice::square, 2));
  const auto hex = ss_bound_check(named_lattice(NamedLattice::hexagonal_A2));
  const auto cube = ss_bound_check(named_lattice(NamedLattice::square, 3));
  const auto fcc = ss_bound_check(named_lattice(NamedLattice::fcc_D3));
  for (const auto& c : {sq, hex, cube, fcc}) EXPECT_TRUE(c.holds);
  EXPECT_NEAR(sq.margin, ss_bound(2) - kLogDetSquare, 1e-10);
  // hexagonal has the larger log det*, so it sits closer to the bound
  EXPECT_LT(hex.margin, sq.margin);
  EXPECT_LT(ss_bound(2) - 2.0 / 2, -0.95);
  std::mt19937_64 rng(4);
  for (int k = 0; k < 6; ++k) EXPECT_TRUE(ss_bound_check(random_unit_lattice(rng, 2 + k % 2)).holds);
}

TEST(Height, RejectsNonUnitVolume) {
  EXPECT_THROW(height(named_lattice(NamedLattice::square, 2).scaled(2.0)), DomainError);
}
