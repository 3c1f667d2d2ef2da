#include <gtest/gtest.h>

#include <random>
#include <set>

#include "torus/integer_lattice.hpp"

using namespace torus;

namespace {

IntMatrix diag_matrix(const std::vector<BigInt>& d) {
  IntMatrix m(static_cast<int>(d.size()), static_cast<int>(d.size()));
  for (std::size_t i = 0; i < d.size(); ++i) m(static_cast<int>(i), static_cast<int>(i)) = d[i];
  return m;
}

IntegerLattice random_lattice(std::mt19937_64& rng, int r, int bound, std::int64_t max_det) {
  std::uniform_int_distribution<int> entry(-bound, bound);
  for (;;) {
    IntMatrix m(r, r);
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < r; ++j) m(i, j) = entry(rng);
    const BigInt det = bareiss_determinant(m);
    if (sgn(det) != 0 && abs(det) <= from_int64(max_det)) return IntegerLattice(m);
  }
}

std::vector<BigInt> big(const std::vector<std::int64_t>& v) {
  std::vector<BigInt> out;
  for (auto x : v) out.push_back(from_int64(x));
  return out;
}

}  // namespace

TEST(IntMatrix, ParsesRowsAndEntries) {
  const IntMatrix m = parse_int_matrix("2, 1; 0,2");
  EXPECT_EQ(m.rows(), 2);
  EXPECT_EQ(m(0, 1), 1);
  EXPECT_EQ(m.to_string(), "2,1;0,2");
  EXPECT_THROW(parse_int_matrix("1,2;3"), ParseError);
  EXPECT_THROW(parse_int_matrix("1,x"), ParseError);
  EXPECT_THROW(parse_int_matrix(""), ParseError);
}

TEST(IntMatrix, BareissDeterminantMatchesCofactorExpansion) {
  const IntMatrix m = parse_int_matrix("0,2,1;3,-1,4;5,6,0");
  // 0*(0-24) - 2*(0-20) + 1*(18+5) = 63
  EXPECT_EQ(bareiss_determinant(m), 63);
  const IntMatrix adj = adjugate(m);
  const IntMatrix prod = adj * m;
  EXPECT_EQ(prod, IntMatrix::identity(3).scaled(63));
}

TEST(IntegerLattice, RejectsSingularAndNonSquare) {
  EXPECT_THROW(IntegerLattice::parse("1,2;2,4"), SingularMatrix);
  EXPECT_THROW(IntegerLattice::parse("1,2"), DimensionError);
}

TEST(IntegerLattice, NegativeDeterminantUsesAbsoluteValue) {
  const auto lat = IntegerLattice::parse("0,1;3,0");
  EXPECT_EQ(lat.det(), -3);
  EXPECT_EQ(lat.det_abs(), 3);
}

TEST(SmithNormalForm, Examples) {
  EXPECT_EQ(IntegerLattice::parse("2,0;0,2").smith().d, (std::vector<BigInt>{2, 2}));
  EXPECT_EQ(IntegerLattice::parse("2,1;0,2").smith().d, (std::vector<BigInt>{1, 4}));
  EXPECT_EQ(IntegerLattice::parse("6").smith().d, (std::vector<BigInt>{6}));
}

TEST(SmithNormalForm, RecompositionIsExactForRandomMatrices) {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> entry(-50, 50);
  for (int trial = 0; trial < 200; ++trial) {
    const int r = 1 + trial % 5;
    IntMatrix m(r, r);
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < r; ++j) m(i, j) = entry(rng);
    const BigInt det = bareiss_determinant(m);
    if (sgn(det) == 0) continue;
    const SmithDecomposition s = smith_normal_form(m);
    EXPECT_EQ(s.u * m * s.v, diag_matrix(s.d));
    EXPECT_EQ(s.u_inv * diag_matrix(s.d) * s.v_inv, m);
    EXPECT_EQ(s.u * s.u_inv, IntMatrix::identity(r));
    EXPECT_EQ(s.v * s.v_inv, IntMatrix::identity(r));
    EXPECT_EQ(abs(bareiss_determinant(s.u)), 1);
    BigInt prod = 1;
    for (int i = 0; i < r; ++i) {
      EXPECT_GT(s.d[i], 0);
      if (i + 1 < r) {
        EXPECT_TRUE(mpz_divisible_p(s.d[i + 1].get_mpz_t(), s.d[i].get_mpz_t()));
      }
      prod *= s.d[i];
    }
    EXPECT_EQ(prod, abs(det));
  }
}

TEST(Cosets, TrivialAndCyclic) {
  const CosetTable t = enumerate_cosets(IntegerLattice::diagonal({1, 1, 1}));
  ASSERT_EQ(t.count, 1);
  EXPECT_EQ(t.rep(0), (std::vector<std::int64_t>{0, 0, 0}));

  const CosetTable c = enumerate_cosets(IntegerLattice::parse("3"));
  std::set<std::int64_t> reps;
  for (std::int64_t i = 0; i < c.count; ++i) reps.insert(floor_mod(c.rep(i)[0], 3));
  EXPECT_EQ(reps, (std::set<std::int64_t>{0, 1, 2}));
}

TEST(Cosets, CapExceeded) {
  EXPECT_THROW(enumerate_cosets(IntegerLattice::parse("1000,0;0,1000"), 999'999), CapExceeded);
  EXPECT_THROW(dual_cosets(IntegerLattice::parse("1000,0;0,1000"), 999'999), CapExceeded);
}

// Property: det_abs representatives, pairwise inequivalent under the adjugate
// membership oracle, and the dual cosets agree with adj(L)^T m / det images.
TEST(Cosets, RandomLatticesAreCompleteAndInequivalent) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 40; ++trial) {
    const int r = 1 + trial % 3;
    const auto lat = random_lattice(rng, r, 9, trial < 30 ? 60 : 2000);
    const std::int64_t n = to_int64(lat.det_abs());
    const CosetTable cos = enumerate_cosets(lat);
    const auto duals = dual_cosets(lat);
    ASSERT_EQ(cos.count, n);
    ASSERT_EQ(static_cast<std::int64_t>(duals.size()), n);

    if (n <= 60) {
      for (std::int64_t i = 0; i < n; ++i)
        for (std::int64_t j = i + 1; j < n; ++j) {
          std::vector<BigInt> diff(r);
          for (int k = 0; k < r; ++k) diff[k] = from_int64(cos.rep(i)[k] - cos.rep(j)[k]);
          EXPECT_FALSE(lat.contains(diff));
        }
    }
    std::set<DualCosetRep> seen(duals.begin(), duals.end());
    EXPECT_EQ(static_cast<std::int64_t>(seen.size()), n);
    for (const auto& v : duals)
      for (int k = 0; k < r; ++k) {
        EXPECT_GE(v.numer[k], 0);
        EXPECT_LT(v.numer[k], n);
        const BigRational q = v.coordinate(k);
        EXPECT_TRUE(mpz_divisible_p(lat.det_abs().get_mpz_t(), q.get_den_mpz_t()));
      }
    // Closed under addition mod 1.
    if (n <= 60)
      for (const auto& a : duals)
        for (const auto& b : duals) {
          DualCosetRep s = a;
          for (int k = 0; k < r; ++k) s.numer[k] = (a.numer[k] + b.numer[k]) % n;
          EXPECT_TRUE(seen.count(s));
        }
    // Adjugate route: images of unit vectors and small m land in the same set.
    std::uniform_int_distribution<int> mm(-20, 20);
    for (int s = 0; s < 20; ++s) {
      std::vector<BigInt> m(r);
      for (auto& x : m) x = mm(rng);
      EXPECT_TRUE(seen.count(dual_coset_of(lat, m)));
    }
    // Characters are well defined: pairing with a lattice vector is integral.
    for (int col = 0; col < r; ++col) {
      std::vector<std::int64_t> x(r);
      for (int k = 0; k < r; ++k) x[k] = to_int64(lat.matrix()(k, col));
      for (const auto& v : duals) EXPECT_EQ(v.pairing_numerator(x), 0);
    }
  }
}

TEST(Cosets, DualImageOfUnitVector) {
  const auto lat = IntegerLattice::parse("2,1;0,2");
  const DualCosetRep v = dual_coset_of(lat, {1, 0});
  EXPECT_EQ(v.coordinate_string(0), "1/2");
  EXPECT_EQ(v.coordinate_string(1), "3/4");

  const auto duals = dual_cosets(IntegerLattice::parse("3"));
  std::set<std::string> coords;
  for (const auto& d : duals) coords.insert(d.coordinate_string(0));
  EXPECT_EQ(coords, (std::set<std::string>{"0", "1/3", "2/3"}));

  const auto trivial = dual_cosets(IntegerLattice::diagonal({1, 1}));
  ASSERT_EQ(trivial.size(), 1u);
  EXPECT_TRUE(trivial[0].is_zero());
}

TEST(Cosets, EnumerationOrderIsLexicographicInSmithCoordinates) {
  const auto lat = IntegerLattice::parse("2,1;0,6");
  const QuotientGroup q = lat.quotient();
  const CosetTable t = enumerate_cosets(lat);
  for (std::int64_t i = 0; i < t.count; ++i) EXPECT_EQ(q.index_of(t.rep(i)), i);
}

TEST(QuotientGroup, ShiftMatchesCoordinateArithmetic) {
  const auto lat = IntegerLattice::parse("3,1,0;0,2,1;1,0,4");
  const QuotientGroup q = lat.quotient();
  const CosetTable t = enumerate_cosets(lat);
  for (std::int64_t i = 0; i < t.count; ++i)
    for (int k = 0; k < 3; ++k) {
      auto x = t.rep(i);
      x[k] += 1;
      EXPECT_EQ(q.shift(i, k, false), q.index_of(x));
      x[k] -= 2;
      EXPECT_EQ(q.shift(i, k, true), q.index_of(x));
    }
  (void)big;
}
