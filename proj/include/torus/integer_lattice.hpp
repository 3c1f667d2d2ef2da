#pragma once

// Exact integer-lattice machinery: matrices over Z, Smith normal form, and the
// two finite groups attached to an invertible integer matrix L:
//
//   Z^r / L Z^r          (vertices of the discrete torus)
//   L^* Z^r / Z^r        (its character group, indexing the spectrum)
//
// Both have order |det L|. Everything here is exact; floating point enters
// only downstream.

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <memory>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "torus/bigint.hpp"
#include "torus/errors.hpp"

namespace torus {

inline constexpr std::int64_t kDefaultCosetCap = 10'000'000;

// Dense row-major matrix of arbitrary-precision integers.
class IntMatrix {
 public:
  IntMatrix() = default;
  IntMatrix(int rows, int cols) : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows) * cols) {}

  static IntMatrix identity(int n) {
    IntMatrix m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1;
    return m;
  }

  static IntMatrix from_rows(const std::vector<std::vector<long>>& rows) {
    const int n = static_cast<int>(rows.size());
    const int c = n == 0 ? 0 : static_cast<int>(rows.front().size());
    IntMatrix m(n, c);
    for (int i = 0; i < n; ++i) {
      if (static_cast<int>(rows[i].size()) != c) throw ParseError("ragged matrix rows");
      for (int j = 0; j < c; ++j) m(i, j) = rows[i][j];
    }
    return m;
  }

  int rows() const noexcept { return rows_; }
  int cols() const noexcept { return cols_; }

  BigInt& operator()(int i, int j) { return data_[static_cast<std::size_t>(i) * cols_ + j]; }
  const BigInt& operator()(int i, int j) const { return data_[static_cast<std::size_t>(i) * cols_ + j]; }

  friend bool operator==(const IntMatrix& a, const IntMatrix& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
  }

  friend IntMatrix operator*(const IntMatrix& a, const IntMatrix& b) {
    if (a.cols_ != b.rows_) throw DimensionError("matrix product shape mismatch");
    IntMatrix c(a.rows_, b.cols_);
    for (int i = 0; i < a.rows_; ++i)
      for (int k = 0; k < a.cols_; ++k) {
        if (sgn(a(i, k)) == 0) continue;
        for (int j = 0; j < b.cols_; ++j) c(i, j) += a(i, k) * b(k, j);
      }
    return c;
  }

  IntMatrix transpose() const {
    IntMatrix t(cols_, rows_);
    for (int i = 0; i < rows_; ++i)
      for (int j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

  IntMatrix scaled(const BigInt& s) const {
    IntMatrix m = *this;
    for (auto& x : m.data_) x *= s;
    return m;
  }

  // Drops row i and column j.
  IntMatrix minor_matrix(int i, int j) const {
    IntMatrix m(rows_ - 1, cols_ - 1);
    for (int a = 0, p = 0; a < rows_; ++a) {
      if (a == i) continue;
      for (int b = 0, q = 0; b < cols_; ++b) {
        if (b == j) continue;
        m(p, q++) = (*this)(a, b);
      }
      ++p;
    }
    return m;
  }

  void swap_rows(int a, int b) {
    for (int j = 0; j < cols_; ++j) std::swap((*this)(a, j), (*this)(b, j));
  }
  void swap_cols(int a, int b) {
    for (int i = 0; i < rows_; ++i) std::swap((*this)(i, a), (*this)(i, b));
  }

  std::string to_string() const {
    std::string s;
    for (int i = 0; i < rows_; ++i) {
      if (i) s += ';';
      for (int j = 0; j < cols_; ++j) {
        if (j) s += ',';
        s += (*this)(i, j).get_str();
      }
    }
    return s;
  }

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<BigInt> data_;
};

// Parses "a,b;c,d" (rows separated by ';', entries by ','). Whitespace is ignored.
inline IntMatrix parse_int_matrix(std::string_view text) {
  std::vector<std::vector<BigInt>> rows;
  std::string cleaned;
  for (char ch : text)
    if (ch != ' ' && ch != '\t') cleaned += ch;
  if (cleaned.empty()) throw ParseError("empty matrix");
  std::stringstream rs(cleaned);
  std::string row;
  while (std::getline(rs, row, ';')) {
    std::vector<BigInt> entries;
    std::stringstream es(row);
    std::string e;
    while (std::getline(es, e, ',')) {
      BigInt v;
      if (e.empty() || v.set_str(e, 10) != 0) throw ParseError("bad matrix entry '" + e + "'");
      entries.push_back(v);
    }
    if (entries.empty()) throw ParseError("empty matrix row");
    rows.push_back(std::move(entries));
  }
  const int n = static_cast<int>(rows.size());
  IntMatrix m(n, static_cast<int>(rows.front().size()));
  for (int i = 0; i < n; ++i) {
    if (static_cast<int>(rows[i].size()) != m.cols()) throw ParseError("ragged matrix rows");
    for (int j = 0; j < m.cols(); ++j) m(i, j) = rows[i][j];
  }
  return m;
}

// Fraction-free (Bareiss) determinant with row pivoting. Every intermediate
// value is an exact minor of the input, so each division is exact.
inline BigInt bareiss_determinant(IntMatrix m) {
  const int n = m.rows();
  if (n != m.cols()) throw DimensionError("determinant of non-square matrix");
  if (n == 0) return 1;
  BigInt prev = 1;
  int sign = 1;
  for (int k = 0; k < n - 1; ++k) {
    if (sgn(m(k, k)) == 0) {
      int p = k + 1;
      while (p < n && sgn(m(p, k)) == 0) ++p;
      if (p == n) return 0;
      m.swap_rows(k, p);
      sign = -sign;
    }
    for (int i = k + 1; i < n; ++i) {
      for (int j = k + 1; j < n; ++j) {
        m(i, j) = m(i, j) * m(k, k) - m(i, k) * m(k, j);
        mpz_divexact(m(i, j).get_mpz_t(), m(i, j).get_mpz_t(), prev.get_mpz_t());
      }
      m(i, k) = 0;
    }
    prev = m(k, k);
  }
  return sign > 0 ? BigInt(m(n - 1, n - 1)) : BigInt(-m(n - 1, n - 1));
}

// adj(M) with adj(M) * M = det(M) * I.
inline IntMatrix adjugate(const IntMatrix& m) {
  const int n = m.rows();
  IntMatrix adj(n, n);
  if (n == 1) {
    adj(0, 0) = 1;
    return adj;
  }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      BigInt c = bareiss_determinant(m.minor_matrix(i, j));
      adj(j, i) = ((i + j) % 2 == 0) ? c : BigInt(-c);
    }
  return adj;
}

// u * mat * v = diag(d), u and v unimodular, d_i | d_{i+1}, d_i > 0.
struct SmithDecomposition {
  IntMatrix u;
  IntMatrix v;
  IntMatrix u_inv;
  IntMatrix v_inv;
  std::vector<BigInt> d;
};

// Elimination with pivoting on the entry of least absolute value. Row and column
// operations are mirrored into the inverse transforms so recomposition is exact.
inline SmithDecomposition smith_normal_form(const IntMatrix& a) {
  const int n = a.rows();
  if (n != a.cols()) throw DimensionError("Smith form of non-square matrix");
  IntMatrix m = a;
  SmithDecomposition s{IntMatrix::identity(n), IntMatrix::identity(n), IntMatrix::identity(n),
                       IntMatrix::identity(n), {}};

  // row_i -= q * row_k
  auto row_axpy = [&](int i, int k, const BigInt& q) {
    for (int j = 0; j < n; ++j) {
      m(i, j) -= q * m(k, j);
      s.u(i, j) -= q * s.u(k, j);
      s.u_inv(j, k) += q * s.u_inv(j, i);
    }
  };
  // col_j -= q * col_k
  auto col_axpy = [&](int j, int k, const BigInt& q) {
    for (int i = 0; i < n; ++i) {
      m(i, j) -= q * m(i, k);
      s.v(i, j) -= q * s.v(i, k);
      s.v_inv(k, i) += q * s.v_inv(j, i);
    }
  };

  for (int k = 0; k < n; ++k) {
    for (;;) {
      int pr = -1, pc = -1;
      BigInt best;
      for (int i = k; i < n; ++i)
        for (int j = k; j < n; ++j) {
          if (sgn(m(i, j)) == 0) continue;
          BigInt mag = abs(m(i, j));
          if (pr < 0 || mag < best) {
            best = mag;
            pr = i;
            pc = j;
          }
        }
      if (pr < 0) throw SingularMatrix();
      if (pr != k) {
        m.swap_rows(k, pr);
        s.u.swap_rows(k, pr);
        s.u_inv.swap_cols(k, pr);
      }
      if (pc != k) {
        m.swap_cols(k, pc);
        s.v.swap_cols(k, pc);
        s.v_inv.swap_rows(k, pc);
      }

      bool clean = true;
      BigInt q;
      for (int i = k + 1; i < n; ++i) {
        if (sgn(m(i, k)) == 0) continue;
        mpz_tdiv_q(q.get_mpz_t(), m(i, k).get_mpz_t(), m(k, k).get_mpz_t());
        row_axpy(i, k, q);
        if (sgn(m(i, k)) != 0) clean = false;
      }
      for (int j = k + 1; j < n; ++j) {
        if (sgn(m(k, j)) == 0) continue;
        mpz_tdiv_q(q.get_mpz_t(), m(k, j).get_mpz_t(), m(k, k).get_mpz_t());
        col_axpy(j, k, q);
        if (sgn(m(k, j)) != 0) clean = false;
      }
      if (!clean) continue;

      // The pivot must divide the whole trailing block; otherwise fold an
      // offending row into row k and repeat (the minimum strictly decreases).
      int bad_row = -1;
      for (int i = k + 1; i < n && bad_row < 0; ++i)
        for (int j = k + 1; j < n; ++j)
          if (!mpz_divisible_p(m(i, j).get_mpz_t(), m(k, k).get_mpz_t())) {
            bad_row = i;
            break;
          }
      if (bad_row < 0) break;
      row_axpy(k, bad_row, BigInt(-1));
    }
    if (sgn(m(k, k)) < 0) {
      for (int j = 0; j < n; ++j) {
        m(k, j) = -m(k, j);
        s.u(k, j) = -s.u(k, j);
        s.u_inv(j, k) = -s.u_inv(j, k);
      }
    }
  }
  s.d.resize(n);
  for (int i = 0; i < n; ++i) s.d[i] = m(i, i);
  return s;
}

// The finite abelian group Z^r / L Z^r = (+) Z/d_i, with elements addressed by
// a mixed-radix index (first invariant factor most significant, so index order
// is lexicographic in Smith coordinates).
class QuotientGroup {
 public:
  QuotientGroup() = default;

  QuotientGroup(const SmithDecomposition& snf, const BigInt& order) {
    const int r = static_cast<int>(snf.d.size());
    order_ = to_int64(order);
    moduli_.resize(r);
    for (int i = 0; i < r; ++i) moduli_[i] = to_int64(snf.d[i]);
    strides_.assign(r, 1);
    for (int i = r - 2; i >= 0; --i) strides_[i] = strides_[i + 1] * moduli_[i + 1];
    u_mod_.assign(static_cast<std::size_t>(r) * r, 0);
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < r; ++j) {
        BigInt red;
        mpz_fdiv_r(red.get_mpz_t(), snf.u(i, j).get_mpz_t(), snf.d[i].get_mpz_t());
        u_mod_[static_cast<std::size_t>(i) * r + j] = to_int64(red);
      }
  }

  int rank() const noexcept { return static_cast<int>(moduli_.size()); }
  std::int64_t order() const noexcept { return order_; }
  const std::vector<std::int64_t>& moduli() const noexcept { return moduli_; }

  // Smith coordinates of the class of x.
  std::vector<std::int64_t> coordinates(const std::vector<std::int64_t>& x) const {
    const int r = rank();
    std::vector<std::int64_t> c(r, 0);
    for (int i = 0; i < r; ++i) {
      __int128 acc = 0;
      for (int j = 0; j < r; ++j)
        acc += static_cast<__int128>(u_mod_[static_cast<std::size_t>(i) * r + j]) * floor_mod(x[j], moduli_[i]);
      c[i] = static_cast<std::int64_t>(acc % moduli_[i]);
    }
    return c;
  }

  std::int64_t index_of_coordinates(const std::vector<std::int64_t>& c) const {
    std::int64_t idx = 0;
    for (int i = 0; i < rank(); ++i) idx += floor_mod(c[i], moduli_[i]) * strides_[i];
    return idx;
  }

  std::int64_t index_of(const std::vector<std::int64_t>& x) const { return index_of_coordinates(coordinates(x)); }

  std::vector<std::int64_t> coordinates_of_index(std::int64_t idx) const {
    std::vector<std::int64_t> c(rank());
    for (int i = 0; i < rank(); ++i) {
      c[i] = idx / strides_[i];
      idx %= strides_[i];
    }
    return c;
  }

  // Index of (class idx) + (class of e_k), optionally negated generator.
  std::int64_t shift(std::int64_t idx, int k, bool negative) const {
    std::int64_t out = 0;
    for (int i = 0; i < rank(); ++i) {
      const std::int64_t ci = (idx / strides_[i]) % moduli_[i];
      std::int64_t g = u_mod_[static_cast<std::size_t>(i) * rank() + k];
      if (negative) g = (moduli_[i] - g) % moduli_[i];
      out += ((ci + g) % moduli_[i]) * strides_[i];
    }
    return out;
  }

 private:
  std::int64_t order_ = 1;
  std::vector<std::int64_t> moduli_;
  std::vector<std::int64_t> strides_;
  std::vector<std::int64_t> u_mod_;  // u(i, j) mod d_i
};

// An invertible r x r integer matrix L, viewed as the lattice L Z^r (columns
// are the basis). Immutable; the Smith form is computed once on construction.
class IntegerLattice {
 public:
  explicit IntegerLattice(IntMatrix mat) : mat_(std::move(mat)) {
    if (mat_.rows() < 1 || mat_.rows() != mat_.cols()) throw DimensionError("lattice matrix must be square, r >= 1");
    det_ = bareiss_determinant(mat_);
    if (sgn(det_) == 0) throw SingularMatrix();
    det_abs_ = abs(det_);
    snf_ = std::make_shared<const SmithDecomposition>(smith_normal_form(mat_));
  }

  static IntegerLattice parse(std::string_view text) { return IntegerLattice(parse_int_matrix(text)); }

  static IntegerLattice diagonal(const std::vector<long>& diag) {
    IntMatrix m(static_cast<int>(diag.size()), static_cast<int>(diag.size()));
    for (std::size_t i = 0; i < diag.size(); ++i) m(static_cast<int>(i), static_cast<int>(i)) = diag[i];
    return IntegerLattice(std::move(m));
  }

  int dim() const noexcept { return mat_.rows(); }
  const IntMatrix& matrix() const noexcept { return mat_; }
  const BigInt& det() const noexcept { return det_; }
  const BigInt& det_abs() const noexcept { return det_abs_; }
  const SmithDecomposition& smith() const noexcept { return *snf_; }

  // Throws CapExceeded when the quotient has more than `cap` elements.
  QuotientGroup quotient(std::int64_t cap = kDefaultCosetCap) const {
    check_cap(cap);
    return QuotientGroup(*snf_, det_abs_);
  }

  void check_cap(std::int64_t cap) const {
    if (det_abs_ > from_int64(cap))
      throw CapExceeded("|det| = " + to_string(det_abs_) + " exceeds the cap of " + std::to_string(cap));
  }

  // x in L Z^r  <=>  L^{-1} x integral  <=>  adj(L) x = 0 mod det.
  bool contains(const std::vector<BigInt>& x) const {
    const IntMatrix adj = adjugate(mat_);
    for (int i = 0; i < dim(); ++i) {
      BigInt acc = 0;
      for (int j = 0; j < dim(); ++j) acc += adj(i, j) * x[j];
      if (!mpz_divisible_p(acc.get_mpz_t(), det_abs_.get_mpz_t())) return false;
    }
    return true;
  }

 private:
  IntMatrix mat_;
  BigInt det_;
  BigInt det_abs_;
  std::shared_ptr<const SmithDecomposition> snf_;
};

inline SmithDecomposition smith_normal_form(const IntegerLattice& lat) { return lat.smith(); }

// Coset representatives of Z^r / L Z^r, stored flat (count x r).
struct CosetTable {
  int r = 0;
  std::int64_t count = 0;
  std::vector<std::int64_t> coords;

  std::vector<std::int64_t> rep(std::int64_t i) const {
    auto first = coords.begin() + static_cast<std::ptrdiff_t>(i * r);
    return {first, first + r};
  }
};

// Representatives u^{-1} c for c running lexicographically over the Smith box.
inline CosetTable enumerate_cosets(const IntegerLattice& lat, std::int64_t cap = kDefaultCosetCap) {
  const QuotientGroup q = lat.quotient(cap);
  const int r = lat.dim();
  const auto& uinv = lat.smith().u_inv;
  std::vector<std::int64_t> uinv64(static_cast<std::size_t>(r) * r);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < r; ++j) uinv64[static_cast<std::size_t>(i) * r + j] = to_int64(uinv(i, j));

  CosetTable table{r, q.order(), std::vector<std::int64_t>(static_cast<std::size_t>(q.order()) * r)};
  std::vector<std::int64_t> c(r, 0);
  for (std::int64_t idx = 0; idx < q.order(); ++idx) {
    for (int j = 0; j < r; ++j) {
      __int128 acc = 0;
      for (int i = 0; i < r; ++i) acc += static_cast<__int128>(uinv64[static_cast<std::size_t>(j) * r + i]) * c[i];
      if (acc > INT64_MAX || acc < INT64_MIN) throw CapExceeded("coset representative overflows 64 bits");
      table.coords[static_cast<std::size_t>(idx) * r + j] = static_cast<std::int64_t>(acc);
    }
    for (int i = r - 1; i >= 0; --i) {
      if (++c[i] < q.moduli()[i]) break;
      c[i] = 0;
    }
  }
  return table;
}

// An element of L^* Z^r / Z^r: coordinates numer[k] / denom in [0, 1), where
// denom = |det L| is a common (not necessarily reduced) denominator.
struct DualCosetRep {
  std::vector<std::int64_t> numer;
  std::int64_t denom = 1;

  int dim() const noexcept { return static_cast<int>(numer.size()); }

  BigRational coordinate(int k) const {
    BigRational q(from_int64(numer[k]), from_int64(denom));
    q.canonicalize();
    return q;
  }

  std::string coordinate_string(int k) const { return coordinate(k).get_str(); }

  bool is_zero() const {
    return std::all_of(numer.begin(), numer.end(), [](std::int64_t n) { return n == 0; });
  }

  // (x, v) mod 1, as an integer numerator over denom.
  std::int64_t pairing_numerator(const std::vector<std::int64_t>& x) const {
    __int128 acc = 0;
    for (int k = 0; k < dim(); ++k) acc += static_cast<__int128>(floor_mod(x[k], denom)) * numer[k];
    return static_cast<std::int64_t>(acc % denom);
  }

  friend bool operator==(const DualCosetRep&, const DualCosetRep&) = default;
  friend auto operator<=>(const DualCosetRep&, const DualCosetRep&) = default;
};

// Flat table of dual coset numerators, in Smith-lexicographic order.
struct DualCosetTable {
  int r = 0;
  std::int64_t denom = 1;
  std::int64_t count = 0;
  std::vector<std::int64_t> numer;

  DualCosetRep rep(std::int64_t i) const {
    auto first = numer.begin() + static_cast<std::ptrdiff_t>(i * r);
    return {{first, first + r}, denom};
  }
};

// v = u^T (c_1/d_1, ..., c_r/d_r) mod 1, with c over the Smith box. Since
// L^{-T} = u^T diag(d)^{-1} v^T and v^T is unimodular, these exhaust
// L^* Z^r / Z^r without repetition.
inline DualCosetTable dual_coset_table(const IntegerLattice& lat, std::int64_t cap = kDefaultCosetCap) {
  const QuotientGroup q = lat.quotient(cap);
  const int r = lat.dim();
  const std::int64_t n = q.order();
  const auto& snf = lat.smith();
  // weight(i, k) = (u(i, k) mod d_i) * (N / d_i), an integer mod N.
  std::vector<std::int64_t> weight(static_cast<std::size_t>(r) * r);
  for (int i = 0; i < r; ++i) {
    const std::int64_t di = q.moduli()[i];
    for (int k = 0; k < r; ++k) {
      BigInt red;
      mpz_fdiv_r(red.get_mpz_t(), snf.u(i, k).get_mpz_t(), snf.d[i].get_mpz_t());
      weight[static_cast<std::size_t>(i) * r + k] = to_int64(red) * (n / di);
    }
  }
  DualCosetTable table{r, n, n, std::vector<std::int64_t>(static_cast<std::size_t>(n) * r)};
  std::vector<std::int64_t> c(r, 0);
  for (std::int64_t idx = 0; idx < n; ++idx) {
    for (int k = 0; k < r; ++k) {
      __int128 acc = 0;
      for (int i = 0; i < r; ++i) acc += static_cast<__int128>(weight[static_cast<std::size_t>(i) * r + k]) * c[i];
      table.numer[static_cast<std::size_t>(idx) * r + k] = static_cast<std::int64_t>(acc % n);
    }
    for (int i = r - 1; i >= 0; --i) {
      if (++c[i] < q.moduli()[i]) break;
      c[i] = 0;
    }
  }
  return table;
}

inline std::vector<DualCosetRep> dual_cosets(const IntegerLattice& lat, std::int64_t cap = kDefaultCosetCap) {
  const DualCosetTable t = dual_coset_table(lat, cap);
  std::vector<DualCosetRep> out;
  out.reserve(static_cast<std::size_t>(t.count));
  for (std::int64_t i = 0; i < t.count; ++i) out.push_back(t.rep(i));
  return out;
}

// Class of L^{-T} m = adj(L)^T m / det(L) in L^* Z^r / Z^r.
inline DualCosetRep dual_coset_of(const IntegerLattice& lat, const std::vector<BigInt>& m) {
  const int r = lat.dim();
  const IntMatrix adj = adjugate(lat.matrix());
  DualCosetRep v{std::vector<std::int64_t>(r), to_int64(lat.det_abs())};
  for (int k = 0; k < r; ++k) {
    BigInt acc = 0;
    for (int j = 0; j < r; ++j) acc += adj(j, k) * m[j];
    if (sgn(lat.det()) < 0) acc = -acc;
    BigInt red;
    mpz_fdiv_r(red.get_mpz_t(), acc.get_mpz_t(), lat.det_abs().get_mpz_t());
    v.numer[k] = to_int64(red);
  }
  return v;
}

}  // namespace torus
