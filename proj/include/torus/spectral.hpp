#pragma once

// Laplacian of the discrete torus Z^r / L Z^r and its spectrum.
//
// Adjacency follows the generator multiset {+e_1, -e_1, ..., +e_r, -e_r}: each
// generator contributes one edge, so small quotients carry parallel edges and
// loops. Then Delta = 2r I - sum_g P_g, whose eigenvalues are exactly
// 4 sum_k sin^2(pi v_k) over the dual cosets v.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "torus/bigint.hpp"
#include "torus/constants.hpp"
#include "torus/errors.hpp"
#include "torus/integer_lattice.hpp"

namespace torus {

inline constexpr std::int64_t kDefaultExactCap = 1500;
inline constexpr std::int64_t kDefaultDenseCap = 4096;
inline constexpr std::int64_t kDefaultFloatCap = 10'000'000;

struct Generator {
  int axis;
  bool negative;
};

inline std::vector<Generator> generator_multiset(int r) {
  std::vector<Generator> g;
  for (int k = 0; k < r; ++k) {
    g.push_back({k, false});
    g.push_back({k, true});
  }
  return g;
}

// Dense N x N Laplacian. Entries are bounded by 2r, so plain ints are exact.
struct TorusLaplacian {
  int r = 0;
  std::int64_t size = 0;
  std::vector<Generator> generators;
  std::vector<int> entries;

  int operator()(std::int64_t i, std::int64_t j) const { return entries[static_cast<std::size_t>(i * size + j)]; }

  IntMatrix to_int_matrix() const {
    IntMatrix m(static_cast<int>(size), static_cast<int>(size));
    for (std::int64_t i = 0; i < size; ++i)
      for (std::int64_t j = 0; j < size; ++j) m(static_cast<int>(i), static_cast<int>(j)) = (*this)(i, j);
    return m;
  }
};

// neighbours[x * 2r + g] = class of x + generator g.
inline std::vector<std::int64_t> torus_neighbours(const QuotientGroup& q) {
  const int r = q.rank();
  const auto gens = generator_multiset(r);
  std::vector<std::int64_t> nb(static_cast<std::size_t>(q.order()) * gens.size());
  for (std::int64_t x = 0; x < q.order(); ++x)
    for (std::size_t g = 0; g < gens.size(); ++g)
      nb[static_cast<std::size_t>(x) * gens.size() + g] = q.shift(x, gens[g].axis, gens[g].negative);
  return nb;
}

inline TorusLaplacian build_laplacian(const IntegerLattice& lat, std::int64_t cap = kDefaultDenseCap) {
  const QuotientGroup q = lat.quotient(cap);
  const int r = lat.dim();
  const std::int64_t n = q.order();
  TorusLaplacian lap{r, n, generator_multiset(r), std::vector<int>(static_cast<std::size_t>(n * n), 0)};
  const auto nb = torus_neighbours(q);
  const std::size_t deg = lap.generators.size();
  for (std::int64_t x = 0; x < n; ++x) {
    lap.entries[static_cast<std::size_t>(x * n + x)] += static_cast<int>(deg);
    for (std::size_t g = 0; g < deg; ++g) lap.entries[static_cast<std::size_t>(x * n + nb[x * deg + g])] -= 1;
  }
  return lap;
}

// 4 sin^2(pi m / n), reduced so the sine argument lies in [0, pi/2].
inline double sin2_term(std::int64_t m, std::int64_t n) {
  m = floor_mod(m, n);
  const std::int64_t k = std::min(m, n - m);
  const double s = std::sin(kPi * static_cast<double>(k) / static_cast<double>(n));
  return 4.0 * s * s;
}

inline double eigenvalue_of(const DualCosetRep& v) {
  double lambda = 0.0;
  for (int k = 0; k < v.dim(); ++k) lambda += sin2_term(v.numer[k], v.denom);
  return lambda;
}

struct SpectrumSummary {
  DualCosetTable cosets;       // v, exact
  std::vector<double> values;  // lambda_v = 4 sum_k sin^2(pi v_k)
  std::int64_t zero_multiplicity = 0;

  std::int64_t size() const noexcept { return cosets.count; }
  DualCosetRep rep(std::int64_t i) const { return cosets.rep(i); }
};

inline SpectrumSummary eigenvalues(const IntegerLattice& lat, std::int64_t cap = kDefaultCosetCap) {
  SpectrumSummary s{dual_coset_table(lat, cap), {}, 0};
  s.values.resize(static_cast<std::size_t>(s.cosets.count));
  for (std::int64_t i = 0; i < s.cosets.count; ++i) {
    const DualCosetRep v = s.cosets.rep(i);
    s.values[static_cast<std::size_t>(i)] = eigenvalue_of(v);
    if (v.is_zero()) ++s.zero_multiplicity;
  }
  return s;
}

// Eigenvalues only, in Smith-lexicographic order of v (v = 0 first).
inline std::vector<double> eigenvalue_list(const IntegerLattice& lat, std::int64_t cap = kDefaultFloatCap) {
  const DualCosetTable t = dual_coset_table(lat, cap);
  std::vector<double> out(static_cast<std::size_t>(t.count));
  const int r = t.r;
  for (std::int64_t i = 0; i < t.count; ++i) {
    double lambda = 0.0;
    for (int k = 0; k < r; ++k) lambda += sin2_term(t.numer[static_cast<std::size_t>(i * r + k)], t.denom);
    out[static_cast<std::size_t>(i)] = lambda;
  }
  return out;
}

// Pairwise (tree) summation; the association order depends only on the length.
inline double pairwise_sum(std::span<const double> xs) {
  if (xs.size() <= 8) {
    double s = 0.0;
    for (double x : xs) s += x;
    return s;
  }
  const std::size_t half = xs.size() / 2;
  return pairwise_sum(xs.first(half)) + pairwise_sum(xs.subspan(half));
}

// sum_{v != 0} log lambda_v, summed ascending in lambda by pairwise reduction.
inline double log_det_star_from_spectrum(std::vector<double> lambdas) {
  std::sort(lambdas.begin(), lambdas.end());
  if (!lambdas.empty()) lambdas.erase(lambdas.begin());  // the single zero eigenvalue
  for (double& l : lambdas) l = std::log(l);
  return pairwise_sum(lambdas);
}

inline double log_det_star_float(const IntegerLattice& lat, std::int64_t cap = kDefaultFloatCap) {
  return log_det_star_from_spectrum(eigenvalue_list(lat, cap));
}

namespace detail {

// Reverse Cuthill-McKee ordering of the (connected) torus graph; keeps the
// profile of the reduced Laplacian narrow so elimination fill stays banded.
inline std::vector<std::int64_t> rcm_order(std::int64_t n, const std::vector<std::int64_t>& nb, std::size_t deg) {
  auto bfs = [&](std::int64_t start, std::vector<std::int64_t>& order) {
    std::vector<char> seen(static_cast<std::size_t>(n), 0);
    order.clear();
    order.push_back(start);
    seen[static_cast<std::size_t>(start)] = 1;
    std::vector<std::int64_t> next;
    for (std::size_t head = 0; head < order.size(); ++head) {
      const std::int64_t x = order[head];
      next.clear();
      for (std::size_t g = 0; g < deg; ++g) {
        const std::int64_t y = nb[static_cast<std::size_t>(x) * deg + g];
        if (!seen[static_cast<std::size_t>(y)]) {
          seen[static_cast<std::size_t>(y)] = 1;
          next.push_back(y);
        }
      }
      std::sort(next.begin(), next.end());
      order.insert(order.end(), next.begin(), next.end());
    }
  };
  std::vector<std::int64_t> order;
  bfs(0, order);
  bfs(order.back(), order);  // restart from a far vertex (pseudo-peripheral)
  std::reverse(order.begin(), order.end());
  return order;
}

struct SparseRow {
  std::int64_t stage = 0;
  std::vector<std::int64_t> cols;
  std::vector<BigInt> vals;
};

// Bareiss elimination of a symmetric positive definite matrix given as sparse
// rows. A row that is not touched at step k would only be rescaled by
// pivot_k / pivot_{k-1}; those rescalings telescope, so each row records the
// stage it is current at and is brought forward only when it is next needed.
// Intermediate values are identical to dense Bareiss.
inline BigInt sparse_bareiss_determinant(std::vector<SparseRow> rows) {
  const std::size_t n = rows.size();
  if (n == 0) return 1;
  std::vector<BigInt> divisor(n + 1);
  divisor[0] = 1;
  auto bring = [&](SparseRow& row, std::int64_t k) {
    if (row.stage == k) return;
    const BigInt& from = divisor[static_cast<std::size_t>(row.stage)];
    const BigInt& to = divisor[static_cast<std::size_t>(k)];
    for (auto& v : row.vals) {
      v *= to;
      mpz_divexact(v.get_mpz_t(), v.get_mpz_t(), from.get_mpz_t());
    }
    row.stage = k;
  };

  SparseRow merged;
  BigInt tmp;
  for (std::size_t k = 0; k < n; ++k) {
    SparseRow& piv = rows[k];
    bring(piv, static_cast<std::int64_t>(k));
    if (piv.cols.empty() || piv.cols.front() != static_cast<std::int64_t>(k) || sgn(piv.vals.front()) == 0)
      throw DomainError("zero pivot in Bareiss elimination (disconnected graph?)");
    const BigInt pivot = piv.vals.front();
    const BigInt& prev = divisor[k];
    for (std::size_t e = 1; e < piv.cols.size(); ++e) {
      // The pattern stays symmetric, so column j of the pivot row names row j.
      SparseRow& row = rows[static_cast<std::size_t>(piv.cols[e])];
      bring(row, static_cast<std::int64_t>(k));
      if (row.cols.empty() || row.cols.front() != static_cast<std::int64_t>(k))
        throw DomainError("asymmetric sparsity pattern in Bareiss elimination");
      const BigInt a_ik = row.vals.front();
      merged.cols.clear();
      merged.vals.clear();
      std::size_t p = 1, q = 1;
      while (p < row.cols.size() || q < piv.cols.size()) {
        std::int64_t col;
        BigInt v;
        if (q >= piv.cols.size() || (p < row.cols.size() && row.cols[p] < piv.cols[q])) {
          col = row.cols[p];
          v = row.vals[p] * pivot;
          ++p;
        } else if (p >= row.cols.size() || piv.cols[q] < row.cols[p]) {
          col = piv.cols[q];
          v = -(a_ik * piv.vals[q]);
          ++q;
        } else {
          col = row.cols[p];
          v = row.vals[p] * pivot;
          tmp = a_ik * piv.vals[q];
          v -= tmp;
          ++p;
          ++q;
        }
        mpz_divexact(v.get_mpz_t(), v.get_mpz_t(), prev.get_mpz_t());
        merged.cols.push_back(col);
        merged.vals.push_back(std::move(v));
      }
      std::swap(row.cols, merged.cols);
      std::swap(row.vals, merged.vals);
      row.stage = static_cast<std::int64_t>(k) + 1;
    }
    divisor[k + 1] = pivot;
    piv.cols.clear();
    piv.vals.clear();
  }
  return divisor[n];
}

}  // namespace detail

struct TreeCount {
  BigInt tau;       // number of spanning trees
  BigInt det_star;  // product of the nonzero Laplacian eigenvalues = tau * |det L|
  BigInt det_abs;
};

// Matrix-tree theorem: tau is the determinant of the Laplacian with one vertex
// deleted, evaluated exactly by Bareiss elimination over sparse rows.
inline TreeCount count_spanning_trees(const IntegerLattice& lat, std::int64_t cap = kDefaultExactCap) {
  const QuotientGroup q = lat.quotient(cap);
  const std::int64_t n = q.order();
  if (n == 1) return {BigInt(1), BigInt(1), lat.det_abs()};

  const auto nb = torus_neighbours(q);
  const std::size_t deg = 2 * static_cast<std::size_t>(lat.dim());
  const auto order = detail::rcm_order(n, nb, deg);
  std::vector<std::int64_t> pos(static_cast<std::size_t>(n));
  for (std::int64_t p = 0; p < n; ++p) pos[static_cast<std::size_t>(order[static_cast<std::size_t>(p)])] = p;

  const std::int64_t m = n - 1;  // drop the vertex ordered last
  std::vector<detail::SparseRow> rows(static_cast<std::size_t>(m));
  std::vector<std::pair<std::int64_t, int>> entries;
  for (std::int64_t p = 0; p < m; ++p) {
    const std::int64_t x = order[static_cast<std::size_t>(p)];
    entries.clear();
    int diag = 0;
    for (std::size_t g = 0; g < deg; ++g) {
      const std::int64_t y = nb[static_cast<std::size_t>(x) * deg + g];
      if (y == x) continue;  // loops cancel in the Laplacian
      ++diag;
      const std::int64_t c = pos[static_cast<std::size_t>(y)];
      if (c < m) entries.emplace_back(c, -1);
    }
    entries.emplace_back(p, diag);
    std::sort(entries.begin(), entries.end());
    auto& row = rows[static_cast<std::size_t>(p)];
    for (std::size_t e = 0; e < entries.size();) {
      std::size_t f = e;
      int sum = 0;
      while (f < entries.size() && entries[f].first == entries[e].first) sum += entries[f++].second;
      row.cols.push_back(entries[e].first);
      row.vals.emplace_back(sum);
      e = f;
    }
  }
  TreeCount tc;
  tc.tau = detail::sparse_bareiss_determinant(std::move(rows));
  tc.det_abs = lat.det_abs();
  tc.det_star = tc.tau * tc.det_abs;
  return tc;
}

}  // namespace torus
