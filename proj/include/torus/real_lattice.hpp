#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "torus/errors.hpp"
#include "torus/integer_lattice.hpp"

namespace torus {

// A full-rank lattice A Z^r in R^r (columns of A are the basis vectors).
class RealLattice {
 public:
  RealLattice() = default;

  explicit RealLattice(Eigen::MatrixXd basis) : basis_(std::move(basis)) {
    if (basis_.rows() < 1 || basis_.rows() != basis_.cols()) throw DimensionError("lattice basis must be square, r >= 1");
    const double det = basis_.determinant();
    if (!std::isfinite(det) || det == 0.0) throw SingularMatrix();
    volume_ = std::fabs(det);
    gram_ = basis_.transpose() * basis_;
    dual_ = basis_.inverse().transpose();
  }

  int dim() const noexcept { return static_cast<int>(basis_.rows()); }
  const Eigen::MatrixXd& basis() const noexcept { return basis_; }
  const Eigen::MatrixXd& gram() const noexcept { return gram_; }
  // (A^{-1})^T, basis of the dual lattice.
  const Eigen::MatrixXd& dual_basis() const noexcept { return dual_; }
  double volume() const noexcept { return volume_; }

  RealLattice dual() const { return RealLattice(dual_); }
  RealLattice scaled(double c) const { return RealLattice(basis_ * c); }
  RealLattice unit_volume() const { return scaled(std::pow(volume_, -1.0 / dim())); }

 private:
  Eigen::MatrixXd basis_;
  Eigen::MatrixXd gram_;
  Eigen::MatrixXd dual_;
  double volume_ = 0.0;
};

inline RealLattice to_real(const IntegerLattice& lat) {
  const int r = lat.dim();
  Eigen::MatrixXd a(r, r);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < r; ++j) a(i, j) = lat.matrix()(i, j).get_d();
  return RealLattice(a);
}

// L / |det L|^{1/r}, a lattice of covolume one.
inline RealLattice normalize_shape(const IntegerLattice& lat) {
  const int r = lat.dim();
  const double scale = std::exp(-log_abs(lat.det_abs()) / r);
  Eigen::MatrixXd a(r, r);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < r; ++j) a(i, j) = lat.matrix()(i, j).get_d() * scale;
  return RealLattice(a);
}

enum class NamedLattice { square, hexagonal_A2, fcc_D3 };

inline NamedLattice parse_named_lattice(std::string_view name) {
  if (name == "square" || name == "square_r" || name == "Z") return NamedLattice::square;
  if (name == "hexagonal" || name == "hexagonal_A2" || name == "A2") return NamedLattice::hexagonal_A2;
  if (name == "fcc" || name == "fcc_D3" || name == "D3") return NamedLattice::fcc_D3;
  throw ParseError("unknown lattice name '" + std::string(name) + "'");
}

// Volume-one basis of a named lattice. `r` only matters for the square lattice.
inline RealLattice named_lattice(NamedLattice name, int r = 2) {
  switch (name) {
    case NamedLattice::square:
      if (r < 1) throw DimensionError("square lattice needs r >= 1");
      return RealLattice(Eigen::MatrixXd::Identity(r, r));
    case NamedLattice::hexagonal_A2: {
      Eigen::MatrixXd a(2, 2);
      a << 1.0, 0.5, 0.0, std::sqrt(3.0) / 2.0;
      return RealLattice(a).unit_volume();
    }
    case NamedLattice::fcc_D3: {
      Eigen::MatrixXd a(3, 3);
      // Columns (1,1,0), (0,1,1), (1,0,1); determinant 2.
      a << 1, 0, 1, 1, 1, 0, 0, 1, 1;
      return RealLattice(a).unit_volume();
    }
  }
  throw ParseError("unknown lattice name");
}

inline RealLattice named_lattice(std::string_view name, int r = 2) { return named_lattice(parse_named_lattice(name), r); }

// Parses "a,b;c,d" with real entries.
inline RealLattice parse_real_lattice(std::string_view text) {
  std::vector<std::vector<double>> rows;
  std::string cleaned;
  for (char ch : text)
    if (ch != ' ' && ch != '\t') cleaned += ch;
  std::stringstream rs(cleaned);
  std::string row;
  while (std::getline(rs, row, ';')) {
    std::vector<double> entries;
    std::stringstream es(row);
    std::string e;
    while (std::getline(es, e, ',')) {
      char* end = nullptr;
      const double v = std::strtod(e.c_str(), &end);
      if (e.empty() || end != e.c_str() + e.size()) throw ParseError("bad matrix entry '" + e + "'");
      entries.push_back(v);
    }
    rows.push_back(std::move(entries));
  }
  const int n = static_cast<int>(rows.size());
  if (n == 0) throw ParseError("empty matrix");
  Eigen::MatrixXd a(n, n);
  for (int i = 0; i < n; ++i) {
    if (static_cast<int>(rows[i].size()) != n) throw ParseError("matrix must be square");
    for (int j = 0; j < n; ++j) a(i, j) = rows[i][j];
  }
  return RealLattice(a);
}

struct ShortestVector {
  double length = 0.0;
  std::vector<long> coefficients;  // m with |A m| minimal
};

// Exhaustive search over the box |m_i| <= R * |row_i(A^{-1})|, which contains
// every lattice vector of length <= R; R is the shortest basis column, an upper
// bound on the minimum.
inline ShortestVector shortest_vector_search(const RealLattice& a) {
  const int r = a.dim();
  if (r > 4) throw DimensionError("shortest_vector supports r <= 4");
  double radius = std::numeric_limits<double>::infinity();
  for (int j = 0; j < r; ++j) radius = std::min(radius, a.basis().col(j).norm());
  const Eigen::MatrixXd inv = a.basis().inverse();
  std::vector<long> bound(r);
  for (int i = 0; i < r; ++i) bound[i] = static_cast<long>(std::floor(radius * inv.row(i).norm() * (1 + 1e-12) + 1e-9));

  ShortestVector best{radius, {}};
  best.coefficients.assign(r, 0);
  for (int j = 0; j < r; ++j)
    if (a.basis().col(j).norm() == radius) {
      best.coefficients[j] = 1;
      break;
    }
  std::vector<long> m(r);
  for (int i = 0; i < r; ++i) m[i] = -bound[i];
  Eigen::VectorXd mv(r);
  for (;;) {
    bool nonzero = false;
    for (int i = 0; i < r; ++i) {
      mv(i) = static_cast<double>(m[i]);
      nonzero = nonzero || m[i] != 0;
    }
    if (nonzero) {
      const double len = (a.basis() * mv).norm();
      if (len < best.length) best = {len, m};
    }
    int i = r - 1;
    while (i >= 0 && m[i] == bound[i]) {
      m[i] = -bound[i];
      --i;
    }
    if (i < 0) break;
    ++m[i];
  }
  return best;
}

inline double shortest_vector(const RealLattice& a) { return shortest_vector_search(a).length; }

}  // namespace torus
