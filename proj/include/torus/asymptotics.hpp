#pragma once

// Sweeps over lattice sequences: residuals of the log-determinant expansion,
// the tree-count upper bound, and determinant-matched comparisons.

#include <chrono>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "torus/constants.hpp"
#include "torus/errors.hpp"
#include "torus/integer_lattice.hpp"
#include "torus/real_lattice.hpp"
#include "torus/spectral.hpp"
#include "torus/zeta.hpp"

namespace torus {

enum class SequenceKind {
  scaled,              // n * base
  hexagonal,           // [[2n, n], [0, round(sqrt(3) n)]]
  matched_rectangles,  // diag(2n, round(sqrt(3) n)), same determinant as hexagonal
};

inline SequenceKind parse_sequence_kind(std::string_view s) {
  if (s == "scaled") return SequenceKind::scaled;
  if (s == "hexagonal") return SequenceKind::hexagonal;
  if (s == "matched_rectangles" || s == "rectangles") return SequenceKind::matched_rectangles;
  throw ParseError("unknown sequence kind '" + std::string(s) + "'");
}

inline std::string to_string(SequenceKind k) {
  switch (k) {
    case SequenceKind::scaled: return "scaled";
    case SequenceKind::hexagonal: return "hexagonal";
    case SequenceKind::matched_rectangles: return "matched_rectangles";
  }
  return "?";
}

struct SequenceSpec {
  SequenceKind kind = SequenceKind::scaled;
  IntMatrix base = IntMatrix::identity(2);
  long n_min = 2;
  long n_max = 16;

  int dim() const { return kind == SequenceKind::scaled ? base.rows() : 2; }

  IntegerLattice lattice(long n) const {
    const long p = std::lround(std::sqrt(3.0) * static_cast<double>(n));
    switch (kind) {
      case SequenceKind::scaled: return IntegerLattice(base.scaled(BigInt(n)));
      case SequenceKind::hexagonal: return IntegerLattice(IntMatrix::from_rows({{2 * n, n}, {0, p}}));
      case SequenceKind::matched_rectangles: return IntegerLattice(IntMatrix::from_rows({{2 * n, 0}, {0, p}}));
    }
    throw ParseError("unknown sequence kind");
  }

  // Limit of Lambda_n / det^{1/r}.
  RealLattice shape_limit() const {
    switch (kind) {
      case SequenceKind::scaled: return normalize_shape(IntegerLattice(base));
      case SequenceKind::hexagonal: return named_lattice(NamedLattice::hexagonal_A2);
      case SequenceKind::matched_rectangles: {
        Eigen::MatrixXd a(2, 2);
        a << 2.0, 0.0, 0.0, std::sqrt(3.0);
        return RealLattice(a).unit_volume();
      }
    }
    throw ParseError("unknown sequence kind");
  }

  void validate() const {
    if (n_min < 1 || n_max < n_min) throw ParseError("need 1 <= n_min <= n_max");
    if (kind == SequenceKind::scaled) IntegerLattice check(base);
  }
};

// Operator-norm distance between normalize_shape(Lambda_n) and the shape limit.
inline double shape_distance(const SequenceSpec& spec, long n) {
  const RealLattice a = normalize_shape(spec.lattice(n));
  return (a.basis() - spec.shape_limit().basis()).norm();
}

struct ComputeSpec {
  std::int64_t exact_cap = kDefaultExactCap;
  std::int64_t float_cap = kDefaultFloatCap;
  double rel_tol = 1e-10;
};

// Shape-independent part of the expansion: c_r det + (2/r) log det.
inline double universal_terms(int r, double log_det, double det, double c_r) {
  return c_r * det + (2.0 / r) * log_det;
}

struct ExperimentRecord {
  long n = 0;
  BigInt det;
  double log_det_star = 0.0;
  std::string method;  // exact, float or skipped
  double predicted = 0.0;
  double residual = 0.0;
  double wall_ms = 0.0;
  bool skipped() const { return method == "skipped"; }
};

struct LogDetStar {
  double value = 0.0;
  std::string method;
  std::optional<BigInt> tau;
};

// Exact tree count when |det| <= exact_cap, eigenvalue sum otherwise.
inline LogDetStar log_det_star_auto(const IntegerLattice& lat, const ComputeSpec& cs) {
  if (lat.det_abs() <= cs.exact_cap) {
    const TreeCount tc = count_spanning_trees(lat, cs.exact_cap);
    return {log_abs(tc.det_star), "exact", tc.tau};
  }
  return {log_det_star_float(lat, cs.float_cap), "float", std::nullopt};
}

struct Theorem1Report {
  std::vector<ExperimentRecord> records;
  double c_r = 0.0;
  double shape_log_det_star = 0.0;
  double max_abs_residual_top_quartile = 0.0;
  // Fraction of consecutive pairs in the final half with |e_{k+1}| < |e_k|.
  double monotone_score = 0.0;
  // Least-squares slope of |residual| against n over the final half.
  double slope_last_half = 0.0;
  bool decreasing_last_half = false;
  double final_abs_residual = 0.0;
};

inline Theorem1Report summarize(std::vector<ExperimentRecord> records, double c_r, double shape) {
  Theorem1Report rep;
  rep.records = std::move(records);
  rep.c_r = c_r;
  rep.shape_log_det_star = shape;
  std::vector<const ExperimentRecord*> done;
  for (const auto& rec : rep.records)
    if (!rec.skipped()) done.push_back(&rec);
  if (done.empty()) return rep;
  const std::size_t m = done.size();
  for (std::size_t i = m - (m + 3) / 4; i < m; ++i)
    rep.max_abs_residual_top_quartile = std::max(rep.max_abs_residual_top_quartile, std::fabs(done[i]->residual));
  rep.final_abs_residual = std::fabs(done.back()->residual);
  const std::size_t first = m / 2;
  std::size_t pairs = 0, down = 0;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = first; i < m; ++i) {
    const double x = static_cast<double>(done[i]->n), y = std::fabs(done[i]->residual);
    sx += x, sy += y, sxx += x * x, sxy += x * y;
    if (i + 1 < m) {
      ++pairs;
      if (std::fabs(done[i + 1]->residual) < std::fabs(done[i]->residual)) ++down;
    }
  }
  const double k = static_cast<double>(m - first);
  const double denom = k * sxx - sx * sx;
  rep.slope_last_half = denom > 0 ? (k * sxy - sx * sy) / denom : 0.0;
  rep.monotone_score = pairs ? static_cast<double>(down) / static_cast<double>(pairs) : 0.0;
  rep.decreasing_last_half = pairs > 0 && down == pairs;
  return rep;
}

// Residuals log det* - [c_r det + (2/r) log det + log det* of the shape limit].
inline Theorem1Report verify_theorem1(const SequenceSpec& spec, const ComputeSpec& cs = {}) {
  spec.validate();
  const int r = spec.dim();
  const double c_r = c_value(r);
  const double shape = height(spec.shape_limit()).log_det_star;
  std::vector<ExperimentRecord> records;
  for (long n = spec.n_min; n <= spec.n_max; ++n) {
    const auto start = std::chrono::steady_clock::now();
    const IntegerLattice lat = spec.lattice(n);
    ExperimentRecord rec;
    rec.n = n;
    rec.det = lat.det_abs();
    const double det = lat.det_abs().get_d();
    const double log_det = log_abs(lat.det_abs());
    rec.predicted = universal_terms(r, log_det, det, c_r) + shape;
    try {
      const LogDetStar lds = log_det_star_auto(lat, cs);
      rec.log_det_star = lds.value;
      rec.method = lds.method;
      rec.residual = rec.log_det_star - rec.predicted;
    } catch (const CapExceeded&) {
      rec.method = "skipped";
      rec.log_det_star = std::nan("");
      rec.residual = std::nan("");
    }
    rec.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    records.push_back(std::move(rec));
  }
  return summarize(std::move(records), c_r, shape);
}

struct TreeBound {
  bool holds = false;
  double log_tau = 0.0;
  double log_bound = 0.0;  // (2/r - 1) log det - log 4 pi + c_r det + gamma + 2/r
  double slack = 0.0;      // log_bound - log_tau
};

inline TreeBound check_tree_bound(int r, double log_det, double det, double log_tau, double c_r) {
  TreeBound b;
  b.log_tau = log_tau;
  b.log_bound = (2.0 / r - 1.0) * log_det - std::log(4.0 * kPi) + c_r * det + kEulerGamma + 2.0 / r;
  b.slack = b.log_bound - b.log_tau;
  b.holds = b.slack >= 0;
  return b;
}

inline TreeBound check_tree_bound(const IntegerLattice& lat, const ComputeSpec& cs = {}) {
  const LogDetStar lds = log_det_star_auto(lat, cs);
  const double log_det = log_abs(lat.det_abs());
  return check_tree_bound(lat.dim(), log_det, lat.det_abs().get_d(), lds.value - log_det, c_value(lat.dim()));
}

enum class DetMatching { exact, near };

struct ComparisonRow {
  long n_a = 0, n_b = 0;
  BigInt det_a, det_b;
  double log_tau_a = 0.0, log_tau_b = 0.0;
  std::string method_a, method_b;
  bool near_match = false;  // determinants differ; compare per-vertex after the universal terms
  int winner = 0;           // +1 when A has more spanning trees, -1 when B, 0 on a tie
};

struct ComparisonReport {
  std::vector<ComparisonRow> rows;
  std::string diagnostic;
  bool advisory = true;
  // Winner at the largest matched determinant, 0 when no rows.
  int winner_at_largest = 0;
};

inline ComparisonReport compare_sequences(const SequenceSpec& a, const SequenceSpec& b,
                                          DetMatching matching = DetMatching::exact, const ComputeSpec& cs = {},
                                          double near_rel_tol = 0.02) {
  a.validate();
  b.validate();
  if (a.dim() != b.dim()) throw DimensionError("sequences have different dimensions");
  std::map<BigInt, long> b_by_det;
  for (long n = b.n_min; n <= b.n_max; ++n) b_by_det.emplace(b.lattice(n).det_abs(), n);

  ComparisonReport rep;
  const int r = a.dim();
  const double c_r = c_value(r);
  for (long n = a.n_min; n <= a.n_max; ++n) {
    const IntegerLattice la = a.lattice(n);
    std::optional<long> partner;
    bool near = false;
    if (auto it = b_by_det.find(la.det_abs()); it != b_by_det.end()) {
      partner = it->second;
    } else if (matching == DetMatching::near) {
      double best = near_rel_tol;
      for (const auto& [det, m] : b_by_det) {
        const BigInt diff = det - la.det_abs();
        const double rel = std::fabs(diff.get_d()) / la.det_abs().get_d();
        if (rel <= best) {
          best = rel;
          partner = m;
          near = true;
        }
      }
    }
    if (!partner) continue;
    const IntegerLattice lb = b.lattice(*partner);
    ComparisonRow row;
    row.n_a = n;
    row.n_b = *partner;
    row.det_a = la.det_abs();
    row.det_b = lb.det_abs();
    row.near_match = near;
    const LogDetStar da = log_det_star_auto(la, cs), db = log_det_star_auto(lb, cs);
    row.method_a = da.method;
    row.method_b = db.method;
    row.log_tau_a = da.value - log_abs(la.det_abs());
    row.log_tau_b = db.value - log_abs(lb.det_abs());
    if (da.tau && db.tau && !near) {
      row.winner = *da.tau > *db.tau ? 1 : (*da.tau < *db.tau ? -1 : 0);
    } else {
      // Remove the universal terms so unequal determinants are comparable.
      const double ea = row.log_tau_a - universal_terms(r, log_abs(la.det_abs()), la.det_abs().get_d(), c_r) +
                        log_abs(la.det_abs());
      const double eb = row.log_tau_b - universal_terms(r, log_abs(lb.det_abs()), lb.det_abs().get_d(), c_r) +
                        log_abs(lb.det_abs());
      const double diff = near ? ea - eb : row.log_tau_a - row.log_tau_b;
      row.winner = diff > 0 ? 1 : (diff < 0 ? -1 : 0);
    }
    rep.rows.push_back(std::move(row));
  }
  if (rep.rows.empty()) {
    rep.diagnostic = "no matching determinants in range";
  } else {
    const ComparisonRow* top = &rep.rows.front();
    for (const auto& row : rep.rows)
      if (row.det_a >= top->det_a) top = &row;
    rep.winner_at_largest = top->winner;
    rep.diagnostic = "advisory: finite-range evidence only";
  }
  return rep;
}

}  // namespace torus
