#pragma once

// The `torus` command line: argument parsing, subcommands, JSON/CSV output.
// Exit codes: 0 success, 1 domain error, 2 usage error.

#include <CLI11.hpp>

#include <cstdlib>
#include <functional>
#include <map>
#include <tuple>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "torus/asymptotics.hpp"
#include "torus/errors.hpp"
#include "torus/experiment.hpp"
#include "torus/integer_lattice.hpp"
#include "torus/real_lattice.hpp"
#include "torus/spectral.hpp"
#include "torus/theta.hpp"
#include "torus/zeta.hpp"

namespace torus::cli {

using Json = nlohmann::ordered_json;

inline constexpr int kExitOk = 0;
inline constexpr int kExitDomain = 1;
inline constexpr int kExitUsage = 2;

inline constexpr const char* kGrammar =
    "usage: torus <subcommand> [--matrix STR | --lattice NAME | --r INT] [--t REAL] [--s REAL]\n"
    "             [--n-min INT --n-max INT] [--config FILE] [--json|--csv] [--exact|--float]\n"
    "subcommands: trees, spectrum, theta, height, c-const, identity, verify-theorem1, bound,\n"
    "             compare, shortest-vector\n";

struct UsageError : Error {
  using Error::Error;
};

struct Options {
  std::optional<std::string> matrix;
  std::optional<std::string> lattice;
  std::optional<int> r;
  std::optional<double> t;
  std::optional<double> s;
  std::optional<long> n_min;
  std::optional<long> n_max;
  std::optional<std::string> config;
  bool json = false;
  bool csv = false;
  bool exact = false;
  bool floating = false;
};

// Column header plus rows, for CSV output.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

struct Output {
  Json json;
  std::optional<Table> table;
};

inline Json num(double x) { return json_number<Json>(x); }

inline std::string csv_cell(const Json& v) {
  if (v.is_null()) return "";
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  if (v.is_number()) return format_number(v.get<double>());
  if (v.is_array()) {
    std::string s;
    for (const auto& e : v) s += (s.empty() ? "" : ";") + csv_cell(e);
    return s;
  }
  return v.dump();
}

// One-row table from the scalar members of an object.
inline Table flat_table(const Json& obj) {
  Table t;
  t.rows.emplace_back();
  for (const auto& [k, v] : obj.items()) {
    if (v.is_object()) continue;
    t.header.push_back(k);
    t.rows.back().push_back(csv_cell(v));
  }
  return t;
}

inline void write_csv(std::ostream& out, const Table& t) {
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << cells[i];
    out << "\n";
  };
  line(t.header);
  for (const auto& row : t.rows) line(row);
}

inline std::int64_t env_cap(std::int64_t fallback) {
  if (const char* v = std::getenv("TORUS_MAX_COSETS")) {
    char* end = nullptr;
    const long long cap = std::strtoll(v, &end, 10);
    if (end == v || *end != '\0' || cap < 1) throw UsageError("TORUS_MAX_COSETS must be a positive integer");
    return cap;
  }
  return fallback;
}

inline ComputeSpec compute_spec() {
  ComputeSpec cs;
  cs.float_cap = env_cap(kDefaultFloatCap);
  cs.exact_cap = std::min<std::int64_t>(cs.exact_cap, cs.float_cap);
  return cs;
}

inline const std::string& need_matrix(const Options& o) {
  if (!o.matrix) throw UsageError("--matrix is required");
  return *o.matrix;
}

inline IntegerLattice int_lattice(const Options& o) { return IntegerLattice::parse(need_matrix(o)); }

// --lattice NAME (with --r for square) or --matrix with real entries.
inline RealLattice real_lattice(const Options& o) {
  if (o.lattice && o.matrix) throw UsageError("give either --lattice or --matrix");
  if (o.lattice) return named_lattice(*o.lattice, o.r.value_or(2));
  if (o.matrix) return parse_real_lattice(*o.matrix);
  if (o.r) return named_lattice(NamedLattice::square, *o.r);
  throw UsageError("--lattice, --matrix or --r is required");
}

inline Json big(const BigInt& x) { return x.get_str(); }

inline Output cmd_trees(const Options& o) {
  const IntegerLattice lat = int_lattice(o);
  ComputeSpec cs = compute_spec();
  Json j;
  const bool exact = o.exact || (!o.floating && lat.det_abs() <= cs.exact_cap);
  if (exact) {
    const TreeCount tc = count_spanning_trees(lat, o.exact ? cs.float_cap : cs.exact_cap);
    j["tau"] = big(tc.tau);
    j["det"] = big(tc.det_abs);
    j["det_star"] = big(tc.det_star);
    j["log_det_star"] = num(log_abs(tc.det_star));
    j["method"] = "exact";
  } else {
    const double lds = log_det_star_float(lat, cs.float_cap);
    j["det"] = big(lat.det_abs());
    j["log_det_star"] = num(lds);
    j["log_tau"] = num(lds - log_abs(lat.det_abs()));
    j["method"] = "float";
  }
  return {j, std::nullopt};
}

inline Output cmd_spectrum(const Options& o) {
  const IntegerLattice lat = int_lattice(o);
  const SpectrumSummary s = eigenvalues(lat, compute_spec().float_cap);
  Json j;
  j["det"] = big(lat.det_abs());
  j["zero_multiplicity"] = s.zero_multiplicity;
  Json list = Json::array();
  Table t;
  for (int k = 0; k < lat.dim(); ++k) t.header.push_back("v" + std::to_string(k + 1));
  t.header.push_back("lambda");
  for (std::int64_t i = 0; i < s.size(); ++i) {
    const DualCosetRep v = s.rep(i);
    Json coords = Json::array();
    std::vector<std::string> row;
    for (int k = 0; k < v.dim(); ++k) {
      coords.push_back(v.coordinate_string(k));
      row.push_back(v.coordinate_string(k));
    }
    list.push_back({{"v", coords}, {"lambda", num(s.values[static_cast<std::size_t>(i)])}});
    row.push_back(format_number(s.values[static_cast<std::size_t>(i)]));
    t.rows.push_back(std::move(row));
  }
  j["eigenvalues"] = list;
  return {j, t};
}

inline Output cmd_theta(const Options& o) {
  if (!o.t) throw UsageError("--t is required");
  if (*o.t < 0) throw DomainError("t must be nonnegative");
  Json j;
  j["t"] = num(*o.t);
  if (o.matrix && !o.lattice && !o.r) {
    const IntegerLattice lat = int_lattice(o);
    const DiscreteThetaEval e = theta_discrete(lat, *o.t, compute_spec().float_cap);
    j["det"] = big(lat.det_abs());
    j["spectral"] = num(e.spectral_value);
    j["bessel"] = num(e.bessel_value);
    j["truncation_radius"] = e.truncation_radius;
    j["abs_difference"] = num(std::fabs(e.spectral_value - e.bessel_value));
  } else {
    const RealLattice a = real_lattice(o);
    const ContinuousThetaEval e = theta_continuous(a, *o.t);
    j["value"] = num(e.value);
    j["branch"] = e.branch == ThetaBranch::spectral ? "spectral" : "geometric";
  }
  return {j, std::nullopt};
}

// Integer matrices are normalized to volume one; named lattices already are.
inline RealLattice unit_lattice(const Options& o) {
  if (o.matrix && !o.lattice) {
    try {
      return normalize_shape(IntegerLattice::parse(*o.matrix));
    } catch (const ParseError&) {
      return parse_real_lattice(*o.matrix).unit_volume();
    }
  }
  return real_lattice(o).unit_volume();
}

inline Output cmd_height(const Options& o) {
  const RealLattice a = unit_lattice(o);
  const HeightResult h = height(a);
  Json j;
  j["r"] = a.dim();
  j["log_det_star"] = num(h.log_det_star);
  j["height"] = num(h.height());
  j["zeta_log_det_star"] = num(log_det_star_zeta(a));
  j["small_t_integral"] = num(h.small_t_integral);
  j["large_t_integral"] = num(h.large_t_integral);
  j["constant_terms"] = num(h.constant_terms);
  j["quadrature_error"] = num(h.error);
  j["ss_bound"] = num(ss_bound(a.dim()));
  j["ss_margin"] = num(ss_bound(a.dim()) - h.log_det_star);
  return {j, std::nullopt};
}

inline Output cmd_c_const(const Options& o) {
  if (!o.r) throw UsageError("--r is required");
  const CrConstant c = c_constant(*o.r);
  Json j;
  j["r"] = c.r;
  j["value"] = num(c.value);
  j["err"] = num(c.quadrature_error);
  return {j, std::nullopt};
}

inline Output cmd_identity(const Options& o) {
  const IntegerLattice lat = int_lattice(o);
  const double s = o.s.value_or(0.0);
  const ComputeSpec cs = compute_spec();
  const IdentityCheck c = spectral_log_identity_check(lat, s, cs.exact_cap, cs.float_cap);
  Json j;
  j["det"] = big(lat.det_abs());
  j["s"] = num(s);
  j["lhs"] = num(c.lhs);
  j["script_i"] = num(c.script_i);
  j["script_h"] = num(c.script_h);
  j["rhs"] = num(c.rhs);
  j["residual"] = num(c.residual);
  j["exact_lhs"] = c.exact_lhs ? num(*c.exact_lhs) : Json(nullptr);
  j["exact_residual"] = c.exact_residual ? num(*c.exact_residual) : Json(nullptr);
  return {j, std::nullopt};
}

inline Table records_table(const std::vector<ExperimentRecord>& records) {
  Table t;
  t.header = {"n", "det", "log_det_star", "method", "predicted", "residual", "wall_ms"};
  for (const auto& r : records)
    t.rows.push_back({std::to_string(r.n), r.det.get_str(), format_number(r.log_det_star), r.method,
                      format_number(r.predicted), format_number(r.residual), format_number(r.wall_ms)});
  return t;
}

inline Json records_json(const Theorem1Report& rep) {
  Json recs = Json::array();
  for (const auto& r : rep.records)
    recs.push_back({{"n", r.n},
                    {"det", big(r.det)},
                    {"log_det_star", num(r.log_det_star)},
                    {"method", r.method},
                    {"predicted", num(r.predicted)},
                    {"residual", num(r.residual)},
                    {"wall_ms", num(r.wall_ms)}});
  return recs;
}

inline Json summary(const Theorem1Report& rep) {
  Json j;
  j["c_r"] = num(rep.c_r);
  j["shape_log_det_star"] = num(rep.shape_log_det_star);
  j["max_abs_residual_top_quartile"] = num(rep.max_abs_residual_top_quartile);
  j["final_abs_residual"] = num(rep.final_abs_residual);
  j["monotone_score"] = num(rep.monotone_score);
  j["slope_last_half"] = num(rep.slope_last_half);
  j["decreasing_last_half"] = rep.decreasing_last_half;
  return j;
}

inline SequenceSpec sequence_from(const Options& o) {
  SequenceSpec spec;
  if (o.lattice) {
    spec.kind = parse_sequence_kind(*o.lattice == "hexagonal_A2" ? "hexagonal" : *o.lattice);
  } else {
    spec.base = parse_int_matrix(need_matrix(o));
  }
  if (!o.n_min || !o.n_max) throw UsageError("--n-min and --n-max are required");
  spec.n_min = *o.n_min;
  spec.n_max = *o.n_max;
  if (spec.n_min < 1 || spec.n_max < spec.n_min) throw UsageError("need 1 <= n-min <= n-max");
  return spec;
}

inline Output cmd_verify(const Options& o) {
  Json j;
  Theorem1Report rep;
  if (o.config) {
    if (o.matrix || o.lattice || o.n_min || o.n_max) throw UsageError("--config excludes sequence options");
    const RunResult run = run_experiment_file(*o.config);
    rep = run.report;
    j["run_dir"] = run.dir.string();
  } else {
    rep = verify_theorem1(sequence_from(o), compute_spec());
  }
  j["summary"] = summary(rep);
  j["records"] = records_json(rep);
  return {j, records_table(rep.records)};
}

inline Output cmd_bound(const Options& o) {
  const IntegerLattice lat = int_lattice(o);
  const ComputeSpec cs = compute_spec();
  const LogDetStar lds = log_det_star_auto(lat, cs);
  const double log_det = log_abs(lat.det_abs());
  const TreeBound b = check_tree_bound(lat.dim(), log_det, lat.det_abs().get_d(), lds.value - log_det, c_value(lat.dim()));
  Json j;
  j["det"] = big(lat.det_abs());
  j["r"] = lat.dim();
  j["method"] = lds.method;
  j["log_tau"] = num(b.log_tau);
  j["log_bound"] = num(b.log_bound);
  j["slack"] = num(b.slack);
  j["holds"] = b.holds;
  return {j, std::nullopt};
}

// Hexagonal sequence against determinant-matched rectangles, or --matrix B
// (scaled) against the hexagonal sequence.
inline Output cmd_compare(const Options& o) {
  if (!o.n_min || !o.n_max) throw UsageError("--n-min and --n-max are required");
  SequenceSpec a;
  a.kind = SequenceKind::hexagonal;
  a.n_min = *o.n_min;
  a.n_max = *o.n_max;
  SequenceSpec b = a;
  b.kind = SequenceKind::matched_rectangles;
  if (o.matrix) {
    b.kind = SequenceKind::scaled;
    b.base = parse_int_matrix(*o.matrix);
  }
  if (a.n_min < 1 || a.n_max < a.n_min) throw UsageError("need 1 <= n-min <= n-max");
  const ComparisonReport rep = compare_sequences(a, b, DetMatching::exact, compute_spec());
  Json j;
  j["a"] = to_string(a.kind);
  j["b"] = o.matrix ? "scaled " + *o.matrix : to_string(b.kind);
  j["advisory"] = rep.advisory;
  j["diagnostic"] = rep.diagnostic;
  j["winner_at_largest"] = rep.winner_at_largest;
  Json rows = Json::array();
  Table t;
  t.header = {"n_a", "n_b", "det", "log_tau_a", "log_tau_b", "method_a", "method_b", "winner"};
  for (const auto& row : rep.rows) {
    rows.push_back({{"n_a", row.n_a},
                    {"n_b", row.n_b},
                    {"det", big(row.det_a)},
                    {"log_tau_a", num(row.log_tau_a)},
                    {"log_tau_b", num(row.log_tau_b)},
                    {"method_a", row.method_a},
                    {"method_b", row.method_b},
                    {"winner", row.winner}});
    t.rows.push_back({std::to_string(row.n_a), std::to_string(row.n_b), row.det_a.get_str(),
                      format_number(row.log_tau_a), format_number(row.log_tau_b), row.method_a, row.method_b,
                      std::to_string(row.winner)});
  }
  j["rows"] = rows;
  return {j, t};
}

inline Output cmd_shortest(const Options& o) {
  const RealLattice a = real_lattice(o);
  const ShortestVector sv = shortest_vector_search(a);
  Json j;
  j["r"] = a.dim();
  j["length"] = num(sv.length);
  j["norm2"] = num(sv.length * sv.length);
  j["coefficients"] = sv.coefficients;
  return {j, std::nullopt};
}

inline int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Spanning trees, spectra and heights of discrete and flat tori", "torus"};
  app.require_subcommand(1, 1);
  app.set_version_flag("--version", kVersion);
  Options o;
  using Handler = std::function<Output(const Options&)>;
  const std::vector<std::tuple<std::string, std::string, Handler>> commands{
      {"trees", "exact spanning-tree count (or log det* in float mode)", cmd_trees},
      {"spectrum", "Laplacian eigenvalues indexed by dual cosets", cmd_spectrum},
      {"theta", "discrete (--matrix) or continuous (--lattice) theta function", cmd_theta},
      {"height", "log det* of a volume-one flat torus", cmd_height},
      {"c-const", "the lattice constant c_r", cmd_c_const},
      {"identity", "check the spectral log identity at --s", cmd_identity},
      {"verify-theorem1", "residual sweep from --config or --matrix/--lattice with --n-min/--n-max", cmd_verify},
      {"bound", "spanning-tree upper bound and its slack", cmd_bound},
      {"compare", "hexagonal vs determinant-matched lattices", cmd_compare},
      {"shortest-vector", "shortest nonzero lattice vector (r <= 4)", cmd_shortest},
  };
  std::map<CLI::App*, Handler> handlers;
  for (const auto& [name, help, handler] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    auto* matrix = sub->add_option("--matrix", o.matrix, "matrix, rows ';' entries ',' e.g. \"2,1;0,2\"");
    sub->add_option("--lattice", o.lattice, "named lattice: square, hexagonal, fcc");
    sub->add_option("--r", o.r, "dimension");
    sub->add_option("--t", o.t, "time");
    sub->add_option("--s", o.s, "spectral parameter");
    sub->add_option("--n-min", o.n_min, "first n");
    sub->add_option("--n-max", o.n_max, "last n");
    sub->add_option("--config", o.config, "experiment config file");
    auto* json = sub->add_flag("--json", o.json, "JSON output (default)");
    auto* csv = sub->add_flag("--csv", o.csv, "CSV output");
    json->excludes(csv);
    auto* ex = sub->add_flag("--exact", o.exact, "exact tree count");
    auto* fl = sub->add_flag("--float", o.floating, "floating eigenvalue path");
    ex->excludes(fl);
    (void)matrix;
    handlers[sub] = handler;
  }

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << "\n";
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << kGrammar;
    return kExitUsage;
  }

  CLI::App* sub = app.get_subcommands().front();
  try {
    const Output result = handlers.at(sub)(o);
    if (o.csv)
      write_csv(out, result.table ? *result.table : flat_table(result.json));
    else
      out << result.json.dump(2) << "\n";
    return kExitOk;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n" << kGrammar;
    return kExitUsage;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n" << kGrammar;
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitDomain;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitDomain;
  }
}

inline int dispatch(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return dispatch(args, out, err);
}

}  // namespace torus::cli
