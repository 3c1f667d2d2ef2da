#pragma once

// INI-style experiment files and run directories:
//   [sequence] kind, base, n_min, n_max
//   [compute]  exact_cap, float_cap, rel_tol
//   [output]   dir, formats

#include <boost/version.hpp>
#include <gmp.h>

#include <Eigen/Core>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <json.hpp>
#include <set>
#include <sstream>
#include <string>

#include "torus/asymptotics.hpp"
#include "torus/errors.hpp"

namespace torus {

inline constexpr const char* kVersion = "0.1.0";

// %.15g
inline std::string format_number(double x) {
  if (std::isnan(x)) return "";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.15g", x);
  return buf;
}

inline double round15(double x) { return std::strtod(format_number(x).c_str(), nullptr); }

// x rounded to 15 significant digits, so JSON output carries no more; null when not finite.
template <class Json = nlohmann::json>
Json json_number(double x) {
  if (!std::isfinite(x)) return nullptr;
  return round15(x);
}

struct ExperimentConfig {
  SequenceSpec sequence;
  ComputeSpec compute;
  std::string output_dir = "runs";
  std::set<std::string> formats{"csv", "json"};
  std::string text;  // verbatim source
};

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

template <class T>
T parse_number(const std::string& value, int line, const std::string& key) {
  std::istringstream in(value);
  T out{};
  in >> out;
  if (!in || !in.eof()) throw ParseError("bad value '" + value + "' for " + key, line);
  return out;
}

}  // namespace detail

inline ExperimentConfig parse_experiment_config(const std::string& text) {
  ExperimentConfig cfg;
  cfg.text = text;
  std::map<std::string, int> section_line;
  std::map<std::string, std::map<std::string, std::pair<std::string, int>>> values;
  const std::map<std::string, std::set<std::string>> known{
      {"sequence", {"kind", "base", "n_min", "n_max"}},
      {"compute", {"exact_cap", "float_cap", "rel_tol"}},
      {"output", {"dir", "formats"}},
  };

  std::istringstream in(text);
  std::string raw, section;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::string s = detail::trim(raw.substr(0, raw.find('#')));
    if (s.empty() || s.front() == ';') continue;
    if (s.front() == '[') {
      if (s.back() != ']') throw ParseError("unterminated section header", line);
      section = detail::trim(s.substr(1, s.size() - 2));
      if (!known.count(section)) throw ParseError("unknown section [" + section + "]", line);
      if (section_line.count(section)) throw ParseError("duplicate section [" + section + "]", line);
      section_line[section] = line;
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ParseError("expected key = value", line);
    if (section.empty()) throw ParseError("key outside of any section", line);
    const std::string key = detail::trim(s.substr(0, eq));
    const std::string value = detail::trim(s.substr(eq + 1));
    if (!known.at(section).count(key)) throw ParseError("unknown key '" + key + "' in [" + section + "]", line);
    if (value.empty()) throw ParseError("empty value for " + key, line);
    if (values[section].count(key)) throw ParseError("duplicate key '" + key + "'", line);
    values[section][key] = {value, line};
  }
  if (section_line.empty()) throw ParseError("empty config", line);
  if (!section_line.count("sequence")) throw ParseError("missing [sequence] section", line);

  auto& seq = values["sequence"];
  auto require = [&](const std::string& key) -> const std::pair<std::string, int>& {
    auto it = seq.find(key);
    if (it == seq.end()) throw ParseError("[sequence] needs '" + key + "'", section_line["sequence"]);
    return it->second;
  };
  {
    const auto& [kind, l] = require("kind");
    try {
      cfg.sequence.kind = parse_sequence_kind(kind);
    } catch (const ParseError& e) {
      throw ParseError(e.what(), l);
    }
  }
  if (cfg.sequence.kind == SequenceKind::scaled) {
    const auto& [base, l] = require("base");
    try {
      cfg.sequence.base = parse_int_matrix(base);
      IntegerLattice check(cfg.sequence.base);
    } catch (const Error& e) {
      throw ParseError(std::string("base: ") + e.what(), l);
    }
  } else if (seq.count("base")) {
    throw ParseError("'base' only applies to kind = scaled", seq["base"].second);
  }
  {
    const auto& [v, l] = require("n_min");
    cfg.sequence.n_min = detail::parse_number<long>(v, l, "n_min");
  }
  {
    const auto& [v, l] = require("n_max");
    cfg.sequence.n_max = detail::parse_number<long>(v, l, "n_max");
    if (cfg.sequence.n_min < 1 || cfg.sequence.n_max < cfg.sequence.n_min)
      throw ParseError("need 1 <= n_min <= n_max", l);
  }

  for (const auto& [key, vl] : values["compute"]) {
    const auto& [v, l] = vl;
    if (key == "exact_cap") cfg.compute.exact_cap = detail::parse_number<std::int64_t>(v, l, key);
    if (key == "float_cap") cfg.compute.float_cap = detail::parse_number<std::int64_t>(v, l, key);
    if (key == "rel_tol") cfg.compute.rel_tol = detail::parse_number<double>(v, l, key);
    if ((key == "rel_tol" && !(cfg.compute.rel_tol > 0)) || (key == "exact_cap" && cfg.compute.exact_cap < 1) ||
        (key == "float_cap" && cfg.compute.float_cap < 1))
      throw ParseError(key + " must be positive", l);
  }
  for (const auto& [key, vl] : values["output"]) {
    const auto& [v, l] = vl;
    if (key == "dir") cfg.output_dir = v;
    if (key == "formats") {
      cfg.formats.clear();
      std::istringstream fs(v);
      std::string f;
      while (std::getline(fs, f, ',')) {
        f = detail::trim(f);
        if (f != "csv" && f != "json") throw ParseError("unknown format '" + f + "'", l);
        cfg.formats.insert(f);
      }
      if (cfg.formats.empty()) throw ParseError("formats is empty", l);
    }
  }
  return cfg;
}

inline ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_experiment_config(ss.str());
}

inline const char* kRecordsCsvHeader = "n,det,log_det_star,method,predicted,residual,wall_ms";

inline std::string records_csv(const std::vector<ExperimentRecord>& records) {
  std::string out = std::string(kRecordsCsvHeader) + "\n";
  for (const auto& r : records) {
    out += std::to_string(r.n) + "," + r.det.get_str() + "," + format_number(r.log_det_star) + "," + r.method + "," +
           format_number(r.predicted) + "," + format_number(r.residual) + "," + format_number(r.wall_ms) + "\n";
  }
  return out;
}

inline nlohmann::json record_json(const ExperimentRecord& r) {
  return {{"n", r.n},
          {"det", r.det.get_str()},
          {"log_det_star", json_number(r.log_det_star)},
          {"method", r.method},
          {"predicted", json_number(r.predicted)},
          {"residual", json_number(r.residual)},
          {"wall_ms", json_number(r.wall_ms)}};
}

inline nlohmann::json summary_json(const Theorem1Report& rep) {
  return {{"c_r", json_number(rep.c_r)},
          {"shape_log_det_star", json_number(rep.shape_log_det_star)},
          {"max_abs_residual_top_quartile", json_number(rep.max_abs_residual_top_quartile)},
          {"final_abs_residual", json_number(rep.final_abs_residual)},
          {"monotone_score", json_number(rep.monotone_score)},
          {"slope_last_half", json_number(rep.slope_last_half)},
          {"decreasing_last_half", rep.decreasing_last_half}};
}

inline nlohmann::json report_json(const Theorem1Report& rep) {
  nlohmann::json recs = nlohmann::json::array();
  for (const auto& r : rep.records) recs.push_back(record_json(r));
  return {{"records", recs}, {"summary", summary_json(rep)}};
}

inline nlohmann::json environment_manifest() {
  return {{"tool", "torus"},
          {"version", kVersion},
          {"compiler", __VERSION__},
          {"cplusplus", __cplusplus},
          {"gmp", gmp_version},
          {"boost", BOOST_LIB_VERSION},
          {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                        std::to_string(EIGEN_MINOR_VERSION)}};
}

struct RunResult {
  std::filesystem::path dir;
  Theorem1Report report;
};

// First free <base>/run-NNN.
inline std::filesystem::path next_run_dir(const std::filesystem::path& base) {
  std::filesystem::create_directories(base);
  for (int k = 1; k < 100000; ++k) {
    char name[32];
    std::snprintf(name, sizeof name, "run-%03d", k);
    const auto dir = base / name;
    if (std::filesystem::create_directory(dir)) return dir;
  }
  throw Error("no free run directory under " + base.string());
}

inline void write_file(const std::filesystem::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error("cannot write " + p.string());
  out << content;
}

inline RunResult run_experiment(const ExperimentConfig& cfg, const std::filesystem::path& output_base) {
  RunResult res;
  res.report = verify_theorem1(cfg.sequence, cfg.compute);
  res.dir = next_run_dir(output_base);
  if (cfg.formats.count("csv")) write_file(res.dir / "records.csv", records_csv(res.report.records));
  if (cfg.formats.count("json")) write_file(res.dir / "records.json", report_json(res.report).dump(2) + "\n");
  write_file(res.dir / "config.echo", cfg.text);
  nlohmann::json manifest = environment_manifest();
  std::size_t skipped = 0;
  for (const auto& r : res.report.records) skipped += r.skipped();
  manifest["sequence"] = {{"kind", to_string(cfg.sequence.kind)},
                          {"base", cfg.sequence.base.to_string()},
                          {"n_min", cfg.sequence.n_min},
                          {"n_max", cfg.sequence.n_max}};
  manifest["compute"] = {{"exact_cap", cfg.compute.exact_cap},
                         {"float_cap", cfg.compute.float_cap},
                         {"rel_tol", cfg.compute.rel_tol}};
  manifest["records"] = res.report.records.size();
  manifest["skipped"] = skipped;
  manifest["failure_policy"] = "rows over the caps are marked skipped";
  write_file(res.dir / "manifest.json", manifest.dump(2) + "\n");
  return res;
}

// Runs a config file; a relative [output] dir resolves against the working directory.
inline RunResult run_experiment_file(const std::filesystem::path& path,
                                     const std::optional<std::filesystem::path>& output_override = std::nullopt) {
  const ExperimentConfig cfg = load_experiment_config(path);
  return run_experiment(cfg, output_override ? *output_override : std::filesystem::path(cfg.output_dir));
}

}  // namespace torus
