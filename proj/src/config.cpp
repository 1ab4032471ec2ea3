#include "pdens/config.hpp"

#include <Eigen/Core>

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "pdens/qmc.hpp"

namespace pdens {

namespace {

std::string trim(const std::string& s) {
  const size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> tokens_of(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

double to_double(const std::string& s, const std::string& where) {
  try {
    size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("");
    return v;
  } catch (...) {
    throw ConfigError(where + ": expected a real number, got '" + s + "'");
  }
}

int64_t to_int(const std::string& s, const std::string& where) {
  try {
    size_t pos = 0;
    const int64_t v = std::stoll(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("");
    return v;
  } catch (...) {
    throw ConfigError(where + ": expected an integer, got '" + s + "'");
  }
}

uint64_t to_uint(const std::string& s, const std::string& where) {
  try {
    size_t pos = 0;
    const uint64_t v = std::stoull(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("");
    return v;
  } catch (...) {
    throw ConfigError(where + ": expected an unsigned integer, got '" + s + "'");
  }
}

ScalarField parse_field_value(const std::string& value, const std::string& where) {
  const std::vector<std::string> tok = tokens_of(value);
  if (tok.empty()) throw ConfigError(where + ": empty field definition");
  try {
    if (tok[0] == "constant") {
      if (tok.size() != 2) throw ConfigError(where + ": constant takes one value");
      return ScalarField::constant(to_double(tok[1], where));
    }
    if (tok[0] == "polynomial") {
      std::vector<double> c;
      for (size_t i = 1; i < tok.size(); ++i) c.push_back(to_double(tok[i], where));
      return ScalarField::polynomial(std::move(c));
    }
    if (tok[0] == "sine_mode") {
      if (tok.size() != 4) {
        throw ConfigError(where + ": sine_mode takes amplitude, frequency, decay");
      }
      return ScalarField::sine_mode(to_double(tok[1], where),
                                    static_cast<int>(to_int(tok[2], where)),
                                    to_double(tok[3], where));
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError(where + ": " + e.what());
  }
  throw ConfigError(where + ": unknown field family '" + tok[0] +
                    "' (constant | polynomial | sine_mode)");
}

std::string field_to_string(const ScalarField& f) {
  std::ostringstream out;
  switch (f.family) {
    case FieldFamily::Constant:
      out << "constant " << format_double(f.params[0]);
      break;
    case FieldFamily::Polynomial:
      out << "polynomial";
      for (double c : f.params) out << " " << format_double(c);
      break;
    case FieldFamily::SineMode:
      out << "sine_mode " << format_double(f.params[0]) << " "
          << static_cast<int>(f.params[1]) << " " << format_double(f.params[2]);
      break;
  }
  return out.str();
}

// Ordered key-value store preserving one entry per section.key.
using RawConfig = std::map<std::string, std::string>;

RawConfig raw_parse(const std::string& text) {
  RawConfig raw;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw ConfigError("line " + std::to_string(lineno) + ": malformed section header");
      }
      section = trim(line.substr(1, line.size() - 2));
      if (section != "field" && section != "qoi" && section != "mesh" &&
          section != "qmc" && section != "grid" && section != "study" &&
          section != "mc") {
        throw ConfigError("unknown section [" + section + "]");
      }
      // remember that the section appeared, even if empty
      raw.emplace("__section__" + section, "");
      continue;
    }
    const size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    }
    if (section.empty()) {
      throw ConfigError("line " + std::to_string(lineno) + ": key outside any section");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const std::string full = section + "." + key;
    if (raw.count(full)) throw ConfigError("duplicate key " + full);
    raw[full] = value;
  }
  return raw;
}

// Returns true and consumes the key if present.
bool take(RawConfig& raw, const std::string& key, std::string* value) {
  auto it = raw.find(key);
  if (it == raw.end()) return false;
  *value = it->second;
  raw.erase(it);
  return true;
}

std::string require(RawConfig& raw, const std::string& key) {
  std::string v;
  if (!take(raw, key, &v)) throw ConfigError("missing required key " + key);
  return v;
}

void set_field_mode(RunConfig& cfg, const std::string& key, const std::string& value) {
  const std::string where = "field." + key;
  if (key == "s") {
    const int64_t s = to_int(value, where);
    if (s < 1) throw ConfigError(where + ": s must be >= 1");
    cfg.est.field.s = static_cast<int>(s);
    cfg.est.field.a_modes.resize(s, ScalarField::constant(0.0));
    cfg.est.field.ell_modes.resize(s + 1, ScalarField::constant(0.0));
    return;
  }
  if (key == "a0") {
    cfg.est.field.a0 = parse_field_value(value, where);
    return;
  }
  if (key == "ell_bar") {
    cfg.est.field.ell_bar = parse_field_value(value, where);
    return;
  }
  if (key.size() > 1 && key[0] == 'a') {
    const int64_t j = to_int(key.substr(1), where);
    if (j < 1 || j > cfg.est.field.s) {
      throw ConfigError(where + ": mode index must lie in 1.." +
                        std::to_string(cfg.est.field.s) + " (set s first)");
    }
    cfg.est.field.a_modes[j - 1] = parse_field_value(value, where);
    return;
  }
  if (key.size() > 3 && key.substr(0, 3) == "ell") {
    const int64_t i = to_int(key.substr(3), where);
    if (i < 0 || i > cfg.est.field.s) {
      throw ConfigError(where + ": source mode index must lie in 0.." +
                        std::to_string(cfg.est.field.s) + " (set s first)");
    }
    cfg.est.field.ell_modes[i] = parse_field_value(value, where);
    return;
  }
  throw ConfigError("unknown key field." + key);
}

void set_key(RunConfig& cfg, const std::string& section, const std::string& key,
             const std::string& value) {
  const std::string where = section + "." + key;
  if (section == "field") {
    set_field_mode(cfg, key, value);
  } else if (section == "qoi") {
    if (key != "kind") throw ConfigError("unknown key " + where);
    const std::vector<std::string> tok = tokens_of(value);
    if (tok.empty()) throw ConfigError(where + ": empty");
    if (tok[0] == "mean_value") {
      if (tok.size() != 1) throw ConfigError(where + ": mean_value takes no arguments");
      cfg.est.qoi = Qoi::mean_value();
    } else if (tok[0] == "point_value") {
      if (tok.size() != 2 && tok.size() != 3) {
        throw ConfigError(where + ": point_value takes x [y]");
      }
      Point p{to_double(tok[1], where),
              tok.size() == 3 ? to_double(tok[2], where) : 0.0};
      cfg.est.qoi = Qoi::point_value(p);
    } else if (tok[0] == "weighted_mean") {
      std::string rest;
      for (size_t i = 1; i < tok.size(); ++i) rest += (i > 1 ? " " : "") + tok[i];
      cfg.est.qoi = Qoi::weighted_mean(parse_field_value(rest, where));
    } else {
      throw ConfigError(where + ": unknown kind '" + tok[0] + "'");
    }
  } else if (section == "mesh") {
    if (key == "dimension") {
      cfg.est.dimension = static_cast<int>(to_int(value, where));
    } else if (key == "cells") {
      cfg.est.cells = static_cast<int>(to_int(value, where));
    } else {
      throw ConfigError("unknown key " + where);
    }
  } else if (section == "qmc") {
    if (key == "n") {
      cfg.est.n = to_uint(value, where);
    } else if (key == "shifts") {
      cfg.est.shifts = static_cast<int>(to_int(value, where));
    } else if (key == "seed") {
      cfg.est.seed = to_uint(value, where);
    } else if (key == "gamma") {
      const std::vector<std::string> tok = tokens_of(value);
      if (tok.size() >= 1 && tok[0] == "power") {
        if (tok.size() != 3) throw ConfigError(where + ": power takes scale and decay");
        const double scale = to_double(tok[1], where);
        const double decay = to_double(tok[2], where);
        const int dim = 2 * cfg.est.field.s;
        cfg.est.gamma.resize(dim);
        for (int j = 0; j < dim; ++j) {
          cfg.est.gamma[j] = scale * std::pow(j + 1.0, -decay);
        }
      } else if (tok.size() >= 2 && tok[0] == "list") {
        cfg.est.gamma.clear();
        for (size_t i = 1; i < tok.size(); ++i) {
          cfg.est.gamma.push_back(to_double(tok[i], where));
        }
      } else {
        throw ConfigError(where + ": expected 'power <scale> <decay>' or 'list <v...>'");
      }
    } else if (key == "genvec_in") {
      cfg.genvec_in = value;
    } else if (key == "genvec_out") {
      cfg.genvec_out = value;
    } else {
      throw ConfigError("unknown key " + where);
    }
  } else if (section == "grid") {
    if (key == "t_min") {
      cfg.t_min = to_double(value, where);
    } else if (key == "t_max") {
      cfg.t_max = to_double(value, where);
    } else if (key == "points") {
      cfg.grid_points = static_cast<int>(to_int(value, where));
      if (cfg.grid_points < 2) throw ConfigError(where + ": need at least 2 points");
    } else if (key == "mode") {
      if (value == "cdf") {
        cfg.est.mode = CurveMode::Cdf;
      } else if (value == "pdf") {
        cfg.est.mode = CurveMode::Pdf;
      } else if (value == "both") {
        cfg.est.mode = CurveMode::Both;
      } else {
        throw ConfigError(where + ": expected cdf | pdf | both");
      }
    } else {
      throw ConfigError("unknown key " + where);
    }
  } else if (section == "study") {
    cfg.has_study = true;
    if (key == "axis") {
      if (value == "mesh") {
        cfg.study.axis = StudyAxis::MeshWidth;
      } else if (value == "points") {
        cfg.study.axis = StudyAxis::PointCount;
      } else {
        throw ConfigError(where + ": expected mesh | points");
      }
    } else if (key == "levels") {
      cfg.study.levels.clear();
      for (const std::string& t : tokens_of(value)) {
        cfg.study.levels.push_back(to_int(t, where));
      }
    } else if (key == "reference") {
      cfg.study.reference = to_int(value, where);
    } else if (key == "estimator") {
      if (value == "qmc") {
        cfg.study.kind = EstimatorKind::Qmc;
      } else if (value == "mc") {
        cfg.study.kind = EstimatorKind::PlainMc;
      } else {
        throw ConfigError(where + ": expected qmc | mc");
      }
    } else {
      throw ConfigError("unknown key " + where);
    }
  } else if (section == "mc") {
    if (key != "samples") throw ConfigError("unknown key " + where);
    cfg.mc_samples = to_int(value, where);
  } else {
    throw ConfigError("unknown section [" + section + "]");
  }
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

RunConfig parse_config_text(const std::string& text) {
  RawConfig raw = raw_parse(text);
  RunConfig cfg;

  // section markers are bookkeeping only
  cfg.has_study = raw.count("__section__study") > 0;
  for (auto it = raw.begin(); it != raw.end();) {
    if (it->first.rfind("__section__", 0) == 0) {
      it = raw.erase(it);
    } else {
      ++it;
    }
  }

  // interpret in dependency order: s before modes and gamma, mesh before qoi
  set_key(cfg, "field", "s", require(raw, "field.s"));
  std::string v;
  if (take(raw, "field.a0", &v)) set_key(cfg, "field", "a0", v);
  for (int j = 1; j <= cfg.est.field.s; ++j) {
    const std::string key = "a" + std::to_string(j);
    set_key(cfg, "field", key, require(raw, "field." + key));
  }
  set_key(cfg, "field", "ell_bar", require(raw, "field.ell_bar"));
  for (int i = 0; i <= cfg.est.field.s; ++i) {
    const std::string key = "ell" + std::to_string(i);
    set_key(cfg, "field", key, require(raw, "field." + key));
  }
  set_key(cfg, "mesh", "dimension", require(raw, "mesh.dimension"));
  set_key(cfg, "mesh", "cells", require(raw, "mesh.cells"));
  if (take(raw, "qoi.kind", &v)) set_key(cfg, "qoi", "kind", v);
  set_key(cfg, "qmc", "n", require(raw, "qmc.n"));

  // everything else in map order
  bool saw_tmin = false, saw_tmax = false;
  for (const auto& [full, value] : raw) {
    const size_t dot = full.find('.');
    const std::string section = full.substr(0, dot);
    const std::string key = full.substr(dot + 1);
    if (full == "grid.t_min") saw_tmin = true;
    if (full == "grid.t_max") saw_tmax = true;
    set_key(cfg, section, key, value);
  }
  if (saw_tmin != saw_tmax) {
    throw ConfigError("grid: t_min and t_max must be given together");
  }
  cfg.has_t_range = saw_tmin;
  if (cfg.has_t_range && !(cfg.t_max > cfg.t_min)) {
    throw ConfigError("grid: t_max must exceed t_min");
  }
  return cfg;
}

RunConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config_text(text.str());
}

void apply_override(RunConfig& config, const std::string& assignment) {
  const size_t eq = assignment.find('=');
  if (eq == std::string::npos) {
    throw ConfigError("override '" + assignment + "': expected section.key=value");
  }
  const std::string full = trim(assignment.substr(0, eq));
  const std::string value = trim(assignment.substr(eq + 1));
  const size_t dot = full.find('.');
  if (dot == std::string::npos) {
    throw ConfigError("override '" + assignment + "': key must be section.key");
  }
  if (full == "grid.t_min" || full == "grid.t_max") config.has_t_range = true;
  set_key(config, full.substr(0, dot), full.substr(dot + 1), value);
}

void resolve_run(RunConfig& config) {
  if (!config.has_t_range) {
    const std::vector<double> grid = resolve_t_grid(config.est, config.grid_points);
    config.t_min = grid.front();
    config.t_max = grid.back();
    config.has_t_range = true;
  }
  config.est.t_grid = linspace(config.t_min, config.t_max, config.grid_points);
  if (!config.genvec_in.empty()) {
    const LatticeRule rule = read_generating_vector(
        config.genvec_in, config.est.gamma.empty()
                              ? default_weights(2 * config.est.field.s)
                              : config.est.gamma);
    if (rule.n != config.est.n || rule.dim != 2 * config.est.field.s) {
      throw ConfigError("genvec_in: file is for N = " + std::to_string(rule.n) +
                        ", dim = " + std::to_string(rule.dim) +
                        ", run needs N = " + std::to_string(config.est.n) +
                        ", dim = " + std::to_string(2 * config.est.field.s));
    }
    config.est.generating_vector = rule.generating_vector;
  }
  if (!config.genvec_out.empty()) {
    std::vector<uint32_t> genvec = config.est.generating_vector;
    const int dim = 2 * config.est.field.s;
    std::vector<double> gamma =
        config.est.gamma.empty() ? default_weights(dim) : config.est.gamma;
    if (genvec.empty()) genvec = cbc_vector(dim, config.est.n, gamma);
    write_generating_vector(config.genvec_out,
                            make_lattice_rule(config.est.n, genvec, gamma));
  }
}

std::string emit_config(const RunConfig& config) {
  std::ostringstream out;
  const FieldSpec& fs = config.est.field;
  out << "[field]\n";
  out << "s = " << fs.s << "\n";
  out << "a0 = " << field_to_string(fs.a0) << "\n";
  for (int j = 1; j <= fs.s; ++j) {
    out << "a" << j << " = " << field_to_string(fs.a_modes[j - 1]) << "\n";
  }
  out << "ell_bar = " << field_to_string(fs.ell_bar) << "\n";
  for (int i = 0; i <= fs.s; ++i) {
    out << "ell" << i << " = " << field_to_string(fs.ell_modes[i]) << "\n";
  }
  out << "\n[qoi]\n";
  switch (config.est.qoi.kind) {
    case Qoi::Kind::MeanValue:
      out << "kind = mean_value\n";
      break;
    case Qoi::Kind::PointValue:
      out << "kind = point_value " << format_double(config.est.qoi.location[0]);
      if (config.est.dimension == 2) {
        out << " " << format_double(config.est.qoi.location[1]);
      }
      out << "\n";
      break;
    case Qoi::Kind::WeightedMean:
      out << "kind = weighted_mean " << field_to_string(config.est.qoi.weight) << "\n";
      break;
  }
  out << "\n[mesh]\n";
  out << "dimension = " << config.est.dimension << "\n";
  out << "cells = " << config.est.cells << "\n";
  out << "\n[qmc]\n";
  out << "n = " << config.est.n << "\n";
  out << "shifts = " << config.est.shifts << "\n";
  out << "seed = " << config.est.seed << "\n";
  {
    const int dim = 2 * fs.s;
    const std::vector<double> gamma =
        config.est.gamma.empty() ? default_weights(dim) : config.est.gamma;
    out << "gamma = list";
    for (int j = 0; j < dim && j < static_cast<int>(gamma.size()); ++j) {
      out << " " << format_double(gamma[j]);
    }
    out << "\n";
  }
  if (!config.genvec_in.empty()) out << "genvec_in = " << config.genvec_in << "\n";
  if (!config.genvec_out.empty()) out << "genvec_out = " << config.genvec_out << "\n";
  out << "\n[grid]\n";
  if (config.has_t_range) {
    out << "t_min = " << format_double(config.t_min) << "\n";
    out << "t_max = " << format_double(config.t_max) << "\n";
  }
  out << "points = " << config.grid_points << "\n";
  out << "mode = "
      << (config.est.mode == CurveMode::Cdf
              ? "cdf"
              : config.est.mode == CurveMode::Pdf ? "pdf" : "both")
      << "\n";
  if (config.has_study) {
    out << "\n[study]\n";
    out << "axis = "
        << (config.study.axis == StudyAxis::MeshWidth ? "mesh" : "points") << "\n";
    out << "levels =";
    for (int64_t l : config.study.levels) out << " " << l;
    out << "\n";
    out << "reference = " << config.study.reference << "\n";
    out << "estimator = "
        << (config.study.kind == EstimatorKind::Qmc ? "qmc" : "mc") << "\n";
  }
  out << "\n[mc]\n";
  out << "samples = " << config.mc_samples << "\n";
  return out.str();
}

namespace {

void open_or_throw(std::ofstream& out, const std::string& path) {
  out.open(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
}

std::string col(const std::vector<double>& v, size_t i) {
  return i < v.size() ? format_double(v[i]) : "nan";
}

}  // namespace

void write_curve_csv(const std::string& path, const DensityCurve& curve) {
  std::ofstream out;
  open_or_throw(out, path);
  out << "t,F,F_stderr,f,f_stderr\n";
  for (size_t i = 0; i < curve.t.size(); ++i) {
    out << format_double(curve.t[i]) << "," << col(curve.F, i) << ","
        << col(curve.F_stderr, i) << "," << col(curve.f, i) << ","
        << col(curve.f_stderr, i) << "\n";
  }
}

void write_study_csv(const std::string& path, const std::vector<StudyRow>& rows) {
  std::ofstream out;
  open_or_throw(out, path);
  out << "level,value,error,stderr,slope_running\n";
  for (const StudyRow& r : rows) {
    out << r.level << "," << format_double(r.x) << "," << format_double(r.error)
        << "," << format_double(r.err_stderr) << ","
        << format_double(r.slope_running) << "\n";
  }
}

void write_study_detail_csv(const std::string& path,
                            const std::vector<StudyDetailRow>& rows) {
  std::ofstream out;
  open_or_throw(out, path);
  out << "level,t,error_cdf,error_pdf\n";
  for (const StudyDetailRow& r : rows) {
    out << r.level << "," << format_double(r.t) << ","
        << format_double(r.error_cdf) << "," << format_double(r.error_pdf)
        << "\n";
  }
}

void write_meta(const std::string& path, const RunConfig& config,
                const std::string& command, double wall_time) {
  std::ofstream out;
  open_or_throw(out, path);
  out << "# pdens " << kVersion << "\n";
  out << "# eigen: " << EIGEN_WORLD_VERSION << "." << EIGEN_MAJOR_VERSION << "."
      << EIGEN_MINOR_VERSION << "\n";
  out << "# compiler: " << __VERSION__ << "\n";
  out << "# command: " << command << "\n";
  out << "# wall_time_seconds: " << format_double(wall_time) << "\n";
  out << emit_config(config);
}

}  // namespace pdens
