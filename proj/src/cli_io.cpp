#include "movingbox/cli_io.hpp"

#include "movingbox/parallel.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

namespace movingbox {

namespace {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Low-level config tokenizing
// ---------------------------------------------------------------------------

struct Entry {
  std::string key;
  std::string value;
  int line = 0;
  std::string section;  // "" before any section header
};

struct RawConfig {
  std::vector<Entry> entries;
  std::vector<std::pair<std::string, int>> sections;  // (name, line)
};

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return {};
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

RawConfig tokenize_config(const std::string& text) {
  RawConfig raw;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    if (t.front() == '[') {
      if (t.back() != ']' || t.size() < 3)
        throw DomainError("config line " + std::to_string(lineno) +
                          ": malformed section header '" + t + "'");
      section = trim(t.substr(1, t.size() - 2));
      for (const auto& [name, l] : raw.sections)
        if (name == section)
          throw DomainError("config line " + std::to_string(lineno) + ": duplicate section [" +
                            section + "] (first at line " + std::to_string(l) + ")");
      raw.sections.emplace_back(section, lineno);
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw DomainError("config line " + std::to_string(lineno) +
                        ": expected 'key = value', got '" + t + "'");
    Entry e;
    e.key = trim(t.substr(0, eq));
    e.value = trim(t.substr(eq + 1));
    e.line = lineno;
    e.section = section;
    if (e.key.empty())
      throw DomainError("config line " + std::to_string(lineno) + ": missing key before '='");
    if (e.value.empty())
      throw DomainError("config line " + std::to_string(lineno) + ": missing value for key '" +
                        e.key + "'");
    raw.entries.push_back(std::move(e));
  }
  return raw;
}

Real parse_real(const std::string& value, const std::string& key, int line) {
  Real out = 0.0;
  const char* first = value.data();
  const char* last = value.data() + value.size();
  const auto res = std::from_chars(first, last, out);
  if (res.ec != std::errc{} || res.ptr != last)
    throw DomainError("config line " + std::to_string(line) + ": value '" + value + "' for '" +
                      key + "' is not a number");
  return out;
}

long parse_int(const std::string& value, const std::string& key, int line) {
  long out = 0;
  const char* first = value.data();
  const char* last = value.data() + value.size();
  const auto res = std::from_chars(first, last, out);
  if (res.ec != std::errc{} || res.ptr != last)
    throw DomainError("config line " + std::to_string(line) + ": value '" + value + "' for '" +
                      key + "' is not an integer");
  return out;
}

const std::set<std::string> kProfileSections = {"constant_velocity", "exponential", "sinusoidal",
                                                "piecewise", "tabulated"};

class ConfigReader {
 public:
  explicit ConfigReader(const std::string& text) : raw_(tokenize_config(text)) {}

  bool empty() const { return raw_.entries.empty() && raw_.sections.empty(); }

  std::vector<std::string> sections() const {
    std::vector<std::string> names;
    for (const auto& [name, line] : raw_.sections) names.push_back(name);
    return names;
  }

  bool has_section(const std::string& name) const {
    for (const auto& [n, l] : raw_.sections)
      if (n == name) return true;
    return false;
  }

  std::optional<std::string> profile_section() const {
    std::optional<std::string> found;
    for (const auto& [name, line] : raw_.sections) {
      if (!kProfileSections.count(name)) continue;
      if (found)
        throw DomainError("config line " + std::to_string(line) +
                          ": multiple profile sections ([" + *found + "] and [" + name + "])");
      found = name;
    }
    return found;
  }

  const Entry* find(const std::string& key) {
    const Entry* hit = nullptr;
    for (auto& e : raw_.entries) {
      if (e.key != key) continue;
      if (hit)
        throw DomainError("config line " + std::to_string(e.line) + ": duplicate key '" + key +
                          "'");
      hit = &e;
    }
    if (hit) used_.insert(hit);
    return hit;
  }

  std::vector<const Entry*> find_all(const std::string& key) {
    std::vector<const Entry*> hits;
    for (auto& e : raw_.entries)
      if (e.key == key) {
        hits.push_back(&e);
        used_.insert(&e);
      }
    return hits;
  }

  Real get_real(const std::string& key, Real fallback) {
    const Entry* e = find(key);
    return e ? parse_real(e->value, key, e->line) : fallback;
  }

  std::optional<Real> get_real_required(const std::string& key) {
    const Entry* e = find(key);
    if (!e) return std::nullopt;
    return parse_real(e->value, key, e->line);
  }

  long get_int(const std::string& key, long fallback) {
    const Entry* e = find(key);
    return e ? parse_int(e->value, key, e->line) : fallback;
  }

  std::string get_string(const std::string& key, std::string fallback) {
    const Entry* e = find(key);
    return e ? e->value : std::move(fallback);
  }

  int line_of(const std::string& key) const {
    for (const auto& e : raw_.entries)
      if (e.key == key) return e.line;
    return 0;
  }

  /// Rejects every entry that no schema consumed.
  void finish() const {
    for (const auto& e : raw_.entries)
      if (!used_.count(&e))
        throw DomainError("config line " + std::to_string(e.line) + ": unknown key '" + e.key +
                          "'");
  }

 private:
  RawConfig raw_;
  std::set<const Entry*> used_;
};

[[noreturn]] void range_error(const std::string& key, const std::string& bound, Real got,
                              int line) {
  throw DomainError("config line " + std::to_string(line) + ": " + key + " must be " + bound +
                    ", got " + format_double(got));
}

Real require_real(ConfigReader& reader, const std::string& key, const char* context) {
  const auto v = reader.get_real_required(key);
  if (!v)
    throw DomainError(std::string("config: missing required key '") + key + "' for " + context);
  return *v;
}

void common_run_keys(ConfigReader& reader, Real& rel_tol, Real& abs_tol, Real& t_end,
                     std::string& output_dir) {
  rel_tol = reader.get_real("rel_tol", rel_tol);
  if (!(rel_tol > 0.0)) range_error("rel_tol", "> 0", rel_tol, reader.line_of("rel_tol"));
  abs_tol = reader.get_real("abs_tol", abs_tol);
  if (!(abs_tol > 0.0)) range_error("abs_tol", "> 0", abs_tol, reader.line_of("abs_tol"));
  t_end = reader.get_real("t_end", t_end);
  if (!(t_end > 0.0)) range_error("t_end", "> 0", t_end, reader.line_of("t_end"));
  output_dir = reader.get_string("output_dir", output_dir);
}

InitialStateSpec parse_initial_state(const std::string& value, int line) {
  InitialStateSpec spec;
  if (value.find('(') == std::string::npos) {
    const long level = parse_int(value, "initial_state", line);
    if (level < 1) range_error("initial_state", ">= 1", Real(level), line);
    spec.level = static_cast<int>(level);
    return spec;
  }
  // Explicit vector: "(re,im) (re,im) ...".
  std::istringstream in(value);
  std::string token;
  while (in >> token) {
    if (token.front() != '(' || token.back() != ')')
      throw DomainError("config line " + std::to_string(line) +
                        ": initial_state entries must look like (re,im), got '" + token + "'");
    const std::string body = token.substr(1, token.size() - 2);
    const auto comma = body.find(',');
    if (comma == std::string::npos)
      throw DomainError("config line " + std::to_string(line) +
                        ": initial_state entry '" + token + "' missing comma");
    const Real re = parse_real(body.substr(0, comma), "initial_state", line);
    const Real im = parse_real(body.substr(comma + 1), "initial_state", line);
    spec.vector.emplace_back(re, im);
  }
  if (spec.vector.empty())
    throw DomainError("config line " + std::to_string(line) + ": empty initial_state vector");
  Real norm = 0.0;
  for (const auto& c : spec.vector) norm += std::norm(c);
  if (!(norm > 0.0))
    throw DomainError("config line " + std::to_string(line) + ": initial_state vector has zero norm");
  return spec;
}

std::string render_initial_state(const InitialStateSpec& spec) {
  if (!spec.is_vector()) return std::to_string(spec.level);
  std::string out;
  for (std::size_t i = 0; i < spec.vector.size(); ++i) {
    if (i) out += ' ';
    out += '(' + format_double(spec.vector[i].real()) + ',' +
           format_double(spec.vector[i].imag()) + ')';
  }
  return out;
}

SegmentSpec parse_segment(const std::string& value, int line) {
  std::istringstream in(value);
  std::string t_tok, kind;
  if (!(in >> t_tok >> kind))
    throw DomainError("config line " + std::to_string(line) +
                      ": segment needs '<t_start> <kind> v=...'");
  SegmentSpec seg;
  seg.t_start = parse_real(t_tok, "segment t_start", line);
  seg.kind = kind;
  if (kind != "constant_velocity" && kind != "exponential" && kind != "sinusoidal")
    throw DomainError("config line " + std::to_string(line) + ": unknown segment kind '" + kind +
                      "' (expected constant_velocity, exponential or sinusoidal)");
  bool have_v = false;
  std::string token;
  while (in >> token) {
    const auto eq = token.find('=');
    if (eq == std::string::npos)
      throw DomainError("config line " + std::to_string(line) + ": segment parameter '" + token +
                        "' must look like name=value");
    const std::string name = token.substr(0, eq);
    const Real val = parse_real(token.substr(eq + 1), "segment " + name, line);
    if (name == "v") {
      seg.v = val;
      have_v = true;
    } else if (name == "omega") {
      seg.omega = val;
    } else if (name == "L0") {
      seg.L0 = val;
    } else {
      throw DomainError("config line " + std::to_string(line) + ": unknown segment parameter '" +
                        name + "'");
    }
  }
  if (!have_v)
    throw DomainError("config line " + std::to_string(line) + ": segment is missing v=...");
  if (seg.kind == "sinusoidal" && !(seg.omega > 0.0))
    range_error("segment omega", "> 0", seg.omega, line);
  return seg;
}

std::string render_segment(const SegmentSpec& seg) {
  std::string out = format_double(seg.t_start) + ' ' + seg.kind + " v=" + format_double(seg.v);
  if (seg.kind == "sinusoidal") out += " omega=" + format_double(seg.omega);
  if (seg.L0) out += " L0=" + format_double(*seg.L0);
  return out;
}

// SweepSpec-style keys shared by sweep/resonance/converge configs.
void sweep_physics_keys(ConfigReader& reader, SweepSpec& spec, const char* context) {
  spec.amplitude = require_real(reader, "v", context);
  if (!(spec.amplitude >= 0.0)) range_error("v", ">= 0", spec.amplitude, reader.line_of("v"));
  spec.L0 = reader.get_real("L0", 1.0);
  if (!(spec.L0 > 0.0)) range_error("L0", "> 0", spec.L0, reader.line_of("L0"));
  if (!(spec.amplitude < spec.L0))
    range_error("v", "< L0 (the wall may not reach the origin)", spec.amplitude,
                reader.line_of("v"));
  spec.n_report = static_cast<int>(reader.get_int("n_report", spec.n_report));
  if (spec.n_report < 1) range_error("n_report", ">= 1", spec.n_report, reader.line_of("n_report"));
  spec.n_basis = static_cast<int>(reader.get_int("n_basis", spec.n_basis));
  if (spec.n_basis < 2) range_error("n_basis", ">= 2", spec.n_basis, reader.line_of("n_basis"));
  std::string outdir = ".";
  common_run_keys(reader, spec.rel_tol, spec.abs_tol, spec.t_end, outdir);
}

}  // namespace

// ---------------------------------------------------------------------------
// RunConfig
// ---------------------------------------------------------------------------

int RunConfig::effective_n_basis() const {
  if (n_basis != 0) return n_basis;
  if (profile_kind == "constant_velocity") return std::abs(v) >= 2.0 ? 128 : 64;
  if (profile_kind == "exponential") return std::abs(v) >= 9.0 ? 32 : 64;
  return 64;
}

WallProfile RunConfig::build_profile() const {
  if (profile_kind == "constant_velocity") return WallProfile(ConstantVelocity{L0, v});
  if (profile_kind == "exponential") return WallProfile(Exponential{L0, v});
  if (profile_kind == "sinusoidal") return WallProfile(Sinusoidal{L0, v, omega});
  if (profile_kind == "piecewise") {
    Piecewise pw;
    for (std::size_t i = 0; i < segments.size(); ++i) {
      const SegmentSpec& seg = segments[i];
      pw.start_times.push_back(seg.t_start);
      const Real seg_L0 = (i == 0 && seg.L0) ? *seg.L0 : (i == 0 ? L0 : 1.0);
      if (seg.kind == "constant_velocity")
        pw.segments.push_back(std::make_shared<WallProfile>(ConstantVelocity{seg_L0, seg.v}));
      else if (seg.kind == "exponential")
        pw.segments.push_back(std::make_shared<WallProfile>(Exponential{seg_L0, seg.v}));
      else
        pw.segments.push_back(std::make_shared<WallProfile>(Sinusoidal{seg_L0, seg.v, seg.omega}));
    }
    return WallProfile(std::move(pw));
  }
  if (profile_kind == "tabulated") {
    Tabulated tab;
    tab.times.resize(samples_tL.size());
    tab.lengths.resize(samples_tL.size());
    for (std::size_t i = 0; i < samples_tL.size(); ++i) {
      tab.times[i] = samples_tL[i].first;
      tab.lengths[i] = samples_tL[i].second;
    }
    return WallProfile(std::move(tab));
  }
  throw DomainError("RunConfig: unknown profile kind '" + profile_kind + "'");
}

CoefficientState RunConfig::build_initial_state() const {
  const int n = effective_n_basis();
  if (!initial_state.is_vector()) {
    if (initial_state.level > n)
      throw DomainError("initial_state level " + std::to_string(initial_state.level) +
                        " exceeds n_basis " + std::to_string(n));
    return CoefficientState::ground_state(n, initial_state.level);
  }
  if (static_cast<int>(initial_state.vector.size()) > n)
    throw DomainError("initial_state vector longer than n_basis");
  CoefficientState s;
  s.C = VecC::Zero(n);
  for (std::size_t i = 0; i < initial_state.vector.size(); ++i) s.C[i] = initial_state.vector[i];
  s.C /= std::sqrt(s.C.squaredNorm());
  return s;
}

IntegratorConfig RunConfig::build_integrator(Real t_end_override) const {
  IntegratorConfig cfg;
  cfg.rel_tol = rel_tol;
  cfg.abs_tol = abs_tol;
  const Real horizon = t_end_override > 0.0 ? t_end_override : t_end;
  cfg.sample_times.resize(samples);
  for (int i = 0; i < samples; ++i)
    cfg.sample_times[i] = horizon * Real(i) / Real(samples - 1);
  return cfg;
}

RunConfig parse_config(const std::string& text) {
  ConfigReader reader(text);
  if (reader.empty())
    throw DomainError(
        "config is empty; required: one profile section ([constant_velocity], [exponential], "
        "[sinusoidal], [piecewise] or [tabulated]) with its parameters (v; omega for "
        "sinusoidal; segment/sample lines for piecewise/tabulated); optional run keys: L0, "
        "n_basis, rel_tol, abs_tol, t_end, samples, n_report, initial_state, output_dir, seed, "
        "hbar, mass, n_x, coordinate");

  const auto profile = reader.profile_section();
  if (!profile)
    throw DomainError(
        "config: missing profile section; expected one of [constant_velocity], [exponential], "
        "[sinusoidal], [piecewise], [tabulated]");

  RunConfig config;
  config.profile_kind = *profile;

  if (*profile == "constant_velocity" || *profile == "exponential" ||
      *profile == "sinusoidal") {
    config.L0 = reader.get_real("L0", 1.0);
    if (!(config.L0 > 0.0)) range_error("L0", "> 0", config.L0, reader.line_of("L0"));
    config.v = require_real(reader, "v", ("profile [" + *profile + "]").c_str());
    if (*profile == "sinusoidal") {
      config.omega = require_real(reader, "omega", "profile [sinusoidal]");
      if (!(config.omega > 0.0)) range_error("omega", "> 0", config.omega, reader.line_of("omega"));
      if (!(std::abs(config.v) < config.L0))
        range_error("v", "< L0 in magnitude (the wall may not reach the origin)", config.v,
                    reader.line_of("v"));
    }
  } else if (*profile == "piecewise") {
    for (const Entry* e : reader.find_all("segment"))
      config.segments.push_back(parse_segment(e->value, e->line));
    if (config.segments.empty())
      throw DomainError("config: [piecewise] needs at least one 'segment = <t> <kind> v=...'");
    std::sort(config.segments.begin(), config.segments.end(),
              [](const auto& a, const auto& b) { return a.t_start < b.t_start; });
    config.L0 = reader.get_real("L0", 1.0);
  } else {  // tabulated
    for (const Entry* e : reader.find_all("sample")) {
      std::istringstream in(e->value);
      std::string t_tok, L_tok;
      if (!(in >> t_tok >> L_tok))
        throw DomainError("config line " + std::to_string(e->line) +
                          ": sample needs '<t> <L>'");
      std::string extra;
      if (in >> extra)
        throw DomainError("config line " + std::to_string(e->line) +
                          ": sample takes exactly two numbers");
      config.samples_tL.emplace_back(parse_real(t_tok, "sample t", e->line),
                                     parse_real(L_tok, "sample L", e->line));
    }
    if (config.samples_tL.size() < 2)
      throw DomainError("config: [tabulated] needs at least two 'sample = <t> <L>' lines");
    std::sort(config.samples_tL.begin(), config.samples_tL.end());
  }

  config.n_basis = static_cast<int>(reader.get_int("n_basis", 0));
  if (config.n_basis != 0 && config.n_basis < 2)
    range_error("n_basis", ">= 2 (or omitted for the profile default)", config.n_basis,
                reader.line_of("n_basis"));
  common_run_keys(reader, config.rel_tol, config.abs_tol, config.t_end, config.output_dir);
  config.samples = static_cast<int>(reader.get_int("samples", config.samples));
  if (config.samples < 2) range_error("samples", ">= 2", config.samples, reader.line_of("samples"));
  config.n_report = static_cast<int>(reader.get_int("n_report", config.n_report));
  if (config.n_report < 1) range_error("n_report", ">= 1", config.n_report, reader.line_of("n_report"));
  if (const Entry* e = reader.find("initial_state"))
    config.initial_state = parse_initial_state(e->value, e->line);
  config.seed = static_cast<unsigned long>(reader.get_int("seed", 0));
  config.hbar = reader.get_real("hbar", 1.0);
  if (!(config.hbar > 0.0)) range_error("hbar", "> 0", config.hbar, reader.line_of("hbar"));
  config.mass = reader.get_real("mass", 1.0);
  if (!(config.mass > 0.0)) range_error("mass", "> 0", config.mass, reader.line_of("mass"));
  config.n_x = static_cast<int>(reader.get_int("n_x", config.n_x));
  if (config.n_x < 16) range_error("n_x", ">= 16", config.n_x, reader.line_of("n_x"));
  config.coordinate = reader.get_string("coordinate", config.coordinate);
  if (config.coordinate != "fractional" && config.coordinate != "absolute")
    throw DomainError("config line " + std::to_string(reader.line_of("coordinate")) +
                      ": coordinate must be 'fractional' or 'absolute'");

  reader.finish();

  // Cross-field checks owned by the profile.
  (void)config.build_profile();
  return config;
}

std::string render_config(const RunConfig& config) {
  std::string out = "[" + config.profile_kind + "]\n";
  if (config.profile_kind == "piecewise") {
    out += "L0 = " + format_double(config.L0) + "\n";
    for (const auto& seg : config.segments) out += "segment = " + render_segment(seg) + "\n";
  } else if (config.profile_kind == "tabulated") {
    for (const auto& [t, L] : config.samples_tL)
      out += "sample = " + format_double(t) + " " + format_double(L) + "\n";
  } else {
    out += "L0 = " + format_double(config.L0) + "\n";
    out += "v = " + format_double(config.v) + "\n";
    if (config.profile_kind == "sinusoidal")
      out += "omega = " + format_double(config.omega) + "\n";
  }
  out += "\n";
  if (config.n_basis != 0) out += "n_basis = " + std::to_string(config.n_basis) + "\n";
  out += "rel_tol = " + format_double(config.rel_tol) + "\n";
  out += "abs_tol = " + format_double(config.abs_tol) + "\n";
  out += "t_end = " + format_double(config.t_end) + "\n";
  out += "samples = " + std::to_string(config.samples) + "\n";
  out += "n_report = " + std::to_string(config.n_report) + "\n";
  out += "initial_state = " + render_initial_state(config.initial_state) + "\n";
  out += "output_dir = " + config.output_dir + "\n";
  out += "seed = " + std::to_string(config.seed) + "\n";
  out += "hbar = " + format_double(config.hbar) + "\n";
  out += "mass = " + format_double(config.mass) + "\n";
  out += "n_x = " + std::to_string(config.n_x) + "\n";
  out += "coordinate = " + config.coordinate + "\n";
  return out;
}

// ---------------------------------------------------------------------------
// Subcommand configs
// ---------------------------------------------------------------------------

SweepConfig parse_sweep_config(const std::string& text) {
  ConfigReader reader(text);
  if (reader.empty())
    throw DomainError(
        "config is empty; required: [sweep] section with omega_min, omega_max, n_omega, v; "
        "optional: L0, t_end, n_report, n_basis, rel_tol, abs_tol, output_dir");
  if (!reader.has_section("sweep")) throw DomainError("config: missing [sweep] section");
  SweepConfig config;
  config.spec.omega_min = require_real(reader, "omega_min", "[sweep]");
  config.spec.omega_max = require_real(reader, "omega_max", "[sweep]");
  if (!(config.spec.omega_min > 0.0))
    range_error("omega_min", "> 0", config.spec.omega_min, reader.line_of("omega_min"));
  if (!(config.spec.omega_max > config.spec.omega_min))
    range_error("omega_max", "> omega_min", config.spec.omega_max, reader.line_of("omega_max"));
  config.spec.n_omega = static_cast<int>(reader.get_int("n_omega", 0));
  if (config.spec.n_omega < 2)
    range_error("n_omega", ">= 2", config.spec.n_omega, reader.line_of("n_omega"));
  sweep_physics_keys(reader, config.spec, "[sweep]");
  config.output_dir = reader.get_string("output_dir", config.output_dir);
  reader.finish();
  config.spec.validate();
  return config;
}

ResonanceConfig parse_resonance_config(const std::string& text) {
  ConfigReader reader(text);
  if (reader.empty())
    throw DomainError(
        "config is empty; required: [resonance] section with state, omega_lo, omega_hi, v; "
        "optional: width_tol, L0, t_end, n_report, n_basis, rel_tol, abs_tol, output_dir");
  if (!reader.has_section("resonance")) throw DomainError("config: missing [resonance] section");
  ResonanceConfig config;
  config.state = static_cast<int>(reader.get_int("state", 0));
  if (config.state < 1) range_error("state", ">= 1", config.state, reader.line_of("state"));
  config.omega_lo = require_real(reader, "omega_lo", "[resonance]");
  config.omega_hi = require_real(reader, "omega_hi", "[resonance]");
  if (!(config.omega_lo > 0.0))
    range_error("omega_lo", "> 0", config.omega_lo, reader.line_of("omega_lo"));
  if (!(config.omega_hi > config.omega_lo))
    range_error("omega_hi", "> omega_lo", config.omega_hi, reader.line_of("omega_hi"));
  config.width_tol = reader.get_real("width_tol", config.width_tol);
  if (!(config.width_tol > 0.0))
    range_error("width_tol", "> 0", config.width_tol, reader.line_of("width_tol"));
  config.spec.n_report = std::max(5, config.state);
  sweep_physics_keys(reader, config.spec, "[resonance]");
  if (config.spec.n_report < config.state)
    range_error("n_report", ">= state", config.spec.n_report, reader.line_of("n_report"));
  config.output_dir = reader.get_string("output_dir", config.output_dir);
  reader.finish();
  config.spec.omega_min = config.omega_lo;
  config.spec.omega_max = config.omega_hi;
  config.spec.validate();
  return config;
}

ValidateConfig parse_validate_config(const std::string& text) {
  ConfigReader reader(text);
  if (reader.empty())
    throw DomainError(
        "config is empty; required: [validate] section with v; optional: L0, t_end, n_basis, "
        "samples, n_modes, rel_tol, abs_tol, output_dir");
  if (!reader.has_section("validate")) throw DomainError("config: missing [validate] section");
  ValidateConfig config;
  config.v = require_real(reader, "v", "[validate]");
  config.L0 = reader.get_real("L0", config.L0);
  if (!(config.L0 > 0.0)) range_error("L0", "> 0", config.L0, reader.line_of("L0"));
  config.n_basis = static_cast<int>(reader.get_int("n_basis", config.n_basis));
  if (config.n_basis < 2) range_error("n_basis", ">= 2", config.n_basis, reader.line_of("n_basis"));
  config.samples = static_cast<int>(reader.get_int("samples", config.samples));
  if (config.samples < 2) range_error("samples", ">= 2", config.samples, reader.line_of("samples"));
  config.n_modes = static_cast<int>(reader.get_int("n_modes", config.n_modes));
  if (config.n_modes < 8) range_error("n_modes", ">= 8", config.n_modes, reader.line_of("n_modes"));
  common_run_keys(reader, config.rel_tol, config.abs_tol, config.t_end, config.output_dir);
  reader.finish();
  return config;
}

ConvergeConfig parse_converge_config(const std::string& text) {
  ConfigReader reader(text);
  if (reader.empty())
    throw DomainError(
        "config is empty; required: [converge] section with omega, v; optional: basis_factors, "
        "tol_factors, L0, t_end, n_report, n_basis, rel_tol, abs_tol, output_dir");
  if (!reader.has_section("converge")) throw DomainError("config: missing [converge] section");
  ConvergeConfig config;
  config.omega = require_real(reader, "omega", "[converge]");
  if (!(config.omega > 0.0)) range_error("omega", "> 0", config.omega, reader.line_of("omega"));
  auto parse_factors = [&](const std::string& key, std::vector<Real> fallback) {
    const std::string raw = reader.get_string(key, "");
    if (raw.empty()) return fallback;
    std::vector<Real> factors;
    std::istringstream in(raw);
    std::string token;
    while (in >> token) factors.push_back(parse_real(token, key, reader.line_of(key)));
    if (factors.empty())
      throw DomainError("config line " + std::to_string(reader.line_of(key)) + ": empty " + key);
    return factors;
  };
  config.basis_factors = parse_factors("basis_factors", config.basis_factors);
  config.tol_factors = parse_factors("tol_factors", config.tol_factors);
  sweep_physics_keys(reader, config.reference, "[converge]");
  config.output_dir = reader.get_string("output_dir", config.output_dir);
  reader.finish();
  return config;
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

std::string format_double(Real value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

void write_trajectory_csv(std::ostream& os, const Trajectory& trajectory,
                          const WallProfile& profile, int n_report,
                          const PhysicalConstants& pc) {
  os << "t,L,theta,norm";
  for (int k = 1; k <= n_report; ++k) os << ",pop_" << k;
  os << ",x_mean,p_mean,kinetic\n";
  for (const auto& s : trajectory.samples) {
    const Real L = length(profile, s.t);
    const ObservableSample obs = observe(s, L, n_report, pc);
    os << format_double(s.t) << ',' << format_double(L) << ',' << format_double(s.theta) << ','
       << format_double(obs.norm);
    for (int k = 0; k < n_report; ++k) os << ',' << format_double(obs.populations[k]);
    os << ',' << format_double(obs.x_mean) << ',' << format_double(obs.p_mean) << ','
       << format_double(obs.kinetic) << '\n';
  }
}

void write_sweep_csv(std::ostream& os, const SweepResult& result) {
  const int m = result.spec.n_report;
  os << "omega";
  for (int k = 1; k <= m; ++k) os << ",maxpop_" << k;
  for (int k = 1; k <= m; ++k) os << ",argmax_t_" << k;
  os << ",status\n";
  for (const auto& p : result.points) {
    os << format_double(p.omega);
    for (int k = 0; k < m; ++k) os << ',' << format_double(p.max_pop[k]);
    for (int k = 0; k < m; ++k) os << ',' << format_double(p.argmax_t[k]);
    if (p.ok) {
      os << ",ok\n";
    } else {
      std::string msg = p.error;
      std::replace(msg.begin(), msg.end(), ',', ';');
      std::replace(msg.begin(), msg.end(), '\n', ' ');
      os << ",error:" << msg << '\n';
    }
  }
}

void write_resonance_csv(std::ostream& os, const ResonanceReport& report) {
  os << "state,omega_star,max_population,argmax_time,bracket_lo,bracket_hi,iterations,unimodal\n";
  os << report.state << ',' << format_double(report.omega_star) << ','
     << format_double(report.max_population) << ',' << format_double(report.argmax_time) << ','
     << format_double(report.bracket_lo) << ',' << format_double(report.bracket_hi) << ','
     << report.iterations << ',' << (report.unimodal ? "true" : "false") << '\n';
}

void write_validate_csv(std::ostream& os, const ValidationResult& result) {
  os << "t,state,pop_solver,pop_analytic,abs_diff\n";
  for (std::size_t i = 0; i < result.times.size(); ++i) {
    for (int k = 0; k < result.ode_populations[i].size(); ++k) {
      const Real a = result.ode_populations[i][k];
      const Real b = result.analytic_populations[i][k];
      os << format_double(result.times[i]) << ',' << (k + 1) << ',' << format_double(a) << ','
         << format_double(b) << ',' << format_double(std::abs(a - b)) << '\n';
    }
  }
}

void write_converge_csv(std::ostream& os, const std::vector<ConvergenceRow>& rows) {
  os << "label,factor,max_shift\n";
  for (const auto& row : rows)
    os << row.label << ',' << format_double(row.factor) << ',' << format_double(row.max_shift)
       << '\n';
}

void write_density_csv(std::ostream& os, const DensityMap& map) {
  os << "t";
  for (Eigen::Index j = 0; j < map.coords.size(); ++j) os << ',' << format_double(map.coords[j]);
  os << '\n';
  for (Eigen::Index i = 0; i < map.times.size(); ++i) {
    os << format_double(map.times[i]);
    for (Eigen::Index j = 0; j < map.coords.size(); ++j)
      os << ',' << format_double(map.values(i, j));
    os << '\n';
  }
}

void write_pgm16(std::ostream& os, const MatR& values) {
  const Eigen::Index rows = values.rows(), cols = values.cols();
  const Real vmax = values.maxCoeff();
  os << "P5\n" << cols << ' ' << rows << "\n65535\n";
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      const Real scaled = vmax > 0.0 ? values(i, j) / vmax : 0.0;
      const unsigned v = static_cast<unsigned>(std::lround(65535.0 * std::clamp(scaled, 0.0, 1.0)));
      os.put(static_cast<char>((v >> 8) & 0xff));
      os.put(static_cast<char>(v & 0xff));
    }
  }
}

// ---------------------------------------------------------------------------
// CLI driver
// ---------------------------------------------------------------------------

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DomainError("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DomainError("cannot open output file '" + path.string() + "'");
  out << data;
  if (!out) throw DomainError("failed writing '" + path.string() + "'");
}

struct RunTimer {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
};

void write_manifest(const std::filesystem::path& dir, const std::string& command,
                    const json& config_echo, double seconds, const json& extra) {
  json manifest;
  manifest["version"] = kVersion;
  manifest["command"] = command;
  manifest["config"] = config_echo;
  manifest["duration_seconds"] = seconds;
  for (auto it = extra.begin(); it != extra.end(); ++it) manifest[it.key()] = *it;
  write_file(dir / "run_manifest.json", manifest.dump(2) + "\n");
}

json stats_json(const IntegrationStats& stats) {
  return json{{"steps_accepted", stats.accepted},
              {"steps_rejected", stats.rejected},
              {"rhs_evaluations", stats.rhs_evals}};
}

std::filesystem::path prepare_output_dir(const std::string& dir) {
  std::filesystem::path p(dir.empty() ? "." : dir);
  std::filesystem::create_directories(p);
  return p;
}

Trajectory run_trajectory(const RunConfig& config, const WallProfile& profile) {
  if (auto violation = validate_profile(profile, config.t_end))
    throw DomainError("profile validation failed: " + violation->message);
  return integrate(config.build_initial_state(), profile, config.build_integrator(),
                   config.t_end, config.constants());
}

int cmd_simulate(const RunConfig& config) {
  RunTimer timer;
  const WallProfile profile = config.build_profile();
  const Trajectory traj = run_trajectory(config, profile);
  const auto dir = prepare_output_dir(config.output_dir);

  std::ostringstream csv;
  write_trajectory_csv(csv, traj, profile, config.n_report, config.constants());
  write_file(dir / "trajectory.csv", csv.str());

  write_manifest(dir, "simulate", render_config(config), timer.seconds(),
                 json{{"integrator", stats_json(traj.stats)},
                      {"norm_drift_max", richardson_norm_check(traj)},
                      {"samples", traj.samples.size()}});
  return 0;
}

int cmd_density_map(const RunConfig& config) {
  RunTimer timer;
  const WallProfile profile = config.build_profile();
  const Trajectory traj = run_trajectory(config, profile);
  const DensityCoordinate mode = config.coordinate == "absolute"
                                     ? DensityCoordinate::Absolute
                                     : DensityCoordinate::Fractional;
  const DensityMap map = density_map(traj, profile, config.n_x, mode, config.constants());
  const auto dir = prepare_output_dir(config.output_dir);

  std::ostringstream pgm;
  write_pgm16(pgm, map.values);
  write_file(dir / "density.pgm", pgm.str());
  std::ostringstream csv;
  write_density_csv(csv, map);
  write_file(dir / "density.csv", csv.str());

  write_manifest(dir, "density-map", render_config(config), timer.seconds(),
                 json{{"integrator", stats_json(traj.stats)},
                      {"norm_drift_max", richardson_norm_check(traj)},
                      {"rows", map.times.size()},
                      {"columns", map.coords.size()}});
  return 0;
}

int cmd_sweep(const SweepConfig& config, const std::string& config_text) {
  RunTimer timer;
  const SweepResult result = frequency_sweep(config.spec);
  const auto dir = prepare_output_dir(config.output_dir);
  std::ostringstream csv;
  write_sweep_csv(csv, result);
  write_file(dir / "sweep.csv", csv.str());

  long failed = 0;
  for (const auto& p : result.points)
    if (!p.ok) ++failed;
  write_manifest(dir, "sweep", config_text, timer.seconds(),
                 json{{"points", result.points.size()}, {"failed_points", failed}});
  if (failed > 0)
    std::cerr << "sweep: " << failed << " of " << result.points.size()
              << " points failed (flagged in sweep.csv)\n";
  return 0;
}

int cmd_resonance(const ResonanceConfig& config, const std::string& config_text) {
  RunTimer timer;
  const ResonanceReport report = refine_resonance(config.state, config.omega_lo, config.omega_hi,
                                                  config.spec, config.width_tol);
  const auto dir = prepare_output_dir(config.output_dir);
  std::ostringstream csv;
  write_resonance_csv(csv, report);
  write_file(dir / "resonance.csv", csv.str());
  write_manifest(dir, "resonance", config_text, timer.seconds(),
                 json{{"omega_star", report.omega_star},
                      {"max_population", report.max_population},
                      {"iterations", report.iterations},
                      {"unimodal", report.unimodal}});
  if (!report.unimodal)
    std::cerr << "resonance: bracket does not look unimodal; result may be a boundary value\n";
  std::cout << "state " << report.state << " resonance at omega = " << format_double(report.omega_star)
            << " with max population " << format_double(report.max_population) << '\n';
  return 0;
}

int cmd_validate(const ValidateConfig& config, const std::string& config_text) {
  RunTimer timer;
  IntegratorConfig integ;
  integ.rel_tol = config.rel_tol;
  integ.abs_tol = config.abs_tol;
  const ValidationResult result = validate_constant_velocity(
      config.v, config.L0, config.t_end, config.n_basis, config.samples, config.n_modes, integ);
  const auto dir = prepare_output_dir(config.output_dir);
  std::ostringstream csv;
  write_validate_csv(csv, result);
  write_file(dir / "validate.csv", csv.str());
  write_manifest(dir, "validate", config_text, timer.seconds(),
                 json{{"max_discrepancy", result.max_discrepancy}});
  std::cout << "max population discrepancy vs analytic solution: "
            << format_double(result.max_discrepancy) << '\n';
  return 0;
}

int cmd_converge(const ConvergeConfig& config, const std::string& config_text) {
  RunTimer timer;
  const auto rows = convergence_study(config.omega, config.reference, config.basis_factors,
                                      config.tol_factors);
  const auto dir = prepare_output_dir(config.output_dir);
  std::ostringstream csv;
  write_converge_csv(csv, rows);
  write_file(dir / "converge.csv", csv.str());
  write_manifest(dir, "converge", config_text, timer.seconds(),
                 json{{"rows", rows.size()}});
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{
      "movingbox: quantum particle in a box with moving walls.\n"
      "Propagates the eigenbasis expansion coefficients with an adaptive\n"
      "5(4) Runge-Kutta scheme and reproduces resonance, expansion and\n"
      "contraction experiments.\n\n"
      "Times are in units of L0^2 m / hbar (defaults hbar = m = 1). For a\n"
      "proton in a 1 nm box this unit corresponds to about 16 ns."};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string("movingbox ") + kVersion);

  std::string config_path;
  std::string output_dir;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "Path to the run configuration file")
        ->required()
        ->check(CLI::ExistingFile);
    sub->add_option("--output-dir", output_dir,
                    "Override the config's output directory");
  };

  CLI::App* simulate = app.add_subcommand(
      "simulate",
      "Integrate one trajectory; writes trajectory.csv (t, L, theta, norm, pop_1..pop_M, "
      "x_mean, p_mean, kinetic) and run_manifest.json");
  add_common(simulate);
  CLI::App* sweep = app.add_subcommand(
      "sweep", "Maximum populations vs driving frequency; writes sweep.csv");
  add_common(sweep);
  CLI::App* resonance = app.add_subcommand(
      "resonance", "Golden-section refinement of one resonance; writes resonance.csv");
  add_common(resonance);
  CLI::App* validate = app.add_subcommand(
      "validate",
      "Compare the propagator against the analytic constant-velocity solution; writes "
      "validate.csv");
  add_common(validate);
  CLI::App* density = app.add_subcommand(
      "density-map", "Probability-density map; writes density.pgm (16-bit) and density.csv");
  add_common(density);
  CLI::App* converge = app.add_subcommand(
      "converge", "Basis-size and tolerance convergence table; writes converge.csv");
  add_common(converge);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    const std::string text = read_file(config_path);
    if (simulate->parsed()) {
      RunConfig config = parse_config(text);
      if (!output_dir.empty()) config.output_dir = output_dir;
      return cmd_simulate(config);
    }
    if (density->parsed()) {
      RunConfig config = parse_config(text);
      if (!output_dir.empty()) config.output_dir = output_dir;
      return cmd_density_map(config);
    }
    if (sweep->parsed()) {
      SweepConfig config = parse_sweep_config(text);
      if (!output_dir.empty()) config.output_dir = output_dir;
      return cmd_sweep(config, text);
    }
    if (resonance->parsed()) {
      ResonanceConfig config = parse_resonance_config(text);
      if (!output_dir.empty()) config.output_dir = output_dir;
      return cmd_resonance(config, text);
    }
    if (validate->parsed()) {
      ValidateConfig config = parse_validate_config(text);
      if (!output_dir.empty()) config.output_dir = output_dir;
      return cmd_validate(config, text);
    }
    if (converge->parsed()) {
      ConvergeConfig config = parse_converge_config(text);
      if (!output_dir.empty()) config.output_dir = output_dir;
      return cmd_converge(config, text);
    }
    std::cerr << "no subcommand selected\n";
    return 1;
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "failure: " << e.what() << '\n';
    return 2;
  }
}

}  // namespace movingbox
