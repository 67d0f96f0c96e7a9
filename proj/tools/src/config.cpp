#include "varan_app/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>

namespace varan::app {
namespace {

[[noreturn]] void config_error(const std::string& field, const std::string& msg) {
  throw Error(ErrorCode::config, field + ": " + msg);
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& text, const std::string& field) {
  const std::string t = trim(text);
  double v = 0.0;
  const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || p != t.data() + t.size() || t.empty()) {
    config_error(field, "expected a number, got '" + text + "'");
  }
  return v;
}

long to_int(const std::string& text, const std::string& field) {
  const std::string t = trim(text);
  long v = 0;
  const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || p != t.data() + t.size() || t.empty()) {
    config_error(field, "expected an integer, got '" + text + "'");
  }
  return v;
}

bool to_bool(const std::string& text, const std::string& field) {
  const std::string t = trim(text);
  if (t == "true" || t == "1" || t == "yes") return true;
  if (t == "false" || t == "0" || t == "no") return false;
  config_error(field, "expected true or false, got '" + text + "'");
}

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string list(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ",";
    out += num(v[i]);
  }
  return out;
}

struct Field {
  std::string path;
  std::function<void(RunConfig&, const std::string&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

#define VARAN_DOUBLE(path, member)                                                     \
  Field {                                                                              \
    path, [](RunConfig& c, const std::string& v, const std::string& p) {               \
      c.member = to_double(v, p);                                                      \
    },                                                                                 \
        [](const RunConfig& c) { return num(c.member); }                               \
  }
#define VARAN_INT(path, member)                                                        \
  Field {                                                                              \
    path, [](RunConfig& c, const std::string& v, const std::string& p) {               \
      c.member = static_cast<decltype(c.member)>(to_int(v, p));                        \
    },                                                                                 \
        [](const RunConfig& c) { return std::to_string(c.member); }                    \
  }

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      {"function.name", [](RunConfig& c, const std::string& v, const std::string&) { c.function = trim(v); },
       [](const RunConfig& c) { return c.function; }},
      {"anchor.x",
       [](RunConfig& c, const std::string& v, const std::string& p) { c.anchor = parse_list(v, p); },
       [](const RunConfig& c) { return list(c.anchor); }},
      {"anchor.v",
       [](RunConfig& c, const std::string& v, const std::string& p) { c.subgrad = parse_list(v, p); },
       [](const RunConfig& c) { return list(c.subgrad); }},
      VARAN_DOUBLE("analysis.lambda", lambda),
      VARAN_DOUBLE("analysis.epsilon", epsilon),
      VARAN_DOUBLE("analysis.delta", delta),
      {"analysis.variant", [](RunConfig& c, const std::string& v, const std::string&) { c.variant = trim(v); },
       [](const RunConfig& c) { return c.variant; }},
      VARAN_INT("analysis.seed", seed),
      VARAN_DOUBLE("analysis.tol_modulus", tol_modulus),
      VARAN_DOUBLE("analysis.tol_tilt", tol_tilt),
      VARAN_DOUBLE("analysis.reverse_margin", reverse_margin),
      VARAN_DOUBLE("analysis.shift_r", shift_r),
      {"analysis.epi_probe",
       [](RunConfig& c, const std::string& v, const std::string& p) { c.epi_probe = to_bool(v, p); },
       [](const RunConfig& c) { return std::string(c.epi_probe ? "true" : "false"); }},
      VARAN_INT("grids.shells", shells),
      VARAN_DOUBLE("grids.shell_rho0", shell_rho0),
      VARAN_INT("grids.directions", directions),
      VARAN_INT("grids.sphere_count", sphere_count),
      VARAN_INT("grids.prox_grid_points", prox_grid_points),
      VARAN_INT("grids.d2_k_first", d2_k_first),
      VARAN_INT("grids.d2_k_last", d2_k_last),
      VARAN_DOUBLE("grids.cluster_radius", cluster_radius),
      VARAN_INT("grids.svar_per_axis", svar_per_axis),
      VARAN_DOUBLE("grids.svar_radius", svar_radius),
      VARAN_INT("grids.cnv_stages", cnv_stages),
      VARAN_DOUBLE("grids.cnv_beta0", cnv_beta0),
      VARAN_DOUBLE("grids.tilt_v_radius", tilt_v_radius),
      VARAN_INT("grids.tilt_radii", tilt_radii),
      VARAN_INT("grids.tilt_directions", tilt_directions),
      VARAN_INT("grids.tilt_grid_points", tilt_grid_points),
      {"output.dir", [](RunConfig& c, const std::string& v, const std::string&) { c.out_dir = trim(v); },
       [](const RunConfig& c) { return c.out_dir; }},
      {"suite.name", [](RunConfig& c, const std::string& v, const std::string&) { c.suite = trim(v); },
       [](const RunConfig& c) { return c.suite; }},
  };
  return table;
}

#undef VARAN_DOUBLE
#undef VARAN_INT

}  // namespace

std::vector<double> parse_list(const std::string& text, const std::string& field) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (trim(item).empty()) continue;
    out.push_back(to_double(item, field));
  }
  return out;
}

void apply_setting(RunConfig& cfg, const std::string& path, const std::string& value) {
  if (path.rfind("params.", 0) == 0) {
    const std::string key = path.substr(7);
    if (key.empty()) config_error(path, "empty parameter name");
    cfg.params[key] = to_double(value, path);
    return;
  }
  for (const auto& f : fields()) {
    if (f.path == path) {
      f.set(cfg, value, path);
      return;
    }
  }
  config_error(path, "unknown setting");
}

RunConfig load_config(const std::string& path) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::read_ini(path, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    config_error(path, e.what());
  }
  RunConfig cfg;
  for (const auto& [section, body] : tree) {
    if (body.empty()) config_error(section, "setting outside a section");
    for (const auto& [key, value] : body) {
      apply_setting(cfg, section + "." + key, value.data());
    }
  }
  validate(cfg);
  return cfg;
}

void validate(const RunConfig& cfg) {
  const auto names = corpus_names();
  if (std::find(names.begin(), names.end(), cfg.function) == names.end()) {
    config_error("function.name", "unknown function '" + cfg.function + "'");
  }
  auto positive = [](double v, const char* field) {
    if (!(v > 0) || !std::isfinite(v)) config_error(field, "must be positive and finite");
  };
  positive(cfg.lambda, "analysis.lambda");
  positive(cfg.epsilon, "analysis.epsilon");
  positive(cfg.delta, "analysis.delta");
  positive(cfg.tol_modulus, "analysis.tol_modulus");
  positive(cfg.tol_tilt, "analysis.tol_tilt");
  positive(cfg.shell_rho0, "grids.shell_rho0");
  positive(cfg.cluster_radius, "grids.cluster_radius");
  positive(cfg.svar_radius, "grids.svar_radius");
  positive(cfg.cnv_beta0, "grids.cnv_beta0");
  positive(cfg.tilt_v_radius, "grids.tilt_v_radius");
  if (cfg.reverse_margin < 0) config_error("analysis.reverse_margin", "must be >= 0");
  if (cfg.shift_r < 0) config_error("analysis.shift_r", "must be >= 0");
  if (cfg.variant != "revised" && cfg.variant != "original") {
    config_error("analysis.variant", "expected revised or original");
  }
  auto at_least = [](long v, long lo, const char* field) {
    if (v < lo) config_error(field, "must be >= " + std::to_string(lo));
  };
  at_least(cfg.shells, 2, "grids.shells");
  at_least(cfg.directions, 2, "grids.directions");
  at_least(cfg.sphere_count, 2, "grids.sphere_count");
  at_least(cfg.prox_grid_points, 3, "grids.prox_grid_points");
  at_least(cfg.d2_k_first, 0, "grids.d2_k_first");
  at_least(cfg.d2_k_last, cfg.d2_k_first + 4, "grids.d2_k_last");
  at_least(cfg.svar_per_axis, 3, "grids.svar_per_axis");
  at_least(cfg.cnv_stages, 2, "grids.cnv_stages");
  at_least(cfg.tilt_radii, 1, "grids.tilt_radii");
  at_least(cfg.tilt_directions, 2, "grids.tilt_directions");
  at_least(cfg.tilt_grid_points, 3, "grids.tilt_grid_points");
  if (cfg.out_dir.empty()) config_error("output.dir", "must not be empty");

  const FunctionHandle f = corpus_get(cfg.function, cfg.params);
  const auto n = static_cast<std::size_t>(f.dim());
  if (!cfg.anchor.empty() && cfg.anchor.size() != n) {
    config_error("anchor.x", "expected " + std::to_string(n) + " components");
  }
  if (!cfg.subgrad.empty() && cfg.subgrad.size() != n) {
    config_error("anchor.v", "expected " + std::to_string(n) + " components");
  }
  if (cfg.anchor.empty() != cfg.subgrad.empty()) {
    config_error(cfg.anchor.empty() ? "anchor.x" : "anchor.v", "x and v must be given together");
  }
  if (cfg.anchor.empty() && f.meta().anchors.empty()) {
    config_error("anchor.x", "function has no declared anchor; give one explicitly");
  }
}

QuadBundleConfig RunConfig::bundle() const {
  QuadBundleConfig c;
  c.lambda = lambda;
  c.variant = variant == "original" ? BundleVariant::original : BundleVariant::revised;
  c.shells.rho0 = shell_rho0;
  c.shells.shells = shells;
  c.shells.directions = directions;
  c.cluster_radius = cluster_radius;
  c.sphere_count = sphere_count;
  c.d2 = d2();
  c.prox = prox();
  return c;
}

ProxConfig RunConfig::prox() const {
  ProxConfig c;
  c.grid_points = prox_grid_points;
  return c;
}

D2Config RunConfig::d2() const {
  D2Config c;
  c.k_first = d2_k_first;
  c.k_last = d2_k_last;
  return c;
}

ModulusCheckConfig RunConfig::modulus_check() const {
  ModulusCheckConfig c;
  c.bundle = bundle();
  c.svar.radius = svar_radius;
  c.svar.per_axis = svar_per_axis;
  c.svar.pairs.epsilon = epsilon;
  c.svar.pairs.per_axis = svar_per_axis;
  c.svar.pairs.lambda = lambda;
  c.svar.pairs.shells = c.bundle.shells;
  c.svar.pairs.prox = prox();
  c.cnv.beta0 = cnv_beta0;
  c.cnv.stages = cnv_stages;
  c.cnv.sphere_count = sphere_count;
  c.cnv.pairs = c.svar.pairs;
  c.tol = tol_modulus;
  c.reverse_margin = reverse_margin;
  c.shift_r = shift_r;
  return c;
}

TiltCheckConfig RunConfig::tilt_check_config() const {
  TiltCheckConfig c;
  c.bundle = bundle();
  c.tilt.delta = delta;
  c.tilt.v_radius = tilt_v_radius;
  c.tilt.radii = tilt_radii;
  c.tilt.directions = tilt_directions;
  c.tilt.grid_points = tilt_grid_points;
  c.tol = tol_tilt;
  return c;
}

std::vector<std::pair<std::string, std::string>> RunConfig::echo() const {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& f : fields()) out.emplace_back(f.path, f.get(*this));
  for (const auto& [k, v] : params) out.emplace_back("params." + k, num(v));
  return out;
}

}  // namespace varan::app
