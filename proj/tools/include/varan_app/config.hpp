#pragma once

#include "varan/funcspace.hpp"
#include "varan/stability.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace varan::app {

/// One analysis run. Every tolerance and grid used by run_analyze is a field
/// here and is echoed into the report.
struct RunConfig {
  std::string function = "jump_square";
  ParamMap params;
  /// Empty picks the function's first declared anchor.
  std::vector<double> anchor;
  std::vector<double> subgrad;

  double lambda = 0.1;
  double epsilon = 0.5;
  double delta = 1.0;
  std::string variant = "revised";
  std::uint64_t seed = 0;

  int shells = 9;
  double shell_rho0 = 0.25;
  int directions = 32;
  int sphere_count = 32;
  int prox_grid_points = 401;
  int d2_k_first = 3;
  int d2_k_last = 18;
  double cluster_radius = 5e-2;
  int svar_per_axis = 101;
  double svar_radius = 0.5;
  int cnv_stages = 7;
  double cnv_beta0 = 0.5;
  double tilt_v_radius = 0.25;
  int tilt_radii = 7;
  int tilt_directions = 64;
  int tilt_grid_points = 201;
  double tol_modulus = 5e-2;
  double tol_tilt = 1e-3;
  double reverse_margin = 0.1;
  double shift_r = 1.0;
  bool epi_probe = true;

  std::string out_dir = "varan_out";
  std::string suite = "acceptance";

  ModulusCheckConfig modulus_check() const;
  TiltCheckConfig tilt_check_config() const;
  QuadBundleConfig bundle() const;
  ProxConfig prox() const;
  D2Config d2() const;

  /// Flat key/value echo in a fixed order.
  std::vector<std::pair<std::string, std::string>> echo() const;
};

/// Parses an INI file with sections [function], [params], [anchor],
/// [analysis], [grids], [output]. Unknown keys are config errors naming the
/// offending path.
RunConfig load_config(const std::string& path);

/// Applies "section.key" = value; throws a config error on unknown paths.
void apply_setting(RunConfig& cfg, const std::string& path, const std::string& value);

/// Checks ranges and dimensions; errors name the field path.
void validate(const RunConfig& cfg);

std::vector<double> parse_list(const std::string& text, const std::string& field);

}  // namespace varan::app
