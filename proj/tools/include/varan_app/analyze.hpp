#pragma once

#include "varan_app/config.hpp"
#include "varan_app/report.hpp"

#include <string>

namespace varan::app {

struct AnalyzeOutput {
  /// report.json content; "status" is "ok" or "error".
  Json report;
  Json epi;
  std::string bundle_csv;
  std::string d2_csv;
  bool all_pass = false;
};

/// Anchor pair from the config, or the function's first declared anchor.
SubgradientPair resolve_anchor(const FunctionHandle& f, const RunConfig& cfg);

/// Runs prox, bundle, modulus cross-checks, tilt (when v̄ = 0) and the
/// twice-epi probe. Component failures are recorded under "errors" with
/// status "error" rather than thrown; config errors still throw.
AnalyzeOutput analyze(const RunConfig& cfg);

/// Writes report.json, bundle_members.csv, d2_samples.csv and
/// epi_certificates.json into cfg.out_dir (created if missing).
void write_outputs(const RunConfig& cfg, const AnalyzeOutput& out);

}  // namespace varan::app
