#pragma once

#include "varan_app/report.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace varan::app {

struct CriterionRow {
  int id = 0;
  std::string name;
  bool pass = false;
  double measured = 0.0;
  double expected = 0.0;
  double tolerance = 0.0;
  std::string detail;
  /// Wall time; printed but kept out of the JSON report.
  double seconds = 0.0;
  /// Runtime budget in seconds, 0 for none. Exceeding it fails the row.
  double budget = 0.0;
};

struct SuiteReport {
  std::string name;
  std::uint64_t seed = 0;
  std::vector<CriterionRow> rows;
  bool all_pass() const;
  /// Deterministic content plus a "timestamp" member.
  Json to_json() const;
  /// One line per row: status, id, name, measured, expected, tolerance, time.
  std::string table() const;
};

struct SuiteOptions {
  std::uint64_t seed = 0;
  /// Called after each row completes.
  std::function<void(const CriterionRow&)> on_row;
};

inline constexpr int kAcceptanceCriteria = 12;

/// Acceptance criterion 1..11. Criterion 12 needs two full runs and is
/// produced by run_acceptance.
CriterionRow acceptance_criterion(int id, const SuiteOptions& opt = {});

SuiteReport run_acceptance(const SuiteOptions& opt = {});
SuiteReport run_properties(const SuiteOptions& opt = {});
SuiteReport run_corpus_sweep(const SuiteOptions& opt = {});
/// Throws a config error for unknown names.
SuiteReport run_suite(const std::string& name, const SuiteOptions& opt = {});

struct GenCsSweep {
  int instances = 0;
  /// min of lhs - rhs over random (x, y).
  double min_gap = kInf;
  /// max |lhs - rhs| / max(1, |rhs|) at y = A x.
  double max_equality_error = 0.0;
};

GenCsSweep gen_cs_sweep(int instances, std::uint64_t seed);

struct OracleCheck {
  bool ok = true;
  double worst = 0.0;
  Vec witness;
};

/// Prox oracle against the numerical prox at grid points around each anchor.
OracleCheck prox_oracle_invariant(const FunctionHandle& f, double lambda, int points = 21,
                                  double tol = 1e-6);

}  // namespace varan::app
