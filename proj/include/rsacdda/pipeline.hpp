#pragma once

#include <string>
#include <vector>

#include "rsacdda/alm.hpp"
#include "rsacdda/config.hpp"
#include "rsacdda/dataset.hpp"
#include "rsacdda/subspace.hpp"

namespace rsacdda {

struct StageTiming {
  std::string stage;
  double wall_ms = 0.0;
};

struct AdaptationReport {
  std::string task;
  std::string method;  // "rsa_cdda" or "nn"
  AdaptationConfig config;
  std::vector<StageTiming> timings;

  std::vector<InitIterationRecord> init_trace;
  std::size_t k_init_used = 0;

  std::size_t alm_iterations = 0;
  bool alm_converged = false;
  double final_r1 = 0.0;
  double final_r2 = 0.0;
  double final_r3 = 0.0;
  ConvergenceTrace alm_trace;

  Matrix subspace;  // m×k_final learned projection (empty for the nn baseline)
  std::vector<int> predictions;
  double accuracy_value = 0.0;
  bool accuracy_known = false;  // true iff target labels were supplied
  std::vector<std::string> skipped_class_log;
};

/// Full run: joint normalize → Algorithm 1(a) → Algorithm 1(b) → 1-NN in the
/// learned embedding. Deterministic given the pair and config. Stage failures
/// are rethrown with the stage name attached.
AdaptationReport run_rsa_cdda(const DomainPair& pair, const AdaptationConfig& cfg);

/// The comparison anchor: 1-NN directly in the (normalized) input space.
AdaptationReport run_baseline_nn(const DomainPair& pair, const AdaptationConfig& cfg);

std::string report_to_json(const AdaptationReport& report);
void write_report(const std::string& path, const AdaptationReport& report);
void write_alm_trace_csv(const std::string& path, const ConvergenceTrace& trace);

struct BenchSummaryRow {
  std::string task;
  std::string method;
  std::string group;
  bool ok = false;
  std::string error;
  double accuracy = 0.0;
  bool accuracy_known = false;
  std::size_t alm_iterations = 0;
  double final_residual = 0.0;
  bool has_residual = false;
  double wall_ms = 0.0;
};

struct BenchResult {
  std::vector<BenchSummaryRow> rows;  // task rows only (averages are CSV-level)
  std::string summary_csv_path;
};

/// Run every task in the manifest, write one report JSON per task×method plus
/// summary.csv (columns task,method,accuracy,alm_iterations,final_residual,
/// wall_ms, with per-group and overall average rows). Task failures are
/// recorded in the summary and the remaining tasks proceed.
BenchResult run_benchmark_suite(const std::string& manifest_path,
                                const std::string& out_dir, bool dump_traces = false);

}  // namespace rsacdda
