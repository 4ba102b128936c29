#pragma once

// Run modes behind the command-line tool. Each command validates its input
// before creating the output directory, so input errors leave no files.

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "trussqaoa/design_loop.hpp"

namespace trussqaoa {

enum class RunMode { kOptimize, kCompareTuners, kOracleCheck, kOcOnly };

RunMode parse_mode(std::string_view name);
std::string_view mode_name(RunMode mode);

/// Process exit codes.
enum ExitCode : int {
  kExitConverged = 0,
  kExitBudgetExhausted = 2,
  kExitStructuralFailure = 3,
  kExitInputError = 4,
};

struct RunManifest {
  std::filesystem::path model_path;
  RunMode mode = RunMode::kOptimize;
  LoopConfig loop;
  std::vector<Tuner> tuners{Tuner::kFlrs, Tuner::kLocalSearch};
  int repetitions = 10;
  std::optional<std::filesystem::path> schedule_path;
  std::optional<std::filesystem::path> out_dir;  // default runs/<stamp>-<mode>
  bool quiet = false;

  void validate() const;
};

struct OracleRow {
  int iteration = 0;
  int qubits = 0;
  double chosen_energy = 0.0;
  double min_energy = 0.0;
  double max_energy = 0.0;
  double gap_ratio = 0.0;
  std::string chosen_bits;
  std::string min_bits;
};

struct TunerRow {
  Tuner tuner = Tuner::kFlrs;
  int repetition = 0;
  std::uint64_t seed = 0;
  std::string status;
  int iterations = 0;
  double final_compliance = 0.0;
  double final_volume_ratio = 0.0;
  double mape = 100.0;
};

struct RunReport {
  RunMode mode = RunMode::kOptimize;
  int exit_code = kExitConverged;
  std::string status;
  std::string message;
  std::filesystem::path out_dir;
  std::vector<IterationRecord> iterations;
  std::vector<double> final_areas;
  double final_compliance = 0.0;
  double final_volume_ratio = 0.0;
  double wall_seconds = 0.0;
  std::optional<OcResult> reference;
  std::vector<TunerRow> tuner_rows;
  std::vector<OracleRow> oracle_rows;
};

RunReport cmd_optimize(const RunManifest& manifest);
RunReport cmd_compare_tuners(const RunManifest& manifest);
RunReport cmd_oracle_check(const RunManifest& manifest);
RunReport cmd_oc_only(const RunManifest& manifest);

/// Dispatches on the mode and maps errors onto exit codes. Messages go to
/// `log`.
RunReport run_manifest(const RunManifest& manifest, std::ostream& log);

/// CSV writers; numbers use 17 significant digits so they parse back
/// exactly.
std::string format_number(double value);
std::string iterations_csv(const std::vector<IterationRecord>& rows);
std::string oracle_csv(const std::vector<OracleRow>& rows);
std::string tuner_csv(const std::vector<TunerRow>& rows);

double median(std::vector<double> values);

}  // namespace trussqaoa
