#pragma once

// Iterative truss sizing: FEM solve -> QUBO -> QAOA -> decode -> multiply
// areas, with early stopping of negligible rods.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "trussqaoa/encoding.hpp"
#include "trussqaoa/qaoa.hpp"
#include "trussqaoa/truss.hpp"

namespace trussqaoa {

struct LoopConfig {
  int p = 6;
  std::uint64_t shots = 100000;
  double delta_beta = 1.0;
  double delta_gamma = 1.0;
  int max_iterations = 50;
  double freeze_threshold = 0.01;  // fraction of A0, strict <
  int convergence_window = 3;
  std::uint64_t seed = 0;
  Tuner tuner = Tuner::kFlrs;
  int tuner_budget = 0;  // circuit evaluations per design iteration
  EncodingConfig encoding;  // holds lambda
  CircuitOptions circuit;
  std::optional<QaoaSchedule> fixed_schedule;  // replaces tuning when set
  /// A post-update compliance above this multiple of the initial one means
  /// the load path runs through epsilon-area rods only.
  double failure_ratio = 1e6;

  void validate() const;
};

struct IterationRecord {
  int iteration = 0;
  double objective = 0.0;     // QUBO energy of the chosen bitstring
  double compliance = 0.0;    // after the update
  double volume_ratio = 0.0;  // V / V0 after the update
  std::string bitstring;
  std::vector<double> alpha;  // per rod; 1.0 for frozen rods
  double slack = 0.0;
  int qubits_used = 0;
  double sampled_expectation = 0.0;
  double exact_expectation = 0.0;
};

struct DesignState {
  int iteration = 0;
  std::vector<double> areas;
  std::vector<bool> active;
  std::vector<std::vector<double>> updater_history;
  std::vector<IterationRecord> records;
  double initial_compliance = 0.0;

  std::size_t active_count() const;
};

DesignState initial_design_state(const TrussModel& model);

struct IterationOutcome {
  DesignState state;
  IterationRecord record;
  QuboProblem qubo;
  QaoaSchedule schedule;
};

/// One pass of the design loop. Throws StructuralFailure when the structure
/// loses its load path.
IterationOutcome run_iteration(const DesignState& state, const TrussModel& model,
                               const LoopConfig& config);

/// Marks active rods with area < freeze_threshold * A0 as frozen.
DesignState early_stop_freeze(DesignState state, const LoopConfig& config,
                              double initial_area);

enum class ConvergenceStatus { kRunning, kConverged, kBudgetExhausted };

std::string_view status_name(ConvergenceStatus status);

/// Converged once the last `convergence_window` iterations applied only
/// identity updaters; budget-exhausted once max_iterations have run.
ConvergenceStatus check_convergence(const DesignState& state,
                                    const LoopConfig& config);

struct DesignRun {
  DesignState state;
  ConvergenceStatus status = ConvergenceStatus::kRunning;
  FemSolution final_solution;
};

using IterationObserver = std::function<void(const IterationOutcome&)>;

DesignRun run_design(const TrussModel& model, const LoopConfig& config,
                     const IterationObserver& observer = {});

struct OcConfig {
  double damping = 0.5;
  double lower_bound_fraction = 1e-6;  // of A0
  double tolerance = 1e-4;             // max relative area change
  int max_iterations = 20000;
};

struct OcResult {
  std::vector<double> areas;
  double compliance = 0.0;
  int iterations = 0;
};

/// Optimality-criteria sizing at the model's volume budget. Throws
/// ReferenceUnavailable when the multiplier bisection fails.
OcResult oc_reference(const TrussModel& model, const OcConfig& config = {});

/// Rods with area >= threshold * A0.
std::vector<int> retained_rods(std::span<const double> areas,
                               double initial_area, double threshold = 0.01);

}  // namespace trussqaoa
