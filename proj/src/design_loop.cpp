#include "trussqaoa/design_loop.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <random>

#include "trussqaoa/error.hpp"

namespace trussqaoa {

void LoopConfig::validate() const {
  if (p < 1) throw InvalidConfig("layer count p must be >= 1");
  if (shots < 1) throw InvalidConfig("shots must be >= 1");
  if (!(delta_beta > 0.0) || !(delta_gamma > 0.0)) {
    throw InvalidConfig("ramp scales must be positive");
  }
  if (max_iterations < 1) throw InvalidConfig("max_iterations must be >= 1");
  if (!(freeze_threshold > 0.0) || !(freeze_threshold < 1.0)) {
    throw InvalidConfig("freeze threshold must lie in (0, 1)");
  }
  if (convergence_window < 1) {
    throw InvalidConfig("convergence window must be >= 1");
  }
  if (tuner_budget < 0) throw InvalidConfig("tuner budget must be >= 0");
  if (!(failure_ratio > 1.0)) throw InvalidConfig("failure ratio must be > 1");
  encoding.validate();
  if (fixed_schedule) fixed_schedule->validate();
}

std::size_t DesignState::active_count() const {
  return static_cast<std::size_t>(std::count(active.begin(), active.end(), true));
}

DesignState initial_design_state(const TrussModel& model) {
  DesignState state;
  state.areas = model.uniform_areas();
  state.active.assign(model.rods.size(), true);
  state.initial_compliance = assemble_and_solve(model, state.areas).compliance;
  return state;
}

namespace {

FemSolution solve_or_fail(const TrussModel& model, std::span<const double> areas,
                          double initial_compliance, double failure_ratio,
                          int iteration) {
  FemSolution fem;
  try {
    fem = assemble_and_solve(model, areas);
  } catch (const SingularSystem& e) {
    throw StructuralFailure(e.what(), iteration);
  }
  if (!std::isfinite(fem.compliance) ||
      fem.compliance > failure_ratio * initial_compliance) {
    throw StructuralFailure(
        fmt::format("compliance {:.6g} exceeds {:g} x the initial {:.6g}; the "
                    "load path runs through removed rods",
                    fem.compliance, failure_ratio, initial_compliance),
        iteration);
  }
  return fem;
}

}  // namespace

IterationOutcome run_iteration(const DesignState& state, const TrussModel& model,
                               const LoopConfig& config) {
  if (state.active_count() == 0) {
    throw InvalidConfig("design iteration needs at least one active rod");
  }
  const int it = state.iteration;
  const std::uint64_t seed = config.seed + static_cast<std::uint64_t>(it);

  const auto fem = solve_or_fail(model, state.areas, state.initial_compliance,
                                 config.failure_ratio, it);
  VariableRegistry registry(state.active,
                            static_cast<int>(config.encoding.candidates.size()),
                            static_cast<int>(config.encoding.slack_coefficients.size()));
  auto qubo = build_qubo(model, fem, state.areas, model.volume_budget,
                         config.encoding, registry);
  const auto table = energy_table(qubo);

  QaoaSchedule schedule =
      config.fixed_schedule
          ? *config.fixed_schedule
          : fine_tune(table, qubo.n, config.p, config.tuner, config.tuner_budget,
                      seed, config.circuit, config.delta_beta,
                      config.delta_gamma)
                .schedule;
  const auto result =
      run_circuit(table, qubo.n, schedule, config.shots, seed, config.circuit);

  std::seed_seq epsilon_seed{seed, std::uint64_t{0x65707331}};
  std::mt19937_64 epsilon_rng(epsilon_seed);
  const auto alpha =
      decode_updaters(result.most_frequent, registry, config.encoding, epsilon_rng);

  IterationOutcome out{state, {}, std::move(qubo), std::move(schedule)};
  auto& next = out.state;
  for (int rod : registry.active_rods()) next.areas[rod] *= alpha[rod];

  const auto updated = solve_or_fail(model, next.areas, state.initial_compliance,
                                     config.failure_ratio, it);

  auto& rec = out.record;
  rec.iteration = it;
  rec.objective = table[result.most_frequent];
  rec.compliance = updated.compliance;
  rec.volume_ratio = updated.total_volume / model.volume_budget;
  rec.bitstring = result.most_frequent_bits;
  rec.alpha = alpha;
  rec.slack = decode_slack(result.most_frequent, registry, config.encoding);
  rec.qubits_used = registry.qubit_count();
  rec.sampled_expectation = result.expectation;
  rec.exact_expectation = result.exact_expectation;

  next.updater_history.push_back(alpha);
  next.records.push_back(rec);
  next.iteration = it + 1;
  next = early_stop_freeze(std::move(next), config, model.initial_area);
  return out;
}

DesignState early_stop_freeze(DesignState state, const LoopConfig& config,
                              double initial_area) {
  const double limit = config.freeze_threshold * initial_area;
  for (std::size_t e = 0; e < state.areas.size(); ++e) {
    if (state.active[e] && state.areas[e] < limit) state.active[e] = false;
  }
  return state;
}

std::string_view status_name(ConvergenceStatus status) {
  switch (status) {
    case ConvergenceStatus::kConverged:
      return "converged";
    case ConvergenceStatus::kBudgetExhausted:
      return "budget-exhausted";
    case ConvergenceStatus::kRunning:
      break;
  }
  return "running";
}

ConvergenceStatus check_convergence(const DesignState& state,
                                    const LoopConfig& config) {
  const auto& history = state.updater_history;
  const auto window = static_cast<std::size_t>(config.convergence_window);
  if (history.size() >= window) {
    const bool identity = std::all_of(
        history.end() - static_cast<std::ptrdiff_t>(window), history.end(),
        [](const std::vector<double>& alpha) {
          return std::all_of(alpha.begin(), alpha.end(),
                             [](double a) { return a == 1.0; });
        });
    if (identity) return ConvergenceStatus::kConverged;
  }
  if (state.iteration >= config.max_iterations) {
    return ConvergenceStatus::kBudgetExhausted;
  }
  return ConvergenceStatus::kRunning;
}

DesignRun run_design(const TrussModel& model, const LoopConfig& config,
                     const IterationObserver& observer) {
  config.validate();
  DesignRun run;
  run.state = initial_design_state(model);
  while (run.status == ConvergenceStatus::kRunning) {
    if (run.state.active_count() == 0) {
      // Nothing left to update: every later iteration would be the identity.
      run.status = ConvergenceStatus::kConverged;
      break;
    }
    auto outcome = run_iteration(run.state, model, config);
    if (observer) observer(outcome);
    run.state = std::move(outcome.state);
    run.status = check_convergence(run.state, config);
  }
  run.final_solution = assemble_and_solve(model, run.state.areas);
  return run;
}

std::vector<int> retained_rods(std::span<const double> areas,
                               double initial_area, double threshold) {
  std::vector<int> out;
  for (std::size_t e = 0; e < areas.size(); ++e) {
    if (areas[e] >= threshold * initial_area) out.push_back(static_cast<int>(e));
  }
  return out;
}

}  // namespace trussqaoa
