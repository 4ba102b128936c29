#include "trussqaoa/harness.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <fmt/format.h>
#include <fstream>
#include <json.hpp>
#include <ostream>

#include "trussqaoa/error.hpp"
#include "trussqaoa/model_io.hpp"

namespace trussqaoa {

namespace fs = std::filesystem;
using nlohmann::json;

RunMode parse_mode(std::string_view name) {
  if (name == "optimize") return RunMode::kOptimize;
  if (name == "compare-tuners") return RunMode::kCompareTuners;
  if (name == "oracle-check") return RunMode::kOracleCheck;
  if (name == "oc-only") return RunMode::kOcOnly;
  throw InvalidConfig(fmt::format(
      "unknown mode '{}' (optimize, compare-tuners, oracle-check, oc-only)",
      name));
}

std::string_view mode_name(RunMode mode) {
  switch (mode) {
    case RunMode::kOptimize:
      return "optimize";
    case RunMode::kCompareTuners:
      return "compare-tuners";
    case RunMode::kOracleCheck:
      return "oracle-check";
    case RunMode::kOcOnly:
      return "oc-only";
  }
  return "optimize";
}

void RunManifest::validate() const {
  if (model_path.empty()) throw InvalidConfig("a model path is required");
  if (repetitions < 1) throw InvalidConfig("repetitions must be >= 1");
  if (mode == RunMode::kCompareTuners && tuners.empty()) {
    throw InvalidConfig("compare-tuners needs at least one tuner");
  }
  loop.validate();
}

std::string format_number(double value) { return fmt::format("{:.17g}", value); }

std::string iterations_csv(const std::vector<IterationRecord>& rows) {
  std::string out =
      "iteration,objective,compliance,volume_ratio,qubits_used,bitstring,slack,"
      "alpha\n";
  for (const auto& r : rows) {
    std::string alpha;
    for (std::size_t e = 0; e < r.alpha.size(); ++e) {
      if (e) alpha += ';';
      alpha += format_number(r.alpha[e]);
    }
    out += fmt::format("{},{},{},{},{},{},{},{}\n", r.iteration,
                       format_number(r.objective), format_number(r.compliance),
                       format_number(r.volume_ratio), r.qubits_used, r.bitstring,
                       format_number(r.slack), alpha);
  }
  return out;
}

std::string oracle_csv(const std::vector<OracleRow>& rows) {
  std::string out =
      "iteration,qubits,chosen_energy,min_energy,max_energy,gap_ratio,"
      "chosen_bitstring,min_bitstring\n";
  for (const auto& r : rows) {
    out += fmt::format("{},{},{},{},{},{},{},{}\n", r.iteration, r.qubits,
                       format_number(r.chosen_energy),
                       format_number(r.min_energy), format_number(r.max_energy),
                       format_number(r.gap_ratio), r.chosen_bits, r.min_bits);
  }
  return out;
}

std::string tuner_csv(const std::vector<TunerRow>& rows) {
  std::string out =
      "tuner,repetition,seed,status,iterations,final_compliance,"
      "final_volume_ratio,mape\n";
  for (const auto& r : rows) {
    out += fmt::format("{},{},{},{},{},{},{},{}\n", tuner_name(r.tuner),
                       r.repetition, r.seed, r.status, r.iterations,
                       format_number(r.final_compliance),
                       format_number(r.final_volume_ratio), format_number(r.mape));
  }
  return out;
}

double median(std::vector<double> values) {
  if (values.empty()) throw UndefinedMetric("median of an empty set");
  std::sort(values.begin(), values.end());
  const auto n = values.size();
  return n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

namespace {

using Clock = std::chrono::steady_clock;

struct Prepared {
  TrussModel model;
  LoopConfig loop;
};

// Everything that can fail on bad input happens here, before any output.
Prepared prepare(const RunManifest& manifest) {
  manifest.validate();
  Prepared prep{load_model_file(manifest.model_path), manifest.loop};
  if (manifest.schedule_path) {
    prep.loop.fixed_schedule = load_schedule_file(*manifest.schedule_path);
  }
  return prep;
}

fs::path make_out_dir(const RunManifest& manifest) {
  fs::path dir;
  if (manifest.out_dir) {
    dir = *manifest.out_dir;
  } else {
    const auto now = std::chrono::system_clock::to_time_t(
        std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char stamp[32];
    std::strftime(stamp, sizeof stamp, "%Y%m%d-%H%M%S", &tm);
    const fs::path base =
        fs::path("runs") / fmt::format("{}-{}", stamp, mode_name(manifest.mode));
    dir = base;
    for (int k = 1; fs::exists(dir); ++k) {
      dir = base.string() + fmt::format("-{}", k);
    }
  }
  fs::create_directories(dir);
  return dir;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError(fmt::format("cannot write '{}'", path.string()));
  out << text;
}

std::string areas_csv(std::span<const double> areas, double initial_area) {
  std::string out = "rod,area,area_ratio\n";
  for (std::size_t e = 0; e < areas.size(); ++e) {
    out += fmt::format("{},{},{}\n", e, format_number(areas[e]),
                       format_number(areas[e] / initial_area));
  }
  return out;
}

json loop_json(const LoopConfig& loop) {
  return {{"layers", loop.p},
          {"lambda", loop.encoding.lambda},
          {"shots", loop.shots},
          {"delta_beta", loop.delta_beta},
          {"delta_gamma", loop.delta_gamma},
          {"max_iterations", loop.max_iterations},
          {"freeze_threshold", loop.freeze_threshold},
          {"convergence_window", loop.convergence_window},
          {"seed", loop.seed},
          {"tuner", std::string(tuner_name(loop.tuner))},
          {"tuner_budget", loop.tuner_budget},
          {"phase_scaling",
           loop.circuit.scaling == PhaseScaling::kRaw ? "raw" : "spectral"},
          {"phase_span", loop.circuit.phase_span}};
}

int exit_code_for(ConvergenceStatus status) {
  return status == ConvergenceStatus::kConverged ? kExitConverged
                                                 : kExitBudgetExhausted;
}

struct LoopOutcome {
  std::vector<IterationRecord> records;
  std::vector<double> areas;
  std::string status;
  std::string message;
  int exit_code = kExitConverged;
  double compliance = 0.0;
  double volume_ratio = 0.0;
};

LoopOutcome run_loop(const TrussModel& model, const LoopConfig& loop,
                     const IterationObserver& extra = {}) {
  LoopOutcome out;
  std::vector<double> last_areas = model.uniform_areas();
  auto observer = [&](const IterationOutcome& o) {
    out.records.push_back(o.record);
    last_areas = o.state.areas;
    if (extra) extra(o);
  };
  try {
    const auto run = run_design(model, loop, observer);
    out.areas = run.state.areas;
    out.status = std::string(status_name(run.status));
    out.exit_code = exit_code_for(run.status);
    out.compliance = run.final_solution.compliance;
    out.volume_ratio = run.final_solution.total_volume / model.volume_budget;
  } catch (const StructuralFailure& e) {
    out.areas = last_areas;
    out.status = "structural-failure";
    out.message = e.what();
    out.exit_code = kExitStructuralFailure;
    out.compliance = out.records.empty() ? 0.0 : out.records.back().compliance;
    out.volume_ratio = total_volume(model, out.areas) / model.volume_budget;
  }
  return out;
}

json summary_json(const RunManifest& manifest, const RunReport& report,
                  const TrussModel& model) {
  json doc = {{"mode", std::string(mode_name(manifest.mode))},
              {"model", manifest.model_path.string()},
              {"status", report.status},
              {"exit_code", report.exit_code},
              {"iterations", report.iterations.size()},
              {"final_compliance", report.final_compliance},
              {"final_volume_ratio", report.final_volume_ratio},
              {"volume_budget", model.volume_budget},
              {"final_areas", report.final_areas},
              {"retained_rods",
               retained_rods(report.final_areas, model.initial_area,
                             manifest.loop.freeze_threshold)},
              {"wall_time_s", report.wall_seconds},
              {"config", loop_json(manifest.loop)}};
  if (!report.message.empty()) doc["message"] = report.message;
  if (report.reference) {
    doc["oc_reference"] = {
        {"compliance", report.reference->compliance},
        {"iterations", report.reference->iterations},
        {"areas", report.reference->areas},
        {"retained_rods", retained_rods(report.reference->areas,
                                        model.initial_area,
                                        manifest.loop.freeze_threshold)}};
  }
  return doc;
}

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

}  // namespace

RunReport cmd_optimize(const RunManifest& manifest) {
  const auto start = Clock::now();
  const auto prep = prepare(manifest);
  RunReport report;
  report.mode = RunMode::kOptimize;
  report.out_dir = make_out_dir(manifest);

  auto loop = run_loop(prep.model, prep.loop);
  report.iterations = std::move(loop.records);
  report.final_areas = std::move(loop.areas);
  report.status = loop.status;
  report.message = loop.message;
  report.exit_code = loop.exit_code;
  report.final_compliance = loop.compliance;
  report.final_volume_ratio = loop.volume_ratio;
  report.wall_seconds = seconds_since(start);

  write_file(report.out_dir / "iterations.csv", iterations_csv(report.iterations));
  write_file(report.out_dir / "final_areas.csv",
             areas_csv(report.final_areas, prep.model.initial_area));
  write_file(report.out_dir / "summary.json",
             summary_json(manifest, report, prep.model).dump(2) + "\n");
  return report;
}

RunReport cmd_compare_tuners(const RunManifest& manifest) {
  const auto start = Clock::now();
  const auto prep = prepare(manifest);
  RunReport report;
  report.mode = RunMode::kCompareTuners;
  report.out_dir = make_out_dir(manifest);
  report.reference = oc_reference(prep.model);
  const double y = report.reference->compliance;

  for (Tuner tuner : manifest.tuners) {
    for (int r = 0; r < manifest.repetitions; ++r) {
      LoopConfig loop = prep.loop;
      loop.tuner = tuner;
      loop.fixed_schedule.reset();
      loop.seed = prep.loop.seed + 1000 * static_cast<std::uint64_t>(r);
      const auto run = run_loop(prep.model, loop);
      TunerRow row;
      row.tuner = tuner;
      row.repetition = r;
      row.seed = loop.seed;
      row.status = run.status;
      row.iterations = static_cast<int>(run.records.size());
      row.final_compliance = run.compliance;
      row.final_volume_ratio = run.volume_ratio;
      row.mape = run.exit_code == kExitStructuralFailure ? 100.0
                                                         : mape(run.compliance, y);
      report.tuner_rows.push_back(row);
    }
  }
  report.status = "completed";
  report.wall_seconds = seconds_since(start);
  report.final_areas = report.reference->areas;
  report.final_compliance = y;
  report.final_volume_ratio =
      total_volume(prep.model, report.reference->areas) / prep.model.volume_budget;

  json medians = json::object();
  for (Tuner tuner : manifest.tuners) {
    std::vector<double> values;
    for (const auto& row : report.tuner_rows) {
      if (row.tuner == tuner) values.push_back(row.mape);
    }
    medians[std::string(tuner_name(tuner))] = median(values);
  }
  auto summary = summary_json(manifest, report, prep.model);
  summary["median_mape"] = medians;
  summary["repetitions"] = manifest.repetitions;
  write_file(report.out_dir / "mape.csv", tuner_csv(report.tuner_rows));
  write_file(report.out_dir / "summary.json", summary.dump(2) + "\n");
  return report;
}

RunReport cmd_oracle_check(const RunManifest& manifest) {
  const auto start = Clock::now();
  const auto prep = prepare(manifest);
  const int qubits =
      static_cast<int>(prep.model.rods.size() *
                           prep.loop.encoding.candidates.size() +
                       prep.loop.encoding.slack_coefficients.size());
  if (qubits > kMaxQubits) {
    throw SizeLimit(fmt::format(
        "oracle check refused: {} qubits exceeds the brute-force limit of {}",
        qubits, kMaxQubits));
  }
  RunReport report;
  report.mode = RunMode::kOracleCheck;
  report.out_dir = make_out_dir(manifest);

  auto check = [&](const IterationOutcome& o) {
    const auto table = energy_table(o.qubo);
    const auto best = brute_force_minimum(table);
    OracleRow row;
    row.iteration = o.record.iteration;
    row.qubits = o.qubo.n;
    row.chosen_energy = o.record.objective;
    row.min_energy = best.min_energy;
    row.max_energy = best.max_energy;
    const double range = best.max_energy - best.min_energy;
    row.gap_ratio = range > 0.0 ? (row.chosen_energy - best.min_energy) / range : 0.0;
    row.chosen_bits = o.record.bitstring;
    row.min_bits = to_bitstring(best.argmin, o.qubo.n);
    report.oracle_rows.push_back(row);
  };
  auto loop = run_loop(prep.model, prep.loop, check);
  report.iterations = std::move(loop.records);
  report.final_areas = std::move(loop.areas);
  report.status = loop.status;
  report.message = loop.message;
  report.exit_code = loop.exit_code;
  report.final_compliance = loop.compliance;
  report.final_volume_ratio = loop.volume_ratio;
  report.wall_seconds = seconds_since(start);

  double mean_gap = 0.0;
  for (const auto& row : report.oracle_rows) mean_gap += row.gap_ratio;
  if (!report.oracle_rows.empty()) mean_gap /= report.oracle_rows.size();
  auto summary = summary_json(manifest, report, prep.model);
  summary["mean_gap_ratio"] = mean_gap;
  write_file(report.out_dir / "oracle.csv", oracle_csv(report.oracle_rows));
  write_file(report.out_dir / "iterations.csv", iterations_csv(report.iterations));
  write_file(report.out_dir / "summary.json", summary.dump(2) + "\n");
  return report;
}

RunReport cmd_oc_only(const RunManifest& manifest) {
  const auto start = Clock::now();
  const auto prep = prepare(manifest);
  RunReport report;
  report.mode = RunMode::kOcOnly;
  report.out_dir = make_out_dir(manifest);
  report.reference = oc_reference(prep.model);
  report.final_areas = report.reference->areas;
  report.final_compliance = report.reference->compliance;
  report.final_volume_ratio =
      total_volume(prep.model, report.final_areas) / prep.model.volume_budget;
  report.status = "converged";
  report.wall_seconds = seconds_since(start);
  write_file(report.out_dir / "final_areas.csv",
             areas_csv(report.final_areas, prep.model.initial_area));
  write_file(report.out_dir / "summary.json",
             summary_json(manifest, report, prep.model).dump(2) + "\n");
  return report;
}

RunReport run_manifest(const RunManifest& manifest, std::ostream& log) {
  try {
    RunReport report;
    switch (manifest.mode) {
      case RunMode::kOptimize:
        report = cmd_optimize(manifest);
        break;
      case RunMode::kCompareTuners:
        report = cmd_compare_tuners(manifest);
        break;
      case RunMode::kOracleCheck:
        report = cmd_oracle_check(manifest);
        break;
      case RunMode::kOcOnly:
        report = cmd_oc_only(manifest);
        break;
    }
    if (!report.message.empty()) log << "error: " << report.message << '\n';
    return report;
  } catch (const StructuralFailure& e) {
    log << "structural failure: " << e.what() << '\n';
    RunReport report;
    report.mode = manifest.mode;
    report.exit_code = kExitStructuralFailure;
    report.status = "structural-failure";
    report.message = e.what();
    return report;
  } catch (const Error& e) {
    log << "error: " << e.what() << '\n';
    RunReport report;
    report.mode = manifest.mode;
    report.exit_code = kExitInputError;
    report.status = "input-error";
    report.message = e.what();
    return report;
  } catch (const fs::filesystem_error& e) {
    log << "error: " << e.what() << '\n';
    RunReport report;
    report.mode = manifest.mode;
    report.exit_code = kExitInputError;
    report.status = "input-error";
    report.message = e.what();
    return report;
  }
}

}  // namespace trussqaoa
