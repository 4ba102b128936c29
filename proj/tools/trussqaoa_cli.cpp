// Command-line front end for the truss sizing loop.
//
// Every option can also be supplied through an environment variable named
// TRUSSQAOA_<OPTION>, e.g. TRUSSQAOA_SEED=7 or TRUSSQAOA_MAX_ITERS=20.
// Command-line values take precedence.

#include <CLI11.hpp>
#include <fmt/format.h>
#include <iostream>

#include "trussqaoa/error.hpp"
#include "trussqaoa/harness.hpp"

using namespace trussqaoa;

int main(int argc, char** argv) {
  CLI::App app{"Truss sizing with QAOA-encoded area updates"};

  RunManifest manifest;
  LoopConfig& loop = manifest.loop;
  std::string model;
  std::string mode = "optimize";
  std::string tuner = "flrs";
  std::string tuners = "flrs,local-search";
  std::string scaling = "spectral";
  std::string schedule;
  std::string out;

  auto env = [](const char* name) { return fmt::format("TRUSSQAOA_{}", name); };

  app.add_option("--model", model, "Model JSON file")
      ->required()
      ->envname(env("MODEL"));
  app.add_option("--mode", mode,
                 "optimize | compare-tuners | oracle-check | oc-only")
      ->envname(env("MODE"))
      ->capture_default_str();
  app.add_option("--layers,-p", loop.p, "QAOA layers")
      ->envname(env("LAYERS"))
      ->capture_default_str();
  app.add_option("--lambda", loop.encoding.lambda, "Volume penalty weight")
      ->envname(env("LAMBDA"))
      ->capture_default_str();
  app.add_option("--shots", loop.shots, "Measurement shots per circuit")
      ->envname(env("SHOTS"))
      ->capture_default_str();
  app.add_option("--delta-beta", loop.delta_beta, "Mixer ramp scale")
      ->envname(env("DELTA_BETA"))
      ->capture_default_str();
  app.add_option("--delta-gamma", loop.delta_gamma, "Phase ramp scale")
      ->envname(env("DELTA_GAMMA"))
      ->capture_default_str();
  app.add_option("--max-iters", loop.max_iterations, "Design iteration budget")
      ->envname(env("MAX_ITERS"))
      ->capture_default_str();
  app.add_option("--seed", loop.seed, "Base random seed")
      ->envname(env("SEED"))
      ->capture_default_str();
  app.add_option("--tuner", tuner, "flrs | local-search (optimize, oracle-check)")
      ->envname(env("TUNER"))
      ->capture_default_str();
  app.add_option("--tuners", tuners, "Comma-separated tuners for compare-tuners")
      ->envname(env("TUNERS"))
      ->capture_default_str();
  app.add_option("--tuner-budget", loop.tuner_budget,
                 "Circuit evaluations per iteration for local-search")
      ->envname(env("TUNER_BUDGET"))
      ->capture_default_str();
  app.add_option("--repetitions", manifest.repetitions,
                 "Runs per tuner in compare-tuners")
      ->envname(env("REPETITIONS"))
      ->capture_default_str();
  app.add_option("--schedule", schedule,
                 "Fixed schedule file (lines: layer gamma beta)")
      ->envname(env("SCHEDULE"));
  app.add_option("--phase-scaling", scaling, "spectral | raw")
      ->envname(env("PHASE_SCALING"))
      ->capture_default_str();
  app.add_option("--phase-span", loop.circuit.phase_span,
                 "Phase range for spectral scaling")
      ->envname(env("PHASE_SPAN"))
      ->capture_default_str();
  app.add_option("--freeze-threshold", loop.freeze_threshold,
                 "Freeze rods below this fraction of A0")
      ->envname(env("FREEZE_THRESHOLD"))
      ->capture_default_str();
  app.add_option("--window", loop.convergence_window,
                 "Identity iterations needed to converge")
      ->envname(env("WINDOW"))
      ->capture_default_str();
  app.add_option("--failure-ratio", loop.failure_ratio,
                 "Stop with structural failure when compliance exceeds this "
                 "multiple of the initial compliance")
      ->envname(env("FAILURE_RATIO"))
      ->capture_default_str();
  app.add_option("--out", out, "Output directory (default runs/<stamp>-<mode>)")
      ->envname(env("OUT"));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInputError;
  }

  try {
    manifest.model_path = model;
    manifest.mode = parse_mode(mode);
    loop.tuner = parse_tuner(tuner);
    manifest.tuners.clear();
    for (std::size_t start = 0; start <= tuners.size();) {
      const auto comma = std::min(tuners.find(',', start), tuners.size());
      if (comma > start) {
        manifest.tuners.push_back(parse_tuner(tuners.substr(start, comma - start)));
      }
      start = comma + 1;
    }
    if (scaling == "spectral") {
      loop.circuit.scaling = PhaseScaling::kSpectral;
    } else if (scaling == "raw") {
      loop.circuit.scaling = PhaseScaling::kRaw;
    } else {
      throw InvalidConfig(fmt::format("unknown phase scaling '{}'", scaling));
    }
    if (!schedule.empty()) manifest.schedule_path = schedule;
    if (!out.empty()) manifest.out_dir = out;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInputError;
  }

  const auto report = run_manifest(manifest, std::cerr);
  if (report.exit_code != kExitInputError) {
    std::cout << fmt::format(
        "status={} iterations={} compliance={:.6g} volume_ratio={:.6g} out={}\n",
        report.status, report.iterations.size(), report.final_compliance,
        report.final_volume_ratio, report.out_dir.string());
    if (manifest.mode == RunMode::kCompareTuners) {
      for (Tuner t : manifest.tuners) {
        std::vector<double> values;
        for (const auto& row : report.tuner_rows) {
          if (row.tuner == t) values.push_back(row.mape);
        }
        std::cout << fmt::format("median_mape[{}]={:.4g}\n", tuner_name(t),
                                 median(values));
      }
    }
  }
  return report.exit_code;
}
