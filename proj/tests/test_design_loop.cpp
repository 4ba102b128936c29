#include <doctest.h>

#include <cmath>

#include "trussqaoa/design_loop.hpp"
#include "trussqaoa/error.hpp"
#include "trussqaoa/model_io.hpp"

using namespace trussqaoa;

namespace {

TrussModel case1() { return load_model_file(TRUSSQAOA_MODEL_DIR "/case1.json"); }
TrussModel case2() { return load_model_file(TRUSSQAOA_MODEL_DIR "/case2.json"); }

// The readout needs the default 1e5 shots: the Case 1 output distribution
// peaks near 1e-3, so fewer shots let sampling noise pick the bitstring.
LoopConfig quick_config() { return LoopConfig{}; }

}  // namespace

TEST_CASE("early stop threshold is strict") {
  const auto model = case1();
  LoopConfig cfg;
  auto state = initial_design_state(model);
  const double a0 = model.initial_area;
  state.areas[0] = 0.009 * a0;
  state.areas[1] = 0.011 * a0;
  state.areas[2] = a0 * 0.1 * 0.1;  // two consecutive 0.1 updates
  const auto next = early_stop_freeze(state, cfg, a0);
  CHECK_FALSE(next.active[0]);
  CHECK(next.active[1]);
  CHECK(next.active[2]);
  CHECK(next.areas[0] == state.areas[0]);  // residual area persists

  // Frozen rods never rejoin.
  auto again = next;
  again.areas[0] = a0;
  CHECK_FALSE(early_stop_freeze(again, cfg, a0).active[0]);
}

TEST_CASE("convergence window") {
  LoopConfig cfg;
  DesignState state;
  state.iteration = 3;
  state.updater_history.assign(3, std::vector<double>(4, 1.0));
  CHECK(check_convergence(state, cfg) == ConvergenceStatus::kConverged);

  state.updater_history = {{1.1, 1.0}, {0.1, 1.0}, {1.1, 1.0}, {0.1, 1.0}};
  state.iteration = 4;
  CHECK(check_convergence(state, cfg) == ConvergenceStatus::kRunning);

  state.iteration = cfg.max_iterations;
  CHECK(check_convergence(state, cfg) == ConvergenceStatus::kBudgetExhausted);

  state.updater_history = {{1.0}, {1.0}};
  state.iteration = 2;
  CHECK(check_convergence(state, cfg) == ConvergenceStatus::kRunning);
}

TEST_CASE("scaling an area scales the element stiffness exactly") {
  const auto model = case1();
  const auto base = element_stiffness(model.rods[4], 0.5, model.young_modulus);
  const auto scaled = element_stiffness(model.rods[4], 0.5 * 0.1, model.young_modulus);
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      CHECK(scaled[i][j] == doctest::Approx(0.1 * base[i][j]).epsilon(1e-14));
    }
  }
}

TEST_CASE("case 1 iteration zero shrinks the idle left vertical") {
  const auto model = case1();
  const auto out = run_iteration(initial_design_state(model), model, quick_config());
  CHECK(out.record.iteration == 0);
  CHECK(out.record.qubits_used == 14);
  CHECK(out.record.alpha[0] <= 0.1);
  CHECK(out.state.iteration == 1);
  CHECK(out.record.volume_ratio > 0.0);
}

TEST_CASE("full case 1 run keeps its bookkeeping consistent") {
  const auto model = case1();
  const auto cfg = quick_config();
  std::vector<IterationRecord> seen;
  const auto run = run_design(model, cfg, [&](const IterationOutcome& o) {
    seen.push_back(o.record);
  });
  REQUIRE_FALSE(seen.empty());
  CHECK(run.status == ConvergenceStatus::kConverged);
  CHECK(run.state.records.size() == seen.size());

  // Areas are A0 times the product of the recorded updaters.
  for (std::size_t e = 0; e < model.rods.size(); ++e) {
    double expected = model.initial_area;
    for (const auto& alpha : run.state.updater_history) expected *= alpha[e];
    CHECK(std::abs(run.state.areas[e] - expected) <= 1e-12 * expected);
  }

  // Replay the areas to count the rods still active before each iteration.
  std::vector<double> areas = model.uniform_areas();
  for (std::size_t i = 0; i < seen.size(); ++i) {
    int active = 0;
    for (double a : areas) active += a >= cfg.freeze_threshold * model.initial_area;
    CHECK(seen[i].iteration == static_cast<int>(i));
    CHECK(seen[i].qubits_used == 2 * active + 2);
    if (i > 0) CHECK(seen[i].qubits_used <= seen[i - 1].qubits_used);
    for (std::size_t e = 0; e < areas.size(); ++e) areas[e] *= seen[i].alpha[e];
  }

  // The last window of updaters is the identity.
  const auto& hist = run.state.updater_history;
  for (std::size_t k = hist.size() - 3; k < hist.size(); ++k) {
    for (double a : hist[k]) CHECK(a == 1.0);
  }
}

TEST_CASE("identical seeds reproduce the run") {
  const auto model = case1();
  auto cfg = quick_config();
  cfg.max_iterations = 6;
  const auto a = run_design(model, cfg);
  const auto b = run_design(model, cfg);
  REQUIRE(a.state.records.size() == b.state.records.size());
  for (std::size_t i = 0; i < a.state.records.size(); ++i) {
    CHECK(a.state.records[i].bitstring == b.state.records[i].bitstring);
    CHECK(a.state.records[i].alpha == b.state.records[i].alpha);
  }
  CHECK(a.status == ConvergenceStatus::kBudgetExhausted);
}

TEST_CASE("a heavy volume penalty bounds every decoded design") {
  const auto model = case1();
  auto cfg = quick_config();
  cfg.encoding.lambda = 500.0;
  // The penalty ignores stiffness, so load-path rods may be dropped; only the
  // decoded volumes matter here.
  cfg.failure_ratio = 1e300;
  double max_share = 0.0;
  for (const auto& rod : model.rods) {
    max_share = std::max(max_share, model.initial_area * rod.length / model.volume_budget);
  }
  auto state = initial_design_state(model);
  int checked = 0;
  try {
    for (int i = 0; i < 8 && state.active_count() > 0; ++i) {
      auto out = run_iteration(state, model, cfg);
      CHECK(out.record.volume_ratio <= 1.0 + cfg.encoding.theta * max_share);
      state = std::move(out.state);
      ++checked;
    }
  } catch (const StructuralFailure&) {
  }
  CHECK(checked >= 1);
}

TEST_CASE("structural failure carries the iteration") {
  const auto model = case1();
  auto state = initial_design_state(model);
  for (double& a : state.areas) a *= 1e-7;
  state.iteration = 4;
  try {
    run_iteration(state, model, quick_config());
    FAIL("expected StructuralFailure");
  } catch (const StructuralFailure& e) {
    CHECK(e.iteration() == 4);
  }

  auto none = initial_design_state(model);
  none.active.assign(model.rods.size(), false);
  CHECK_THROWS_AS(run_iteration(none, model, quick_config()), InvalidConfig);
}

TEST_CASE("loop config validation") {
  LoopConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.freeze_threshold = 1.0;
  CHECK_THROWS_AS(cfg.validate(), InvalidConfig);
  cfg = {};
  cfg.p = 0;
  CHECK_THROWS_AS(cfg.validate(), InvalidConfig);
  cfg = {};
  cfg.shots = 0;
  CHECK_THROWS_AS(cfg.validate(), InvalidConfig);
}

TEST_CASE("optimality criteria reference") {
  const auto m1 = case1();
  const auto r1 = oc_reference(m1);
  CHECK(std::abs(total_volume(m1, r1.areas) - m1.volume_budget) <= 1e-6 * m1.volume_budget);
  CHECK(r1.compliance == doctest::Approx(0.13).epsilon(0.02));
  CHECK(retained_rods(r1.areas, m1.initial_area) == std::vector<int>{2, 5});

  const auto m2 = case2();
  const auto r2 = oc_reference(m2);
  CHECK(std::abs(total_volume(m2, r2.areas) - m2.volume_budget) <= 1e-6 * m2.volume_budget);
  CHECK(r2.compliance == doctest::Approx(3.16e-2).epsilon(0.005));

  std::vector<Node2D> nodes{{0, 0, 0, true, true}, {1, 2, 0, false, true, 1e4, 0}};
  const auto single = make_truss_model(nodes, {{0, 0, 1}}, 2e11, 0.5);
  const auto rs = oc_reference(single);
  CHECK(rs.areas[0] == doctest::Approx(single.volume_budget / 2.0));

  OcConfig bad;
  bad.damping = 0.0;
  CHECK_THROWS_AS(oc_reference(m1, bad), InvalidConfig);
}
