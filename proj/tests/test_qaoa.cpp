#include <doctest.h>

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>
#include <cmath>
#include <numbers>
#include <random>

#include "trussqaoa/error.hpp"
#include "trussqaoa/model_io.hpp"
#include "trussqaoa/qaoa.hpp"

using namespace trussqaoa;
using cd = std::complex<double>;
using Eigen::MatrixXcd;
using Eigen::VectorXcd;

namespace {

StateVector random_state(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  std::vector<cd> amps(std::size_t{1} << n);
  double norm = 0.0;
  for (auto& a : amps) {
    a = {g(rng), g(rng)};
    norm += std::norm(a);
  }
  for (auto& a : amps) a /= std::sqrt(norm);
  return StateVector(amps);
}

VectorXcd to_eigen(const StateVector& s) {
  VectorXcd v(s.size());
  for (std::size_t x = 0; x < s.size(); ++x) v(x) = s[x];
  return v;
}

// Dense 2^n x 2^n single-layer operators. Qubit k is bit k of the index,
// which is the rightmost factor of the Kronecker product for k = 0.
MatrixXcd dense_mixer(int n, double beta) {
  MatrixXcd x(2, 2);
  x << 0, 1, 1, 0;
  const MatrixXcd rx = (cd(0, -beta) * x).exp();
  MatrixXcd u = MatrixXcd::Identity(1, 1);
  for (int k = 0; k < n; ++k) u = Eigen::kroneckerProduct(rx, u).eval();
  return u;
}

MatrixXcd dense_phase(std::span<const double> energies, double gamma) {
  MatrixXcd d = MatrixXcd::Zero(energies.size(), energies.size());
  for (std::size_t x = 0; x < energies.size(); ++x) {
    d(x, x) = std::exp(cd(0, -gamma * energies[x]));
  }
  return d;
}

std::vector<double> random_energies(int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-2.0, 3.0);
  std::vector<double> e(std::size_t{1} << n);
  for (auto& v : e) v = u(rng);
  return e;
}

}  // namespace

TEST_CASE("FLRS ramp values") {
  const auto s6 = flrs_schedule(6);
  for (int i = 0; i < 6; ++i) {
    CHECK(s6.betas[i] == doctest::Approx((6.0 - i) / 6.0));
    CHECK(s6.gammas[i] == doctest::Approx((i + 1) / 6.0));
  }
  const auto s1 = flrs_schedule(1, 0.7, 1.3);
  CHECK(s1.betas[0] == doctest::Approx(0.7));
  CHECK(s1.gammas[0] == doctest::Approx(1.3));
  const auto s8 = flrs_schedule(8);
  CHECK(s8.betas[0] == 1.0);
  CHECK(s8.betas[7] == doctest::Approx(1.0 / 8));
  CHECK(s8.gammas[7] == doctest::Approx(1.0));
  CHECK_THROWS_AS(flrs_schedule(0), InvalidConfig);
}

TEST_CASE("plus state") {
  const auto s1 = init_plus_state(1);
  CHECK(s1[0].real() == doctest::Approx(1 / std::sqrt(2.0)));
  CHECK(s1[1].real() == doctest::Approx(1 / std::sqrt(2.0)));
  const auto s2 = init_plus_state(2);
  for (std::size_t x = 0; x < 4; ++x) CHECK(s2[x].real() == doctest::Approx(0.5));
  CHECK(std::abs(init_plus_state(14).norm_squared() - 1.0) < 1e-12);
  CHECK_THROWS_AS(init_plus_state(kMaxQubits + 1), SizeLimit);
}

TEST_CASE("phase separator") {
  std::mt19937_64 rng(2);
  const auto original = random_state(2, rng);

  auto s = original;
  const std::vector<double> e{0, 1, 1, 2};
  apply_phase_separator(s, e, 0.0);
  for (std::size_t x = 0; x < 4; ++x) CHECK(s[x] == original[x]);

  apply_phase_separator(s, e, std::numbers::pi);
  for (std::size_t x = 0; x < 4; ++x) {
    const cd expected = (e[x] == 1.0) ? -original[x] : original[x];
    CHECK(std::abs(s[x] - expected) < 1e-12);
  }

  auto c = original;
  apply_phase_separator(c, std::vector<double>(4, 0.7), 1.3);
  const auto p0 = original.probabilities();
  const auto p1 = c.probabilities();
  for (std::size_t x = 0; x < 4; ++x) CHECK(p1[x] == doctest::Approx(p0[x]));

  auto a = original, b = original;
  apply_phase_separator(a, e, 0.4);
  apply_phase_separator(a, e, 0.9);
  apply_phase_separator(b, e, 1.3);
  for (std::size_t x = 0; x < 4; ++x) CHECK(std::abs(a[x] - b[x]) < 1e-10);

  CHECK_THROWS_AS(apply_phase_separator(s, std::vector<double>(3), 1.0), Inconsistency);
}

TEST_CASE("mixer") {
  std::mt19937_64 rng(4);
  const auto original = random_state(2, rng);
  auto s = original;
  apply_mixer(s, 0.0);
  for (std::size_t x = 0; x < 4; ++x) CHECK(s[x] == original[x]);

  StateVector one({cd(1, 0), cd(0, 0)});
  apply_mixer(one, std::numbers::pi / 2);
  CHECK(std::abs(one[0]) < 1e-12);
  CHECK(std::abs(one[1] - cd(0, -1)) < 1e-12);

  // exp(-i beta (X1 + X2)) from the 4x4 matrix exponential.
  const double beta = 0.37;
  MatrixXcd x(2, 2);
  x << 0, 1, 1, 0;
  const MatrixXcd i2 = MatrixXcd::Identity(2, 2);
  const MatrixXcd h = Eigen::kroneckerProduct(x, i2) + Eigen::kroneckerProduct(i2, x);
  const MatrixXcd u = (cd(0, -beta) * h).exp();
  const VectorXcd expected = u * to_eigen(original);
  auto m = original;
  apply_mixer(m, beta);
  for (std::size_t k = 0; k < 4; ++k) CHECK(std::abs(m[k] - expected(k)) < 1e-10);
}

TEST_CASE("full circuit matches a dense unitary product") {
  std::mt19937_64 rng(8);
  for (int n = 1; n <= 4; ++n) {
    for (bool ground : {true, false}) {
      const auto energies = random_energies(n, rng);
      QaoaSchedule sched = flrs_schedule(3, 0.8, 1.2);
      sched.gammas[1] += 0.3;
      CircuitOptions opt;
      opt.scaling = PhaseScaling::kRaw;
      opt.ground_state_mixer = ground;
      const auto state = evolve(phase_table(energies, opt), sched, opt);

      VectorXcd v = to_eigen(init_plus_state(n));
      for (int l = 0; l < sched.p; ++l) {
        v = dense_phase(energies, sched.gammas[l]) * v;
        v = dense_mixer(n, (ground ? -1.0 : 1.0) * sched.betas[l]) * v;
      }
      for (std::size_t x = 0; x < state.size(); ++x) {
        CHECK(std::abs(state[x] - v(x)) <= 1e-9);
      }
    }
  }
}

TEST_CASE("norm is preserved over deep circuits") {
  std::mt19937_64 rng(12);
  const int n = 10;
  const auto energies = random_energies(n, rng);
  for (auto scaling : {PhaseScaling::kRaw, PhaseScaling::kSpectral}) {
    CircuitOptions opt;
    opt.scaling = scaling;
    const auto state = evolve(phase_table(energies, opt), flrs_schedule(8), opt);
    CHECK(std::abs(state.norm_squared() - 1.0) <= 1e-10);
  }
}

TEST_CASE("spectral phase table spans the configured range") {
  const std::vector<double> e{3.0, -1.0, 1.0, 0.0};
  CircuitOptions opt;
  const auto ph = phase_table(e, opt);
  CHECK(ph[1] == 0.0);
  CHECK(ph[0] == doctest::Approx(2 * std::numbers::pi));
  CHECK(ph[2] == doctest::Approx(std::numbers::pi));
  opt.scaling = PhaseScaling::kRaw;
  CHECK(phase_table(e, opt) == e);
}

TEST_CASE("p = 0 sampling is uniform within 4 sigma") {
  const int n = 3;
  const std::uint64_t shots = 80000;
  const std::vector<double> energies(8, 0.0);
  QaoaSchedule empty;
  const auto r = run_circuit(energies, n, empty, shots, 17);
  const double p = 1.0 / 8;
  const double sigma = std::sqrt(shots * p * (1 - p));
  std::uint64_t total = 0;
  for (BasisIndex x = 0; x < 8; ++x) {
    const auto it = r.histogram.counts.find(x);
    const double c = it == r.histogram.counts.end() ? 0.0 : double(it->second);
    total += static_cast<std::uint64_t>(c);
    CHECK(std::abs(c - shots * p) <= 4 * sigma);
  }
  CHECK(total == shots);
}

TEST_CASE("sampled mean is close to the exact expectation") {
  std::mt19937_64 rng(21);
  const int n = 8;
  const auto energies = random_energies(n, rng);
  const std::uint64_t shots = 100000;
  const auto r = run_circuit(energies, n, flrs_schedule(4), shots, 5);
  const auto [lo, hi] = std::minmax_element(energies.begin(), energies.end());
  CHECK(std::abs(r.expectation - r.exact_expectation) <=
        5 * (*hi - *lo) / std::sqrt(double(shots)));
}

TEST_CASE("sampling is deterministic under a seed") {
  std::mt19937_64 rng(22);
  const auto energies = random_energies(6, rng);
  const auto a = run_circuit(energies, 6, flrs_schedule(3), 5000, 99);
  const auto b = run_circuit(energies, 6, flrs_schedule(3), 5000, 99);
  CHECK(a.histogram.counts == b.histogram.counts);
  CHECK(a.most_frequent == b.most_frequent);
}

TEST_CASE("expectation shifts with a constant offset") {
  std::mt19937_64 rng(23);
  auto energies = random_energies(5, rng);
  CircuitOptions opt;
  opt.scaling = PhaseScaling::kRaw;
  const auto sched = flrs_schedule(3);
  const auto s0 = evolve(phase_table(energies, opt), sched, opt);
  const double e0 = exact_expectation(s0, energies);
  auto shifted = energies;
  for (double& e : shifted) e += 2.5;
  const auto s1 = evolve(phase_table(shifted, opt), sched, opt);
  CHECK(exact_expectation(s1, shifted) == doctest::Approx(e0 + 2.5).epsilon(1e-10));
}

TEST_CASE("ground-state mixer lowers the energy of a ramped circuit") {
  const auto model = load_model_file(TRUSSQAOA_MODEL_DIR "/case1.json");
  const auto fem = assemble_and_solve(model, model.uniform_areas());
  VariableRegistry reg(std::vector<bool>(model.rods.size(), true), 2, 2);
  const auto qubo = build_qubo(model, fem, model.uniform_areas(),
                               model.volume_budget, EncodingConfig{}, reg);
  const auto energies = energy_table(qubo);
  double mean = 0.0;
  for (double e : energies) mean += e;
  mean /= energies.size();

  CircuitOptions down;
  CircuitOptions up;
  up.ground_state_mixer = false;
  const auto sd = evolve(phase_table(energies, down), flrs_schedule(6), down);
  const auto su = evolve(phase_table(energies, up), flrs_schedule(6), up);
  CHECK(exact_expectation(sd, energies) < mean);
  CHECK(exact_expectation(su, energies) > mean);
}

TEST_CASE("most frequent tie-break is lexicographic") {
  MeasurementHistogram h;
  h.qubits = 2;
  h.counts = {{from_bitstring("10"), 5}, {from_bitstring("01"), 5}, {0, 1}};
  CHECK(to_bitstring(h.most_frequent(), 2) == "01");
}

TEST_CASE("case 1 iteration zero circuit beats the median bitstring") {
  const auto model = load_model_file(TRUSSQAOA_MODEL_DIR "/case1.json");
  const auto fem = assemble_and_solve(model, model.uniform_areas());
  VariableRegistry reg(std::vector<bool>(model.rods.size(), true), 2, 2);
  EncodingConfig cfg;
  const auto qubo = build_qubo(model, fem, model.uniform_areas(),
                               model.volume_budget, cfg, reg);
  const auto table = energy_table(qubo);
  const auto r = run_circuit(table, qubo.n, flrs_schedule(6), 100000, 0);
  auto sorted = table;
  std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
  CHECK(table[r.most_frequent] <= sorted[sorted.size() / 2]);
  CHECK(table[r.most_frequent] >= brute_force_minimum(table).min_energy);
}

TEST_CASE("fine tuning") {
  std::mt19937_64 rng(41);
  const auto energies = random_energies(4, rng);
  const auto flrs = fine_tune(energies, 4, 5, Tuner::kFlrs, 100, 3);
  CHECK(flrs.schedule == flrs_schedule(5));
  CHECK(flrs.evaluations == 0);

  const auto a = fine_tune(energies, 4, 3, Tuner::kLocalSearch, 0, 7);
  const auto b = fine_tune(energies, 4, 3, Tuner::kLocalSearch, 0, 7);
  CHECK(a.schedule == b.schedule);
  CHECK(a.evaluations == 0);

  // One qubit with E(q) = q: the optimum expectation is 0.
  CircuitOptions raw;
  raw.scaling = PhaseScaling::kRaw;
  const std::vector<double> single{0.0, 1.0};
  const auto t = fine_tune(single, 1, 1, Tuner::kLocalSearch, 200, 1, raw);
  CHECK(t.evaluations <= 200);
  CHECK(t.expectation <= 0.05);

  CHECK_THROWS_AS(parse_tuner("cobyla"), InvalidConfig);
  CHECK(parse_tuner("local-search") == Tuner::kLocalSearch);
}

TEST_CASE("mape") {
  CHECK(mape(0.13, 0.13) == 0.0);
  CHECK(mape(0.143, 0.13) == doctest::Approx(10.0));
  CHECK(mape(0.5, 0.13) == 100.0);
  CHECK_THROWS_AS(mape(1.0, 0.0), UndefinedMetric);
}

TEST_CASE("schedule text round trip and diagnostics") {
  const auto s = flrs_schedule(4, 0.9, 1.1);
  const auto back = parse_schedule_text(schedule_to_text(s));
  REQUIRE(back.p == 4);
  for (int i = 0; i < 4; ++i) {
    CHECK(back.gammas[i] == s.gammas[i]);
    CHECK(back.betas[i] == s.betas[i]);
  }
  const auto c = parse_schedule_text("# comment\n0 0.5 0.25\n1 1.0 0.1 # tail\n");
  CHECK(c.p == 2);
  try {
    parse_schedule_text("0 0.5 0.25\n1 oops 0.1\n");
    FAIL("expected InputError");
  } catch (const InputError& e) {
    CHECK(e.line() == 2);
  }
}
