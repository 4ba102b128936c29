#pragma once

// Dense statevector simulation of p-layer QAOA for a diagonal cost.

#include <complex>
#include <cstdint>
#include <filesystem>
#include <map>
#include <numbers>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "trussqaoa/encoding.hpp"

namespace trussqaoa {

struct QaoaSchedule {
  int p = 0;
  std::vector<double> gammas;
  std::vector<double> betas;
  double delta_gamma = 1.0;
  double delta_beta = 1.0;

  /// Throws InvalidConfig when lengths disagree with p or angles are not
  /// finite.
  void validate() const;
  friend bool operator==(const QaoaSchedule&, const QaoaSchedule&) = default;
};

/// Linear ramp over layers i = 0..p-1:
///   beta_i = (1 - i/p) * delta_beta,  gamma_i = (i+1)/p * delta_gamma.
QaoaSchedule flrs_schedule(int p, double delta_beta = 1.0,
                           double delta_gamma = 1.0);

class StateVector {
 public:
  using Amplitude = std::complex<double>;

  StateVector() = default;
  explicit StateVector(std::vector<Amplitude> amplitudes);

  int qubits() const { return qubits_; }
  std::size_t size() const { return amplitudes_.size(); }
  std::span<Amplitude> amplitudes() { return amplitudes_; }
  std::span<const Amplitude> amplitudes() const { return amplitudes_; }
  Amplitude operator[](std::size_t x) const { return amplitudes_[x]; }
  double norm_squared() const;
  std::vector<double> probabilities() const;

 private:
  int qubits_ = 0;
  std::vector<Amplitude> amplitudes_;
};

/// |+>^n. Throws SizeLimit outside 1..kMaxQubits.
StateVector init_plus_state(int n);

/// amplitude[x] *= exp(-i * gamma * energies[x]).
void apply_phase_separator(StateVector& state, std::span<const double> energies,
                           double gamma);

/// exp(-i * beta * X) on every qubit.
void apply_mixer(StateVector& state, double beta);

/// How energies are mapped to phases inside `run_circuit`.
enum class PhaseScaling {
  kRaw,       // phase = gamma * E(x)
  kSpectral,  // phase = gamma * span * (E(x) - Emin) / (Emax - Emin)
};

struct CircuitOptions {
  PhaseScaling scaling = PhaseScaling::kSpectral;
  double phase_span = 2.0 * std::numbers::pi;
  /// Mixer Hamiltonian -sum X (|+> is its ground state), so the layer is
  /// exp(+i beta X). `false` applies exp(-i beta X).
  bool ground_state_mixer = true;
};

std::vector<double> phase_table(std::span<const double> energies,
                                const CircuitOptions& options);

/// Applies the layers of `schedule` to |+>^n using a prepared phase table.
StateVector evolve(std::span<const double> phases, const QaoaSchedule& schedule,
                   const CircuitOptions& options);

double exact_expectation(const StateVector& state,
                         std::span<const double> energies);

struct MeasurementHistogram {
  int qubits = 0;
  std::uint64_t shots = 0;
  std::map<BasisIndex, std::uint64_t> counts;

  /// Maximal count; ties go to the lexicographically smallest bitstring.
  BasisIndex most_frequent() const;
  std::map<std::string, std::uint64_t> by_bitstring() const;
};

MeasurementHistogram sample(const StateVector& state, std::uint64_t shots,
                            std::mt19937_64& rng);

struct QaoaResult {
  BasisIndex most_frequent = 0;
  std::string most_frequent_bits;
  double expectation = 0.0;        // sampled mean energy
  double exact_expectation = 0.0;  // from the full statevector
  MeasurementHistogram histogram;
};

QaoaResult run_circuit(std::span<const double> energies, int qubits,
                       const QaoaSchedule& schedule, std::uint64_t shots,
                       std::uint64_t seed, const CircuitOptions& options = {});

QaoaResult run_circuit(const QuboProblem& qubo, const QaoaSchedule& schedule,
                       std::uint64_t shots, std::uint64_t seed,
                       const CircuitOptions& options = {});

enum class Tuner { kFlrs, kLocalSearch };

/// "flrs" or "local-search". Throws InvalidConfig.
Tuner parse_tuner(std::string_view name);
std::string_view tuner_name(Tuner tuner);

struct TuneResult {
  QaoaSchedule schedule;
  double expectation = 0.0;  // exact expectation of `schedule`; NaN if never evaluated
  int evaluations = 0;
};

/// Picks layer angles for a cost table. kFlrs returns the ramp untouched.
/// kLocalSearch runs seeded random restarts with coordinate descent on the
/// exact expectation, using at most `budget` circuit evaluations; with
/// budget 0 it returns its seeded starting schedule.
TuneResult fine_tune(std::span<const double> energies, int qubits, int p,
                     Tuner tuner, int budget, std::uint64_t seed,
                     const CircuitOptions& options = {},
                     double delta_beta = 1.0, double delta_gamma = 1.0);

QaoaSchedule fine_tune(const QuboProblem& qubo, int p, Tuner tuner, int budget,
                       std::uint64_t seed, const CircuitOptions& options = {});

/// |observed - reference| / |reference| * 100, clamped at 100.
/// Throws UndefinedMetric for a zero reference.
double mape(double observed, double reference);

/// Schedule text: one "layer gamma beta" line per layer; '#' starts a comment.
QaoaSchedule parse_schedule_text(std::string_view text);
QaoaSchedule load_schedule_file(const std::filesystem::path& path);
std::string schedule_to_text(const QaoaSchedule& schedule);

}  // namespace trussqaoa
