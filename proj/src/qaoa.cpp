#include "trussqaoa/qaoa.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fmt/format.h>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "trussqaoa/error.hpp"

namespace trussqaoa {

void QaoaSchedule::validate() const {
  if (p < 0) throw InvalidConfig("layer count must be >= 0");
  if (gammas.size() != static_cast<std::size_t>(p) ||
      betas.size() != static_cast<std::size_t>(p)) {
    throw InvalidConfig(fmt::format(
        "schedule with p = {} has {} gammas and {} betas", p, gammas.size(),
        betas.size()));
  }
  for (int i = 0; i < p; ++i) {
    if (!std::isfinite(gammas[i]) || !std::isfinite(betas[i])) {
      throw InvalidConfig(fmt::format("layer {} has a non-finite angle", i));
    }
  }
}

QaoaSchedule flrs_schedule(int p, double delta_beta, double delta_gamma) {
  if (p < 1) throw InvalidConfig("FLRS needs p >= 1");
  QaoaSchedule s;
  s.p = p;
  s.delta_beta = delta_beta;
  s.delta_gamma = delta_gamma;
  s.gammas.resize(p);
  s.betas.resize(p);
  const double layers = static_cast<double>(p);
  for (int i = 0; i < p; ++i) {
    s.betas[i] = (1.0 - i / layers) * delta_beta;
    s.gammas[i] = ((i + 1) / layers) * delta_gamma;
  }
  return s;
}

StateVector::StateVector(std::vector<Amplitude> amplitudes)
    : amplitudes_(std::move(amplitudes)) {
  const auto size = amplitudes_.size();
  if (size == 0 || (size & (size - 1)) != 0) {
    throw Inconsistency("statevector length must be a power of two");
  }
  qubits_ = std::countr_zero(size);
}

double StateVector::norm_squared() const {
  double total = 0.0;
  for (const auto& a : amplitudes_) total += std::norm(a);
  return total;
}

std::vector<double> StateVector::probabilities() const {
  std::vector<double> p(amplitudes_.size());
  std::transform(amplitudes_.begin(), amplitudes_.end(), p.begin(),
                 [](const Amplitude& a) { return std::norm(a); });
  return p;
}

StateVector init_plus_state(int n) {
  if (n < 1 || n > kMaxQubits) {
    throw SizeLimit(fmt::format("{} qubits is outside the supported 1..{}", n,
                                kMaxQubits));
  }
  const std::size_t size = std::size_t{1} << n;
  const double amp = std::pow(2.0, -0.5 * n);
  return StateVector(std::vector<StateVector::Amplitude>(size, {amp, 0.0}));
}

void apply_phase_separator(StateVector& state, std::span<const double> energies,
                           double gamma) {
  auto amps = state.amplitudes();
  if (energies.size() != amps.size()) {
    throw Inconsistency(fmt::format("energy table has {} entries, state has {}",
                                    energies.size(), amps.size()));
  }
  if (gamma == 0.0) return;
  for (std::size_t x = 0; x < amps.size(); ++x) {
    const double phase = -gamma * energies[x];
    amps[x] *= StateVector::Amplitude(std::cos(phase), std::sin(phase));
  }
}

void apply_mixer(StateVector& state, double beta) {
  if (beta == 0.0) return;
  auto amps = state.amplitudes();
  const double c = std::cos(beta);
  const StateVector::Amplitude is(0.0, -std::sin(beta));
  const std::size_t size = amps.size();
  for (int q = 0; q < state.qubits(); ++q) {
    const std::size_t stride = std::size_t{1} << q;
    for (std::size_t base = 0; base < size; base += 2 * stride) {
      for (std::size_t x = base; x < base + stride; ++x) {
        const auto a0 = amps[x];
        const auto a1 = amps[x + stride];
        amps[x] = c * a0 + is * a1;
        amps[x + stride] = is * a0 + c * a1;
      }
    }
  }
}

std::vector<double> phase_table(std::span<const double> energies,
                                const CircuitOptions& options) {
  std::vector<double> out(energies.begin(), energies.end());
  if (options.scaling == PhaseScaling::kRaw || out.empty()) return out;
  const auto [lo, hi] = std::minmax_element(out.begin(), out.end());
  const double min = *lo;
  const double range = *hi - *lo;
  const double factor = range > 0.0 ? options.phase_span / range : 0.0;
  for (auto& e : out) e = (e - min) * factor;
  return out;
}

StateVector evolve(std::span<const double> phases, const QaoaSchedule& schedule,
                   const CircuitOptions& options) {
  schedule.validate();
  const auto size = phases.size();
  if (size == 0 || (size & (size - 1)) != 0) {
    throw Inconsistency("energy table length must be a power of two");
  }
  auto state = init_plus_state(std::countr_zero(size));
  const double mixer_sign = options.ground_state_mixer ? -1.0 : 1.0;
  for (int layer = 0; layer < schedule.p; ++layer) {
    apply_phase_separator(state, phases, schedule.gammas[layer]);
    apply_mixer(state, mixer_sign * schedule.betas[layer]);
  }
  return state;
}

double exact_expectation(const StateVector& state,
                         std::span<const double> energies) {
  if (energies.size() != state.size()) {
    throw Inconsistency("energy table does not match the state size");
  }
  double total = 0.0;
  for (std::size_t x = 0; x < state.size(); ++x) {
    total += std::norm(state[x]) * energies[x];
  }
  return total;
}

BasisIndex MeasurementHistogram::most_frequent() const {
  BasisIndex best = 0;
  std::uint64_t best_count = 0;
  for (const auto& [x, count] : counts) {
    if (count > best_count || (count == best_count && lex_less(x, best))) {
      best = x;
      best_count = count;
    }
  }
  return best;
}

std::map<std::string, std::uint64_t> MeasurementHistogram::by_bitstring() const {
  std::map<std::string, std::uint64_t> out;
  for (const auto& [x, count] : counts) out[to_bitstring(x, qubits)] = count;
  return out;
}

MeasurementHistogram sample(const StateVector& state, std::uint64_t shots,
                            std::mt19937_64& rng) {
  MeasurementHistogram hist;
  hist.qubits = state.qubits();
  hist.shots = shots;
  if (shots == 0) return hist;
  std::vector<double> cdf(state.size());
  double running = 0.0;
  for (std::size_t x = 0; x < state.size(); ++x) {
    running += std::norm(state[x]);
    cdf[x] = running;
  }
  std::uniform_real_distribution<double> uniform(0.0, running);
  for (std::uint64_t s = 0; s < shots; ++s) {
    const double u = uniform(rng);
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    if (it == cdf.end()) --it;
    ++hist.counts[static_cast<BasisIndex>(it - cdf.begin())];
  }
  return hist;
}

QaoaResult run_circuit(std::span<const double> energies, int qubits,
                       const QaoaSchedule& schedule, std::uint64_t shots,
                       std::uint64_t seed, const CircuitOptions& options) {
  if (qubits < 1 || qubits > kMaxQubits) {
    throw SizeLimit(fmt::format("{} qubits is outside the supported 1..{}",
                                qubits, kMaxQubits));
  }
  if (energies.size() != (std::size_t{1} << qubits)) {
    throw Inconsistency("energy table does not match the qubit count");
  }
  const auto phases = phase_table(energies, options);
  const auto state = evolve(phases, schedule, options);

  std::mt19937_64 rng(seed);
  QaoaResult result;
  result.exact_expectation = exact_expectation(state, energies);
  result.histogram = sample(state, shots, rng);
  result.most_frequent = result.histogram.most_frequent();
  result.most_frequent_bits = to_bitstring(result.most_frequent, qubits);
  double total = 0.0;
  for (const auto& [x, count] : result.histogram.counts) {
    total += static_cast<double>(count) * energies[x];
  }
  result.expectation =
      shots > 0 ? total / static_cast<double>(shots) : result.exact_expectation;
  return result;
}

QaoaResult run_circuit(const QuboProblem& qubo, const QaoaSchedule& schedule,
                       std::uint64_t shots, std::uint64_t seed,
                       const CircuitOptions& options) {
  const auto table = energy_table(qubo);
  return run_circuit(table, qubo.n, schedule, shots, seed, options);
}

Tuner parse_tuner(std::string_view name) {
  if (name == "flrs") return Tuner::kFlrs;
  if (name == "local-search") return Tuner::kLocalSearch;
  throw InvalidConfig(fmt::format(
      "unknown tuner '{}' (expected 'flrs' or 'local-search')", name));
}

std::string_view tuner_name(Tuner tuner) {
  return tuner == Tuner::kFlrs ? "flrs" : "local-search";
}

namespace {

class ExpectationOracle {
 public:
  ExpectationOracle(std::span<const double> energies,
                    const CircuitOptions& options)
      : energies_(energies), phases_(phase_table(energies, options)),
        options_(options) {}

  double operator()(const QaoaSchedule& s) {
    ++evaluations_;
    return exact_expectation(evolve(phases_, s, options_), energies_);
  }
  int evaluations() const { return evaluations_; }

 private:
  std::span<const double> energies_;
  std::vector<double> phases_;
  CircuitOptions options_;
  int evaluations_ = 0;
};

QaoaSchedule random_schedule(int p, double delta_beta, double delta_gamma,
                             std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  QaoaSchedule s;
  s.p = p;
  s.delta_beta = delta_beta;
  s.delta_gamma = delta_gamma;
  s.gammas.resize(p);
  s.betas.resize(p);
  for (int i = 0; i < p; ++i) {
    s.gammas[i] = unit(rng) * delta_gamma;
    s.betas[i] = unit(rng) * delta_beta;
  }
  return s;
}

}  // namespace

TuneResult fine_tune(std::span<const double> energies, int qubits, int p,
                     Tuner tuner, int budget, std::uint64_t seed,
                     const CircuitOptions& options, double delta_beta,
                     double delta_gamma) {
  if (p < 1) throw InvalidConfig("tuning needs p >= 1");
  if (budget < 0) throw InvalidConfig("tuning budget must be >= 0");
  if (energies.size() != (std::size_t{1} << qubits)) {
    throw Inconsistency("energy table does not match the qubit count");
  }
  const double nan = std::numeric_limits<double>::quiet_NaN();
  if (tuner == Tuner::kFlrs) {
    return {flrs_schedule(p, delta_beta, delta_gamma), nan, 0};
  }

  std::mt19937_64 rng(seed);
  TuneResult best{random_schedule(p, delta_beta, delta_gamma, rng), nan, 0};
  if (budget == 0) return best;

  ExpectationOracle oracle(energies, options);
  const int restarts = std::max(1, std::min(4, budget / (8 * p)));
  const int per_restart = budget / restarts;
  const double initial_step = 0.25 * std::max(delta_beta, delta_gamma);

  for (int r = 0; r < restarts; ++r) {
    QaoaSchedule current =
        r == 0 ? best.schedule : random_schedule(p, delta_beta, delta_gamma, rng);
    const int stop = r + 1 == restarts ? budget : oracle.evaluations() + per_restart;
    double value = oracle(current);
    if (std::isnan(best.expectation) || value < best.expectation) {
      best.schedule = current;
      best.expectation = value;
    }
    double step = initial_step;
    while (oracle.evaluations() < stop && step > 1e-4) {
      bool improved = false;
      for (int coord = 0; coord < 2 * p && oracle.evaluations() < stop; ++coord) {
        auto& angle = coord < p ? current.gammas[coord] : current.betas[coord - p];
        for (double dir : {1.0, -1.0}) {
          if (oracle.evaluations() >= stop) break;
          const double saved = angle;
          angle = saved + dir * step;
          const double trial = oracle(current);
          if (trial < value) {
            value = trial;
            improved = true;
            break;
          }
          angle = saved;
        }
      }
      if (value < best.expectation) {
        best.schedule = current;
        best.expectation = value;
      }
      if (!improved) step *= 0.5;
    }
  }
  best.evaluations = oracle.evaluations();
  return best;
}

QaoaSchedule fine_tune(const QuboProblem& qubo, int p, Tuner tuner, int budget,
                       std::uint64_t seed, const CircuitOptions& options) {
  const auto table = energy_table(qubo);
  return fine_tune(table, qubo.n, p, tuner, budget, seed, options).schedule;
}

double mape(double observed, double reference) {
  if (reference == 0.0) {
    throw UndefinedMetric("MAPE is undefined for a zero reference");
  }
  const double pct = std::abs(observed - reference) / std::abs(reference) * 100.0;
  return std::min(pct, 100.0);
}

QaoaSchedule parse_schedule_text(std::string_view text) {
  QaoaSchedule s;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) {
      line.erase(hash);
    }
    std::istringstream fields(line);
    int layer = 0;
    double gamma = 0.0;
    double beta = 0.0;
    if (!(fields >> layer)) continue;  // blank line
    if (!(fields >> gamma >> beta)) {
      throw InputError("schedule line needs 'layer gamma beta'", line_no);
    }
    std::string extra;
    if (fields >> extra) {
      throw InputError("unexpected trailing field in schedule", line_no);
    }
    if (layer != s.p) {
      throw InputError(fmt::format("expected layer {}, found {}", s.p, layer),
                       line_no);
    }
    s.gammas.push_back(gamma);
    s.betas.push_back(beta);
    ++s.p;
  }
  if (s.p == 0) throw InputError("schedule file has no layers");
  try {
    s.validate();
  } catch (const InvalidConfig& e) {
    throw InputError(e.what());
  }
  return s;
}

QaoaSchedule load_schedule_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw InputError(fmt::format("cannot open schedule file '{}'", path.string()));
  }
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_schedule_text(buf.str());
}

std::string schedule_to_text(const QaoaSchedule& schedule) {
  std::string out = "# layer gamma beta\n";
  for (int i = 0; i < schedule.p; ++i) {
    out += fmt::format("{} {:.17g} {:.17g}\n", i, schedule.gammas[i],
                       schedule.betas[i]);
  }
  return out;
}

}  // namespace trussqaoa
