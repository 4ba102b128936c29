#include "trussqaoa/encoding.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <fstream>
#include <numeric>

#include "trussqaoa/error.hpp"

namespace trussqaoa {

std::string to_bitstring(BasisIndex x, int n) {
  std::string s(static_cast<std::size_t>(n), '0');
  for (int k = 0; k < n; ++k) {
    if ((x >> k) & 1U) s[k] = '1';
  }
  return s;
}

BasisIndex from_bitstring(const std::string& bits) {
  if (bits.size() > 64) throw InvalidConfig("bitstring longer than 64 bits");
  BasisIndex x = 0;
  for (std::size_t k = 0; k < bits.size(); ++k) {
    if (bits[k] == '1') {
      x |= BasisIndex{1} << k;
    } else if (bits[k] != '0') {
      throw InvalidConfig(fmt::format("invalid bitstring '{}'", bits));
    }
  }
  return x;
}

bool lex_less(BasisIndex a, BasisIndex b) {
  const BasisIndex diff = a ^ b;
  if (diff == 0) return false;
  const BasisIndex lowest = diff & (~diff + 1);
  return (a & lowest) == 0;
}

void EncodingConfig::validate() const {
  if (candidates.empty()) throw InvalidConfig("candidate vector is empty");
  for (double r : candidates) {
    if (!(r > 0.0)) throw InvalidConfig("candidate multipliers must be > 0");
  }
  const double sum = std::accumulate(candidates.begin(), candidates.end(), 0.0);
  if (sum > theta * (1.0 + 1e-12)) {
    throw InvalidConfig(fmt::format(
        "candidate sum {} exceeds the updater bound theta = {}", sum, theta));
  }
  if (slack_coefficients.empty()) {
    throw InvalidConfig("slack coefficient vector is empty");
  }
  for (double k : slack_coefficients) {
    if (!(k > 0.0)) throw InvalidConfig("slack coefficients must be > 0");
  }
  if (!(lambda >= 0.0)) throw InvalidConfig("lambda must be >= 0");
  if (!(epsilon_min > 0.0) || !(epsilon_max >= epsilon_min)) {
    throw InvalidConfig("epsilon range must satisfy 0 < min <= max");
  }
}

VariableRegistry::VariableRegistry(const std::vector<bool>& active_mask,
                                   int digits, int slack_digits)
    : rod_slot_(active_mask.size(), -1),
      digits_(digits),
      slack_digits_(slack_digits) {
  if (digits < 1 || slack_digits < 0) {
    throw InvalidConfig("registry needs >= 1 digit per rod");
  }
  for (std::size_t e = 0; e < active_mask.size(); ++e) {
    if (active_mask[e]) {
      rod_slot_[e] = static_cast<int>(active_rods_.size());
      active_rods_.push_back(static_cast<int>(e));
    }
  }
  qubit_count_ =
      static_cast<int>(active_rods_.size()) * digits_ + slack_digits_;
}

int VariableRegistry::rod_qubit(int rod, int digit) const {
  if (rod < 0 || rod >= static_cast<int>(rod_slot_.size()) ||
      rod_slot_[rod] < 0) {
    throw Inconsistency(fmt::format("rod {} has no qubits (frozen)", rod));
  }
  return rod_slot_[rod] * digits_ + digit;
}

int VariableRegistry::slack_qubit(int digit) const {
  return static_cast<int>(active_rods_.size()) * digits_ + digit;
}

QuboProblem::QuboProblem(int qubits)
    : n(qubits),
      linear(static_cast<std::size_t>(qubits), 0.0),
      quadratic(static_cast<std::size_t>(qubits) * qubits, 0.0) {}

double QuboProblem::quad(int i, int j) const {
  if (i == j) return 0.0;
  if (i > j) std::swap(i, j);
  return quadratic[static_cast<std::size_t>(i) * n + j];
}

void QuboProblem::add_quad(int i, int j, double value) {
  if (i == j) {
    linear[i] += value;  // q^2 = q
    return;
  }
  if (i > j) std::swap(i, j);
  quadratic[static_cast<std::size_t>(i) * n + j] += value;
}

double QuboProblem::evaluate(BasisIndex x) const {
  double e = constant;
  for (int i = 0; i < n; ++i) {
    if (!((x >> i) & 1U)) continue;
    e += linear[i];
    for (int j = i + 1; j < n; ++j) {
      if ((x >> j) & 1U) e += quadratic[static_cast<std::size_t>(i) * n + j];
    }
  }
  return e;
}

double IsingHamiltonian::coupling_at(int i, int j) const {
  if (i == j) return 0.0;
  if (i > j) std::swap(i, j);
  return coupling[static_cast<std::size_t>(i) * n + j];
}

double IsingHamiltonian::evaluate(BasisIndex x) const {
  double e = offset;
  for (int i = 0; i < n; ++i) {
    const double zi = ((x >> i) & 1U) ? -1.0 : 1.0;
    e += h[i] * zi;
    for (int j = i + 1; j < n; ++j) {
      const double zj = ((x >> j) & 1U) ? -1.0 : 1.0;
      e += coupling[static_cast<std::size_t>(i) * n + j] * zi * zj;
    }
  }
  return e;
}

double IsingHamiltonian::max_abs_coefficient() const {
  double m = 0.0;
  for (double v : h) m = std::max(m, std::abs(v));
  for (double v : coupling) m = std::max(m, std::abs(v));
  return m;
}

QuboProblem build_qubo(const TrussModel& model, const FemSolution& fem,
                       std::span<const double> areas, double volume_budget,
                       const EncodingConfig& config,
                       const VariableRegistry& registry) {
  config.validate();
  if (!(volume_budget > 0.0)) {
    throw InvalidConfig("volume budget V0 must be positive");
  }
  const std::size_t rods = model.rods.size();
  if (areas.size() != rods || fem.rod_strain_energy.size() != rods ||
      registry.rod_count() != rods) {
    throw Inconsistency(fmt::format(
        "size mismatch: {} rods, {} areas, {} strain energies, registry over {}",
        rods, areas.size(), fem.rod_strain_energy.size(), registry.rod_count()));
  }
  if (registry.digits_per_rod() != static_cast<int>(config.candidates.size()) ||
      registry.slack_digits() !=
          static_cast<int>(config.slack_coefficients.size())) {
    throw Inconsistency("registry digit layout does not match the encoding");
  }

  const int n = registry.qubit_count();
  QuboProblem qubo(n);
  qubo.registry = registry;

  // Constraint residual g(q) = offset + sum_i weight_i q_i.
  double offset = -1.0;
  std::vector<double> weight(static_cast<std::size_t>(n), 0.0);
  for (const auto& rod : model.rods) {
    const double volume = areas[rod.id] * rod.length;
    if (!registry.is_active(rod.id)) {
      offset += volume / volume_budget;
      continue;
    }
    for (int m = 0; m < registry.digits_per_rod(); ++m) {
      const int q = registry.rod_qubit(rod.id, m);
      weight[q] = config.candidates[m] * volume / volume_budget;
      qubo.linear[q] -= config.candidates[m] * fem.rod_strain_energy[rod.id];
    }
  }
  const double slack_total =
      std::accumulate(config.slack_coefficients.begin(),
                      config.slack_coefficients.end(), 0.0);
  for (int c = 0; c < registry.slack_digits(); ++c) {
    weight[registry.slack_qubit(c)] = config.slack_coefficients[c] / slack_total;
  }

  const double lambda = config.lambda;
  qubo.constant = lambda * offset * offset;
  for (int i = 0; i < n; ++i) {
    qubo.linear[i] += lambda * (weight[i] * weight[i] + 2.0 * offset * weight[i]);
    for (int j = i + 1; j < n; ++j) {
      qubo.add_quad(i, j, 2.0 * lambda * weight[i] * weight[j]);
    }
  }
  return qubo;
}

std::vector<double> updater_values(BasisIndex x,
                                   const VariableRegistry& registry,
                                   const EncodingConfig& config) {
  std::vector<double> alpha(registry.rod_count(), 1.0);
  for (int rod : registry.active_rods()) {
    double a = 0.0;
    for (int m = 0; m < registry.digits_per_rod(); ++m) {
      if ((x >> registry.rod_qubit(rod, m)) & 1U) a += config.candidates[m];
    }
    alpha[rod] = a;
  }
  return alpha;
}

std::vector<double> decode_updaters(BasisIndex x,
                                    const VariableRegistry& registry,
                                    const EncodingConfig& config,
                                    std::mt19937_64& rng) {
  auto alpha = updater_values(x, registry, config);
  std::uniform_real_distribution<double> epsilon(config.epsilon_min,
                                                 config.epsilon_max);
  for (int rod : registry.active_rods()) {
    if (alpha[rod] == 0.0) alpha[rod] = epsilon(rng);
  }
  return alpha;
}

double decode_slack(BasisIndex x, const VariableRegistry& registry,
                    const EncodingConfig& config) {
  double num = 0.0;
  double den = 0.0;
  for (int c = 0; c < registry.slack_digits(); ++c) {
    den += config.slack_coefficients[c];
    if ((x >> registry.slack_qubit(c)) & 1U) num += config.slack_coefficients[c];
  }
  return den > 0.0 ? num / den : 0.0;
}

BasisIndex encode_choice(std::span<const unsigned> rod_patterns,
                         unsigned slack_pattern,
                         const VariableRegistry& registry) {
  if (rod_patterns.size() != registry.active_rods().size()) {
    throw Inconsistency("one digit pattern per active rod is required");
  }
  BasisIndex x = 0;
  for (std::size_t k = 0; k < rod_patterns.size(); ++k) {
    const int rod = registry.active_rods()[k];
    for (int m = 0; m < registry.digits_per_rod(); ++m) {
      if ((rod_patterns[k] >> m) & 1U) {
        x |= BasisIndex{1} << registry.rod_qubit(rod, m);
      }
    }
  }
  for (int c = 0; c < registry.slack_digits(); ++c) {
    if ((slack_pattern >> c) & 1U) {
      x |= BasisIndex{1} << registry.slack_qubit(c);
    }
  }
  return x;
}

IsingHamiltonian qubo_to_ising(const QuboProblem& qubo) {
  const int n = qubo.n;
  IsingHamiltonian ising;
  ising.n = n;
  ising.h.assign(static_cast<std::size_t>(n), 0.0);
  ising.coupling.assign(static_cast<std::size_t>(n) * n, 0.0);
  ising.offset = qubo.constant;
  // q = (1 - z) / 2
  for (int i = 0; i < n; ++i) {
    ising.offset += 0.5 * qubo.linear[i];
    ising.h[i] -= 0.5 * qubo.linear[i];
    for (int j = i + 1; j < n; ++j) {
      const double w = qubo.quadratic[static_cast<std::size_t>(i) * n + j];
      if (w == 0.0) continue;
      ising.offset += 0.25 * w;
      ising.h[i] -= 0.25 * w;
      ising.h[j] -= 0.25 * w;
      ising.coupling[static_cast<std::size_t>(i) * n + j] = 0.25 * w;
    }
  }
  return ising;
}

std::vector<double> energy_table(const QuboProblem& qubo) {
  const int n = qubo.n;
  if (n < 0 || n > kMaxQubits) {
    throw SizeLimit(fmt::format(
        "{} qubits exceeds the dense-enumeration limit of {}", n, kMaxQubits));
  }
  const std::size_t size = std::size_t{1} << n;
  std::vector<double> table(size);
  table[0] = qubo.constant;
  // col[x] = sum_{j<k} x_j Q_jk over the low k bits, rebuilt per k.
  std::vector<double> col(size / 2 + 1, 0.0);
  for (int k = 0; k < n; ++k) {
    const std::size_t half = std::size_t{1} << k;
    col[0] = 0.0;
    for (int j = 0; j < k; ++j) {
      const std::size_t block = std::size_t{1} << j;
      const double w = qubo.quadratic[static_cast<std::size_t>(j) * n + k];
      for (std::size_t x = 0; x < block; ++x) col[block + x] = col[x] + w;
    }
    const double lin = qubo.linear[k];
    for (std::size_t x = 0; x < half; ++x) {
      table[half + x] = table[x] + lin + col[x];
    }
  }
  return table;
}

BruteForceResult brute_force_minimum(std::span<const double> table) {
  if (table.empty()) throw Inconsistency("empty energy table");
  BruteForceResult best{0, table[0], table[0]};
  for (std::size_t x = 1; x < table.size(); ++x) {
    const double e = table[x];
    if (e < best.min_energy || (e == best.min_energy && lex_less(x, best.argmin))) {
      best.min_energy = e;
      best.argmin = x;
    }
    best.max_energy = std::max(best.max_energy, e);
  }
  return best;
}

BruteForceResult brute_force_minimum(const QuboProblem& qubo) {
  if (qubo.n > kMaxQubits) {
    throw SizeLimit(fmt::format(
        "brute force refused: {} variables exceeds the limit of {}", qubo.n,
        kMaxQubits));
  }
  const auto table = energy_table(qubo);
  return brute_force_minimum(table);
}

std::string qubo_to_text(const QuboProblem& qubo) {
  std::string out = fmt::format("n {}\nconstant {:.17g}\n", qubo.n, qubo.constant);
  for (int i = 0; i < qubo.n; ++i) {
    out += fmt::format("linear {} {:.17g}\n", i, qubo.linear[i]);
  }
  for (int i = 0; i < qubo.n; ++i) {
    for (int j = i + 1; j < qubo.n; ++j) {
      const double w = qubo.quadratic[static_cast<std::size_t>(i) * qubo.n + j];
      if (w != 0.0) out += fmt::format("quad {} {} {:.17g}\n", i, j, w);
    }
  }
  return out;
}

void write_qubo_text(const QuboProblem& qubo, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw InputError(fmt::format("cannot write '{}'", path.string()));
  out << qubo_to_text(qubo);
}

}  // namespace trussqaoa
