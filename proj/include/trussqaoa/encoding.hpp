#pragma once

// Binary encoding of per-rod area updaters and the volume slack variable,
// plus the QUBO / Ising forms of the per-iteration objective.

#include <cstdint>
#include <filesystem>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "trussqaoa/truss.hpp"

namespace trussqaoa {

/// Basis-state index: bit k of the index is the value of qubit k.
using BasisIndex = std::uint64_t;

/// Largest qubit count for dense enumeration (brute force, statevectors).
inline constexpr int kMaxQubits = 26;

/// "q0 q1 ... q(n-1)" as a string of '0'/'1', qubit 0 first.
std::string to_bitstring(BasisIndex x, int n);
BasisIndex from_bitstring(const std::string& bits);

/// Lexicographic order of the bitstrings of `a` and `b` (qubit 0 first).
bool lex_less(BasisIndex a, BasisIndex b);

struct EncodingConfig {
  std::vector<double> candidates{0.1, 1.0};  // on-off digits r_m
  std::vector<double> slack_coefficients{2.0, 4.0};
  double lambda = 0.5;
  double theta = 1.1;
  double epsilon_min = 1e-10;
  double epsilon_max = 2e-10;

  /// Throws InvalidConfig.
  void validate() const;
};

class VariableRegistry {
 public:
  VariableRegistry() = default;
  /// Active rods in ascending id occupy `digits` consecutive qubits each;
  /// the slack digits follow.
  VariableRegistry(const std::vector<bool>& active_mask, int digits,
                   int slack_digits);

  int qubit_count() const { return qubit_count_; }
  int digits_per_rod() const { return digits_; }
  int slack_digits() const { return slack_digits_; }
  std::size_t rod_count() const { return rod_slot_.size(); }
  const std::vector<int>& active_rods() const { return active_rods_; }
  bool is_active(int rod) const { return rod_slot_.at(rod) >= 0; }

  /// Throws Inconsistency for frozen rods.
  int rod_qubit(int rod, int digit) const;
  int slack_qubit(int digit) const;

 private:
  std::vector<int> rod_slot_;  // -1 when frozen
  std::vector<int> active_rods_;
  int digits_ = 0;
  int slack_digits_ = 0;
  int qubit_count_ = 0;
};

struct QuboProblem {
  int n = 0;
  double constant = 0.0;
  std::vector<double> linear;
  std::vector<double> quadratic;  // n*n row-major, only i < j populated
  VariableRegistry registry;

  explicit QuboProblem(int qubits = 0);

  double quad(int i, int j) const;
  void add_quad(int i, int j, double value);
  double evaluate(BasisIndex x) const;
};

struct IsingHamiltonian {
  int n = 0;
  double offset = 0.0;
  std::vector<double> h;
  std::vector<double> coupling;  // n*n row-major, only i < j populated

  double coupling_at(int i, int j) const;
  /// Energy for spins z_k = 1 - 2 q_k, taken from the bits of `x`.
  double evaluate(BasisIndex x) const;
  /// Largest |h_i| or |J_ij|.
  double max_abs_coefficient() const;
};

/// Builds the iteration objective
///   -sum_e alpha_e * SE_e + lambda * (V(alpha)/V0 + S - 1)^2
/// over the registry's active rods. Frozen rods enter the constraint with
/// their fixed volume. Throws InvalidConfig / Inconsistency.
QuboProblem build_qubo(const TrussModel& model, const FemSolution& fem,
                       std::span<const double> areas, double volume_budget,
                       const EncodingConfig& config,
                       const VariableRegistry& registry);

/// Raw on-off sum for each rod (1.0 for frozen rods); zeros kept as zero.
std::vector<double> updater_values(BasisIndex x,
                                   const VariableRegistry& registry,
                                   const EncodingConfig& config);

/// As `updater_values`, with every zero replaced by a fresh draw from
/// U[epsilon_min, epsilon_max].
std::vector<double> decode_updaters(BasisIndex x,
                                    const VariableRegistry& registry,
                                    const EncodingConfig& config,
                                    std::mt19937_64& rng);

double decode_slack(BasisIndex x, const VariableRegistry& registry,
                    const EncodingConfig& config);

/// Inverse of `updater_values` for the given per-digit choice. `digits` holds
/// one bit pattern per active rod (bit m = digit m) then the slack pattern.
BasisIndex encode_choice(std::span<const unsigned> rod_patterns,
                         unsigned slack_pattern,
                         const VariableRegistry& registry);

IsingHamiltonian qubo_to_ising(const QuboProblem& qubo);

/// Energy of every basis state, computed in O(2^n). Throws SizeLimit.
std::vector<double> energy_table(const QuboProblem& qubo);

struct BruteForceResult {
  BasisIndex argmin = 0;
  double min_energy = 0.0;
  double max_energy = 0.0;
};

/// Exhaustive minimum; ties go to the lexicographically smallest bitstring.
BruteForceResult brute_force_minimum(const QuboProblem& qubo);
BruteForceResult brute_force_minimum(std::span<const double> table);

/// Text export: "n N", "constant C", "linear i v", "quad i j v" lines.
std::string qubo_to_text(const QuboProblem& qubo);
void write_qubo_text(const QuboProblem& qubo, const std::filesystem::path& path);

}  // namespace trussqaoa
