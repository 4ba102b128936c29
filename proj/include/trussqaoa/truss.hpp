#pragma once

// Linear-elastic 2D truss analysis by the direct stiffness method.

#include <array>
#include <span>
#include <string>
#include <vector>

namespace trussqaoa {

struct Node2D {
  int id = 0;
  double x = 0.0;
  double y = 0.0;
  bool fixed_x = false;
  bool fixed_y = false;
  double load_x = 0.0;
  double load_y = 0.0;
};

/// A pin-jointed bar. Length and direction cosines are filled in by
/// `make_truss_model` and are read-only afterwards.
struct Rod {
  int id = 0;
  int node_i = 0;
  int node_j = 0;
  double length = 0.0;
  double c = 0.0;  // cos of the axis angle
  double s = 0.0;  // sin of the axis angle
};

struct TrussModel {
  std::vector<Node2D> nodes;
  std::vector<Rod> rods;
  double young_modulus = 0.0;  // Pa
  double initial_area = 0.0;   // m^2
  double volume_budget = 0.0;  // m^3, A0 * sum of rod lengths

  std::size_t dof_count() const { return 2 * nodes.size(); }
  std::vector<double> load_vector() const;
  std::vector<double> uniform_areas() const {
    return std::vector<double>(rods.size(), initial_area);
  }
};

struct FemSolution {
  std::vector<double> displacements;      // m, ordered (ux0, uy0, ux1, ...)
  double compliance = 0.0;                // F^T U, N*m
  std::vector<double> rod_strain_energy;  // U_e^T K_e U_e, N*m
  std::vector<double> rod_axial_force;    // N, tension positive
  double total_volume = 0.0;              // m^3
};

using ElementMatrix = std::array<std::array<double, 4>, 4>;

/// Validates ids and support/load consistency, caches rod geometry, and
/// derives the volume budget. Throws InvalidGeometry.
TrussModel make_truss_model(std::vector<Node2D> nodes, std::vector<Rod> rods,
                            double young_modulus, double initial_area);

/// (E*area/L) * J with DOFs ordered (ux_i, uy_i, ux_j, uy_j).
ElementMatrix element_stiffness(const Rod& rod, double area,
                                double young_modulus);

/// Unconstrained global stiffness, row-major dof_count x dof_count.
std::vector<double> assemble_global_stiffness(const TrussModel& model,
                                              std::span<const double> areas);

/// Eliminates fixed DOFs and solves K U = F. Throws SingularSystem when the
/// reduced stiffness is singular.
FemSolution assemble_and_solve(const TrussModel& model,
                               std::span<const double> areas);

double total_volume(const TrussModel& model, std::span<const double> areas);

/// Rods whose two end nodes are fully fixed. They never carry load.
std::vector<int> rods_between_supports(const TrussModel& model);

}  // namespace trussqaoa
