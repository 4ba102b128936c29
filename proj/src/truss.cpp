#include "trussqaoa/truss.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <fmt/format.h>

#include "trussqaoa/error.hpp"

namespace trussqaoa {

namespace {

// Pivots below this fraction of the largest one are treated as zero. Rods
// frozen at epsilon-scaled areas sit around 1e-11 and must stay solvable.
constexpr double kPivotTolerance = 1e-14;

std::array<int, 4> rod_dofs(const Rod& rod) {
  return {2 * rod.node_i, 2 * rod.node_i + 1, 2 * rod.node_j,
          2 * rod.node_j + 1};
}

std::vector<bool> fixed_mask(const TrussModel& model) {
  std::vector<bool> fixed(model.dof_count(), false);
  for (const auto& node : model.nodes) {
    fixed[2 * node.id] = node.fixed_x;
    fixed[2 * node.id + 1] = node.fixed_y;
  }
  return fixed;
}

void check_areas(const TrussModel& model, std::span<const double> areas) {
  if (areas.size() != model.rods.size()) {
    throw Inconsistency(fmt::format("expected {} rod areas, got {}",
                                    model.rods.size(), areas.size()));
  }
  for (std::size_t e = 0; e < areas.size(); ++e) {
    if (!(areas[e] > 0.0) || !std::isfinite(areas[e])) {
      throw InvalidConfig(
          fmt::format("rod {} has non-positive area {}", e, areas[e]));
    }
  }
}

}  // namespace

std::vector<double> TrussModel::load_vector() const {
  std::vector<double> f(dof_count(), 0.0);
  for (const auto& node : nodes) {
    f[2 * node.id] = node.load_x;
    f[2 * node.id + 1] = node.load_y;
  }
  return f;
}

TrussModel make_truss_model(std::vector<Node2D> nodes, std::vector<Rod> rods,
                            double young_modulus, double initial_area) {
  if (nodes.empty() || rods.empty()) {
    throw InvalidGeometry("model needs at least one node and one rod");
  }
  if (!(young_modulus > 0.0)) {
    throw InvalidGeometry("Young's modulus must be positive");
  }
  if (!(initial_area > 0.0)) {
    throw InvalidGeometry("initial area must be positive");
  }
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    const auto& node = nodes[k];
    if (node.id != static_cast<int>(k)) {
      throw InvalidGeometry(fmt::format(
          "node ids must be contiguous from 0; found id {} at position {}",
          node.id, k));
    }
    if ((node.fixed_x && node.load_x != 0.0) ||
        (node.fixed_y && node.load_y != 0.0)) {
      throw InvalidGeometry(
          fmt::format("node {} carries a load on a fixed DOF", node.id));
    }
  }
  int constrained = 0;
  for (const auto& node : nodes) {
    constrained += static_cast<int>(node.fixed_x) + static_cast<int>(node.fixed_y);
  }
  if (constrained < 3) {
    throw InvalidGeometry(fmt::format(
        "only {} constrained DOFs; at least 3 are needed to suppress "
        "rigid-body motion",
        constrained));
  }

  const int node_count = static_cast<int>(nodes.size());
  double total_length = 0.0;
  for (std::size_t k = 0; k < rods.size(); ++k) {
    auto& rod = rods[k];
    if (rod.id != static_cast<int>(k)) {
      throw InvalidGeometry(fmt::format(
          "rod ids must be contiguous from 0; found id {} at position {}",
          rod.id, k));
    }
    if (rod.node_i < 0 || rod.node_i >= node_count || rod.node_j < 0 ||
        rod.node_j >= node_count) {
      throw InvalidGeometry(
          fmt::format("rod {} references an unknown node", rod.id));
    }
    if (rod.node_i == rod.node_j) {
      throw InvalidGeometry(
          fmt::format("rod {} connects node {} to itself", rod.id, rod.node_i));
    }
    const double dx = nodes[rod.node_j].x - nodes[rod.node_i].x;
    const double dy = nodes[rod.node_j].y - nodes[rod.node_i].y;
    rod.length = std::hypot(dx, dy);
    if (!(rod.length > 0.0)) {
      throw InvalidGeometry(
          fmt::format("rod {} has coincident end nodes", rod.id));
    }
    rod.c = dx / rod.length;
    rod.s = dy / rod.length;
    total_length += rod.length;
  }

  TrussModel model;
  model.nodes = std::move(nodes);
  model.rods = std::move(rods);
  model.young_modulus = young_modulus;
  model.initial_area = initial_area;
  model.volume_budget = initial_area * total_length;
  return model;
}

ElementMatrix element_stiffness(const Rod& rod, double area,
                                double young_modulus) {
  if (!(rod.length > 0.0)) {
    throw InvalidGeometry(fmt::format("rod {} is degenerate", rod.id));
  }
  if (!(area > 0.0)) {
    throw InvalidConfig(fmt::format("rod {} has non-positive area", rod.id));
  }
  const double k = young_modulus * area / rod.length;
  const std::array<double, 4> v{-rod.c, -rod.s, rod.c, rod.s};
  ElementMatrix m{};
  for (int a = 0; a < 4; ++a) {
    for (int b = 0; b < 4; ++b) {
      m[a][b] = k * v[a] * v[b];
    }
  }
  return m;
}

std::vector<double> assemble_global_stiffness(const TrussModel& model,
                                              std::span<const double> areas) {
  check_areas(model, areas);
  const std::size_t n = model.dof_count();
  std::vector<double> k(n * n, 0.0);
  for (const auto& rod : model.rods) {
    const auto ke = element_stiffness(rod, areas[rod.id], model.young_modulus);
    const auto dofs = rod_dofs(rod);
    for (int a = 0; a < 4; ++a) {
      for (int b = 0; b < 4; ++b) {
        k[dofs[a] * n + dofs[b]] += ke[a][b];
      }
    }
  }
  return k;
}

FemSolution assemble_and_solve(const TrussModel& model,
                               std::span<const double> areas) {
  const auto k_global = assemble_global_stiffness(model, areas);
  const std::size_t n = model.dof_count();
  const auto fixed = fixed_mask(model);
  const auto f = model.load_vector();

  std::vector<std::size_t> free_dofs;
  for (std::size_t d = 0; d < n; ++d) {
    if (!fixed[d]) free_dofs.push_back(d);
  }

  FemSolution sol;
  sol.displacements.assign(n, 0.0);
  const auto m = static_cast<Eigen::Index>(free_dofs.size());
  if (m > 0) {
    Eigen::MatrixXd k_free(m, m);
    Eigen::VectorXd f_free(m);
    for (Eigen::Index a = 0; a < m; ++a) {
      f_free(a) = f[free_dofs[a]];
      for (Eigen::Index b = 0; b < m; ++b) {
        k_free(a, b) = k_global[free_dofs[a] * n + free_dofs[b]];
      }
    }
    for (Eigen::Index a = 0; a < m; ++a) {
      if (k_free(a, a) == 0.0) {
        const auto dof = free_dofs[a];
        const char* axis = dof % 2 == 0 ? "x" : "y";
        if (f_free(a) != 0.0) {
          throw SingularSystem(fmt::format(
              "load at node {} ({}) has no connected rod: load path is "
              "disconnected",
              dof / 2, axis));
        }
        throw SingularSystem(fmt::format(
            "free DOF at node {} ({}) has no stiffness: insufficient supports "
            "or unconnected node",
            dof / 2, axis));
      }
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(k_free);
    lu.setThreshold(kPivotTolerance);
    if (!lu.isInvertible()) {
      throw SingularSystem(fmt::format(
          "reduced stiffness is singular (rank {} of {}): the structure is a "
          "mechanism under its supports",
          lu.rank(), m));
    }
    const Eigen::VectorXd u_free = lu.solve(f_free);
    for (Eigen::Index a = 0; a < m; ++a) {
      sol.displacements[free_dofs[a]] = u_free(a);
    }
  }

  const auto& u = sol.displacements;
  sol.compliance = 0.0;
  for (std::size_t d = 0; d < n; ++d) sol.compliance += f[d] * u[d];

  sol.rod_strain_energy.resize(model.rods.size());
  sol.rod_axial_force.resize(model.rods.size());
  for (const auto& rod : model.rods) {
    const auto dofs = rod_dofs(rod);
    const double elongation = rod.c * (u[dofs[2]] - u[dofs[0]]) +
                              rod.s * (u[dofs[3]] - u[dofs[1]]);
    const double axial_stiffness =
        model.young_modulus * areas[rod.id] / rod.length;
    sol.rod_axial_force[rod.id] = axial_stiffness * elongation;
    sol.rod_strain_energy[rod.id] = axial_stiffness * elongation * elongation;
  }
  sol.total_volume = total_volume(model, areas);
  return sol;
}

double total_volume(const TrussModel& model, std::span<const double> areas) {
  if (areas.size() != model.rods.size()) {
    throw Inconsistency(fmt::format("expected {} rod areas, got {}",
                                    model.rods.size(), areas.size()));
  }
  double v = 0.0;
  for (const auto& rod : model.rods) v += areas[rod.id] * rod.length;
  return v;
}

std::vector<int> rods_between_supports(const TrussModel& model) {
  std::vector<int> out;
  for (const auto& rod : model.rods) {
    const auto& a = model.nodes[rod.node_i];
    const auto& b = model.nodes[rod.node_j];
    if (a.fixed_x && a.fixed_y && b.fixed_x && b.fixed_y) out.push_back(rod.id);
  }
  return out;
}

}  // namespace trussqaoa
