#include <algorithm>
#include <cmath>
#include <fmt/format.h>

#include "trussqaoa/design_loop.hpp"
#include "trussqaoa/error.hpp"

namespace trussqaoa {

namespace {

std::vector<double> resize_for(double multiplier, std::span<const double> areas,
                               std::span<const double> energy,
                               const TrussModel& model, const OcConfig& config,
                               double lower, double volume_budget) {
  std::vector<double> out(areas.size());
  for (const auto& rod : model.rods) {
    const double a = areas[rod.id];
    const double ratio =
        std::max(energy[rod.id], 0.0) / (a * multiplier * rod.length);
    const double upper = volume_budget / rod.length;
    out[rod.id] = std::clamp(a * std::pow(ratio, config.damping), lower, upper);
  }
  return out;
}

}  // namespace

OcResult oc_reference(const TrussModel& model, const OcConfig& config) {
  if (!(config.damping > 0.0) || !(config.lower_bound_fraction > 0.0) ||
      !(config.tolerance > 0.0) || config.max_iterations < 1) {
    throw InvalidConfig("invalid optimality-criteria settings");
  }
  const double v0 = model.volume_budget;
  const double lower = config.lower_bound_fraction * model.initial_area;
  OcResult result;
  result.areas = model.uniform_areas();

  for (int it = 1; it <= config.max_iterations; ++it) {
    const auto fem = assemble_and_solve(model, result.areas);
    const auto& energy = fem.rod_strain_energy;
    auto volume_at = [&](double multiplier) {
      return total_volume(model, resize_for(multiplier, result.areas, energy,
                                            model, config, lower, v0));
    };

    // Volume decreases monotonically in the multiplier; bisect in log space.
    double lo = 1e-30;
    double hi = 1e30;
    if (volume_at(lo) < v0 || volume_at(hi) > v0) {
      throw ReferenceUnavailable(fmt::format(
          "OC multiplier bisection cannot bracket the volume budget at "
          "iteration {}",
          it));
    }
    for (int k = 0; k < 400 && hi / lo > 1.0 + 1e-15; ++k) {
      const double mid = std::sqrt(lo * hi);
      (volume_at(mid) > v0 ? lo : hi) = mid;
    }
    auto next = resize_for(std::sqrt(lo * hi), result.areas, energy, model,
                           config, lower, v0);
    if (std::abs(total_volume(model, next) - v0) > 1e-9 * v0) {
      throw ReferenceUnavailable(
          fmt::format("OC bisection missed the volume budget at iteration {}", it));
    }

    double change = 0.0;
    const double scale = *std::max_element(next.begin(), next.end());
    for (std::size_t e = 0; e < next.size(); ++e) {
      change = std::max(change, std::abs(next[e] - result.areas[e]) / scale);
    }
    result.areas = std::move(next);
    result.iterations = it;
    if (change < config.tolerance) break;
  }
  result.compliance = assemble_and_solve(model, result.areas).compliance;
  return result;
}

}  // namespace trussqaoa
