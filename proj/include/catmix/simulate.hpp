#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "catmix/dataset.hpp"
#include "catmix/random.hpp"

namespace catmix {

struct SimulationDesign {
  std::size_t n_obs = 0;
  std::size_t n_vars = 0;
  std::size_t n_relevant = 0;
  std::size_t k_true = 0;
  std::vector<std::size_t> cluster_sizes;
  std::size_t n_categories = 2;
  std::pair<double, double> beta_shape{1.0, 5.0};
  std::uint64_t seed = 0;

  /// Throws DesignError on inconsistent sizes or counts.
  void validate() const;
};

/// Named simulation scenario. Cluster sizes are drawn uniformly in
/// [size_min, size_max] and then rescaled to sum to n_obs.
struct SimulationPreset {
  std::string name;
  std::size_t n_obs;
  std::size_t n_vars;
  std::size_t n_relevant;
  std::size_t k_true;
  std::size_t k_init;  // recommended cluster cap when fitting
  std::size_t size_min;
  std::size_t size_max;
  std::size_t n_categories = 2;
};

const std::vector<SimulationPreset>& simulation_presets();
/// Throws DesignError for an unknown name.
const SimulationPreset& find_preset(const std::string& name);
SimulationDesign make_design(const SimulationPreset& preset, std::uint64_t seed);

/// Per-cluster category probabilities. Binary variables use
/// p('1') ~ Beta(beta_shape); wider variables use a symmetric Dirichlet(1).
std::vector<double> draw_profile(Rng& rng, std::size_t n_categories,
                                 std::pair<double, double> beta_shape);

/// Draws a dataset from the design. Relevant variables get one probability
/// vector per cluster; the remaining (noise) variables share one vector across
/// all clusters. The first n_relevant columns are the relevant ones and
/// observations are ordered by cluster. Deterministic in design.seed.
LabeledDataset simulate(const SimulationDesign& design);

/// simulate() restricted to designs with three or more categories.
LabeledDataset simulate_categorical(const SimulationDesign& design);

/// Design parameters, seed and generator identity for the metadata sidecar.
nlohmann::json simulation_metadata(const SimulationDesign& design);

}  // namespace catmix
