#include "catmix/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "catmix/error.hpp"

namespace catmix {

void SimulationDesign::validate() const {
  if (n_obs == 0 || n_vars == 0) throw DesignError("design needs at least one row and column");
  if (k_true == 0) throw DesignError("design needs at least one cluster");
  if (cluster_sizes.size() != k_true)
    throw DesignError("k_true = " + std::to_string(k_true) + " but " +
                      std::to_string(cluster_sizes.size()) + " cluster sizes given");
  const auto total = std::accumulate(cluster_sizes.begin(), cluster_sizes.end(), std::size_t{0});
  if (total != n_obs)
    throw DesignError("cluster sizes sum to " + std::to_string(total) + ", expected n_obs = " +
                      std::to_string(n_obs));
  if (std::any_of(cluster_sizes.begin(), cluster_sizes.end(), [](auto s) { return s == 0; }))
    throw DesignError("every cluster needs at least one observation");
  if (n_relevant > n_vars) throw DesignError("n_relevant exceeds n_vars");
  if (n_categories < 2) throw DesignError("variables need at least two categories");
  if (!(beta_shape.first > 0.0) || !(beta_shape.second > 0.0))
    throw DesignError("beta shape parameters must be positive");
}

const std::vector<SimulationPreset>& simulation_presets() {
  static const std::vector<SimulationPreset> presets = {
      {"sim2.1", 1000, 100, 100, 10, 30, 50, 200},
      {"sim2.2", 1000, 100, 100, 10, 30, 10, 400},
      {"sim2.3", 2000, 100, 100, 20, 40, 50, 200},
      {"sim2.4", 1000, 100, 75, 10, 30, 50, 200},
      {"sim2.5", 1000, 100, 50, 10, 30, 50, 200},
      {"sim3.1", 1000, 100, 100, 10, 20, 100, 100},
      {"sim3.2", 1000, 100, 100, 10, 20, 25, 400},
      {"sim3.3", 2000, 100, 100, 20, 30, 50, 200},
      {"sim3.4", 1000, 100, 75, 10, 20, 50, 200},
      {"sim3.5", 2000, 100, 50, 10, 20, 100, 400},
      {"cat", 1000, 100, 100, 10, 20, 100, 100, 3},
  };
  return presets;
}

const SimulationPreset& find_preset(const std::string& name) {
  for (const auto& p : simulation_presets())
    if (p.name == name) return p;
  throw DesignError("unknown simulation preset '" + name + "'");
}

SimulationDesign make_design(const SimulationPreset& preset, std::uint64_t seed) {
  SimulationDesign d;
  d.n_obs = preset.n_obs;
  d.n_vars = preset.n_vars;
  d.n_relevant = preset.n_relevant;
  d.k_true = preset.k_true;
  d.n_categories = preset.n_categories;
  d.seed = seed;

  // Sizes come from their own stream so the data stream stays keyed on `seed`.
  Rng rng(seed ^ 0x9E3779B97F4A7C15ull);
  std::vector<double> raw(preset.k_true);
  for (auto& r : raw)
    r = static_cast<double>(preset.size_min) +
        static_cast<double>(rng.below(preset.size_max - preset.size_min + 1));
  const double scale = static_cast<double>(preset.n_obs) / std::accumulate(raw.begin(), raw.end(), 0.0);

  // Largest-remainder rounding onto the exact total.
  std::vector<double> remainder(preset.k_true);
  d.cluster_sizes.resize(preset.k_true);
  std::size_t assigned = 0;
  for (std::size_t k = 0; k < preset.k_true; ++k) {
    const double target = raw[k] * scale;
    d.cluster_sizes[k] = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(target)));
    remainder[k] = target - std::floor(target);
    assigned += d.cluster_sizes[k];
  }
  std::vector<std::size_t> order(preset.k_true);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](auto a, auto b) { return remainder[a] > remainder[b]; });
  for (std::size_t i = 0; assigned < preset.n_obs; i = (i + 1) % order.size(), ++assigned)
    ++d.cluster_sizes[order[i]];
  for (std::size_t i = 0; assigned > preset.n_obs; i = (i + 1) % order.size()) {
    auto& s = d.cluster_sizes[order[order.size() - 1 - i]];
    if (s > 1) {
      --s;
      --assigned;
    }
  }
  return d;
}

std::vector<double> draw_profile(Rng& rng, std::size_t n_categories,
                                 std::pair<double, double> beta_shape) {
  std::vector<double> probs(n_categories);
  if (n_categories == 2) {
    double p = 0.0;
    if (beta_shape.first == 1.0) {
      // Beta(1, b) by inversion: F(x) = 1 - (1 - x)^b.
      p = 1.0 - std::pow(rng.uniform_open0(), 1.0 / beta_shape.second);
    } else {
      p = rng.beta(beta_shape.first, beta_shape.second);
    }
    probs[0] = 1.0 - p;
    probs[1] = p;
  } else {
    rng.dirichlet(1.0, probs);
  }
  return probs;
}

LabeledDataset simulate(const SimulationDesign& design) {
  design.validate();
  Rng rng(design.seed);
  const std::size_t K = design.k_true;
  const std::size_t L = design.n_categories;

  LabeledDataset out;
  out.relevant_mask.assign(design.n_vars, false);
  out.profiles.reserve(design.n_vars);
  for (std::size_t j = 0; j < design.n_vars; ++j) {
    const bool relevant = j < design.n_relevant;
    out.relevant_mask[j] = relevant;
    Matrix<double> prof(K, L);
    std::vector<double> shared;
    if (!relevant) shared = draw_profile(rng, L, design.beta_shape);
    for (std::size_t k = 0; k < K; ++k) {
      const auto probs = relevant ? draw_profile(rng, L, design.beta_shape) : shared;
      std::copy(probs.begin(), probs.end(), prof.row(k).begin());
    }
    out.profiles.push_back(std::move(prof));
  }

  Matrix<Category> values(design.n_obs, design.n_vars);
  out.true_labels.reserve(design.n_obs);
  std::size_t n = 0;
  for (std::size_t k = 0; k < K; ++k) {
    for (std::size_t i = 0; i < design.cluster_sizes[k]; ++i, ++n) {
      out.true_labels.push_back(static_cast<int>(k));
      for (std::size_t j = 0; j < design.n_vars; ++j)
        values(n, j) = static_cast<Category>(rng.categorical(out.profiles[j].row(k)));
    }
  }
  out.data = CategoricalDataset(std::move(values), std::vector<std::size_t>(design.n_vars, L));
  return out;
}

LabeledDataset simulate_categorical(const SimulationDesign& design) {
  if (design.n_categories < 3)
    throw DesignError("categorical simulation needs n_categories >= 3");
  return simulate(design);
}

nlohmann::json simulation_metadata(const SimulationDesign& design) {
  nlohmann::json j;
  j["n_obs"] = design.n_obs;
  j["n_vars"] = design.n_vars;
  j["n_relevant"] = design.n_relevant;
  j["k_true"] = design.k_true;
  j["cluster_sizes"] = design.cluster_sizes;
  j["n_categories"] = design.n_categories;
  j["beta_shape"] = {design.beta_shape.first, design.beta_shape.second};
  j["seed"] = design.seed;
  j["generator"] = {
      {"name", "catmix-simulate"},
      {"version", 1},
      {"rng", "mt19937_64"},
      {"relevant_profiles", design.n_categories == 2 ? "beta per cluster"
                                                     : "symmetric dirichlet(1) per cluster"},
      {"noise_profiles", design.n_categories == 2 ? "beta shared across clusters"
                                                  : "symmetric dirichlet(1) shared across clusters"},
      {"relevant_columns", "first n_relevant"},
  };
  return j;
}

}  // namespace catmix
