#include "catmix/serialize.hpp"

#include "catmix/error.hpp"

namespace catmix {

using nlohmann::json;

json to_json(const ModelConfig& config) {
  return {
      {"k_max", config.k_max},
      {"alpha0", config.alpha0},
      {"a", config.a},
      {"variable_selection", config.variable_selection},
      {"max_iter", config.max_iter},
      {"elbo_tol", config.elbo_tol},
      {"seed", config.seed},
      {"kmodes_restarts", config.kmodes_restarts},
  };
}

ModelConfig config_from_json(const json& j) {
  ModelConfig c;
  try {
    c.k_max = j.value("k_max", c.k_max);
    c.alpha0 = j.value("alpha0", c.alpha0);
    c.a = j.value("a", c.a);
    c.variable_selection = j.value("variable_selection", c.variable_selection);
    c.max_iter = j.value("max_iter", c.max_iter);
    c.elbo_tol = j.value("elbo_tol", c.elbo_tol);
    c.seed = j.value("seed", c.seed);
    c.kmodes_restarts = j.value("kmodes_restarts", c.kmodes_restarts);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  return c;
}

json to_json(const FitResult& result, bool with_timing) {
  json j;
  j["config"] = to_json(result.config);
  j["labels"] = result.labels;
  j["elbo"] = result.elbo;
  j["elbo_trace"] = result.state.elbo_trace;
  j["c"] = result.selected_c;
  j["n_nonempty"] = result.n_nonempty;
  j["iterations"] = result.state.iter_count;
  j["converged"] = result.converged;
  if (with_timing) j["wall_time"] = result.wall_time;
  return j;
}

FitResult fit_result_from_json(const json& j) {
  FitResult r;
  try {
    r.config = config_from_json(j.at("config"));
    r.labels = j.at("labels").get<std::vector<int>>();
    r.elbo = j.at("elbo").get<double>();
    r.state.elbo_trace = j.value("elbo_trace", std::vector<double>{});
    r.selected_c = j.value("c", std::vector<double>{});
    r.state.c = r.selected_c;
    r.n_nonempty = j.value("n_nonempty", std::size_t{0});
    r.state.iter_count = j.value("iterations", std::size_t{0});
    r.converged = j.value("converged", false);
    r.wall_time = j.value("wall_time", 0.0);
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed fit result: ") + e.what());
  }
  return r;
}

json to_json(const SummaryClustering& summary) {
  json j;
  j["labels"] = summary.labels;
  j["method"] = to_string(summary.method);
  j["n_clusters"] = summary.n_clusters;
  j["voi_bound"] = summary.voi_bound ? json(*summary.voi_bound) : json(nullptr);
  if (summary.selected_vars) {
    const auto& sel = *summary.selected_vars;
    j["selected_vars"] = std::vector<bool>(sel.begin(), sel.end());
  } else {
    j["selected_vars"] = nullptr;
  }
  return j;
}

}  // namespace catmix
