#pragma once

#include <json.hpp>

#include "catmix/model.hpp"
#include "catmix/summarize.hpp"

namespace catmix {

nlohmann::json to_json(const ModelConfig& config);
/// Missing keys keep their defaults.
ModelConfig config_from_json(const nlohmann::json& j);

/// Config echo, labels, final ELBO, ELBO trace, c vector, n_nonempty,
/// converged flag, and wall_time when `with_timing` is set.
nlohmann::json to_json(const FitResult& result, bool with_timing = true);
/// Restores the fields written by to_json; the variational state is not
/// persisted, so only labels, ELBO trace and c are populated in it.
FitResult fit_result_from_json(const nlohmann::json& j);

nlohmann::json to_json(const SummaryClustering& summary);

}  // namespace catmix
