#include "catmix/averaging.hpp"

#include "catmix/parallel.hpp"

namespace catmix {

std::vector<FitResult> fit_runs(const CategoricalDataset& data, const ModelConfig& config,
                                std::size_t m_runs, std::uint64_t base_seed, std::size_t workers) {
  config.validate();
  if (m_runs == 0) throw ConfigError("at least one run is required");
  std::vector<FitResult> runs(m_runs);
  parallel_for(m_runs, workers, [&](std::size_t m) {
    ModelConfig cfg = config;
    cfg.seed = base_seed + m;
    try {
      runs[m] = fit(data, cfg);
    } catch (const NumericalError& e) {
      throw RunFailure(cfg.seed, e.what(), true);
    } catch (const Error& e) {
      throw RunFailure(cfg.seed, e.what(), false);
    }
  });
  return runs;
}

AveragedFit summarize_runs(std::vector<FitResult> runs, const SummaryConfig& summary,
                           bool variable_selection) {
  summary.validate();
  AveragedFit out;
  out.runs = std::move(runs);
  std::vector<std::vector<int>> labels;
  labels.reserve(out.runs.size());
  for (const auto& r : out.runs) labels.push_back(r.labels);
  out.pcm = build_coclustering(labels);
  out.summary = summarize(out.pcm, summary);
  if (variable_selection) {
    std::vector<std::vector<double>> cs;
    cs.reserve(out.runs.size());
    for (const auto& r : out.runs) cs.push_back(r.selected_c);
    out.summary.selected_vars = summarize_variables(cs, summary);
  }
  return out;
}

AveragedFit fit_average(const CategoricalDataset& data, const ModelConfig& config,
                        std::size_t m_runs, std::uint64_t base_seed,
                        const SummaryConfig& summary, std::size_t workers) {
  summary.validate();
  return summarize_runs(fit_runs(data, config, m_runs, base_seed, workers), summary,
                        config.variable_selection && !config.freeze_selection);
}

}  // namespace catmix
