#pragma once

#include <cstdint>
#include <vector>

#include "catmix/error.hpp"
#include "catmix/model.hpp"
#include "catmix/summarize.hpp"

namespace catmix {

/// A run of a multi-start fit failed; carries the seed that reproduces it.
class RunFailure : public Error {
 public:
  RunFailure(std::uint64_t seed, const std::string& what, bool numerical)
      : Error("run with seed " + std::to_string(seed) + " failed: " + what),
        seed_(seed),
        numerical_(numerical) {}
  std::uint64_t seed() const noexcept { return seed_; }
  bool numerical() const noexcept { return numerical_; }

 private:
  std::uint64_t seed_;
  bool numerical_;
};

struct AveragedFit {
  std::vector<FitResult> runs;
  CoClusteringMatrix pcm;
  SummaryClustering summary;
};

/// m_runs independent fits; run m uses seed base_seed + m. Output order and
/// content do not depend on `workers`.
std::vector<FitResult> fit_runs(const CategoricalDataset& data, const ModelConfig& config,
                                std::size_t m_runs, std::uint64_t base_seed, std::size_t workers);

/// Fits, co-clustering matrix from the hard labels, summary clustering and,
/// with variable selection, the summary of selected variables.
AveragedFit fit_average(const CategoricalDataset& data, const ModelConfig& config,
                        std::size_t m_runs, std::uint64_t base_seed,
                        const SummaryConfig& summary, std::size_t workers);

/// Summary of already-finished runs.
AveragedFit summarize_runs(std::vector<FitResult> runs, const SummaryConfig& summary,
                           bool variable_selection);

}  // namespace catmix
