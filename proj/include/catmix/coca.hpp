#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "catmix/dataset.hpp"
#include "catmix/model.hpp"
#include "catmix/summarize.hpp"

namespace catmix {

struct ClusterOrigin {
  std::size_t dataset;  // index of the source clustering
  int label;            // cluster label within that clustering
};

/// One-hot stacking of M clusterings of the same N observations: row k of
/// `moc` marks the members of cluster cluster_origin[k].
struct MatrixOfClusters {
  std::size_t n_obs = 0;
  std::size_t total_clusters = 0;
  std::size_t n_datasets = 0;
  Matrix<Category> moc;  // total_clusters x N, entries 0/1
  std::vector<ClusterOrigin> cluster_origin;

  /// The transposed matrix as an N x K binary dataset.
  CategoricalDataset to_dataset(std::vector<std::string> obs_names = {}) const;
};

/// Rows ordered by (dataset, first occurrence of the label). Throws
/// InputError for fewer than two clusterings or mismatched lengths.
MatrixOfClusters build_moc(const std::vector<std::vector<int>>& clusterings);

/// Averaged clustering of the observations using the MOC columns as binary
/// features, with variable selection switched off.
SummaryClustering cluster_moc(const MatrixOfClusters& moc, const ModelConfig& config,
                              std::size_t m_runs, std::uint64_t base_seed, std::size_t workers,
                              const SummaryConfig& summary = {});

/// CSV with header "cluster,<obs...>" and one row per cluster labelled
/// "m<dataset>:<cluster>" (dataset numbered from 1).
void save_moc_csv(const MatrixOfClusters& moc, const std::filesystem::path& path,
                  const std::vector<std::string>& obs_names = {});

}  // namespace catmix
