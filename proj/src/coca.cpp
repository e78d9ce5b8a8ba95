#include "catmix/coca.hpp"

#include <sstream>
#include <unordered_map>

#include "catmix/averaging.hpp"
#include "catmix/error.hpp"
#include "catmix/io.hpp"

namespace catmix {

MatrixOfClusters build_moc(const std::vector<std::vector<int>>& clusterings) {
  if (clusterings.size() < 2)
    throw InputError("a matrix of clusters needs at least two clusterings");
  const std::size_t N = clusterings.front().size();
  for (std::size_t m = 0; m < clusterings.size(); ++m) {
    if (clusterings[m].size() != N)
      throw InputError("clustering " + std::to_string(m) + " covers " +
                       std::to_string(clusterings[m].size()) + " observations, expected " +
                       std::to_string(N));
  }

  MatrixOfClusters out;
  out.n_obs = N;
  out.n_datasets = clusterings.size();
  std::vector<std::vector<std::size_t>> row_of(clusterings.size(), std::vector<std::size_t>(N));
  for (std::size_t m = 0; m < clusterings.size(); ++m) {
    std::unordered_map<int, std::size_t> rows;
    for (std::size_t n = 0; n < N; ++n) {
      const int label = clusterings[m][n];
      auto [it, inserted] = rows.try_emplace(label, out.cluster_origin.size());
      if (inserted) out.cluster_origin.push_back({m, label});
      row_of[m][n] = it->second;
    }
  }
  out.total_clusters = out.cluster_origin.size();
  out.moc = Matrix<Category>(out.total_clusters, N, 0);
  for (std::size_t m = 0; m < clusterings.size(); ++m)
    for (std::size_t n = 0; n < N; ++n) out.moc(row_of[m][n], n) = 1;
  return out;
}

CategoricalDataset MatrixOfClusters::to_dataset(std::vector<std::string> obs_names) const {
  Matrix<Category> values(n_obs, total_clusters);
  std::vector<std::string> names;
  names.reserve(total_clusters);
  for (std::size_t k = 0; k < total_clusters; ++k) {
    for (std::size_t n = 0; n < n_obs; ++n) values(n, k) = moc(k, n);
    names.push_back("m" + std::to_string(cluster_origin[k].dataset + 1) + ":" +
                    std::to_string(cluster_origin[k].label));
  }
  return {std::move(values), std::vector<std::size_t>(total_clusters, 2), std::move(names),
          std::move(obs_names)};
}

SummaryClustering cluster_moc(const MatrixOfClusters& moc, const ModelConfig& config,
                              std::size_t m_runs, std::uint64_t base_seed, std::size_t workers,
                              const SummaryConfig& summary) {
  ModelConfig cfg = config;
  cfg.variable_selection = false;
  cfg.freeze_selection = false;
  return fit_average(moc.to_dataset(), cfg, m_runs, base_seed, summary, workers).summary;
}

void save_moc_csv(const MatrixOfClusters& moc, const std::filesystem::path& path,
                  const std::vector<std::string>& obs_names) {
  std::ostringstream out;
  out << "cluster";
  for (std::size_t n = 0; n < moc.n_obs; ++n)
    out << ',' << (obs_names.empty() ? std::to_string(n) : obs_names[n]);
  out << '\n';
  for (std::size_t k = 0; k < moc.total_clusters; ++k) {
    out << 'm' << moc.cluster_origin[k].dataset + 1 << ':' << moc.cluster_origin[k].label;
    for (auto v : moc.moc.row(k)) out << ',' << v;
    out << '\n';
  }
  write_file_atomic(path, out.str());
}

}  // namespace catmix
