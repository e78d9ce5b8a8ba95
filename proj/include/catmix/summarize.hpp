#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "catmix/hclust.hpp"
#include "catmix/matrix.hpp"

namespace catmix {

/// Fraction of runs in which each pair of observations shares a cluster.
struct CoClusteringMatrix {
  std::size_t n_obs = 0;
  std::size_t n_runs = 0;
  Matrix<double> p;  // N x N, symmetric, unit diagonal, entries in {0, 1/M, ..., 1}
};

enum class SummaryMethod { medvedovic, voi_average, voi_complete };

std::string to_string(SummaryMethod method);
/// Throws ConfigError for an unknown name.
SummaryMethod parse_summary_method(const std::string& name);

struct SummaryConfig {
  SummaryMethod method = SummaryMethod::voi_complete;
  double medvedovic_cut = 0.01;  // tree cut at height 1 - medvedovic_cut
  double tau = 0.95;             // variable kept if selected in more than tau of runs
  double c_cut = 0.5;            // a run selects variable j when c_j > c_cut

  void validate() const;
};

struct SummaryClustering {
  std::vector<int> labels;  // numbered by first occurrence
  SummaryMethod method = SummaryMethod::voi_complete;
  std::size_t n_clusters = 0;
  std::optional<double> voi_bound;
  std::optional<std::vector<bool>> selected_vars;
};

/// P_ij = (1/M) sum_m 1[z_i^(m) = z_j^(m)]. Throws InputError on an empty run
/// list or runs of different lengths.
CoClusteringMatrix build_coclustering(const std::vector<std::vector<int>>& runs);

/// Complete-linkage tree on 1 - P, cut at height 1 - medvedovic_cut.
SummaryClustering medvedovic_summary(const CoClusteringMatrix& pcm, const SummaryConfig& cfg = {});

/// Lower bound on the posterior expected variation of information of
/// `candidate`, in bits, depending on the posterior only through P:
///   (1/N) sum_n [ log2 |C(n)| + log2 sum_j P_nj - 2 log2 sum_{j in C(n)} P_nj ]
/// where C(n) is the candidate cluster containing n.
double voi_lower_bound(const CoClusteringMatrix& pcm, const std::vector<int>& candidate);

/// Minimises voi_lower_bound over every cut (1..N clusters) of the tree built
/// on 1 - P with the given linkage. Ties go to the cut with fewer clusters.
SummaryClustering voi_summary(const CoClusteringMatrix& pcm, Linkage linkage);

/// Dispatches on cfg.method.
SummaryClustering summarize(const CoClusteringMatrix& pcm, const SummaryConfig& cfg);

/// Variable j is kept iff the fraction of runs with c_j > c_cut is strictly
/// greater than tau.
std::vector<bool> summarize_variables(const std::vector<std::vector<double>>& runs_c,
                                      const SummaryConfig& cfg = {});

/// Binary layout: "PCM1", u64 N, u64 M, then N*N little-endian doubles, row-major.
void save_pcm(const CoClusteringMatrix& pcm, const std::filesystem::path& path);
CoClusteringMatrix load_pcm(const std::filesystem::path& path);
void save_pcm_csv(const CoClusteringMatrix& pcm, const std::filesystem::path& path);

}  // namespace catmix
