#pragma once

#include <cstddef>
#include <vector>

#include "catmix/matrix.hpp"

namespace catmix {

enum class Linkage { complete, average };

struct Merge {
  std::size_t left;   // representative (smallest member index) of one side
  std::size_t right;  // representative of the other side, left < right
  double height;
};

/// Agglomerative clustering tree over N leaves: N - 1 merges in order.
struct Dendrogram {
  std::size_t n_leaves = 0;
  std::vector<Merge> merges;
};

/// Agglomerative hierarchical clustering of a symmetric distance matrix with
/// Lance-Williams updates. Among equally close pairs the lexicographically
/// smallest (i, j) of cluster representatives merges first.
Dendrogram hierarchical_cluster(const Matrix<double>& distance, Linkage linkage);

/// Labels after the first n_leaves - n_clusters merges, numbered by first
/// occurrence.
std::vector<int> cut_to_clusters(const Dendrogram& tree, std::size_t n_clusters);

/// Labels after every merge with height <= h, numbered by first occurrence.
std::vector<int> cut_at_height(const Dendrogram& tree, double h);

/// Relabels so that clusters are numbered 0, 1, 2, ... by first occurrence.
std::vector<int> canonical_labels(const std::vector<int>& labels);

}  // namespace catmix
