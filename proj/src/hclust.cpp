#include "catmix/hclust.hpp"

#include <limits>
#include <numeric>
#include <unordered_map>

#include "catmix/error.hpp"

namespace catmix {

namespace {

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent_[x] != x) x = parent_[x] = parent_[parent_[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) { parent_[find(b)] = find(a); }

 private:
  std::vector<std::size_t> parent_;
};

std::vector<int> replay(const Dendrogram& tree, std::size_t n_merges) {
  DisjointSets sets(tree.n_leaves);
  for (std::size_t m = 0; m < n_merges; ++m) sets.unite(tree.merges[m].left, tree.merges[m].right);
  std::vector<int> labels(tree.n_leaves);
  for (std::size_t i = 0; i < tree.n_leaves; ++i) labels[i] = static_cast<int>(sets.find(i));
  return canonical_labels(labels);
}

}  // namespace

std::vector<int> canonical_labels(const std::vector<int>& labels) {
  std::unordered_map<int, int> seen;
  std::vector<int> out(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    auto [it, inserted] = seen.try_emplace(labels[i], static_cast<int>(seen.size()));
    out[i] = it->second;
  }
  return out;
}

Dendrogram hierarchical_cluster(const Matrix<double>& distance, Linkage linkage) {
  const std::size_t N = distance.rows();
  if (distance.cols() != N) throw InputError("distance matrix must be square");
  Dendrogram tree;
  tree.n_leaves = N;
  if (N < 2) return tree;
  tree.merges.reserve(N - 1);

  Matrix<double> d = distance;
  std::vector<std::size_t> size(N, 1);
  std::vector<bool> active(N, true);
  constexpr double inf = std::numeric_limits<double>::infinity();

  // Nearest active neighbour of each active cluster, lowest index on ties.
  std::vector<std::size_t> nn(N, N);
  std::vector<double> nn_dist(N, inf);
  auto refresh = [&](std::size_t i) {
    nn[i] = N;
    nn_dist[i] = inf;
    const auto row = d.row(i);
    for (std::size_t j = 0; j < N; ++j) {
      if (j == i || !active[j]) continue;
      if (nn[i] == N || row[j] < nn_dist[i]) {
        nn[i] = j;
        nn_dist[i] = row[j];
      }
    }
  };
  for (std::size_t i = 0; i < N; ++i) refresh(i);

  for (std::size_t step = 0; step + 1 < N; ++step) {
    std::size_t a = N;
    for (std::size_t i = 0; i < N; ++i) {
      if (active[i] && (a == N || nn_dist[i] < nn_dist[a])) a = i;
    }
    const std::size_t b = nn[a];  // a < b: row b would otherwise have won the scan
    const double height = nn_dist[a];
    tree.merges.push_back({a, b, height});

    const double wa = static_cast<double>(size[a]);
    const double wb = static_cast<double>(size[b]);
    for (std::size_t k = 0; k < N; ++k) {
      if (!active[k] || k == a || k == b) continue;
      const double updated = linkage == Linkage::complete
                                 ? std::max(d(a, k), d(b, k))
                                 : (wa * d(a, k) + wb * d(b, k)) / (wa + wb);
      d(a, k) = updated;
      d(k, a) = updated;
    }
    active[b] = false;
    size[a] += size[b];

    for (std::size_t k = 0; k < N; ++k) {
      if (!active[k]) continue;
      if (k == a || nn[k] == a || nn[k] == b) {
        refresh(k);
      } else if (d(k, a) < nn_dist[k] || (d(k, a) == nn_dist[k] && a < nn[k])) {
        nn[k] = a;
        nn_dist[k] = d(k, a);
      }
    }
  }
  return tree;
}

std::vector<int> cut_to_clusters(const Dendrogram& tree, std::size_t n_clusters) {
  if (n_clusters == 0 || n_clusters > tree.n_leaves)
    throw InputError("cannot cut " + std::to_string(tree.n_leaves) + " leaves into " +
                     std::to_string(n_clusters) + " clusters");
  return replay(tree, tree.n_leaves - n_clusters);
}

std::vector<int> cut_at_height(const Dendrogram& tree, double h) {
  std::size_t m = 0;
  while (m < tree.merges.size() && tree.merges[m].height <= h) ++m;
  return replay(tree, m);
}

}  // namespace catmix
