#include "catmix/kmodes.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "catmix/error.hpp"
#include "catmix/random.hpp"

namespace catmix {

namespace {

std::size_t mismatches(std::span<const Category> a, std::span<const Category> b) {
  std::size_t d = 0;
  for (std::size_t j = 0; j < a.size(); ++j) d += a[j] != b[j];
  return d;
}

}  // namespace

KModesResult kmodes(const CategoricalDataset& data, std::size_t k, std::uint64_t seed,
                    std::size_t max_iter) {
  const std::size_t N = data.n_obs();
  const std::size_t P = data.n_vars();
  if (k == 0 || k > N)
    throw ConfigError("k-modes needs 1 <= k <= N (k = " + std::to_string(k) +
                      ", N = " + std::to_string(N) + ")");

  Rng rng(seed);
  std::vector<std::size_t> pool(N);
  std::iota(pool.begin(), pool.end(), 0);
  for (std::size_t i = 0; i < k; ++i) std::swap(pool[i], pool[i + rng.below(N - i)]);

  KModesResult res;
  res.modes = Matrix<Category>(k, P);
  for (std::size_t c = 0; c < k; ++c) {
    const auto src = data.row(pool[c]);
    std::copy(src.begin(), src.end(), res.modes.row(c).begin());
  }

  std::vector<std::size_t> offsets(P + 1, 0);
  for (std::size_t j = 0; j < P; ++j) offsets[j + 1] = offsets[j] + data.categories(j);
  std::vector<std::size_t> counts(k * offsets[P]);
  std::vector<int> labels(N, -1);
  std::vector<std::size_t> dist(N);
  std::vector<std::size_t> sizes(k);

  for (res.iterations = 0; res.iterations < max_iter; ++res.iterations) {
    bool changed = false;
    std::fill(sizes.begin(), sizes.end(), 0);
    for (std::size_t n = 0; n < N; ++n) {
      std::size_t best = 0;
      std::size_t best_d = std::numeric_limits<std::size_t>::max();
      for (std::size_t c = 0; c < k; ++c) {
        const auto d = mismatches(data.row(n), res.modes.row(c));
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      changed = changed || labels[n] != static_cast<int>(best);
      labels[n] = static_cast<int>(best);
      dist[n] = best_d;
      ++sizes[best];
    }

    for (std::size_t c = 0; c < k; ++c) {
      if (sizes[c] > 0) continue;
      std::size_t far = N;
      for (std::size_t n = 0; n < N; ++n) {
        if (sizes[labels[n]] > 1 && (far == N || dist[n] > dist[far])) far = n;
      }
      if (far == N) break;  // every cluster is a singleton already
      --sizes[labels[far]];
      labels[far] = static_cast<int>(c);
      dist[far] = 0;
      sizes[c] = 1;
      changed = true;
    }

    if (!changed && res.iterations > 0) break;

    std::fill(counts.begin(), counts.end(), 0);
    for (std::size_t n = 0; n < N; ++n) {
      const auto r = data.row(n);
      auto* base = counts.data() + static_cast<std::size_t>(labels[n]) * offsets[P];
      for (std::size_t j = 0; j < P; ++j) ++base[offsets[j] + r[j]];
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (sizes[c] == 0) continue;
      const auto* base = counts.data() + c * offsets[P];
      for (std::size_t j = 0; j < P; ++j) {
        const auto* first = base + offsets[j];
        const auto* top = std::max_element(first, first + data.categories(j));
        res.modes(c, j) = static_cast<Category>(top - first);
      }
    }
  }

  res.cost = 0;
  for (std::size_t n = 0; n < N; ++n)
    res.cost += mismatches(data.row(n), res.modes.row(static_cast<std::size_t>(labels[n])));
  res.labels = std::move(labels);
  return res;
}

std::vector<int> init_kmodes(const CategoricalDataset& data, std::size_t k, std::uint64_t seed,
                             std::size_t restarts) {
  if (k == 0 || k > data.n_obs())
    throw ConfigError("k-modes needs 1 <= k <= N (k = " + std::to_string(k) +
                      ", N = " + std::to_string(data.n_obs()) + ")");
  if (k == 1) return std::vector<int>(data.n_obs(), 0);
  Rng seeds(seed);
  KModesResult best;
  bool have = false;
  for (std::size_t r = 0; r < std::max<std::size_t>(restarts, 1); ++r) {
    auto res = kmodes(data, k, seeds.next());
    if (!have || res.cost < best.cost) {
      best = std::move(res);
      have = true;
    }
  }
  return best.labels;
}

}  // namespace catmix
