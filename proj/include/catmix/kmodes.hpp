#pragma once

#include <cstdint>
#include <vector>

#include "catmix/dataset.hpp"
#include "catmix/matrix.hpp"

namespace catmix {

struct KModesResult {
  std::vector<int> labels;
  Matrix<Category> modes;  // k x P
  std::size_t cost = 0;    // total simple-matching dissimilarity to assigned modes
  std::size_t iterations = 0;
};

/// One k-modes run (Huang's algorithm with simple-matching dissimilarity).
///
/// Modes start at k distinct random observations. Points go to the nearest
/// mode, lowest index on ties; modes become the per-column majority category,
/// lowest category on ties. A mode that loses all its points is reseeded with
/// the point farthest from its own mode.
KModesResult kmodes(const CategoricalDataset& data, std::size_t k, std::uint64_t seed,
                    std::size_t max_iter = 100);

/// Best of `restarts` k-modes runs by total dissimilarity. Throws ConfigError
/// when k is zero or exceeds N.
std::vector<int> init_kmodes(const CategoricalDataset& data, std::size_t k, std::uint64_t seed,
                             std::size_t restarts = 5);

}  // namespace catmix
