#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "catmix/matrix.hpp"

namespace catmix {

using Category = std::uint32_t;

/// N observations of P categorical variables, coded 0..L_j-1.
///
/// Immutable once constructed; the constructor enforces that every value is
/// below its column's category count and that every L_j >= 2.
class CategoricalDataset {
 public:
  CategoricalDataset() = default;
  CategoricalDataset(Matrix<Category> values, std::vector<std::size_t> categories,
                     std::vector<std::string> var_names = {},
                     std::vector<std::string> obs_names = {});

  std::size_t n_obs() const noexcept { return values_.rows(); }
  std::size_t n_vars() const noexcept { return values_.cols(); }
  const std::vector<std::size_t>& categories() const noexcept { return categories_; }
  std::size_t categories(std::size_t j) const { return categories_[j]; }
  std::size_t max_categories() const noexcept { return max_categories_; }

  Category operator()(std::size_t n, std::size_t j) const { return values_(n, j); }
  std::span<const Category> row(std::size_t n) const { return values_.row(n); }
  const Matrix<Category>& values() const noexcept { return values_; }

  const std::vector<std::string>& var_names() const noexcept { return var_names_; }
  const std::vector<std::string>& obs_names() const noexcept { return obs_names_; }
  /// Name of variable j, or "V<j+1>" when unnamed.
  std::string var_name(std::size_t j) const;
  /// Name of observation n, or its 0-based index when unnamed.
  std::string obs_name(std::size_t n) const;

  /// Same observations in the order given by `order` (order[i] = source row).
  CategoricalDataset permute_rows(std::span<const std::size_t> order) const;

  bool operator==(const CategoricalDataset&) const = default;

 private:
  Matrix<Category> values_;
  std::vector<std::size_t> categories_;
  std::vector<std::string> var_names_;
  std::vector<std::string> obs_names_;
  std::size_t max_categories_ = 0;
};

/// Ground-truth carrier for simulated data.
struct LabeledDataset {
  CategoricalDataset data;
  std::vector<int> true_labels;
  std::vector<bool> relevant_mask;
  /// profiles[j](k, l): generating probability of category l for variable j in
  /// cluster k. Empty for data that was not simulated.
  std::vector<Matrix<double>> profiles;
};

/// Sidecar schema path used next to a data CSV: "x.csv" -> "x.schema.json".
std::filesystem::path schema_path_for(const std::filesystem::path& csv);

/// Reads a data CSV (header row of variable names, integer cells).
///
/// Category counts default to max observed index + 1 per column. A sidecar
/// schema (explicit, or found by schema_path_for) may fix them instead, which
/// is how a category that never occurs in the sample is declared. Throws
/// ParseError for malformed cells and ValidationError for a column with a
/// single category.
CategoricalDataset load_dataset(const std::filesystem::path& path,
                                const std::optional<std::filesystem::path>& schema = {});

/// Writes the data CSV, plus the sidecar schema whenever the category counts
/// or observation names cannot be recovered from the CSV alone.
void save_dataset(const CategoricalDataset& data, const std::filesystem::path& path);

struct LabelFile {
  std::vector<std::string> obs_names;
  std::vector<int> labels;
};

/// Labels CSV: header "obs,cluster", one (obs_name, cluster_index) per row.
LabelFile load_labels(const std::filesystem::path& path);
void save_labels(std::span<const int> labels, const std::filesystem::path& path,
                 std::span<const std::string> obs_names = {});

/// Single-column boolean mask CSV (header "variable,relevant"; 0/1 cells).
std::vector<bool> load_mask(const std::filesystem::path& path);
void save_mask(const std::vector<bool>& mask, const std::filesystem::path& path,
               std::span<const std::string> names = {});

}  // namespace catmix
