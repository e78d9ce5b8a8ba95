#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "catmix/model.hpp"

namespace catmix {

struct MetricReport {
  double ari = 0.0;
  std::size_t n_clusters_found = 0;
  std::size_t n_clusters_true = 0;
  std::optional<double> f1;
  std::optional<double> precision;
  std::optional<double> recall;
};

struct SelectionScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct Correlation {
  double r = 0.0;
  double p_value = 1.0;
};

/// Adjusted Rand index under the permutation model. Returns 1 when both
/// partitions are trivial and the adjustment denominator vanishes. Throws
/// InputError on a length mismatch or fewer than two observations.
double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b);

/// Precision and recall of `selected` against `truth`; every score is 0 when
/// there is no true positive.
SelectionScore f1_selection(const std::vector<bool>& selected, const std::vector<bool>& truth);

/// Pearson correlation with a two-sided t-test on n - 2 degrees of freedom.
/// Throws DegenerateError when either series has zero variance.
Correlation pearson(const std::vector<double>& x, const std::vector<double>& y);

/// Correlation between each fit's final ELBO and its ARI against `truth`.
Correlation elbo_ari_report(const std::vector<FitResult>& fits, const std::vector<int>& truth);

std::size_t count_nonempty(const std::vector<int>& labels);

MetricReport evaluate_labels(const std::vector<int>& labels, const std::vector<int>& truth);

nlohmann::json to_json(const MetricReport& report);
/// Header line plus one data row.
std::string to_csv(const MetricReport& report);

}  // namespace catmix
