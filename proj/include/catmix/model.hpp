#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "catmix/dataset.hpp"
#include "catmix/matrix.hpp"

namespace catmix {

/// Priors and run controls for one variational fit.
///
/// The Dirichlet prior on each cluster profile is fixed at 1/L_j per
/// category; it is not a tunable.
struct ModelConfig {
  std::size_t k_max = 20;       // overfitted cluster cap
  double alpha0 = 0.05;         // symmetric Dirichlet prior on mixture weights
  double a = 2.0;               // Beta(a, a) prior on the inclusion probability
  bool variable_selection = false;
  std::size_t max_iter = 2000;
  double elbo_tol = 1e-6;       // absolute change in ELBO between iterations
  std::uint64_t seed = 0;
  std::size_t kmodes_restarts = 5;
  /// Diagnostic: run the selection-weighted updates with every c_j pinned at 1
  /// and no gamma/delta step. Reproduces the plain model bit for bit.
  bool freeze_selection = false;

  /// Throws ConfigError. Allows k_max = 1 (a single Dirichlet-categorical).
  void validate() const;
  double epsilon(std::size_t n_categories) const { return 1.0 / static_cast<double>(n_categories); }
};

/// Cluster-independent category probabilities used for deselected variables.
struct NullModel {
  std::vector<std::vector<double>> phi0;  // per variable, length L_j
  std::vector<double> column_loglik;      // sum_n log phi0[j][x_nj]
};

/// Posterior-mean estimate of each column's category distribution under the
/// Dirichlet(1/L_j) prior: (1/L_j + count) / (1 + N).
NullModel precompute_null(const CategoricalDataset& data);

/// Flattened (variable, category) index: slot(j, l) = offset(j) + l.
class CategoryLayout {
 public:
  CategoryLayout() = default;
  explicit CategoryLayout(const std::vector<std::size_t>& categories);

  std::size_t offset(std::size_t j) const { return offsets_[j]; }
  std::size_t slot(std::size_t j, std::size_t l) const { return offsets_[j] + l; }
  std::size_t total() const { return offsets_.back(); }
  std::size_t n_vars() const { return offsets_.size() - 1; }
  std::size_t categories(std::size_t j) const { return offsets_[j + 1] - offsets_[j]; }

 private:
  std::vector<std::size_t> offsets_{0};
};

/// Mean-field variational parameters.
///
/// Per-(cluster, variable, category) quantities are stored as
/// (total categories) x K matrices indexed by CategoryLayout::slot, so that a
/// single observation touches K contiguous values per variable.
struct VariationalState {
  CategoryLayout layout;
  Matrix<double> resp;     // N x K, rows sum to 1
  Matrix<double> log_rho;  // N x K, unnormalised log responsibilities
  std::vector<double> alpha_star;
  Matrix<double> eps_star;  // slot x K
  Matrix<double> counts;    // slot x K, sum_n r_nk 1[x_nj = l] (not weighted by c)
  std::vector<double> c;
  std::vector<double> eta1;  // log domain
  std::vector<double> eta2;  // log domain
  std::vector<std::pair<double, double>> delta_post;
  std::vector<double> elbo_trace;
  std::size_t iter_count = 0;

  std::size_t n_clusters() const { return alpha_star.size(); }
  double eps(std::size_t k, std::size_t j, std::size_t l) const {
    return eps_star(layout.slot(j, l), k);
  }
};

struct FitResult {
  std::vector<int> labels;
  VariationalState state;
  double elbo = 0.0;
  std::size_t n_nonempty = 0;
  std::vector<double> selected_c;
  ModelConfig config;
  double wall_time = 0.0;
  bool converged = false;
};

/// State from hard initial labels: one-hot responsibilities, every c_j = 1,
/// delta at Beta(1 + a, a), followed by the pi and Phi updates.
VariationalState init_state(const CategoricalDataset& data, const ModelConfig& config,
                            const std::vector<int>& labels);

/// Responsibility update. `null` is read only for variables with c_j < 1.
void e_step(const CategoricalDataset& data, VariationalState& state, const NullModel& null,
            const ModelConfig& config);
void m_step_pi(VariationalState& state, const ModelConfig& config);
void m_step_phi(const CategoricalDataset& data, VariationalState& state,
                const ModelConfig& config);
/// Inclusion-probability and delta update. Requires variable_selection.
void m_step_gamma_delta(const CategoricalDataset& data, VariationalState& state,
                        const NullModel& null, const ModelConfig& config);

/// Evidence lower bound of the current state; see engine.cpp for the terms.
double compute_elbo(const CategoricalDataset& data, const VariationalState& state,
                    const NullModel& null, const ModelConfig& config);

/// E[ln pi_k] under Dirichlet(alpha_star).
std::vector<double> expected_log_weights(const std::vector<double>& alpha_star);

/// c = eta1 / (eta1 + eta2) from log-domain evidences, with max-subtraction.
double inclusion_probability(double log_eta1, double log_eta2);

/// Hard labels: argmax of each responsibility row, lowest index on ties.
std::vector<int> hard_labels(const Matrix<double>& resp);

/// k-modes initialisation followed by CAVI until |delta ELBO| < elbo_tol or
/// max_iter. Hitting max_iter is reported through FitResult::converged.
FitResult fit(const CategoricalDataset& data, const ModelConfig& config);

/// As fit(), but starting from the given hard labels instead of k-modes.
FitResult fit_from_labels(const CategoricalDataset& data, const ModelConfig& config,
                          const std::vector<int>& initial_labels);

}  // namespace catmix
