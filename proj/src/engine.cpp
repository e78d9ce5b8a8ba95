#include "catmix/model.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <string>

#include "catmix/error.hpp"
#include "catmix/kmodes.hpp"
#include "catmix/special.hpp"

namespace catmix {

namespace {

// Table of E[ln phi_kjl] = psi(eps*_kjl) - psi(sum_l eps*_kjl), laid out like eps_star.
Matrix<double> expected_log_profiles(const VariationalState& state) {
  const auto& layout = state.layout;
  const std::size_t K = state.n_clusters();
  Matrix<double> elog(layout.total(), K);
  std::vector<double> totals(K);
  for (std::size_t j = 0; j < layout.n_vars(); ++j) {
    std::fill(totals.begin(), totals.end(), 0.0);
    for (std::size_t l = 0; l < layout.categories(j); ++l) {
      const auto src = state.eps_star.row(layout.slot(j, l));
      for (std::size_t k = 0; k < K; ++k) totals[k] += src[k];
    }
    for (auto& t : totals) t = digamma(t);
    for (std::size_t l = 0; l < layout.categories(j); ++l) {
      const auto src = state.eps_star.row(layout.slot(j, l));
      auto dst = elog.row(layout.slot(j, l));
      for (std::size_t k = 0; k < K; ++k) dst[k] = digamma(src[k]) - totals[k];
    }
  }
  return elog;
}

bool uses_null(const VariationalState& state) {
  return std::any_of(state.c.begin(), state.c.end(), [](double c) { return c < 1.0; });
}

void require_finite(long double value, const char* term, std::size_t iter) {
  if (!std::isfinite(static_cast<double>(value)))
    throw NumericalError(std::string("non-finite ELBO term '") + term + "' at iteration " +
                         std::to_string(iter));
}

// Expected log-likelihood of column j under the null profile, summed over rows.
double null_column_loglik(const NullModel& null, std::size_t j) {
  if (j >= null.column_loglik.size())
    throw ConfigError("variable selection requires the precomputed null model");
  return null.column_loglik[j];
}

}  // namespace

void ModelConfig::validate() const {
  if (k_max < 1) throw ConfigError("k_max must be at least 1");
  if (!(alpha0 > 0.0) || !std::isfinite(alpha0)) throw ConfigError("alpha0 must be positive");
  if (!(a > 0.0) || !std::isfinite(a)) throw ConfigError("a must be positive");
  if (max_iter == 0) throw ConfigError("max_iter must be at least 1");
  if (!(elbo_tol > 0.0)) throw ConfigError("elbo_tol must be positive");
}

CategoryLayout::CategoryLayout(const std::vector<std::size_t>& categories) {
  offsets_.assign(categories.size() + 1, 0);
  for (std::size_t j = 0; j < categories.size(); ++j) offsets_[j + 1] = offsets_[j] + categories[j];
}

NullModel precompute_null(const CategoricalDataset& data) {
  const std::size_t N = data.n_obs();
  NullModel null;
  null.phi0.resize(data.n_vars());
  null.column_loglik.assign(data.n_vars(), 0.0);
  for (std::size_t j = 0; j < data.n_vars(); ++j) {
    const std::size_t L = data.categories(j);
    const double eps = 1.0 / static_cast<double>(L);
    std::vector<double> counts(L, 0.0);
    for (std::size_t n = 0; n < N; ++n) counts[data(n, j)] += 1.0;
    auto& phi = null.phi0[j];
    phi.resize(L);
    const double denom = static_cast<double>(L) * eps + static_cast<double>(N);
    for (std::size_t l = 0; l < L; ++l) {
      phi[l] = (eps + counts[l]) / denom;
      null.column_loglik[j] += counts[l] * std::log(phi[l]);
    }
  }
  return null;
}

std::vector<double> expected_log_weights(const std::vector<double>& alpha_star) {
  const double total = digamma(std::accumulate(alpha_star.begin(), alpha_star.end(), 0.0));
  std::vector<double> out(alpha_star.size());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = digamma(alpha_star[k]) - total;
  return out;
}

double inclusion_probability(double log_eta1, double log_eta2) {
  const double top = std::max(log_eta1, log_eta2);
  const double e1 = std::exp(log_eta1 - top);
  const double e2 = std::exp(log_eta2 - top);
  return e1 / (e1 + e2);
}

std::vector<int> hard_labels(const Matrix<double>& resp) {
  std::vector<int> labels(resp.rows());
  for (std::size_t n = 0; n < resp.rows(); ++n) {
    const auto r = resp.row(n);
    std::size_t best = 0;
    for (std::size_t k = 1; k < r.size(); ++k)
      if (r[k] > r[best]) best = k;
    labels[n] = static_cast<int>(best);
  }
  return labels;
}

VariationalState init_state(const CategoricalDataset& data, const ModelConfig& config,
                            const std::vector<int>& labels) {
  config.validate();
  const std::size_t N = data.n_obs();
  const std::size_t K = config.k_max;
  if (labels.size() != N) throw InputError("initial labels do not match the number of rows");

  VariationalState s;
  s.layout = CategoryLayout(data.categories());
  s.resp = Matrix<double>(N, K, 0.0);
  s.log_rho = Matrix<double>(N, K, 0.0);
  for (std::size_t n = 0; n < N; ++n) {
    if (labels[n] < 0 || static_cast<std::size_t>(labels[n]) >= K)
      throw InputError("initial label " + std::to_string(labels[n]) + " outside 0..k_max-1");
    s.resp(n, static_cast<std::size_t>(labels[n])) = 1.0;
  }
  const std::size_t P = data.n_vars();
  s.c.assign(P, 1.0);
  s.eta1.assign(P, 0.0);
  s.eta2.assign(P, 0.0);
  s.delta_post.assign(P, {1.0 + config.a, config.a});
  m_step_pi(s, config);
  m_step_phi(data, s, config);
  return s;
}

void e_step(const CategoricalDataset& data, VariationalState& state, const NullModel& null,
            const ModelConfig& config) {
  (void)config;
  const std::size_t N = data.n_obs();
  const std::size_t P = data.n_vars();
  const std::size_t K = state.n_clusters();
  const auto& layout = state.layout;

  // Per-slot contribution to ln rho: c_j E[ln phi] + (1 - c_j) ln phi0.
  Matrix<double> weight = expected_log_profiles(state);
  if (uses_null(state)) {
    for (std::size_t j = 0; j < P; ++j) {
      const double c = state.c[j];
      if (c >= 1.0) continue;
      if (j >= null.phi0.size())
        throw ConfigError("variable selection requires the precomputed null model");
      for (std::size_t l = 0; l < layout.categories(j); ++l) {
        const double log_null = std::log(null.phi0[j][l]);
        for (auto& w : weight.row(layout.slot(j, l))) w = c * w + (1.0 - c) * log_null;
      }
    }
  }
  const auto elog_pi = expected_log_weights(state.alpha_star);

  for (std::size_t n = 0; n < N; ++n) {
    auto lr = state.log_rho.row(n);
    std::copy(elog_pi.begin(), elog_pi.end(), lr.begin());
    const auto x = data.row(n);
    for (std::size_t j = 0; j < P; ++j) {
      const double* w = weight.row(layout.slot(j, x[j])).data();
      for (std::size_t k = 0; k < K; ++k) lr[k] += w[k];
    }
    const double top = *std::max_element(lr.begin(), lr.end());
    if (!std::isfinite(top))
      throw NumericalError("non-finite log responsibility for observation " + std::to_string(n) +
                           " at iteration " + std::to_string(state.iter_count));
    auto r = state.resp.row(n);
    double total = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
      r[k] = std::exp(lr[k] - top);
      total += r[k];
    }
    for (auto& v : r) v /= total;
  }
}

void m_step_pi(VariationalState& state, const ModelConfig& config) {
  const std::size_t K = state.resp.cols();
  state.alpha_star.assign(K, config.alpha0);
  for (std::size_t n = 0; n < state.resp.rows(); ++n) {
    const auto r = state.resp.row(n);
    for (std::size_t k = 0; k < K; ++k) state.alpha_star[k] += r[k];
  }
}

void m_step_phi(const CategoricalDataset& data, VariationalState& state,
                const ModelConfig& config) {
  const std::size_t K = state.resp.cols();
  const auto& layout = state.layout;
  state.counts = Matrix<double>(layout.total(), K, 0.0);
  for (std::size_t n = 0; n < data.n_obs(); ++n) {
    const auto r = state.resp.row(n);
    const auto x = data.row(n);
    for (std::size_t j = 0; j < data.n_vars(); ++j) {
      auto dst = state.counts.row(layout.slot(j, x[j]));
      for (std::size_t k = 0; k < K; ++k) dst[k] += r[k];
    }
  }
  state.eps_star = Matrix<double>(layout.total(), K);
  for (std::size_t j = 0; j < data.n_vars(); ++j) {
    const double eps = config.epsilon(layout.categories(j));
    const double c = state.c[j];
    for (std::size_t l = 0; l < layout.categories(j); ++l) {
      const auto src = state.counts.row(layout.slot(j, l));
      auto dst = state.eps_star.row(layout.slot(j, l));
      for (std::size_t k = 0; k < K; ++k) dst[k] = eps + c * src[k];
    }
  }
}

void m_step_gamma_delta(const CategoricalDataset& data, VariationalState& state,
                        const NullModel& null, const ModelConfig& config) {
  if (!config.variable_selection)
    throw ConfigError("gamma/delta update called without variable selection");
  const std::size_t K = state.n_clusters();
  const auto& layout = state.layout;
  const auto elog = expected_log_profiles(state);
  for (std::size_t j = 0; j < data.n_vars(); ++j) {
    double fitted = 0.0;
    for (std::size_t l = 0; l < layout.categories(j); ++l) {
      const auto cnt = state.counts.row(layout.slot(j, l));
      const auto el = elog.row(layout.slot(j, l));
      for (std::size_t k = 0; k < K; ++k) fitted += cnt[k] * el[k];
    }
    const auto [b1, b2] = state.delta_post[j];
    const double psi_total = digamma(b1 + b2);
    state.eta1[j] = fitted + digamma(b1) - psi_total;
    state.eta2[j] = null_column_loglik(null, j) + digamma(b2) - psi_total;
    state.c[j] = inclusion_probability(state.eta1[j], state.eta2[j]);
    state.delta_post[j] = {state.c[j] + config.a, 1.0 - state.c[j] + config.a};
  }
}

// The ELBO is E_q[ln p(X, Z, pi, Phi, gamma, delta)] - E_q[ln q]. Expected log
// densities that share an expectation are grouped so the large cross terms
// cancel analytically; each group's coefficient on E[ln theta] vanishes at the
// coordinate optimum:
//
//   weights    sum_k (N_k + alpha0 - alpha*_k) E[ln pi_k]
//              + ln G(K alpha0) - K ln G(alpha0) - ln G(sum alpha*) + sum ln G(alpha*_k)
//   profiles   sum_kj [ sum_l (c_j Ntilde_kjl + eps_j - eps*_kjl) E[ln phi_kjl]
//              + ln G(L_j eps_j) - L_j ln G(eps_j) - ln G(sum_l eps*_kjl) + sum_l ln G(eps*_kjl) ]
//   null data  sum_j (1 - c_j) sum_n ln phi0_j,x_nj
//   entropy Z  - sum_nk r_nk ln r_nk
//   selection  sum_j (c_j + a - b1_j) E[ln delta_j] + (1 - c_j + a - b2_j) E[ln(1 - delta_j)]
//              - ln B(a, a) + ln B(b1_j, b2_j) - c_j ln c_j - (1 - c_j) ln(1 - c_j)
//
// with Ntilde the raw category counts and (b1, b2) the Beta posterior of delta.
double compute_elbo(const CategoricalDataset& data, const VariationalState& state,
                    const NullModel& null, const ModelConfig& config) {
  const std::size_t N = data.n_obs();
  const std::size_t K = state.n_clusters();
  const auto& layout = state.layout;
  const std::size_t iter = state.iter_count;

  std::vector<double> nk(K, 0.0);
  long double entropy = 0.0L;
  for (std::size_t n = 0; n < N; ++n) {
    const auto r = state.resp.row(n);
    for (std::size_t k = 0; k < K; ++k) {
      nk[k] += r[k];
      if (r[k] > 0.0) entropy -= static_cast<long double>(r[k]) * std::log(r[k]);
    }
  }
  require_finite(entropy, "allocation entropy", iter);

  const auto elog_pi = expected_log_weights(state.alpha_star);
  const double Kd = static_cast<double>(K);
  long double weights = log_gamma(Kd * config.alpha0) - Kd * log_gamma(config.alpha0) -
                        log_gamma(std::accumulate(state.alpha_star.begin(),
                                                  state.alpha_star.end(), 0.0));
  for (std::size_t k = 0; k < K; ++k) {
    weights += log_gamma(state.alpha_star[k]);
    weights += (nk[k] + config.alpha0 - state.alpha_star[k]) * elog_pi[k];
  }
  require_finite(weights, "mixture weights", iter);

  const auto elog = expected_log_profiles(state);
  long double profiles = 0.0L;
  long double null_data = 0.0L;
  std::vector<double> totals(K);
  for (std::size_t j = 0; j < layout.n_vars(); ++j) {
    const std::size_t L = layout.categories(j);
    const double eps = config.epsilon(L);
    const double c = state.c[j];
    profiles += Kd * (log_gamma(static_cast<double>(L) * eps) - static_cast<double>(L) * log_gamma(eps));
    std::fill(totals.begin(), totals.end(), 0.0);
    for (std::size_t l = 0; l < L; ++l) {
      const auto e = state.eps_star.row(layout.slot(j, l));
      const auto cnt = state.counts.row(layout.slot(j, l));
      const auto el = elog.row(layout.slot(j, l));
      for (std::size_t k = 0; k < K; ++k) {
        totals[k] += e[k];
        profiles += log_gamma(e[k]);
        profiles += (c * cnt[k] + eps - e[k]) * el[k];
      }
    }
    for (std::size_t k = 0; k < K; ++k) profiles -= log_gamma(totals[k]);
    if (c < 1.0) null_data += (1.0 - c) * null_column_loglik(null, j);
  }
  require_finite(profiles, "cluster profiles", iter);
  require_finite(null_data, "null data", iter);

  long double selection = 0.0L;
  if (config.variable_selection && !config.freeze_selection) {
    const double prior = log_beta(config.a, config.a);
    for (std::size_t j = 0; j < layout.n_vars(); ++j) {
      const double c = state.c[j];
      const auto [b1, b2] = state.delta_post[j];
      const double psi_total = digamma(b1 + b2);
      const double elog_d = digamma(b1) - psi_total;
      const double elog_1md = digamma(b2) - psi_total;
      selection += (c + config.a - b1) * elog_d + (1.0 - c + config.a - b2) * elog_1md;
      selection += log_beta(b1, b2) - prior;
      if (c > 0.0) selection -= c * std::log(c);
      if (c < 1.0) selection -= (1.0 - c) * std::log1p(-c);
    }
    require_finite(selection, "variable selection", iter);
  }

  return static_cast<double>(weights + profiles + null_data + entropy + selection);
}

FitResult fit_from_labels(const CategoricalDataset& data, const ModelConfig& config,
                          const std::vector<int>& initial_labels) {
  const auto start = std::chrono::steady_clock::now();
  config.validate();
  const bool selecting = config.variable_selection;
  const NullModel null = selecting ? precompute_null(data) : NullModel{};

  FitResult res;
  res.config = config;
  res.state = init_state(data, config, initial_labels);
  auto& s = res.state;
  for (s.iter_count = 1; s.iter_count <= config.max_iter; ++s.iter_count) {
    e_step(data, s, null, config);
    m_step_pi(s, config);
    m_step_phi(data, s, config);
    if (selecting && !config.freeze_selection) m_step_gamma_delta(data, s, null, config);
    const double elbo = compute_elbo(data, s, null, config);
    const bool done = !s.elbo_trace.empty() && std::abs(elbo - s.elbo_trace.back()) < config.elbo_tol;
    s.elbo_trace.push_back(elbo);
    if (done) {
      res.converged = true;
      break;
    }
  }
  s.iter_count = std::min(s.iter_count, config.max_iter);

  res.labels = hard_labels(s.resp);
  res.elbo = s.elbo_trace.back();
  std::vector<bool> used(config.k_max, false);
  for (int l : res.labels) used[static_cast<std::size_t>(l)] = true;
  res.n_nonempty = static_cast<std::size_t>(std::count(used.begin(), used.end(), true));
  res.selected_c = s.c;
  res.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return res;
}

FitResult fit(const CategoricalDataset& data, const ModelConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  config.validate();
  if (config.k_max > data.n_obs())
    throw ConfigError("k_max = " + std::to_string(config.k_max) + " exceeds N = " +
                      std::to_string(data.n_obs()));
  const auto init = init_kmodes(data, config.k_max, config.seed, config.kmodes_restarts);
  auto res = fit_from_labels(data, config, init);
  res.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return res;
}

}  // namespace catmix
