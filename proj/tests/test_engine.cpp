#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

#include <boost/math/special_functions/digamma.hpp>

#include "catmix/error.hpp"
#include "catmix/kmodes.hpp"
#include "catmix/metrics.hpp"
#include "catmix/model.hpp"
#include "catmix/random.hpp"
#include "catmix/simulate.hpp"
#include "catmix/special.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace catmix;

namespace {

CategoricalDataset dataset(std::vector<std::vector<Category>> rows, std::vector<std::size_t> cats) {
  Matrix<Category> values(rows.size(), cats.size());
  for (std::size_t n = 0; n < rows.size(); ++n)
    for (std::size_t j = 0; j < cats.size(); ++j) values(n, j) = rows[n][j];
  return {std::move(values), std::move(cats)};
}

CategoricalDataset random_dataset(std::mt19937_64& rng, std::size_t n, std::size_t p, std::size_t L) {
  Matrix<Category> values(n, p);
  for (auto& v : values.data()) v = static_cast<Category>(rng() % L);
  return {std::move(values), std::vector<std::size_t>(p, L)};
}

bool monotone(const std::vector<double>& trace, double slack = 1e-6) {
  for (std::size_t i = 1; i < trace.size(); ++i)
    if (trace[i] < trace[i - 1] - slack) return false;
  return true;
}

}  // namespace

TEST_CASE("digamma matches reference values") {
  // Frozen from scipy.special.digamma.
  CHECK(digamma(1.0) == doctest::Approx(-0.5772156649015329).epsilon(1e-14));
  CHECK(digamma(0.05) == doctest::Approx(-20.49784499129987).epsilon(1e-14));
  CHECK(digamma(7.3) == doctest::Approx(1.917820335637986).epsilon(1e-14));
  CHECK(digamma(123.4) == doctest::Approx(4.8113737751162775).epsilon(1e-14));
  CHECK(digamma(1e-3) == doctest::Approx(-1000.5755719318103).epsilon(1e-14));
  for (double x = 0.01; x < 500; x *= 1.37)
    CHECK(std::abs(digamma(x) - boost::math::digamma(x)) <= 1e-13 * std::max(1.0, std::abs(digamma(x))));
  CHECK(std::isnan(digamma(0.0)));
}

TEST_CASE("precompute_null gives the posterior-mean column profile") {
  const auto balanced = dataset({{0}, {0}, {1}, {1}}, {2});
  auto null = precompute_null(balanced);
  CHECK(null.phi0[0][0] == doctest::Approx(0.5));
  CHECK(null.phi0[0][1] == doctest::Approx(0.5));

  const auto zeros = dataset({{0}, {0}, {0}}, {2});
  null = precompute_null(zeros);
  CHECK(null.phi0[0][0] == doctest::Approx(0.875));
  CHECK(null.phi0[0][1] == doctest::Approx(0.125));

  std::mt19937_64 rng(1);
  const auto data = random_dataset(rng, 30, 6, 4);
  null = precompute_null(data);
  for (const auto& phi : null.phi0) {
    CHECK(std::accumulate(phi.begin(), phi.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-14));
    for (double v : phi) CHECK(v > 0.0);
  }
}

TEST_CASE("k-modes initialisation") {
  std::vector<std::vector<Category>> rows;
  for (int i = 0; i < 10; ++i) rows.push_back({0, 0, 0, 0, 0, 0});
  for (int i = 0; i < 10; ++i) rows.push_back({1, 1, 1, 1, 1, 1});
  rows[3][2] = 1;
  rows[14][0] = 0;
  const auto blocks = dataset(rows, std::vector<std::size_t>(6, 2));
  std::vector<int> truth(20, 0);
  std::fill(truth.begin() + 10, truth.end(), 1);
  CHECK(adjusted_rand_index(init_kmodes(blocks, 2, 7), truth) == 1.0);
  CHECK(init_kmodes(blocks, 1, 7) == std::vector<int>(20, 0));

  std::mt19937_64 rng(3);
  const auto data = random_dataset(rng, 15, 5, 3);
  const auto full = kmodes(data, 15, 99);
  CHECK(full.cost == 0);
  CHECK_THROWS_AS(init_kmodes(data, 16, 1), ConfigError);
  CHECK_THROWS_AS(init_kmodes(data, 0, 1), ConfigError);
  CHECK(init_kmodes(data, 4, 5) == init_kmodes(data, 4, 5));
}

TEST_CASE("e_step responsibilities") {
  ModelConfig cfg;
  cfg.k_max = 2;
  NullModel none;

  SUBCASE("identical clusters split evenly") {
    std::mt19937_64 rng(4);
    const auto data = random_dataset(rng, 12, 3, 2);
    auto s = init_state(data, cfg, std::vector<int>(12, 0));
    for (std::size_t slot = 0; slot < s.eps_star.rows(); ++slot) s.eps_star(slot, 1) = s.eps_star(slot, 0);
    s.alpha_star = {3.0, 3.0};
    e_step(data, s, none, cfg);
    for (std::size_t n = 0; n < 12; ++n) {
      CHECK(s.resp(n, 0) == doctest::Approx(0.5));
      CHECK(s.resp(n, 1) == doctest::Approx(0.5));
    }
  }

  SUBCASE("one component takes everything") {
    std::mt19937_64 rng(5);
    const auto data = random_dataset(rng, 8, 3, 3);
    ModelConfig one;
    one.k_max = 1;
    auto s = init_state(data, one, std::vector<int>(8, 0));
    e_step(data, s, none, one);
    for (std::size_t n = 0; n < 8; ++n) CHECK(s.resp(n, 0) == 1.0);
  }

  SUBCASE("hand-evaluated single observation") {
    // alpha* = (1, 1); eps* = (2, 1) and (1, 2); x = 0. Reference value from
    // an independent scalar evaluation with scipy's digamma.
    const auto data = dataset({{0}}, {2});
    auto s = init_state(data, cfg, {0});
    s.alpha_star = {1.0, 1.0};
    s.eps_star(s.layout.slot(0, 0), 0) = 2.0;
    s.eps_star(s.layout.slot(0, 1), 0) = 1.0;
    s.eps_star(s.layout.slot(0, 0), 1) = 1.0;
    s.eps_star(s.layout.slot(0, 1), 1) = 2.0;
    e_step(data, s, none, cfg);
    CHECK(std::abs(s.resp(0, 0) - 0.7310585786300049) < 1e-12);
    CHECK(std::abs(s.resp(0, 1) - 0.2689414213699951) < 1e-12);
  }

  SUBCASE("non-finite parameters are reported") {
    const auto data = dataset({{0}, {1}}, {2});
    auto s = init_state(data, cfg, {0, 1});
    s.eps_star(0, 0) = std::nan("");
    CHECK_THROWS_AS(e_step(data, s, none, cfg), NumericalError);
  }
}

TEST_CASE("m_step_pi") {
  ModelConfig cfg;
  cfg.k_max = 3;
  Matrix<double> resp(100, 3, 0.0);
  for (std::size_t n = 0; n < 100; ++n) resp(n, 0) = 1.0;
  VariationalState s;
  s.resp = resp;
  m_step_pi(s, cfg);
  CHECK(s.alpha_star[0] == doctest::Approx(100.05));
  CHECK(s.alpha_star[1] == doctest::Approx(0.05));

  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0, 1);
  for (std::size_t n = 0; n < 100; ++n) {
    double t = 0;
    for (auto& v : s.resp.row(n)) t += v = u(rng);
    for (auto& v : s.resp.row(n)) v /= t;
  }
  m_step_pi(s, cfg);
  CHECK(std::accumulate(s.alpha_star.begin(), s.alpha_star.end(), 0.0) ==
        doctest::Approx(3 * 0.05 + 100).epsilon(1e-12));
}

TEST_CASE("m_step_phi") {
  std::mt19937_64 rng(12);
  const auto data = random_dataset(rng, 20, 3, 3);
  ModelConfig cfg;
  cfg.k_max = 4;
  std::vector<int> labels(20);
  for (std::size_t n = 0; n < 20; ++n) labels[n] = static_cast<int>(n % 4);
  auto s = init_state(data, cfg, labels);

  SUBCASE("hard assignments give within-cluster counts") {
    for (std::size_t k = 0; k < 4; ++k)
      for (std::size_t j = 0; j < 3; ++j)
        for (Category l = 0; l < 3; ++l) {
          double count = 0;
          for (std::size_t n = 0; n < 20; ++n) count += labels[n] == int(k) && data(n, j) == l;
          CHECK(s.eps(k, j, l) == doctest::Approx(1.0 / 3 + count));
        }
  }

  SUBCASE("soft counts sum to c_j times the cluster mass") {
    std::uniform_real_distribution<double> u(0, 1);
    for (std::size_t n = 0; n < 20; ++n) {
      double t = 0;
      for (auto& v : s.resp.row(n)) t += v = u(rng);
      for (auto& v : s.resp.row(n)) v /= t;
    }
    s.c = {1.0, 0.3, 0.0};
    m_step_phi(data, s, cfg);
    for (std::size_t k = 0; k < 4; ++k) {
      double mass = 0;
      for (std::size_t n = 0; n < 20; ++n) mass += s.resp(n, k);
      for (std::size_t j = 0; j < 3; ++j) {
        double brute = 0;
        for (Category l = 0; l < 3; ++l)
          for (std::size_t n = 0; n < 20; ++n)
            if (data(n, j) == l) brute += s.resp(n, k) * s.c[j];
        double stored = 0;
        for (Category l = 0; l < 3; ++l) stored += s.eps(k, j, l) - 1.0 / 3;
        CHECK(stored == doctest::Approx(brute).epsilon(1e-12));
        CHECK(stored == doctest::Approx(s.c[j] * mass).epsilon(1e-12));
      }
    }
    for (Category l = 0; l < 3; ++l) CHECK(s.eps(2, 2, l) == 1.0 / 3);
  }
}

TEST_CASE("m_step_gamma_delta") {
  CHECK(inclusion_probability(-12.5, -12.5) == 0.5);
  CHECK(inclusion_probability(-1e6, -1e6 - 50) == doctest::Approx(1.0));
  CHECK(inclusion_probability(-1e6 - 800, -1e6) == 0.0);

  std::mt19937_64 rng(2);
  const auto data = random_dataset(rng, 10, 2, 2);
  ModelConfig cfg;
  cfg.k_max = 2;
  auto s = init_state(data, cfg, std::vector<int>(10, 0));
  const auto null = precompute_null(data);
  CHECK_THROWS_AS(m_step_gamma_delta(data, s, null, cfg), ConfigError);

  // The initial inclusion posterior with c = 1 and a = 2 is Beta(3, 2).
  CHECK(s.delta_post[0].first == 3.0);
  CHECK(s.delta_post[0].second == 2.0);
  const auto [b1, b2] = s.delta_post[0];
  CHECK(b1 / (b1 + b2) == doctest::Approx(0.6));
  // Frozen from scipy: psi(3) - psi(5) = -7/12.
  CHECK(digamma(b1) - digamma(b1 + b2) == doctest::Approx(-0.5833333333333331).epsilon(1e-14));

  cfg.variable_selection = true;
  m_step_gamma_delta(data, s, null, cfg);
  for (std::size_t j = 0; j < 2; ++j) {
    CHECK(s.c[j] >= 0.0);
    CHECK(s.c[j] <= 1.0);
    CHECK(s.delta_post[j].first == doctest::Approx(s.c[j] + 2.0));
    CHECK(s.delta_post[j].second == doctest::Approx(1.0 - s.c[j] + 2.0));
  }
}

TEST_CASE("one-component ELBO equals the Dirichlet-categorical evidence") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 10; ++trial) {
    const auto data = random_dataset(rng, 3 + rng() % 20, 1 + rng() % 4, 2 + rng() % 3);
    ModelConfig cfg;
    cfg.k_max = 1;
    const auto res = fit_from_labels(data, cfg, std::vector<int>(data.n_obs(), 0));
    double exact = 0;
    for (std::size_t j = 0; j < data.n_vars(); ++j) {
      std::vector<double> counts(data.categories(j), 0);
      for (std::size_t n = 0; n < data.n_obs(); ++n) counts[data(n, j)] += 1;
      exact += oracle::log_dirichlet_categorical(counts, 1.0 / data.categories(j));
    }
    CHECK(std::abs(res.elbo - exact) < 1e-8);
  }
}

TEST_CASE("ELBO stays below the exact evidence") {
  const auto data = dataset({{0, 1}, {0, 1}, {1, 0}}, {2, 2});
  ModelConfig cfg;
  cfg.k_max = 2;
  const double evidence = oracle::exact_log_evidence(data, 2, cfg.alpha0);
  for (std::vector<int> init : {std::vector<int>{0, 0, 1}, {0, 1, 1}, {0, 0, 0}, {1, 0, 1}}) {
    const auto res = fit_from_labels(data, cfg, init);
    CHECK(res.elbo <= evidence + 1e-12);
    CHECK(monotone(res.state.elbo_trace));
  }
}

TEST_CASE("fit is monotone, normalised and deterministic") {
  for (const char* preset : {"sim2.1", "sim2.5"}) {
    const auto& p = find_preset(preset);
    auto design = make_design(p, 5);
    const auto sim = simulate(design);
    ModelConfig cfg;
    cfg.k_max = 15;
    cfg.variable_selection = p.n_relevant < p.n_vars;
    cfg.seed = 77;
    const auto a = fit(sim.data, cfg);
    CHECK(monotone(a.state.elbo_trace));
    for (std::size_t n = 0; n < a.state.resp.rows(); ++n) {
      double t = 0;
      for (double v : a.state.resp.row(n)) {
        CHECK(v >= 0.0);
        t += v;
      }
      CHECK(std::abs(t - 1.0) < 1e-9);
    }
    for (std::size_t k = 0; k < cfg.k_max; ++k) CHECK(a.state.alpha_star[k] >= cfg.alpha0);
    for (double c : a.selected_c) CHECK((c >= 0.0 && c <= 1.0));
    CHECK(a.n_nonempty == count_nonempty(a.labels));
    CHECK(a.n_nonempty <= cfg.k_max);
    CHECK(a.labels == hard_labels(a.state.resp));

    const auto b = fit(sim.data, cfg);
    CHECK(a.labels == b.labels);
    CHECK(a.state.elbo_trace == b.state.elbo_trace);
    CHECK(a.selected_c == b.selected_c);
  }
}

TEST_CASE("hard labels break ties toward the lowest cluster") {
  Matrix<double> resp(2, 3, 0.0);
  resp(0, 1) = resp(0, 2) = 0.5;
  resp(1, 0) = resp(1, 1) = resp(1, 2) = 1.0 / 3;
  CHECK(hard_labels(resp) == std::vector<int>{1, 0});
}

TEST_CASE("frozen selection reproduces the plain model bit for bit") {
  const auto sim = simulate(make_design(find_preset("sim2.4"), 8));
  ModelConfig plain;
  plain.k_max = 12;
  plain.seed = 3;
  ModelConfig frozen = plain;
  frozen.variable_selection = true;
  frozen.freeze_selection = true;
  const auto a = fit(sim.data, plain);
  const auto b = fit(sim.data, frozen);
  CHECK(a.labels == b.labels);
  CHECK(a.state.resp == b.state.resp);
  CHECK(a.state.elbo_trace == b.state.elbo_trace);
}

TEST_CASE("permuting rows permutes the labels") {
  const auto sim = simulate(make_design(find_preset("sim3.1"), 4));
  ModelConfig cfg;
  cfg.k_max = 12;
  const auto init = init_kmodes(sim.data, cfg.k_max, 1);
  const auto base = fit_from_labels(sim.data, cfg, init);

  std::vector<std::size_t> order(sim.data.n_obs());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), std::mt19937_64(6));
  std::vector<int> init_perm(order.size());
  for (std::size_t i = 0; i < order.size(); ++i) init_perm[i] = init[order[i]];
  const auto perm = fit_from_labels(sim.data.permute_rows(order), cfg, init_perm);

  std::vector<int> expected(order.size());
  for (std::size_t i = 0; i < order.size(); ++i) expected[i] = base.labels[order[i]];
  CHECK(perm.labels == expected);
  CHECK(perm.elbo == doctest::Approx(base.elbo).epsilon(1e-10));
}

TEST_CASE("E[ln pi] agrees with Monte Carlo over Dirichlet draws") {
  const std::vector<double> alpha{0.5, 3.0, 10.0};
  const auto expected = expected_log_weights(alpha);
  Rng rng(31);
  const int draws = 1000000;
  std::vector<double> sum(3, 0), sum2(3, 0);
  std::vector<double> g(3);
  for (int i = 0; i < draws; ++i) {
    double t = 0;
    for (std::size_t k = 0; k < 3; ++k) t += g[k] = rng.gamma(alpha[k]);
    for (std::size_t k = 0; k < 3; ++k) {
      const double v = std::log(g[k] / t);
      sum[k] += v;
      sum2[k] += v * v;
    }
  }
  for (std::size_t k = 0; k < 3; ++k) {
    const double mean = sum[k] / draws;
    const double se = std::sqrt((sum2[k] / draws - mean * mean) / draws);
    CHECK(std::abs(mean - expected[k]) < 3 * se);
  }
}

TEST_CASE("config validation") {
  ModelConfig cfg;
  cfg.max_iter = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = {};
  cfg.alpha0 = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = {};
  cfg.a = -1;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = {};
  cfg.k_max = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  const auto data = dataset({{0}, {1}}, {2});
  cfg = {};
  cfg.k_max = 3;
  CHECK_THROWS_AS(fit(data, cfg), ConfigError);
}

TEST_CASE("non-convergence is flagged, not thrown") {
  const auto sim = simulate(make_design(find_preset("sim2.1"), 2));
  ModelConfig cfg;
  cfg.k_max = 20;
  cfg.max_iter = 3;
  const auto res = fit(sim.data, cfg);
  CHECK_FALSE(res.converged);
  CHECK(res.state.elbo_trace.size() == 3);
  CHECK(res.state.iter_count == 3);
}

TEST_CASE("a single run on a well-separated design recovers most of the structure") {
  const auto sim = simulate(make_design(find_preset("sim2.1"), 12));
  ModelConfig cfg;
  cfg.k_max = 30;
  cfg.seed = 4;
  const auto res = fit(sim.data, cfg);
  CHECK(res.converged);
  CHECK(adjusted_rand_index(res.labels, sim.true_labels) > 0.75);
  // Superfluous components are rarely emptied in a single run.
  CHECK(res.n_nonempty >= 20);
}
