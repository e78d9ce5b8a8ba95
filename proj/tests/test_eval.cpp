#include <doctest.h>

#include <random>

#include "catmix/error.hpp"
#include "catmix/metrics.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace catmix;

TEST_CASE("adjusted Rand index examples") {
  CHECK(adjusted_rand_index({0, 0, 1, 1, 2}, {5, 5, 3, 3, 9}) == doctest::Approx(1.0));
  CHECK(adjusted_rand_index({0, 0, 1, 1}, {0, 0, 1, 2}) == doctest::Approx(4.0 / 7).epsilon(1e-14));
  CHECK(adjusted_rand_index({0, 0, 0}, {1, 1, 1}) == 1.0);
  CHECK(adjusted_rand_index({0, 1, 2}, {0, 1, 2}) == 1.0);
  CHECK_THROWS_AS(adjusted_rand_index({0, 1}, {0, 1, 1}), InputError);
  CHECK_THROWS_AS(adjusted_rand_index({0}, {0}), InputError);
}

TEST_CASE("adjusted Rand index against pair counting") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + rng() % 49;
    const auto a = random_labels(rng, n, 1 + int(rng() % 6));
    const auto b = random_labels(rng, n, 1 + int(rng() % 6));
    const double ari = adjusted_rand_index(a, b);
    CHECK(std::abs(ari - oracle::pair_counting_ari(a, b)) < 1e-12);
    CHECK(ari == adjusted_rand_index(b, a));
    CHECK(ari <= 1.0);
  }
}

TEST_CASE("random labels have ARI near zero") {
  std::mt19937_64 rng(4);
  const auto truth = random_labels(rng, 1000, 10);
  double total = 0;
  for (int t = 0; t < 100; ++t) total += adjusted_rand_index(random_labels(rng, 1000, 10), truth);
  CHECK(std::abs(total / 100) < 0.05);
}

TEST_CASE("F1 of variable selection") {
  std::vector<bool> truth(100, false), selected(100, false);
  for (int j = 0; j < 75; ++j) truth[j] = true;
  auto perfect = f1_selection(truth, truth);
  CHECK(perfect.precision == 1.0);
  CHECK(perfect.recall == 1.0);
  CHECK(perfect.f1 == 1.0);

  for (int j = 0; j < 70; ++j) selected[j] = true;
  for (int j = 75; j < 80; ++j) selected[j] = true;
  const auto s = f1_selection(selected, truth);
  CHECK(s.precision == doctest::Approx(70.0 / 75));
  CHECK(s.recall == doctest::Approx(70.0 / 75));
  CHECK(s.f1 == doctest::Approx(14.0 / 15));

  CHECK(f1_selection(std::vector<bool>(100, false), truth).f1 == 0.0);

  // Consistent reordering of variables leaves the score unchanged.
  std::vector<bool> rs(selected.rbegin(), selected.rend()), rt(truth.rbegin(), truth.rend());
  CHECK(f1_selection(rs, rt).f1 == s.f1);
  CHECK_THROWS_AS(f1_selection({true}, {true, false}), InputError);
}

TEST_CASE("ELBO/ARI correlation") {
  const std::vector<int> truth{0, 0, 1, 1, 2, 2};
  std::vector<FitResult> fits(3);
  fits[0].labels = {0, 0, 1, 1, 2, 2};
  fits[1].labels = {0, 0, 1, 1, 1, 1};
  fits[2].labels = {0, 1, 0, 1, 0, 1};
  for (auto& f : fits) f.elbo = -10.0;
  CHECK_THROWS_AS(elbo_ari_report(fits, truth), DegenerateError);

  fits[0].elbo = -1.0;
  fits[1].elbo = -2.0;
  fits[2].elbo = -5.0;
  const auto c = elbo_ari_report(fits, truth);
  CHECK(c.r > 0.9);

  const auto perfect = pearson({1, 2, 3, 4}, {2, 4, 6, 8});
  CHECK(perfect.r == doctest::Approx(1.0));
  CHECK(perfect.p_value == 0.0);

  // Frozen from scipy.stats.pearsonr.
  const auto ref = pearson({1, 2, 3, 4, 5, 6}, {2, 1, 4, 3, 7, 5});
  CHECK(ref.r == doctest::Approx(0.7917946548886297).epsilon(1e-12));
  CHECK(ref.p_value == doctest::Approx(0.06051140336275659).epsilon(1e-9));
  CHECK_THROWS_AS(elbo_ari_report({fits[0], fits[1]}, truth), InputError);
}

TEST_CASE("count_nonempty") {
  CHECK(count_nonempty({0, 0, 0}) == 1);
  CHECK(count_nonempty({0, 1, 2}) == 3);
  CHECK(count_nonempty({29, 3, 3, 0}) == 3);
}

TEST_CASE("metric report serialisation") {
  auto report = evaluate_labels({0, 0, 1, 1}, {1, 1, 0, 0});
  CHECK(report.ari == 1.0);
  CHECK(report.n_clusters_found == 2);
  auto j = to_json(report);
  CHECK(j["ari"] == 1.0);
  CHECK(j["f1"].is_null());
  report.f1 = 0.5;
  const auto csv = to_csv(report);
  CHECK(csv == "ari,n_clusters_found,n_clusters_true,f1,precision,recall\n1,2,2,0.5,,\n");
}
