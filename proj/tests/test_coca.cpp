#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "catmix/coca.hpp"
#include "catmix/error.hpp"
#include "catmix/io.hpp"
#include "catmix/metrics.hpp"
#include "test_util.hpp"

using namespace catmix;

TEST_CASE("matrix of clusters layout") {
  const auto moc = build_moc({{0, 0, 1, 1}, {0, 1, 1, 2}});
  CHECK(moc.total_clusters == 5);
  CHECK(moc.n_datasets == 2);
  CHECK(moc.moc.rows() == 5);
  CHECK(moc.moc.cols() == 4);
  for (std::size_t n = 0; n < 4; ++n) {
    int col = 0;
    for (std::size_t k = 0; k < 5; ++k) col += moc.moc(k, n);
    CHECK(col == 2);
  }
  CHECK(moc.cluster_origin[3].dataset == 1);
  CHECK(moc.cluster_origin[3].label == 1);
  CHECK(moc.moc(3, 1) == 1);
  CHECK(moc.moc(3, 2) == 1);
  CHECK(moc.moc(3, 0) == 0);

  CHECK_THROWS_AS(build_moc({{0, 1, 1}}), InputError);
  CHECK_THROWS_AS(build_moc({{0, 1, 1}, {0, 1}}), InputError);
}

TEST_CASE("matrix of clusters is invariant to relabelling up to row order") {
  std::mt19937_64 rng(3);
  const auto a = random_labels(rng, 30, 4);
  const auto b = random_labels(rng, 30, 3);
  std::vector<int> a2;
  for (int v : a) a2.push_back(10 - v);
  const auto m1 = build_moc({a, b});
  const auto m2 = build_moc({a2, b});
  CHECK(m1.total_clusters == m2.total_clusters);
  for (std::size_t k = 0; k < m1.total_clusters; ++k) {
    const auto origin = m1.cluster_origin[k];
    const int mapped = origin.dataset == 0 ? 10 - origin.label : origin.label;
    std::size_t match = m2.total_clusters;
    for (std::size_t r = 0; r < m2.total_clusters; ++r)
      if (m2.cluster_origin[r].dataset == origin.dataset && m2.cluster_origin[r].label == mapped) match = r;
    REQUIRE(match < m2.total_clusters);
    for (std::size_t n = 0; n < 30; ++n) CHECK(m1.moc(k, n) == m2.moc(match, n));
  }
}

TEST_CASE("MOC transposes into a binary dataset") {
  const auto moc = build_moc({{0, 0, 1, 1}, {0, 1, 1, 2}, {5, 5, 5, 5}});
  const auto data = moc.to_dataset();
  CHECK(data.n_obs() == 4);
  CHECK(data.n_vars() == 6);
  CHECK(data.categories() == std::vector<std::size_t>(6, 2));
  CHECK(data.var_name(5) == "m3:5");
  CHECK(data(2, 3) == 1);
}

TEST_CASE("identical clusterings are recovered exactly") {
  std::vector<int> base;
  for (int k = 0; k < 4; ++k)
    for (int i = 0; i < 15; ++i) base.push_back(k);
  const auto moc = build_moc({base, base});
  ModelConfig cfg;
  cfg.k_max = 8;
  const auto s = cluster_moc(moc, cfg, 5, 1, 2);
  CHECK(adjusted_rand_index(s.labels, base) == 1.0);
}

TEST_CASE("cluster-of-clusters recovers tissue-like blocks") {
  // Twelve blocks of 25 samples. Five source clusterings each see a noisy
  // view: blocks merged in pairs or split, plus 5% random reassignment.
  std::mt19937_64 rng(12);
  std::vector<int> truth;
  for (int b = 0; b < 12; ++b)
    for (int i = 0; i < 25; ++i) truth.push_back(b);
  std::vector<std::vector<int>> sources;
  for (int m = 0; m < 5; ++m) {
    std::vector<int> merge(12);
    std::iota(merge.begin(), merge.end(), 0);
    std::shuffle(merge.begin(), merge.end(), rng);
    std::vector<int> z(truth.size());
    for (std::size_t n = 0; n < truth.size(); ++n) {
      int label = merge[truth[n]];
      if (label < 4) label = 100 + label / 2;           // four blocks collapse into two
      if (label == 11) label = 200 + int(n % 2);        // one block splits
      if (rng() % 100 < 5) label = 300 + int(rng() % 8);  // noise
      z[n] = label;
    }
    sources.push_back(z);
  }
  ModelConfig cfg;
  cfg.k_max = 15;
  const auto s = cluster_moc(build_moc(sources), cfg, 25, 7, 2);
  CHECK(adjusted_rand_index(s.labels, truth) > 0.9);
}

TEST_CASE("MOC CSV") {
  TempDir dir;
  save_moc_csv(build_moc({{0, 1}, {3, 3}}), dir / "moc.csv");
  CHECK(read_file(dir / "moc.csv") == "cluster,0,1\nm1:0,1,0\nm1:1,0,1\nm2:3,1,1\n");
}
