#include "catmix/summarize.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <limits>
#include <sstream>

#include "catmix/error.hpp"
#include "catmix/io.hpp"

namespace catmix {

namespace {

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

std::uint64_t get_u64(const std::string& in, std::size_t pos) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i)
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[pos + i])) << (8 * i);
  return v;
}

Matrix<double> distance_from(const CoClusteringMatrix& pcm) {
  Matrix<double> d(pcm.n_obs, pcm.n_obs);
  for (std::size_t i = 0; i < pcm.n_obs; ++i)
    for (std::size_t j = 0; j < pcm.n_obs; ++j) d(i, j) = 1.0 - pcm.p(i, j);
  return d;
}

SummaryClustering make_summary(std::vector<int> labels, SummaryMethod method) {
  SummaryClustering s;
  s.labels = canonical_labels(labels);
  s.method = method;
  int top = -1;
  for (int l : s.labels) top = std::max(top, l);
  s.n_clusters = static_cast<std::size_t>(top + 1);
  return s;
}

}  // namespace

std::string to_string(SummaryMethod method) {
  switch (method) {
    case SummaryMethod::medvedovic: return "medvedovic";
    case SummaryMethod::voi_average: return "voi_average";
    case SummaryMethod::voi_complete: return "voi_complete";
  }
  return "unknown";
}

SummaryMethod parse_summary_method(const std::string& name) {
  if (name == "medvedovic") return SummaryMethod::medvedovic;
  if (name == "voi_average") return SummaryMethod::voi_average;
  if (name == "voi_complete") return SummaryMethod::voi_complete;
  throw ConfigError("unknown summary method '" + name + "'");
}

void SummaryConfig::validate() const {
  if (!(medvedovic_cut > 0.0 && medvedovic_cut < 1.0))
    throw ConfigError("medvedovic_cut must lie in (0, 1)");
  if (!(tau > 0.0 && tau < 1.0)) throw ConfigError("tau must lie in (0, 1)");
}

CoClusteringMatrix build_coclustering(const std::vector<std::vector<int>>& runs) {
  if (runs.empty()) throw InputError("co-clustering needs at least one run");
  const std::size_t N = runs.front().size();
  for (std::size_t m = 0; m < runs.size(); ++m) {
    if (runs[m].size() != N)
      throw InputError("run " + std::to_string(m) + " has " + std::to_string(runs[m].size()) +
                       " labels, expected " + std::to_string(N));
  }
  Matrix<std::uint32_t> together(N, N, 0);
  for (const auto& z : runs) {
    for (std::size_t i = 0; i < N; ++i) {
      auto row = together.row(i);
      const int zi = z[i];
      for (std::size_t j = i + 1; j < N; ++j) row[j] += z[j] == zi;
    }
  }
  CoClusteringMatrix pcm;
  pcm.n_obs = N;
  pcm.n_runs = runs.size();
  pcm.p = Matrix<double>(N, N);
  const double M = static_cast<double>(runs.size());
  for (std::size_t i = 0; i < N; ++i) {
    pcm.p(i, i) = 1.0;
    for (std::size_t j = i + 1; j < N; ++j) {
      const double v = static_cast<double>(together(i, j)) / M;
      pcm.p(i, j) = v;
      pcm.p(j, i) = v;
    }
  }
  return pcm;
}

SummaryClustering medvedovic_summary(const CoClusteringMatrix& pcm, const SummaryConfig& cfg) {
  cfg.validate();
  const auto tree = hierarchical_cluster(distance_from(pcm), Linkage::complete);
  return make_summary(cut_at_height(tree, 1.0 - cfg.medvedovic_cut), SummaryMethod::medvedovic);
}

double voi_lower_bound(const CoClusteringMatrix& pcm, const std::vector<int>& candidate) {
  const std::size_t N = pcm.n_obs;
  if (candidate.size() != N)
    throw InputError("candidate has " + std::to_string(candidate.size()) + " labels, expected " +
                     std::to_string(N));
  double total = 0.0;
  for (std::size_t n = 0; n < N; ++n) {
    double size = 0.0;
    double row = 0.0;
    double shared = 0.0;
    const auto p = pcm.p.row(n);
    for (std::size_t j = 0; j < N; ++j) {
      row += p[j];
      if (candidate[j] == candidate[n]) {
        size += 1.0;
        shared += p[j];
      }
    }
    if (!(shared > 0.0))
      throw NumericalError("co-clustering mass of observation " + std::to_string(n) +
                           " within its own cluster is zero");
    total += std::log2(size) + std::log2(row) - 2.0 * std::log2(shared);
  }
  return total / static_cast<double>(N);
}

SummaryClustering voi_summary(const CoClusteringMatrix& pcm, Linkage linkage) {
  const std::size_t N = pcm.n_obs;
  const auto method = linkage == Linkage::complete ? SummaryMethod::voi_complete
                                                   : SummaryMethod::voi_average;
  if (N == 0) return make_summary({}, method);
  const auto tree = hierarchical_cluster(distance_from(pcm), linkage);

  // Walk the merges from singletons upwards, maintaining for every n its
  // cluster size and the co-clustering mass inside its cluster.
  std::vector<double> row_log(N);
  for (std::size_t n = 0; n < N; ++n) {
    double row = 0.0;
    for (double v : pcm.p.row(n)) row += v;
    row_log[n] = std::log2(row);
  }
  std::vector<std::vector<std::size_t>> members(N);
  std::vector<double> shared(N);
  std::vector<double> term(N);
  for (std::size_t n = 0; n < N; ++n) {
    members[n] = {n};
    shared[n] = pcm.p(n, n);
    term[n] = row_log[n] - 2.0 * std::log2(shared[n]);
  }
  auto current = [&] {
    double total = 0.0;
    for (double t : term) total += t;
    return total / static_cast<double>(N);
  };

  // Bounds differing by less than this are ties.
  constexpr double tie = 1e-10;
  double best = current();
  std::size_t best_merges = 0;
  for (std::size_t m = 0; m < tree.merges.size(); ++m) {
    const auto [a, b, height] = tree.merges[m];
    auto& A = members[a];
    auto& B = members[b];
    for (auto i : A)
      for (auto j : B) {
        shared[i] += pcm.p(i, j);
        shared[j] += pcm.p(j, i);
      }
    A.insert(A.end(), B.begin(), B.end());
    B.clear();
    const double size_log = std::log2(static_cast<double>(A.size()));
    for (auto i : A) term[i] = size_log + row_log[i] - 2.0 * std::log2(shared[i]);
    const double bound = current();
    if (bound <= best + tie) {
      best = std::min(best, bound);
      best_merges = m + 1;
    }
  }

  auto summary = make_summary(cut_to_clusters(tree, N - best_merges), method);
  summary.voi_bound = voi_lower_bound(pcm, summary.labels);
  return summary;
}

SummaryClustering summarize(const CoClusteringMatrix& pcm, const SummaryConfig& cfg) {
  switch (cfg.method) {
    case SummaryMethod::medvedovic: return medvedovic_summary(pcm, cfg);
    case SummaryMethod::voi_average: return voi_summary(pcm, Linkage::average);
    case SummaryMethod::voi_complete: return voi_summary(pcm, Linkage::complete);
  }
  throw ConfigError("unknown summary method");
}

std::vector<bool> summarize_variables(const std::vector<std::vector<double>>& runs_c,
                                      const SummaryConfig& cfg) {
  cfg.validate();
  if (runs_c.empty()) throw InputError("variable summary needs at least one run");
  const std::size_t P = runs_c.front().size();
  std::vector<std::size_t> hits(P, 0);
  for (const auto& c : runs_c) {
    if (c.size() != P) throw InputError("runs disagree on the number of variables");
    for (std::size_t j = 0; j < P; ++j) hits[j] += c[j] > cfg.c_cut;
  }
  const double M = static_cast<double>(runs_c.size());
  std::vector<bool> out(P);
  for (std::size_t j = 0; j < P; ++j) out[j] = static_cast<double>(hits[j]) / M > cfg.tau;
  return out;
}

void save_pcm(const CoClusteringMatrix& pcm, const std::filesystem::path& path) {
  std::string out = "PCM1";
  out.reserve(4 + 16 + 8 * pcm.p.data().size());
  put_u64(out, pcm.n_obs);
  put_u64(out, pcm.n_runs);
  for (double v : pcm.p.data()) put_u64(out, std::bit_cast<std::uint64_t>(v));
  write_file_atomic(path, out);
}

CoClusteringMatrix load_pcm(const std::filesystem::path& path) {
  const std::string in = read_file(path);
  if (in.size() < 20 || in.compare(0, 4, "PCM1") != 0)
    throw ParseError(1, 1, path.string() + " is not a co-clustering matrix file");
  CoClusteringMatrix pcm;
  pcm.n_obs = get_u64(in, 4);
  pcm.n_runs = get_u64(in, 12);
  if (in.size() != 20 + 8 * pcm.n_obs * pcm.n_obs)
    throw ParseError(1, 1, path.string() + " has the wrong size for N = " + std::to_string(pcm.n_obs));
  pcm.p = Matrix<double>(pcm.n_obs, pcm.n_obs);
  for (std::size_t i = 0; i < pcm.p.data().size(); ++i)
    pcm.p.data()[i] = std::bit_cast<double>(get_u64(in, 20 + 8 * i));
  return pcm;
}

void save_pcm_csv(const CoClusteringMatrix& pcm, const std::filesystem::path& path) {
  std::ostringstream out;
  out.precision(std::numeric_limits<double>::max_digits10);
  for (std::size_t i = 0; i < pcm.n_obs; ++i) {
    const auto row = pcm.p.row(i);
    for (std::size_t j = 0; j < row.size(); ++j) out << (j ? "," : "") << row[j];
    out << '\n';
  }
  write_file_atomic(path, out.str());
}

}  // namespace catmix
