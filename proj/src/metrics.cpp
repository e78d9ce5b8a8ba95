#include "catmix/metrics.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include <boost/math/distributions/students_t.hpp>

#include "catmix/error.hpp"

namespace catmix {

namespace {

double choose2(std::uint64_t n) { return 0.5 * static_cast<double>(n) * static_cast<double>(n - (n > 0)); }

}  // namespace

double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() != b.size())
    throw InputError("label vectors differ in length (" + std::to_string(a.size()) + " vs " +
                     std::to_string(b.size()) + ")");
  if (a.size() < 2) throw InputError("adjusted Rand index needs at least two observations");

  std::map<std::pair<int, int>, std::uint64_t> cells;
  std::map<int, std::uint64_t> rows;
  std::map<int, std::uint64_t> cols;
  for (std::size_t n = 0; n < a.size(); ++n) {
    ++cells[{a[n], b[n]}];
    ++rows[a[n]];
    ++cols[b[n]];
  }
  double index = 0.0;
  for (const auto& [key, v] : cells) index += choose2(v);
  double sum_a = 0.0;
  for (const auto& [key, v] : rows) sum_a += choose2(v);
  double sum_b = 0.0;
  for (const auto& [key, v] : cols) sum_b += choose2(v);

  const double expected = sum_a * sum_b / choose2(a.size());
  const double max_index = 0.5 * (sum_a + sum_b);
  const double denom = max_index - expected;
  if (denom == 0.0) return 1.0;
  return (index - expected) / denom;
}

SelectionScore f1_selection(const std::vector<bool>& selected, const std::vector<bool>& truth) {
  if (selected.size() != truth.size())
    throw InputError("selection and truth masks differ in length");
  std::size_t tp = 0, fp = 0, fn = 0;
  for (std::size_t j = 0; j < selected.size(); ++j) {
    tp += selected[j] && truth[j];
    fp += selected[j] && !truth[j];
    fn += !selected[j] && truth[j];
  }
  SelectionScore s;
  if (tp == 0) return s;
  s.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
  s.recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
  s.f1 = 2.0 * s.precision * s.recall / (s.precision + s.recall);
  return s;
}

Correlation pearson(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw InputError("correlation series differ in length");
  const std::size_t n = x.size();
  if (n < 3) throw InputError("correlation test needs at least three pairs");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) throw DegenerateError("a correlation series has zero variance");

  Correlation c;
  c.r = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
  const double df = static_cast<double>(n - 2);
  if (std::abs(c.r) >= 1.0) {
    c.p_value = 0.0;
  } else {
    const double t = c.r * std::sqrt(df / (1.0 - c.r * c.r));
    boost::math::students_t dist(df);
    c.p_value = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
  }
  return c;
}

Correlation elbo_ari_report(const std::vector<FitResult>& fits, const std::vector<int>& truth) {
  if (fits.size() < 3) throw InputError("ELBO/ARI correlation needs at least three fits");
  std::vector<double> elbo, ari;
  for (const auto& f : fits) {
    elbo.push_back(f.elbo);
    ari.push_back(adjusted_rand_index(f.labels, truth));
  }
  return pearson(elbo, ari);
}

std::size_t count_nonempty(const std::vector<int>& labels) {
  return std::set<int>(labels.begin(), labels.end()).size();
}

MetricReport evaluate_labels(const std::vector<int>& labels, const std::vector<int>& truth) {
  MetricReport r;
  r.ari = adjusted_rand_index(labels, truth);
  r.n_clusters_found = count_nonempty(labels);
  r.n_clusters_true = count_nonempty(truth);
  return r;
}

nlohmann::json to_json(const MetricReport& report) {
  nlohmann::json j;
  j["ari"] = report.ari;
  j["n_clusters_found"] = report.n_clusters_found;
  j["n_clusters_true"] = report.n_clusters_true;
  j["f1"] = report.f1 ? nlohmann::json(*report.f1) : nlohmann::json(nullptr);
  j["precision"] = report.precision ? nlohmann::json(*report.precision) : nlohmann::json(nullptr);
  j["recall"] = report.recall ? nlohmann::json(*report.recall) : nlohmann::json(nullptr);
  return j;
}

std::string to_csv(const MetricReport& report) {
  std::ostringstream out;
  out.precision(std::numeric_limits<double>::max_digits10);
  auto opt = [&](const std::optional<double>& v) {
    if (v) out << *v;
  };
  out << "ari,n_clusters_found,n_clusters_true,f1,precision,recall\n";
  out << report.ari << ',' << report.n_clusters_found << ',' << report.n_clusters_true << ',';
  opt(report.f1);
  out << ',';
  opt(report.precision);
  out << ',';
  opt(report.recall);
  out << '\n';
  return out.str();
}

}  // namespace catmix
