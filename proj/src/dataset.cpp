#include "catmix/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <sstream>

#include <json.hpp>

#include "catmix/error.hpp"
#include "catmix/io.hpp"

namespace catmix {

namespace {

using json = nlohmann::json;

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\"");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\"");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_line(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    cells.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    auto line = text.substr(start, end - start);
    if (!trim(line).empty()) lines.push_back(line);
    start = end + 1;
  }
  return lines;
}

bool parse_uint(std::string_view cell, unsigned long long& out) {
  if (cell.empty()) return false;
  const auto* end = cell.data() + cell.size();
  auto [ptr, ec] = std::from_chars(cell.data(), end, out);
  return ec == std::errc{} && ptr == end;
}

bool parse_int(std::string_view cell, long long& out) {
  if (cell.empty()) return false;
  const auto* end = cell.data() + cell.size();
  auto [ptr, ec] = std::from_chars(cell.data(), end, out);
  return ec == std::errc{} && ptr == end;
}

}  // namespace

CategoricalDataset::CategoricalDataset(Matrix<Category> values,
                                       std::vector<std::size_t> categories,
                                       std::vector<std::string> var_names,
                                       std::vector<std::string> obs_names)
    : values_(std::move(values)),
      categories_(std::move(categories)),
      var_names_(std::move(var_names)),
      obs_names_(std::move(obs_names)) {
  if (categories_.size() != values_.cols())
    throw ValidationError("category count vector has " +
                          std::to_string(categories_.size()) + " entries for " +
                          std::to_string(values_.cols()) + " variables");
  if (!var_names_.empty() && var_names_.size() != values_.cols())
    throw ValidationError("variable name count does not match the number of columns");
  if (!obs_names_.empty() && obs_names_.size() != values_.rows())
    throw ValidationError("observation name count does not match the number of rows");
  for (std::size_t j = 0; j < categories_.size(); ++j) {
    if (categories_[j] < 2)
      throw ValidationError("variable " + var_name(j) + " has fewer than two categories");
  }
  for (std::size_t n = 0; n < values_.rows(); ++n) {
    const auto r = values_.row(n);
    for (std::size_t j = 0; j < r.size(); ++j) {
      if (r[j] >= categories_[j])
        throw ValidationError("value " + std::to_string(r[j]) + " at row " +
                              std::to_string(n) + " exceeds the category count of " +
                              var_name(j));
    }
  }
  max_categories_ = categories_.empty()
                        ? 0
                        : *std::max_element(categories_.begin(), categories_.end());
}

std::string CategoricalDataset::var_name(std::size_t j) const {
  return var_names_.empty() ? "V" + std::to_string(j + 1) : var_names_[j];
}

std::string CategoricalDataset::obs_name(std::size_t n) const {
  return obs_names_.empty() ? std::to_string(n) : obs_names_[n];
}

CategoricalDataset CategoricalDataset::permute_rows(std::span<const std::size_t> order) const {
  if (order.size() != n_obs()) throw InputError("row permutation has the wrong length");
  Matrix<Category> values(n_obs(), n_vars());
  std::vector<std::string> names;
  for (std::size_t i = 0; i < order.size(); ++i) {
    const auto src = values_.row(order[i]);
    std::copy(src.begin(), src.end(), values.row(i).begin());
    if (!obs_names_.empty()) names.push_back(obs_names_[order[i]]);
  }
  return {std::move(values), categories_, var_names_, std::move(names)};
}

std::filesystem::path schema_path_for(const std::filesystem::path& csv) {
  auto p = csv;
  p.replace_extension(".schema.json");
  return p;
}

CategoricalDataset load_dataset(const std::filesystem::path& path,
                                const std::optional<std::filesystem::path>& schema) {
  const std::string text = read_file(path);
  const auto lines = split_lines(text);
  if (lines.empty()) throw ParseError(1, 1, "missing header row");

  std::vector<std::string> var_names;
  for (auto cell : split_line(lines[0])) var_names.emplace_back(cell);
  const std::size_t p = var_names.size();
  const std::size_t n = lines.size() - 1;

  Matrix<Category> values(n, p);
  std::vector<std::size_t> max_seen(p, 0);
  for (std::size_t r = 0; r < n; ++r) {
    const auto cells = split_line(lines[r + 1]);
    if (cells.size() != p)
      throw ParseError(r + 2, std::min(cells.size(), p) + 1,
                       "expected " + std::to_string(p) + " cells, found " +
                           std::to_string(cells.size()));
    for (std::size_t j = 0; j < p; ++j) {
      unsigned long long v = 0;
      if (!parse_uint(cells[j], v) || v > 0xFFFFFFFFull)
        throw ParseError(r + 2, j + 1,
                         "'" + std::string(cells[j]) + "' is not a non-negative integer");
      values(r, j) = static_cast<Category>(v);
      max_seen[j] = std::max<std::size_t>(max_seen[j], v);
    }
  }

  std::vector<std::size_t> categories(p);
  for (std::size_t j = 0; j < p; ++j) categories[j] = max_seen[j] + 1;

  std::vector<std::string> obs_names;
  auto schema_file = schema;
  if (!schema_file && std::filesystem::exists(schema_path_for(path)))
    schema_file = schema_path_for(path);
  if (schema_file) {
    json doc;
    try {
      doc = json::parse(read_file(*schema_file));
    } catch (const json::exception& e) {
      throw ValidationError("unreadable schema " + schema_file->string() + ": " + e.what());
    }
    if (doc.contains("categories")) {
      const auto declared = doc.at("categories").get<std::vector<std::size_t>>();
      if (declared.size() != p)
        throw ValidationError("schema declares " + std::to_string(declared.size()) +
                              " variables, data has " + std::to_string(p));
      for (std::size_t j = 0; j < p; ++j) {
        if (n > 0 && declared[j] <= max_seen[j])
          throw ValidationError("schema declares " + std::to_string(declared[j]) +
                                " categories for " + var_names[j] + " but index " +
                                std::to_string(max_seen[j]) + " occurs");
        categories[j] = declared[j];
      }
    }
    if (doc.contains("obs_names")) obs_names = doc.at("obs_names").get<std::vector<std::string>>();
  }

  for (std::size_t j = 0; j < p; ++j) {
    if (categories[j] < 2)
      throw ValidationError("variable " + var_names[j] +
                            " is degenerate: a single category is observed");
  }
  return {std::move(values), std::move(categories), std::move(var_names), std::move(obs_names)};
}

void save_dataset(const CategoricalDataset& data, const std::filesystem::path& path) {
  std::ostringstream out;
  for (std::size_t j = 0; j < data.n_vars(); ++j) out << (j ? "," : "") << data.var_name(j);
  out << '\n';
  std::vector<std::size_t> max_seen(data.n_vars(), 0);
  for (std::size_t n = 0; n < data.n_obs(); ++n) {
    const auto r = data.row(n);
    for (std::size_t j = 0; j < r.size(); ++j) {
      out << (j ? "," : "") << r[j];
      max_seen[j] = std::max<std::size_t>(max_seen[j], r[j]);
    }
    out << '\n';
  }
  write_file_atomic(path, out.str());

  bool need_schema = !data.obs_names().empty();
  for (std::size_t j = 0; j < data.n_vars(); ++j)
    need_schema = need_schema || data.n_obs() == 0 || max_seen[j] + 1 != data.categories(j);
  const auto schema = schema_path_for(path);
  if (need_schema) {
    json doc;
    doc["categories"] = data.categories();
    if (!data.obs_names().empty()) doc["obs_names"] = data.obs_names();
    write_file_atomic(schema, doc.dump(2) + "\n");
  } else if (std::filesystem::exists(schema)) {
    std::filesystem::remove(schema);
  }
}

LabelFile load_labels(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  const auto lines = split_lines(text);
  LabelFile out;
  std::size_t first = 0;
  if (!lines.empty()) {
    const auto cells = split_line(lines[0]);
    long long v = 0;
    if (cells.size() != 2 || !parse_int(cells[1], v)) first = 1;  // header
  }
  for (std::size_t r = first; r < lines.size(); ++r) {
    const auto cells = split_line(lines[r]);
    if (cells.size() != 2)
      throw ParseError(r + 1, 1, "labels rows need exactly two cells (obs, cluster)");
    long long v = 0;
    if (!parse_int(cells[1], v) || v < 0)
      throw ParseError(r + 1, 2, "'" + std::string(cells[1]) + "' is not a cluster index");
    out.obs_names.emplace_back(cells[0]);
    out.labels.push_back(static_cast<int>(v));
  }
  return out;
}

void save_labels(std::span<const int> labels, const std::filesystem::path& path,
                 std::span<const std::string> obs_names) {
  if (!obs_names.empty() && obs_names.size() != labels.size())
    throw InputError("observation names do not match the number of labels");
  std::ostringstream out;
  out << "obs,cluster\n";
  for (std::size_t n = 0; n < labels.size(); ++n)
    out << (obs_names.empty() ? std::to_string(n) : obs_names[n]) << ',' << labels[n] << '\n';
  write_file_atomic(path, out.str());
}

std::vector<bool> load_mask(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  const auto lines = split_lines(text);
  std::vector<bool> mask;
  for (std::size_t r = 0; r < lines.size(); ++r) {
    const auto cells = split_line(lines[r]);
    const auto cell = cells.back();
    if (r == 0 && cell != "0" && cell != "1") continue;  // header
    if (cell == "1" || cell == "true" || cell == "TRUE")
      mask.push_back(true);
    else if (cell == "0" || cell == "false" || cell == "FALSE")
      mask.push_back(false);
    else
      throw ParseError(r + 1, cells.size(), "'" + std::string(cell) + "' is not a 0/1 flag");
  }
  return mask;
}

void save_mask(const std::vector<bool>& mask, const std::filesystem::path& path,
               std::span<const std::string> names) {
  std::ostringstream out;
  out << "variable,relevant\n";
  for (std::size_t j = 0; j < mask.size(); ++j)
    out << (names.empty() ? "V" + std::to_string(j + 1) : names[j]) << ','
        << (mask[j] ? 1 : 0) << '\n';
  write_file_atomic(path, out.str());
}

}  // namespace catmix
