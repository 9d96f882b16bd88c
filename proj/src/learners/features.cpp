#include "faultrank/features.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include "faultrank/csv.hpp"

namespace faultrank::learners {

void FeatureMatrix::validate() const {
  if (values.size() != n_rows * n_cols || labels.size() != n_rows || column_names.size() != n_cols ||
      projects.size() != n_rows || commits.size() != n_rows || timestamps.size() != n_rows) {
    throw InputError("feature matrix has inconsistent dimensions");
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      throw InputError("non-finite feature value at row " + std::to_string(i / n_cols) + ", column " +
                       std::to_string(i % n_cols));
    }
  }
}

FeatureMatrix make_matrix(std::size_t rows, std::size_t cols, std::vector<double> values,
                          std::vector<std::uint8_t> labels) {
  FeatureMatrix x;
  x.n_rows = rows;
  x.n_cols = cols;
  x.values = std::move(values);
  x.labels = std::move(labels);
  x.column_names.resize(cols);
  for (std::size_t j = 0; j < cols; ++j) x.column_names[j] = "f" + std::to_string(j);
  x.projects.assign(rows, "p");
  x.commits.resize(rows);
  x.timestamps.resize(rows);
  for (std::size_t i = 0; i < rows; ++i) {
    x.commits[i] = "r" + std::to_string(i);
    x.timestamps[i] = static_cast<Timestamp>(i);
  }
  return x;
}

FeatureMatrix select_rows(const FeatureMatrix& x, std::span<const std::size_t> rows) {
  FeatureMatrix out;
  out.n_rows = rows.size();
  out.n_cols = x.n_cols;
  out.column_names = x.column_names;
  out.values.reserve(rows.size() * x.n_cols);
  out.labels.reserve(rows.size());
  for (std::size_t r : rows) {
    auto src = x.row(r);
    out.values.insert(out.values.end(), src.begin(), src.end());
    out.labels.push_back(x.labels[r]);
    out.projects.push_back(x.projects[r]);
    out.commits.push_back(x.commits[r]);
    out.timestamps.push_back(x.timestamps[r]);
  }
  return out;
}

FeatureMatrix drop_column(const FeatureMatrix& x, std::size_t column) {
  if (column >= x.n_cols) throw RangeError("column " + std::to_string(column) + " out of range");
  FeatureMatrix out = x;
  out.n_cols = x.n_cols - 1;
  out.column_names.erase(out.column_names.begin() + static_cast<std::ptrdiff_t>(column));
  out.values.clear();
  out.values.reserve(x.n_rows * out.n_cols);
  for (std::size_t i = 0; i < x.n_rows; ++i) {
    auto r = x.row(i);
    for (std::size_t j = 0; j < x.n_cols; ++j) {
      if (j != column) out.values.push_back(r[j]);
    }
  }
  return out;
}

FeatureMatrix build_feature_matrix(std::span<const ProjectHistory> projects,
                                   std::span<const szz::FaultLabel> labels,
                                   std::span<const violations::ViolationDelta> deltas,
                                   const violations::RuleCatalog& catalog) {
  std::unordered_map<std::string_view, bool> label_of;
  for (const auto& l : labels) label_of.emplace(l.commit, l.inducing);
  violations::DeltaIndex index(deltas);

  FeatureMatrix x;
  x.n_cols = catalog.size();
  for (const auto& r : catalog.rules()) x.column_names.push_back(r.squid);

  for (const auto& project : projects) {
    std::vector<std::size_t> order(project.commits.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return project.commits[a].timestamp < project.commits[b].timestamp;
    });
    for (std::size_t i : order) {
      const auto& c = project.commits[i];
      std::vector<double> row(x.n_cols, 0.0);
      if (const auto* intro = index.introduced_by_rule(c.hash)) {
        for (const auto& [rule, count] : *intro) {
          if (auto col = catalog.column(rule)) row[*col] += static_cast<double>(count);
        }
      }
      x.values.insert(x.values.end(), row.begin(), row.end());
      auto it = label_of.find(c.hash);
      x.labels.push_back(it != label_of.end() && it->second ? 1 : 0);
      x.projects.push_back(project.project);
      x.commits.push_back(c.hash);
      x.timestamps.push_back(c.timestamp);
      ++x.n_rows;
    }
  }
  return x;
}

void write_features_csv(std::ostream& out, const FeatureMatrix& x) {
  csv::Writer w(out);
  std::vector<std::string> header{"project", "commit", "timestamp", "label"};
  header.insert(header.end(), x.column_names.begin(), x.column_names.end());
  w.row(header);
  for (std::size_t i = 0; i < x.n_rows; ++i) {
    std::vector<std::string> fields{x.projects[i], x.commits[i], std::to_string(x.timestamps[i]),
                                    x.labels[i] ? "1" : "0"};
    for (double v : x.row(i)) fields.push_back(csv::format_double(v));
    w.row(fields);
  }
}

FeatureMatrix read_features_csv(const std::filesystem::path& path) {
  csv::Table t = csv::read(path);
  if (t.header.size() < 4 || t.header[0] != "project" || t.header[1] != "commit" ||
      t.header[2] != "timestamp" || t.header[3] != "label") {
    throw InputError(path.string() + ": expected header project,commit,timestamp,label,...");
  }
  FeatureMatrix x;
  x.n_cols = t.header.size() - 4;
  x.column_names.assign(t.header.begin() + 4, t.header.end());
  for (const auto& row : t.rows) {
    if (row.fields.size() != t.header.size()) {
      throw InputError(path.string() + " line " + std::to_string(row.line) + ": wrong field count");
    }
    x.projects.push_back(row.fields[0]);
    x.commits.push_back(row.fields[1]);
    x.timestamps.push_back(csv::parse_int(row.fields[2]));
    x.labels.push_back(row.fields[3] == "1" ? 1 : 0);
    for (std::size_t j = 4; j < row.fields.size(); ++j) x.values.push_back(csv::parse_double(row.fields[j]));
    ++x.n_rows;
  }
  x.validate();
  return x;
}

}  // namespace faultrank::learners
