#include "msmpolicy/dataset.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "msmpolicy/error.hpp"

namespace msmpolicy {

std::vector<std::size_t> Dataset::arm_counts() const {
  std::vector<std::size_t> counts(static_cast<std::size_t>(m_), 0);
  for (const auto& row : rows_) ++counts[static_cast<std::size_t>(row.a)];
  return counts;
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
  Dataset out;
  out.d_ = d_;
  out.m_ = m_;
  out.column_names_ = column_names_;
  out.rows_.reserve(indices.size());
  for (std::size_t i : indices) out.rows_.push_back(rows_.at(i));
  return out;
}

Dataset Dataset::arm_subset(int arm) const {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    if (rows_[i].a == arm) idx.push_back(i);
  }
  return subset(idx);
}

Dataset validate_dataset(std::vector<Observation> rows, int m,
                         std::vector<std::string> column_names) {
  if (rows.empty()) throw Error(ErrorCode::kEmptyData, "dataset has no rows");
  if (m < 2) throw Error(ErrorCode::kArmOutOfRange, "arm count must be at least 2");
  const std::size_t d = rows.front().x.size();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& row = rows[i];
    if (row.x.size() != d) {
      throw Error(ErrorCode::kRaggedRows, "row " + std::to_string(i) + " has " +
                                              std::to_string(row.x.size()) +
                                              " covariates, expected " + std::to_string(d));
    }
    if (!std::isfinite(row.y)) {
      throw Error(ErrorCode::kNonFinite, "outcome of row " + std::to_string(i));
    }
    for (double v : row.x) {
      if (!std::isfinite(v)) throw Error(ErrorCode::kNonFinite, "covariate of row " + std::to_string(i));
    }
    if (row.a < 0 || row.a >= m) {
      throw Error(ErrorCode::kArmOutOfRange,
                  "row " + std::to_string(i) + " has arm " + std::to_string(row.a));
    }
  }
  if (column_names.empty()) {
    for (std::size_t j = 0; j < d; ++j) column_names.push_back("x" + std::to_string(j + 1));
  }
  if (column_names.size() != d) {
    throw Error(ErrorCode::kRaggedRows, "column name count does not match covariate dimension");
  }
  Dataset out;
  out.rows_ = std::move(rows);
  out.d_ = d;
  out.m_ = m;
  out.column_names_ = std::move(column_names);
  return out;
}

namespace {

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  for (auto& f : fields) {
    while (!f.empty() && (f.front() == ' ' || f.front() == '\t')) f.remove_prefix(1);
    while (!f.empty() && (f.back() == ' ' || f.back() == '\t' || f.back() == '\r')) f.remove_suffix(1);
  }
  return fields;
}

double parse_double(std::string_view s, std::size_t line_no) {
  double v = 0.0;
  if (s.empty()) throw Error(ErrorCode::kNonFinite, "empty field on line " + std::to_string(line_no));
  // from_chars rejects a leading '+'
  if (s.front() == '+') s.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw Error(ErrorCode::kNonFinite,
                "cannot parse '" + std::string(s) + "' on line " + std::to_string(line_no));
  }
  return v;
}

}  // namespace

Dataset read_dataset_csv(const std::filesystem::path& path, int m) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::kEmptyData, path.string() + " is empty");
  const auto header = split_commas(line);
  if (header.size() < 2 || header[0] != "y" || header[1] != "a") {
    throw Error(ErrorCode::kRaggedRows, "header must start with y,a");
  }
  std::vector<std::string> names;
  for (std::size_t j = 2; j < header.size(); ++j) names.emplace_back(header[j]);

  std::vector<Observation> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto fields = split_commas(line);
    if (fields.size() != header.size()) {
      throw Error(ErrorCode::kRaggedRows, "line " + std::to_string(line_no) + " has " +
                                              std::to_string(fields.size()) + " fields");
    }
    Observation obs;
    obs.y = parse_double(fields[0], line_no);
    const double a = parse_double(fields[1], line_no);
    if (a != std::floor(a)) throw Error(ErrorCode::kArmOutOfRange, "non-integer arm on line " + std::to_string(line_no));
    obs.a = static_cast<int>(a);
    obs.x.reserve(fields.size() - 2);
    for (std::size_t j = 2; j < fields.size(); ++j) obs.x.push_back(parse_double(fields[j], line_no));
    rows.push_back(std::move(obs));
  }
  return validate_dataset(std::move(rows), m, std::move(names));
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::string dataset_to_csv(const Dataset& data) {
  std::ostringstream out;
  out << "y,a";
  for (const auto& name : data.column_names()) out << ',' << name;
  out << '\n';
  for (const auto& row : data.rows()) {
    out << format_double(row.y) << ',' << row.a;
    for (double v : row.x) out << ',' << format_double(v);
    out << '\n';
  }
  return out.str();
}

FeatureMatrix::FeatureMatrix(const Dataset& data) : rows_(data.n()), cols_(data.d()) {
  values_.resize(rows_ * cols_);
  for (std::size_t i = 0; i < rows_; ++i) {
    for (std::size_t j = 0; j < cols_; ++j) values_[j * rows_ + i] = data[i].x[j];
  }
}

}  // namespace msmpolicy
