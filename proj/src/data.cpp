#include "hyperpipe/data.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <limits>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "hyperpipe/error.hpp"

namespace hyperpipe {

FeatureMatrix::FeatureMatrix(std::size_t rows, std::size_t cols, std::vector<double> values,
                             std::vector<std::string> column_names)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
  if (rows == 0 || cols == 0) throw ValidationError("feature matrix must have at least one row and one column");
  if (values_.size() != rows * cols) throw ValidationError("feature matrix value count does not match shape");
  set_column_names(std::move(column_names));
}

FeatureMatrix FeatureMatrix::filled(std::size_t rows, std::size_t cols, double value) {
  return FeatureMatrix(rows, cols, std::vector<double>(rows * cols, value));
}

std::vector<double> FeatureMatrix::column(std::size_t c) const {
  std::vector<double> out(rows_);
  for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
  return out;
}

void FeatureMatrix::set_column_names(std::vector<std::string> names) {
  if (!names.empty() && names.size() != cols_) throw ValidationError("column name count does not match column count");
  column_names_ = std::move(names);
}

bool FeatureMatrix::has_nan() const noexcept {
  return std::any_of(values_.begin(), values_.end(), [](double v) { return std::isnan(v); });
}

FeatureMatrix FeatureMatrix::select_rows(std::span<const std::size_t> indices) const {
  std::vector<double> out;
  out.reserve(indices.size() * cols_);
  for (auto i : indices) {
    if (i >= rows_) throw ValidationError("row index " + std::to_string(i) + " out of range");
    auto r = row(i);
    out.insert(out.end(), r.begin(), r.end());
  }
  return FeatureMatrix(indices.size(), cols_, std::move(out), column_names_);
}

FeatureMatrix FeatureMatrix::select_columns(std::span<const std::size_t> columns) const {
  std::vector<double> out;
  out.reserve(rows_ * columns.size());
  for (std::size_t r = 0; r < rows_; ++r) {
    for (auto c : columns) {
      if (c >= cols_) throw ValidationError("column index out of range");
      out.push_back((*this)(r, c));
    }
  }
  std::vector<std::string> names;
  if (!column_names_.empty()) {
    for (auto c : columns) names.push_back(column_names_[c]);
  }
  return FeatureMatrix(rows_, columns.size(), std::move(out), std::move(names));
}

FeatureMatrix FeatureMatrix::hconcat(std::span<const FeatureMatrix> blocks) {
  if (blocks.empty()) throw ValidationError("nothing to concatenate");
  const std::size_t rows = blocks.front().rows();
  std::size_t cols = 0;
  for (const auto& b : blocks) {
    if (b.rows() != rows) throw ValidationError("row counts disagree in horizontal concatenation");
    cols += b.cols();
  }
  std::vector<double> out;
  out.reserve(rows * cols);
  for (std::size_t r = 0; r < rows; ++r) {
    for (const auto& b : blocks) {
      auto br = b.row(r);
      out.insert(out.end(), br.begin(), br.end());
    }
  }
  return FeatureMatrix(rows, cols, std::move(out));
}

bool operator==(const FeatureMatrix& a, const FeatureMatrix& b) noexcept {
  if (a.rows_ != b.rows_ || a.cols_ != b.cols_) return false;
  // bitwise, so NaN cells compare equal to themselves
  return std::equal(a.values_.begin(), a.values_.end(), b.values_.begin(), [](double x, double y) {
    return std::bit_cast<std::uint64_t>(x) == std::bit_cast<std::uint64_t>(y);
  });
}

std::string to_string(TargetKind kind) {
  return kind == TargetKind::classification ? "classification" : "regression";
}

TargetKind parse_target_kind(const std::string& text) {
  if (text == "classification") return TargetKind::classification;
  if (text == "regression") return TargetKind::regression;
  throw ValidationError("unknown target kind '" + text + "'");
}

TargetVector::TargetVector(std::vector<double> values, TargetKind kind) : values_(std::move(values)), kind_(kind) {
  for (double v : values_) {
    if (!std::isfinite(v)) throw ValidationError("target values must be finite");
    if (kind_ == TargetKind::classification && v != std::floor(v)) {
      throw ValidationError("classification target values must be integral");
    }
  }
}

std::vector<double> TargetVector::classes() const {
  std::vector<double> out(values_);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

TargetVector TargetVector::select(std::span<const std::size_t> indices) const {
  std::vector<double> out;
  out.reserve(indices.size());
  for (auto i : indices) {
    if (i >= values_.size()) throw ValidationError("row index " + std::to_string(i) + " out of range");
    out.push_back(values_[i]);
  }
  TargetVector t;
  t.values_ = std::move(out);
  t.kind_ = kind_;
  return t;
}

bool operator==(const TargetVector& a, const TargetVector& b) noexcept {
  return a.kind_ == b.kind_ && a.values_ == b.values_;
}

void ExtraData::add(const std::string& name, FeatureMatrix channel) {
  if (channels_.count(name) != 0) throw ValidationError("duplicate extras channel '" + name + "'");
  channels_.emplace(name, std::move(channel));
}

const FeatureMatrix& ExtraData::at(const std::string& name) const {
  auto it = channels_.find(name);
  if (it == channels_.end()) throw ValidationError("unknown extras channel '" + name + "'");
  return it->second;
}

ExtraData ExtraData::select_rows(std::span<const std::size_t> indices) const {
  ExtraData out;
  for (const auto& [name, m] : channels_) out.channels_.emplace(name, m.select_rows(indices));
  return out;
}

Dataset::Dataset(FeatureMatrix x_, TargetVector y_, ExtraData extras_)
    : x(std::move(x_)), y(std::move(y_)), extras(std::move(extras_)) {
  row_ids.resize(x.rows());
  for (std::size_t i = 0; i < row_ids.size(); ++i) row_ids[i] = i;
  validate();
}

Dataset::Dataset(FeatureMatrix x_, TargetVector y_, ExtraData extras_, std::vector<std::size_t> ids)
    : x(std::move(x_)), y(std::move(y_)), extras(std::move(extras_)), row_ids(std::move(ids)) {
  validate();
}

void Dataset::validate() const {
  if (y.size() != x.rows()) throw ValidationError("target length does not match feature rows");
  if (row_ids.size() != x.rows()) throw ValidationError("row id count does not match feature rows");
  for (const auto& [name, m] : extras.channels()) {
    if (m.rows() != x.rows()) throw ValidationError("extras channel '" + name + "' row count does not match");
  }
}

Dataset subset(const Dataset& data, std::span<const std::size_t> indices) {
  if (indices.empty()) throw ValidationError("subset needs at least one index");
  std::vector<std::size_t> ids;
  ids.reserve(indices.size());
  for (auto i : indices) {
    if (i >= data.rows()) throw ValidationError("row index " + std::to_string(i) + " out of range");
    ids.push_back(data.row_ids[i]);
  }
  return Dataset(data.x.select_rows(indices), data.y.select(indices), data.extras.select_rows(indices), std::move(ids));
}

namespace {

void hash_matrix(Sha256& h, const FeatureMatrix& m) {
  h.update_u64(m.rows()).update_u64(m.cols());
  for (double v : m.values()) h.update_f64(v);
}

}  // namespace

DataFingerprint fingerprint(const Dataset& data) {
  Sha256 h;
  h.update_str("dataset/v1");
  hash_matrix(h, data.x);
  h.update_str(to_string(data.y.kind()));
  h.update_u64(data.y.size());
  for (double v : data.y.values()) h.update_f64(v);
  h.update_u64(data.extras.channels().size());
  for (const auto& [name, m] : data.extras.channels()) {
    h.update_str(name);
    hash_matrix(h, m);
  }
  return {h.finish()};
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string trim(std::string s) {
  auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

struct RawCsv {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

RawCsv read_raw_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open data file '" + path.string() + "'");
  RawCsv csv;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line_no == 1 && line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
    if (trim(line).empty()) continue;
    auto cells = split_line(line);
    for (auto& c : cells) c = trim(c);
    if (csv.header.empty()) {
      csv.header = std::move(cells);
      continue;
    }
    if (cells.size() != csv.header.size()) {
      throw ValidationError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                            std::to_string(csv.header.size()) + " cells, found " + std::to_string(cells.size()));
    }
    csv.rows.push_back(std::move(cells));
  }
  if (csv.header.empty()) throw ValidationError("data file '" + path.string() + "' has no header row");
  if (csv.rows.empty()) throw ValidationError("data file '" + path.string() + "' has no data rows");
  return csv;
}

double parse_cell(const std::string& cell, std::size_t row, std::size_t col) {
  if (cell.empty()) return std::numeric_limits<double>::quiet_NaN();
  double v = 0.0;
  const char* first = cell.data();
  if (*first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, cell.data() + cell.size(), v);
  if (ec != std::errc() || ptr != cell.data() + cell.size()) {
    throw ValidationError("non-numeric cell '" + cell + "' at data row " + std::to_string(row + 1) + ", column " +
                          std::to_string(col + 1));
  }
  return v;
}

}  // namespace

Dataset load_csv_dataset(const std::filesystem::path& path, const ColumnRef& target_column, TargetKind kind) {
  if (!std::filesystem::exists(path)) throw ValidationError("missing data file '" + path.string() + "'");
  auto csv = read_raw_csv(path);
  std::size_t target = 0;
  if (const auto* name = std::get_if<std::string>(&target_column)) {
    auto it = std::find(csv.header.begin(), csv.header.end(), *name);
    if (it == csv.header.end()) throw ValidationError("unknown target column '" + *name + "'");
    target = static_cast<std::size_t>(it - csv.header.begin());
  } else {
    target = std::get<std::size_t>(target_column);
    if (target >= csv.header.size()) throw ValidationError("unknown target column index " + std::to_string(target));
  }
  if (csv.header.size() < 2) throw ValidationError("data file needs at least one feature column besides the target");

  const std::size_t rows = csv.rows.size();
  const std::size_t cols = csv.header.size() - 1;
  std::vector<double> xs;
  xs.reserve(rows * cols);
  std::vector<double> ys;
  ys.reserve(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < csv.header.size(); ++c) {
      const double v = parse_cell(csv.rows[r][c], r, c);
      if (c == target) {
        if (std::isnan(v)) throw ValidationError("empty target cell at data row " + std::to_string(r + 1));
        if (kind == TargetKind::classification && v != std::floor(v)) {
          throw ValidationError("non-integral classification target at data row " + std::to_string(r + 1));
        }
        ys.push_back(v);
      } else {
        xs.push_back(v);
      }
    }
  }
  std::vector<std::string> names;
  for (std::size_t c = 0; c < csv.header.size(); ++c) {
    if (c != target) names.push_back(csv.header[c]);
  }
  return Dataset(FeatureMatrix(rows, cols, std::move(xs), std::move(names)), TargetVector(std::move(ys), kind));
}

FeatureMatrix load_csv_features(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw ValidationError("missing data file '" + path.string() + "'");
  auto csv = read_raw_csv(path);
  std::vector<double> xs;
  xs.reserve(csv.rows.size() * csv.header.size());
  for (std::size_t r = 0; r < csv.rows.size(); ++r) {
    for (std::size_t c = 0; c < csv.header.size(); ++c) xs.push_back(parse_cell(csv.rows[r][c], r, c));
  }
  return FeatureMatrix(csv.rows.size(), csv.header.size(), std::move(xs), csv.header);
}

void write_csv_dataset(const Dataset& data, const std::filesystem::path& path, const std::string& target_name) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  const auto& names = data.x.column_names();
  for (std::size_t c = 0; c < data.x.cols(); ++c) {
    out << (names.empty() ? "x" + std::to_string(c) : names[c]) << ',';
  }
  out << target_name << '\n';
  char buf[64];
  for (std::size_t r = 0; r < data.rows(); ++r) {
    for (std::size_t c = 0; c < data.x.cols(); ++c) {
      const double v = data.x(r, c);
      if (!std::isnan(v)) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        out << buf;
      }
      out << ',';
    }
    std::snprintf(buf, sizeof buf, "%.17g", data.y[r]);
    out << buf << '\n';
  }
}

}  // namespace hyperpipe
