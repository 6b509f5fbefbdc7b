#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "error.hpp"
#include "sorted_sample.hpp"

namespace sddmon {

/// n samples x d real features, row-major, with optional per-row
/// correctness labels (1 = prediction correct / in scope).
class FeatureMatrix {
 public:
  FeatureMatrix() = default;

  FeatureMatrix(std::size_t rows, std::size_t cols, std::vector<double> data,
                std::optional<std::vector<std::uint8_t>> correct = std::nullopt)
      : rows_(rows), cols_(cols), data_(std::move(data)), correct_(std::move(correct)) {
    if (data_.size() != rows_ * cols_)
      throw Error(ErrorCode::kDimensionMismatch,
                  "FeatureMatrix: data size " + std::to_string(data_.size()) + " != " +
                      std::to_string(rows_) + "x" + std::to_string(cols_));
    for (std::size_t i = 0; i < data_.size(); ++i) {
      if (!std::isfinite(data_[i]))
        throw Error(ErrorCode::kNonFiniteValue,
                    "FeatureMatrix: non-finite entry at row " + std::to_string(i / cols_) +
                        ", column " + std::to_string(i % cols_));
    }
    if (correct_) {
      if (correct_->size() != rows_)
        throw Error(ErrorCode::kDimensionMismatch, "FeatureMatrix: label count != row count");
      for (auto v : *correct_) {
        if (v > 1) throw Error(ErrorCode::kInvalidArgument, "FeatureMatrix: labels must be 0/1");
      }
    }
  }

  static FeatureMatrix from_rows(const std::vector<std::vector<double>>& rows,
                                 std::optional<std::vector<std::uint8_t>> correct = std::nullopt) {
    const std::size_t d = rows.empty() ? 0 : rows.front().size();
    std::vector<double> data;
    data.reserve(rows.size() * d);
    for (const auto& r : rows) {
      if (r.size() != d) throw Error(ErrorCode::kDimensionMismatch, "from_rows: ragged rows");
      data.insert(data.end(), r.begin(), r.end());
    }
    return FeatureMatrix(rows.size(), d, std::move(data), std::move(correct));
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return rows_ == 0; }

  double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }
  std::span<const double> row(std::size_t r) const noexcept {
    return {data_.data() + r * cols_, cols_};
  }
  std::span<const double> data() const noexcept { return data_; }

  std::vector<double> column(std::size_t c) const {
    std::vector<double> out(rows_);
    for (std::size_t r = 0; r < rows_; ++r) out[r] = data_[r * cols_ + c];
    return out;
  }

  SortedSample sorted_column(std::size_t c) const { return SortedSample::make(column(c)); }

  bool has_labels() const noexcept { return correct_.has_value(); }
  const std::optional<std::vector<std::uint8_t>>& labels() const noexcept { return correct_; }

  /// Fraction of rows labelled correct. Requires labels.
  double accuracy() const {
    if (!correct_) throw Error(ErrorCode::kInvalidArgument, "accuracy: matrix has no labels");
    if (rows_ == 0) return 0.0;
    std::size_t ok = 0;
    for (auto v : *correct_) ok += v;
    return static_cast<double>(ok) / static_cast<double>(rows_);
  }

  /// Rows at the given indices (repeats allowed), labels carried along.
  FeatureMatrix select(std::span<const std::size_t> idx) const {
    std::vector<double> data;
    data.reserve(idx.size() * cols_);
    std::optional<std::vector<std::uint8_t>> lab;
    if (correct_) lab.emplace().reserve(idx.size());
    for (auto i : idx) {
      auto r = row(i);
      data.insert(data.end(), r.begin(), r.end());
      if (lab) lab->push_back((*correct_)[i]);
    }
    return FeatureMatrix(idx.size(), cols_, std::move(data), std::move(lab));
  }

  bool operator==(const FeatureMatrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
  std::optional<std::vector<std::uint8_t>> correct_;
};

/// Shortest representation that parses back to the identical double.
inline std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace csv {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto pos = line.find(',', start);
    out.push_back(trim(line.substr(start, pos == std::string_view::npos ? line.npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline double parse_number(std::string_view cell, std::string_view source, std::size_t line_no,
                           std::size_t col) {
  double v = 0.0;
  if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
  auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (cell.empty() || res.ec != std::errc() || res.ptr != cell.data() + cell.size())
    throw Error(ErrorCode::kParseError, std::string(source) + ":" + std::to_string(line_no) +
                                            ": column " + std::to_string(col + 1) +
                                            ": cannot parse '" + std::string(cell) + "'");
  if (!std::isfinite(v))
    throw Error(ErrorCode::kNonFiniteValue, std::string(source) + ":" + std::to_string(line_no) +
                                                ": non-finite value in column " +
                                                std::to_string(col + 1));
  return v;
}

}  // namespace csv

/// Reads the feature CSV format: a header naming f0..f{d-1} in order plus an
/// optional `correct` column (0/1) at any position. Every row must be complete.
inline FeatureMatrix read_feature_csv(std::istream& in, std::string_view source = "<stream>") {
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line))
    throw Error(ErrorCode::kParseError, std::string(source) + ": missing header row");
  ++line_no;
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  const auto header = csv::split(line);
  std::optional<std::size_t> correct_col;
  std::vector<std::size_t> feature_col;  // feature index -> csv column
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c] == "correct") {
      if (correct_col)
        throw Error(ErrorCode::kParseError, std::string(source) + ":1: duplicate 'correct' column");
      correct_col = c;
      continue;
    }
    const std::string expected = "f" + std::to_string(feature_col.size());
    if (header[c] != expected)
      throw Error(ErrorCode::kParseError, std::string(source) + ":1: expected column '" +
                                              expected + "', found '" + std::string(header[c]) +
                                              "'");
    feature_col.push_back(c);
  }
  if (feature_col.empty())
    throw Error(ErrorCode::kParseError, std::string(source) + ":1: no feature columns");

  std::vector<double> data;
  std::vector<std::uint8_t> labels;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (csv::trim(line).empty()) continue;
    const auto cells = csv::split(line);
    if (cells.size() != header.size())
      throw Error(ErrorCode::kParseError, std::string(source) + ":" + std::to_string(line_no) +
                                              ": expected " + std::to_string(header.size()) +
                                              " cells, found " + std::to_string(cells.size()));
    for (auto c : feature_col) data.push_back(csv::parse_number(cells[c], source, line_no, c));
    if (correct_col) {
      const auto cell = cells[*correct_col];
      if (cell != "0" && cell != "1")
        throw Error(ErrorCode::kParseError, std::string(source) + ":" + std::to_string(line_no) +
                                                ": 'correct' must be 0 or 1, found '" +
                                                std::string(cell) + "'");
      labels.push_back(cell == "1" ? 1 : 0);
    }
    ++rows;
  }
  std::optional<std::vector<std::uint8_t>> lab;
  if (correct_col) lab = std::move(labels);
  return FeatureMatrix(rows, feature_col.size(), std::move(data), std::move(lab));
}

inline FeatureMatrix read_feature_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open '" + path + "'");
  return read_feature_csv(in, path);
}

inline void write_feature_csv(std::ostream& out, const FeatureMatrix& x) {
  for (std::size_t c = 0; c < x.cols(); ++c) out << (c ? "," : "") << 'f' << c;
  if (x.has_labels()) out << ",correct";
  out << '\n';
  for (std::size_t r = 0; r < x.rows(); ++r) {
    for (std::size_t c = 0; c < x.cols(); ++c) out << (c ? "," : "") << format_double(x(r, c));
    if (x.has_labels()) out << ',' << static_cast<int>((*x.labels())[r]);
    out << '\n';
  }
}

}  // namespace sddmon
