#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include "krondim/errors.hpp"
#include "krondim/rational.hpp"

namespace krondim {

/// Dense exact-rational matrix with labeled rows and columns.
///
/// Labels are opaque strings; operations that combine matrices derive new
/// labels from the operands (e.g. "(i,k)" for Kronecker rows). Selecting by a
/// label subset keeps the matrix's own order, not the order of the request.
class QMatrix {
 public:
  QMatrix() = default;

  QMatrix(std::vector<std::string> row_labels, std::vector<std::string> col_labels)
      : row_labels_(std::move(row_labels)),
        col_labels_(std::move(col_labels)),
        entries_(row_labels_.size() * col_labels_.size()) {}

  /// Zero matrix with labels "0", "1", ...
  QMatrix(std::size_t rows, std::size_t cols) : QMatrix(index_labels(rows), index_labels(cols)) {}

  static QMatrix from_rows(const std::vector<std::vector<Rational>>& rows) {
    const std::size_t cols = rows.empty() ? 0 : rows.front().size();
    QMatrix m(rows.size(), cols);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (rows[r].size() != cols) throw ArgumentError("ragged row list");
      for (std::size_t c = 0; c < cols; ++c) m(r, c) = rows[r][c];
    }
    return m;
  }

  static QMatrix from_ints(const std::vector<std::vector<long>>& rows) {
    std::vector<std::vector<Rational>> q;
    q.reserve(rows.size());
    for (const auto& row : rows) q.emplace_back(row.begin(), row.end());
    return from_rows(q);
  }

  static QMatrix identity(std::size_t n) { return identity(index_labels(n)); }

  static QMatrix identity(const std::vector<std::string>& labels) {
    QMatrix m(labels, labels);
    for (std::size_t i = 0; i < labels.size(); ++i) m(i, i) = 1;
    return m;
  }

  static std::vector<std::string> index_labels(std::size_t n) {
    std::vector<std::string> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.push_back(std::to_string(i));
    return out;
  }

  std::size_t rows() const { return row_labels_.size(); }
  std::size_t cols() const { return col_labels_.size(); }
  bool empty() const { return entries_.empty(); }

  Rational& operator()(std::size_t r, std::size_t c) { return entries_[r * cols() + c]; }
  const Rational& operator()(std::size_t r, std::size_t c) const { return entries_[r * cols() + c]; }

  const std::vector<std::string>& row_labels() const { return row_labels_; }
  const std::vector<std::string>& col_labels() const { return col_labels_; }

  void set_row_labels(std::vector<std::string> labels) {
    if (labels.size() != rows()) throw ArgumentError("row label count mismatch");
    row_labels_ = std::move(labels);
  }
  void set_col_labels(std::vector<std::string> labels) {
    if (labels.size() != cols()) throw ArgumentError("column label count mismatch");
    col_labels_ = std::move(labels);
  }

  std::size_t row_index(std::string_view label) const { return find(row_labels_, label, "row"); }
  std::size_t col_index(std::string_view label) const { return find(col_labels_, label, "column"); }

  std::vector<Rational> column(std::size_t c) const {
    std::vector<Rational> out(rows());
    for (std::size_t r = 0; r < rows(); ++r) out[r] = (*this)(r, c);
    return out;
  }

  std::vector<Rational> row(std::size_t r) const {
    return {entries_.begin() + static_cast<std::ptrdiff_t>(r * cols()),
            entries_.begin() + static_cast<std::ptrdiff_t>((r + 1) * cols())};
  }

  QMatrix select_columns(std::span<const std::size_t> idx) const {
    std::vector<std::string> labels;
    labels.reserve(idx.size());
    for (auto c : idx) labels.push_back(col_labels_.at(c));
    QMatrix out(row_labels_, std::move(labels));
    for (std::size_t r = 0; r < rows(); ++r)
      for (std::size_t j = 0; j < idx.size(); ++j) out(r, j) = (*this)(r, idx[j]);
    return out;
  }

  QMatrix select_rows(std::span<const std::size_t> idx) const {
    std::vector<std::string> labels;
    labels.reserve(idx.size());
    for (auto r : idx) labels.push_back(row_labels_.at(r));
    QMatrix out(std::move(labels), col_labels_);
    for (std::size_t i = 0; i < idx.size(); ++i)
      for (std::size_t c = 0; c < cols(); ++c) out(i, c) = (*this)(idx[i], c);
    return out;
  }

  /// Columns whose label is in `labels`, in this matrix's column order.
  QMatrix select_columns_by_label(const std::vector<std::string>& labels) const {
    return select_columns(subset_indices(col_labels_, labels, "column"));
  }

  QMatrix select_rows_by_label(const std::vector<std::string>& labels) const {
    return select_rows(subset_indices(row_labels_, labels, "row"));
  }

  QMatrix transpose() const {
    QMatrix out(col_labels_, row_labels_);
    for (std::size_t r = 0; r < rows(); ++r)
      for (std::size_t c = 0; c < cols(); ++c) out(c, r) = (*this)(r, c);
    return out;
  }

  bool is_integral() const {
    return std::all_of(entries_.begin(), entries_.end(), [](const Rational& q) { return q.get_den() == 1; });
  }

  bool is_zero() const {
    return std::all_of(entries_.begin(), entries_.end(), [](const Rational& q) { return sgn(q) == 0; });
  }

  friend QMatrix operator*(const QMatrix& a, const QMatrix& b) {
    if (a.cols() != b.rows()) throw ArgumentError("matrix product shape mismatch");
    QMatrix out(a.row_labels_, b.col_labels_);
    for (std::size_t i = 0; i < a.rows(); ++i)
      for (std::size_t k = 0; k < a.cols(); ++k) {
        const Rational& aik = a(i, k);
        if (sgn(aik) == 0) continue;
        for (std::size_t j = 0; j < b.cols(); ++j)
          if (sgn(b(k, j)) != 0) out(i, j) += aik * b(k, j);
      }
    return out;
  }

  friend QMatrix operator+(QMatrix a, const QMatrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) throw ArgumentError("matrix sum shape mismatch");
    for (std::size_t i = 0; i < a.entries_.size(); ++i) a.entries_[i] += b.entries_[i];
    return a;
  }

  friend QMatrix operator*(const Rational& s, QMatrix a) {
    for (auto& e : a.entries_) e *= s;
    return a;
  }

  /// Entries only; labels are ignored.
  bool same_entries(const QMatrix& other) const {
    return rows() == other.rows() && cols() == other.cols() && entries_ == other.entries_;
  }

  friend bool operator==(const QMatrix& a, const QMatrix& b) {
    return a.row_labels_ == b.row_labels_ && a.col_labels_ == b.col_labels_ && a.entries_ == b.entries_;
  }

 private:
  static std::size_t find(const std::vector<std::string>& labels, std::string_view label, const char* what) {
    auto it = std::find(labels.begin(), labels.end(), label);
    if (it == labels.end()) throw LabelError(std::string("unknown ") + what + " label '" + std::string(label) + "'");
    return static_cast<std::size_t>(it - labels.begin());
  }

  static std::vector<std::size_t> subset_indices(const std::vector<std::string>& have,
                                                 const std::vector<std::string>& want, const char* what) {
    std::unordered_set<std::string> wanted(want.begin(), want.end());
    for (const auto& w : wanted)
      if (std::find(have.begin(), have.end(), w) == have.end())
        throw LabelError(std::string("unknown ") + what + " label '" + w + "'");
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < have.size(); ++i)
      if (wanted.count(have[i])) idx.push_back(i);
    return idx;
  }

  std::vector<std::string> row_labels_;
  std::vector<std::string> col_labels_;
  std::vector<Rational> entries_;
};

/// Stacks matrices with equal column counts; column labels come from the first.
inline QMatrix vstack(const std::vector<QMatrix>& parts) {
  if (parts.empty()) return {};
  std::vector<std::string> rows;
  for (const auto& p : parts) {
    if (p.cols() != parts.front().cols()) throw ArgumentError("vstack column count mismatch");
    rows.insert(rows.end(), p.row_labels().begin(), p.row_labels().end());
  }
  QMatrix out(std::move(rows), parts.front().col_labels());
  std::size_t offset = 0;
  for (const auto& p : parts) {
    for (std::size_t r = 0; r < p.rows(); ++r)
      for (std::size_t c = 0; c < p.cols(); ++c) out(offset + r, c) = p(r, c);
    offset += p.rows();
  }
  return out;
}

}  // namespace krondim
