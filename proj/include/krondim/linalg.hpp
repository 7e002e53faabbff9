#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "krondim/qmatrix.hpp"
#include "krondim/rational.hpp"

namespace krondim {

/// Row-major matrix of arbitrary-precision integers. Used as the working
/// storage of fraction-free elimination.
struct IntegerMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<Integer> data;

  IntegerMatrix() = default;
  IntegerMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c) {}

  Integer& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  const Integer& operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
};

/// Scales every row by the lcm of its denominators. Row scaling by nonzero
/// factors preserves rank and row echelon structure.
inline IntegerMatrix integer_rows(const QMatrix& m) {
  IntegerMatrix out(m.rows(), m.cols());
  for (std::size_t r = 0; r < m.rows(); ++r) {
    Integer den = 1;
    for (std::size_t c = 0; c < m.cols(); ++c)
      if (m(r, c).get_den() != 1) den = lcm(den, m(r, c).get_den());
    for (std::size_t c = 0; c < m.cols(); ++c) {
      const Rational& q = m(r, c);
      out(r, c) = q.get_num() * (den / q.get_den());
    }
  }
  return out;
}

/// Fraction-free (Bareiss) forward elimination in place. On return the first
/// `pivots.size()` rows are in row echelon form and the rest are zero.
/// Each entry after step k equals a (k+1)-minor of the input, so every
/// division is exact.
inline std::vector<std::size_t> bareiss_echelon(IntegerMatrix& m) {
  std::vector<std::size_t> pivots;
  Integer prev = 1;
  Integer tmp;
  std::size_t r = 0;
  for (std::size_t c = 0; c < m.cols && r < m.rows; ++c) {
    std::size_t p = r;
    while (p < m.rows && sgn(m(p, c)) == 0) ++p;
    if (p == m.rows) continue;
    if (p != r)
      for (std::size_t j = c; j < m.cols; ++j) std::swap(m(p, j), m(r, j));
    const Integer& piv = m(r, c);
    for (std::size_t i = r + 1; i < m.rows; ++i) {
      Integer lead = m(i, c);
      for (std::size_t j = c + 1; j < m.cols; ++j) {
        // m(i,j) = (piv*m(i,j) - lead*m(r,j)) / prev
        mpz_mul(m(i, j).get_mpz_t(), m(i, j).get_mpz_t(), piv.get_mpz_t());
        if (sgn(lead) != 0 && sgn(m(r, j)) != 0) {
          mpz_mul(tmp.get_mpz_t(), lead.get_mpz_t(), m(r, j).get_mpz_t());
          mpz_sub(m(i, j).get_mpz_t(), m(i, j).get_mpz_t(), tmp.get_mpz_t());
        }
        if (prev != 1) mpz_divexact(m(i, j).get_mpz_t(), m(i, j).get_mpz_t(), prev.get_mpz_t());
      }
      m(i, c) = 0;
    }
    prev = m(r, c);
    pivots.push_back(c);
    ++r;
  }
  return pivots;
}

inline std::size_t rank(IntegerMatrix m) {
  if (m.rows > m.cols) {
    IntegerMatrix t(m.cols, m.rows);
    for (std::size_t r = 0; r < m.rows; ++r)
      for (std::size_t c = 0; c < m.cols; ++c) t(c, r) = std::move(m(r, c));
    return bareiss_echelon(t).size();
  }
  return bareiss_echelon(m).size();
}

/// Exact rank over the rationals; 0 for an empty matrix.
inline std::size_t rank(const QMatrix& m) {
  if (m.rows() == 0 || m.cols() == 0) return 0;
  return rank(integer_rows(m));
}

struct RrefResult {
  QMatrix matrix;
  std::vector<std::size_t> pivot_columns;
  std::vector<std::string> pivot_labels;
};

/// Reduced row echelon form. Forward elimination is fraction-free; only the
/// rank-many nonzero rows are normalized and back-substituted as rationals.
/// Zero rows are kept at the bottom so the shape matches the input.
inline RrefResult rref(const QMatrix& m) {
  RrefResult out{QMatrix(m.row_labels(), m.col_labels()), {}, {}};
  if (m.rows() == 0 || m.cols() == 0) return out;
  IntegerMatrix work = integer_rows(m);
  const auto pivots = bareiss_echelon(work);
  const std::size_t r = pivots.size();
  std::vector<std::vector<Rational>> rows(r, std::vector<Rational>(m.cols()));
  for (std::size_t i = 0; i < r; ++i) {
    const Integer& lead = work(i, pivots[i]);
    for (std::size_t c = 0; c < m.cols(); ++c) {
      rows[i][c] = Rational(work(i, c), lead);
      rows[i][c].canonicalize();
    }
  }
  for (std::size_t i = r; i-- > 0;) {
    const std::size_t pc = pivots[i];
    for (std::size_t above = 0; above < i; ++above) {
      const Rational f = rows[above][pc];
      if (sgn(f) == 0) continue;
      for (std::size_t c = pc; c < m.cols(); ++c)
        if (sgn(rows[i][c]) != 0) rows[above][c] -= f * rows[i][c];
    }
  }
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t c = 0; c < m.cols(); ++c) out.matrix(i, c) = rows[i][c];
  out.pivot_columns = pivots;
  for (auto c : pivots) out.pivot_labels.push_back(m.col_labels()[c]);
  return out;
}

/// A ⊗ B with row labels "(i,k)" and column labels "(j,l)".
inline QMatrix kronecker(const QMatrix& a, const QMatrix& b) {
  std::vector<std::string> rows, cols;
  rows.reserve(a.rows() * b.rows());
  cols.reserve(a.cols() * b.cols());
  for (const auto& i : a.row_labels())
    for (const auto& k : b.row_labels()) rows.push_back("(" + i + "," + k + ")");
  for (const auto& j : a.col_labels())
    for (const auto& l : b.col_labels()) cols.push_back("(" + j + "," + l + ")");
  QMatrix out(std::move(rows), std::move(cols));
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) {
      if (sgn(a(i, j)) == 0) continue;
      for (std::size_t k = 0; k < b.rows(); ++k)
        for (std::size_t l = 0; l < b.cols(); ++l)
          out(i * b.rows() + k, j * b.cols() + l) = a(i, j) * b(k, l);
    }
  return out;
}

/// Column-wise Kronecker product: column x is A_x ⊗ B_{h[x]}.
inline QMatrix khatri_rao(const QMatrix& a, const QMatrix& b, std::span<const std::size_t> h) {
  if (h.size() != a.cols()) throw ArgumentError("khatri_rao: h must assign every column of A");
  std::vector<std::string> rows;
  rows.reserve(a.rows() * b.rows());
  for (const auto& i : a.row_labels())
    for (const auto& k : b.row_labels()) rows.push_back("(" + i + "," + k + ")");
  QMatrix out(std::move(rows), a.col_labels());
  for (std::size_t x = 0; x < a.cols(); ++x) {
    if (h[x] >= b.cols()) throw LabelError("khatri_rao: hidden column index out of range");
    for (std::size_t i = 0; i < a.rows(); ++i) {
      if (sgn(a(i, x)) == 0) continue;
      for (std::size_t k = 0; k < b.rows(); ++k) out(i * b.rows() + k, x) = a(i, x) * b(k, h[x]);
    }
  }
  return out;
}

/// Label-keyed variant: `h` maps every column label of A to a column label of B.
inline QMatrix khatri_rao(const QMatrix& a, const QMatrix& b, const std::map<std::string, std::string>& h) {
  std::vector<std::size_t> idx(a.cols());
  for (std::size_t x = 0; x < a.cols(); ++x) {
    auto it = h.find(a.col_labels()[x]);
    if (it == h.end()) throw LabelError("khatri_rao: no image for column '" + a.col_labels()[x] + "'");
    idx[x] = b.col_index(it->second);
  }
  return khatri_rao(a, b, idx);
}

/// Some Z with M·Z = rhs (free variables set to zero), or nullopt.
inline std::optional<QMatrix> solve(const QMatrix& m, const QMatrix& rhs) {
  if (m.rows() != rhs.rows()) throw ArgumentError("solve: row count mismatch");
  QMatrix aug(m.row_labels(), QMatrix::index_labels(m.cols() + rhs.cols()));
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) aug(r, c) = m(r, c);
    for (std::size_t c = 0; c < rhs.cols(); ++c) aug(r, m.cols() + c) = rhs(r, c);
  }
  const auto red = rref(aug);
  QMatrix z(m.col_labels(), rhs.col_labels());
  for (std::size_t i = 0; i < red.pivot_columns.size(); ++i) {
    const std::size_t pc = red.pivot_columns[i];
    if (pc >= m.cols()) return std::nullopt;
    for (std::size_t c = 0; c < rhs.cols(); ++c) z(pc, c) = red.matrix(i, m.cols() + c);
  }
  return z;
}

/// Some N with N·basis = target, i.e. the rows of `target` expressed in the row
/// space of `basis`; nullopt when a row lies outside it.
inline std::optional<QMatrix> solve_left(const QMatrix& basis, const QMatrix& target) {
  auto z = solve(basis.transpose(), target.transpose());
  if (!z) return std::nullopt;
  return z->transpose();
}

}  // namespace krondim
