#include <gtest/gtest.h>

#include <random>

#include "krondim/linalg.hpp"
#include "krondim/simplex.hpp"

using namespace krondim;

namespace {

// Determinant by cofactor expansion along the first row.
Rational det(const std::vector<std::vector<Rational>>& m) {
  const std::size_t n = m.size();
  if (n == 0) return 1;
  if (n == 1) return m[0][0];
  Rational total = 0;
  for (std::size_t j = 0; j < n; ++j) {
    if (sgn(m[0][j]) == 0) continue;
    std::vector<std::vector<Rational>> minor;
    for (std::size_t i = 1; i < n; ++i) {
      std::vector<Rational> row;
      for (std::size_t c = 0; c < n; ++c)
        if (c != j) row.push_back(m[i][c]);
      minor.push_back(row);
    }
    total += (j % 2 ? -1 : 1) * m[0][j] * det(minor);
  }
  return total;
}

// Largest k with a nonzero k x k minor.
std::size_t rank_by_minors(const QMatrix& a) {
  const std::size_t r = a.rows(), c = a.cols();
  std::size_t best = 0;
  for (unsigned rm = 1; rm < (1u << r); ++rm)
    for (unsigned cm = 1; cm < (1u << c); ++cm) {
      const int k = __builtin_popcount(rm);
      if (k != __builtin_popcount(cm) || static_cast<std::size_t>(k) <= best) continue;
      std::vector<std::vector<Rational>> m;
      for (std::size_t i = 0; i < r; ++i) {
        if (!(rm >> i & 1u)) continue;
        std::vector<Rational> row;
        for (std::size_t j = 0; j < c; ++j)
          if (cm >> j & 1u) row.push_back(a(i, j));
        m.push_back(row);
      }
      if (sgn(det(m)) != 0) best = static_cast<std::size_t>(k);
    }
  return best;
}

QMatrix random_matrix(std::mt19937_64& g, std::size_t r, std::size_t c, int spread, bool fractions) {
  std::uniform_int_distribution<int> v(-spread, spread), d(1, 4), zero(0, 3);
  QMatrix m(r, c);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) {
      if (zero(g) == 0) continue;  // sparse entries make low rank more likely
      m(i, j) = fractions ? Rational(v(g), d(g)) : Rational(v(g));
      m(i, j).canonicalize();
    }
  return m;
}

}  // namespace

TEST(Rank, MatchesMinorExpansionOnRandomMatrices) {
  std::mt19937_64 g(11);
  std::uniform_int_distribution<int> dim(1, 5);
  for (int t = 0; t < 300; ++t) {
    const auto m = random_matrix(g, static_cast<std::size_t>(dim(g)), static_cast<std::size_t>(dim(g)), 3, t % 2 == 1);
    EXPECT_EQ(rank(m), rank_by_minors(m)) << "trial " << t;
  }
}

TEST(Rank, DependentRowsAndEmptyMatrix) {
  auto m = QMatrix::from_ints({{1, 2, 3}, {2, 4, 6}, {1, 0, 1}});
  EXPECT_EQ(rank(m), 2u);
  EXPECT_EQ(rank(QMatrix(0, 0)), 0u);
  EXPECT_EQ(rank(QMatrix(3, 2)), 0u);
  EXPECT_EQ(rank(QMatrix::identity(6)), 6u);
}

TEST(Rank, LargeEntriesStayExact) {
  // Hilbert matrix: nonsingular, with entries that defeat floating point.
  const std::size_t n = 9;
  QMatrix h(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) h(i, j) = Rational(1, static_cast<long>(i + j + 1));
  EXPECT_EQ(rank(h), n);
}

TEST(Rref, IsReducedAndSpansTheSameRows) {
  std::mt19937_64 g(5);
  for (int t = 0; t < 100; ++t) {
    const auto m = random_matrix(g, 4, 5, 4, t % 3 == 0);
    const auto r = rref(m);
    const std::size_t k = r.pivot_columns.size();
    ASSERT_EQ(k, rank_by_minors(m));
    for (std::size_t i = 0; i < k; ++i) {
      const std::size_t p = r.pivot_columns[i];
      if (i > 0) {
        EXPECT_GT(p, r.pivot_columns[i - 1]);
      }
      for (std::size_t row = 0; row < r.matrix.rows(); ++row) EXPECT_EQ(r.matrix(row, p), row == i ? 1 : 0);
      for (std::size_t c = 0; c < p; ++c) EXPECT_EQ(sgn(r.matrix(i, c)), 0);
    }
    for (std::size_t row = k; row < r.matrix.rows(); ++row)
      for (std::size_t c = 0; c < r.matrix.cols(); ++c) EXPECT_EQ(sgn(r.matrix(row, c)), 0);
    EXPECT_EQ(rank(vstack({m, r.matrix})), k);
  }
}

TEST(Rref, ReportsPivotLabels) {
  QMatrix m = QMatrix::from_ints({{0, 2, 4}, {0, 1, 3}});
  m.set_col_labels({"a", "b", "c"});
  const auto r = rref(m);
  EXPECT_EQ(r.pivot_labels, (std::vector<std::string>{"b", "c"}));
}

TEST(Kronecker, EntriesAndLabels) {
  const auto a = QMatrix::from_ints({{1, 2}, {3, 4}});
  const auto b = QMatrix::from_ints({{0, 5, 1}, {6, 7, 0}});
  const auto k = kronecker(a, b);
  ASSERT_EQ(k.rows(), 4u);
  ASSERT_EQ(k.cols(), 6u);
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j)
      for (std::size_t r = 0; r < 2; ++r)
        for (std::size_t c = 0; c < 3; ++c) EXPECT_EQ(k(i * 2 + r, j * 3 + c), a(i, j) * b(r, c));
  EXPECT_EQ(k.row_labels()[1], "(0,1)");
  EXPECT_EQ(k.col_labels()[4], "(1,1)");
  // rank(A (x) B) = rank(A) rank(B)
  EXPECT_EQ(rank(k), rank(a) * rank(b));
}

TEST(KhatriRao, ColumnsPairVisibleWithChosenHidden) {
  const auto a = QMatrix::from_ints({{1, 1, 1}, {0, 1, 2}});
  const auto b = QMatrix::identity(2);
  const std::vector<std::size_t> h{1, 0, 1};
  const auto kr = khatri_rao(a, b, h);
  ASSERT_EQ(kr.rows(), 4u);
  ASSERT_EQ(kr.cols(), 3u);
  for (std::size_t x = 0; x < 3; ++x)
    for (std::size_t i = 0; i < 2; ++i)
      for (std::size_t k = 0; k < 2; ++k) EXPECT_EQ(kr(i * 2 + k, x), a(i, x) * b(k, h[x]));
  // Khatri-Rao columns are a column selection of the Kronecker product.
  const auto full = kronecker(a, b);
  for (std::size_t x = 0; x < 3; ++x) EXPECT_EQ(kr.column(x), full.column(x * 2 + h[x]));
}

TEST(KhatriRao, RejectsBadAssignments) {
  const auto a = QMatrix::identity(2);
  const auto b = QMatrix::identity(2);
  const std::vector<std::size_t> short_h{0};
  const std::vector<std::size_t> far{0, 5};
  EXPECT_THROW(khatri_rao(a, b, short_h), ArgumentError);
  EXPECT_THROW(khatri_rao(a, b, far), LabelError);
  EXPECT_THROW(khatri_rao(a, b, std::map<std::string, std::string>{{"0", "9"}, {"1", "0"}}), LabelError);
}

TEST(Solve, RecoversSolutionsAndDetectsInconsistency) {
  std::mt19937_64 g(3);
  for (int t = 0; t < 50; ++t) {
    const auto m = random_matrix(g, 3, 4, 3, true);
    const auto x = random_matrix(g, 4, 1, 3, true);
    const auto rhs = m * x;
    const auto got = solve(m, rhs);
    ASSERT_TRUE(got.has_value());
    EXPECT_TRUE((m * *got).same_entries(rhs));
  }
  const auto m = QMatrix::from_ints({{1, 1}, {2, 2}});
  EXPECT_FALSE(solve(m, QMatrix::from_ints({{1}, {3}})).has_value());
}

TEST(Solve, LeftSolveExpressesRowsInABasis) {
  const auto basis = QMatrix::from_ints({{1, 1, 1}, {0, 1, 2}});
  const auto target = QMatrix::from_ints({{2, 3, 4}, {0, -1, -2}});
  const auto n = solve_left(basis, target);
  ASSERT_TRUE(n.has_value());
  EXPECT_TRUE((*n * basis).same_entries(target));
  EXPECT_FALSE(solve_left(basis, QMatrix::from_ints({{1, 0, 0}})).has_value());
}

TEST(Simplex, FindsStrictlyFeasiblePoints) {
  StrictFeasibilityProblem p(2);
  p.add({Rational(1), Rational(0)});
  p.add({Rational(0), Rational(1)});
  p.add({Rational(-1), Rational(3)});
  const auto u = strict_feasible(p);
  ASSERT_TRUE(u.has_value());
  EXPECT_TRUE(p.satisfied_by(*u));
}

TEST(Simplex, DetectsInfeasibleSystems) {
  // A nonnegative combination of the rows vanishes, so no point works.
  StrictFeasibilityProblem p(3);
  p.add({Rational(1), Rational(1), Rational(0)});
  p.add({Rational(0), Rational(-1), Rational(1)});
  p.add({Rational(-1), Rational(0), Rational(-1)});
  EXPECT_FALSE(strict_feasible(p).has_value());

  StrictFeasibilityProblem q(1);
  q.add({Rational(0)});
  EXPECT_FALSE(strict_feasible(q).has_value());
}

TEST(Simplex, AgreesWithGridSearchOnRandomSystems) {
  // Any grid point is a witness; Gordan's alternative gives certificates the
  // other way for two unknowns: infeasible iff constraints are not in one open
  // half-plane, which a fine angular grid detects.
  std::mt19937_64 g(17);
  std::uniform_int_distribution<int> v(-3, 3), cnt(1, 4);
  for (int t = 0; t < 200; ++t) {
    StrictFeasibilityProblem p(2);
    const int m = cnt(g);
    for (int i = 0; i < m; ++i) p.add({Rational(v(g)), Rational(v(g))});
    bool grid = false;
    for (int a = -60; a <= 60 && !grid; ++a)
      for (int b = -60; b <= 60 && !grid; ++b) {
        const std::vector<Rational> u{Rational(a), Rational(b)};
        grid = p.satisfied_by(u);
      }
    EXPECT_EQ(strict_feasible(p).has_value(), grid) << "trial " << t;
  }
}

TEST(RationalText, ParsesAndPrints) {
  EXPECT_EQ(parse_rational("6/4"), Rational(3, 2));
  EXPECT_EQ(parse_rational("-7"), Rational(-7));
  EXPECT_EQ(to_string(make_rational(-3, 6)), "-1/2");
  EXPECT_THROW(parse_rational("1/0"), ArgumentError);
  EXPECT_THROW(parse_rational("1.5"), ArgumentError);
  EXPECT_THROW(parse_rational("3/-4"), ArgumentError);
  EXPECT_EQ(binomial(7, 3), 35);
  EXPECT_EQ(binomial(3, 7), 0);
}
