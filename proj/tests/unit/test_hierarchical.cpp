#include <gtest/gtest.h>

#include <random>

#include "krondim/hierarchical.hpp"

using namespace krondim;

namespace {

// Product over lambda of (q_i - 1), summed; the dimension of the model's
// linear span written out directly.
std::size_t dimension_formula(const std::vector<int>& cards, const std::vector<Subset>& family) {
  std::size_t total = 0;
  for (const auto& s : family) {
    std::size_t p = 1;
    for (int i : s) p *= static_cast<std::size_t>(cards[static_cast<std::size_t>(i)] - 1);
    total += p;
  }
  return total;
}

std::vector<Subset> all_subsets_up_to(std::size_t n, std::size_t k) {
  std::vector<Subset> out;
  for (unsigned m = 0; m < (1u << n); ++m) {
    if (static_cast<std::size_t>(__builtin_popcount(m)) > k) continue;
    Subset s;
    for (std::size_t i = 0; i < n; ++i)
      if (m >> i & 1u) s.push_back(static_cast<int>(i));
    out.push_back(s);
  }
  return out;
}

}  // namespace

TEST(StateSpace, MixedRadixWithFirstVariableMostSignificant) {
  const StateSpace s({2, 3});
  EXPECT_EQ(s.size(), 6u);
  EXPECT_EQ(s.state(1), (State{0, 1}));
  EXPECT_EQ(s.state(3), (State{1, 0}));
  EXPECT_EQ(s.index(State{1, 2}), 5u);
  EXPECT_EQ(s.labels(), (std::vector<std::string>{"00", "01", "02", "10", "11", "12"}));
  EXPECT_EQ(s.parse("12"), (State{1, 2}));
  EXPECT_EQ(s.parse("1,2"), (State{1, 2}));
  EXPECT_THROW(s.parse("13"), ArgumentError);
  EXPECT_THROW(s.parse("1x"), ArgumentError);
}

TEST(StateSpace, LargeAlphabetsUseCommaLabels) {
  const StateSpace s({12, 2});
  const State x{11, 1};
  EXPECT_EQ(s.label(x), "11,1");
  EXPECT_EQ(s.parse("11,1"), x);
}

TEST(InteractionSet, ValidatesClosureAndEmptySet) {
  EXPECT_NO_THROW(InteractionSet(3, {{}, {0}, {1}, {0, 1}}));
  try {
    InteractionSet(3, {{}, {0}, {0, 1}});
    FAIL() << "expected an exception";
  } catch (const ArgumentError& e) {
    EXPECT_NE(std::string(e.what()).find("not inclusion-closed"), std::string::npos);
  }
  EXPECT_THROW(InteractionSet(2, {{0}}), ArgumentError);
  EXPECT_THROW(InteractionSet(2, {{}, {2}}), ArgumentError);
  EXPECT_THROW(InteractionSet(2, {{}, {0, 0}}), ArgumentError);
  EXPECT_EQ(k_interaction(4, 2).as_k_interaction(), std::optional<std::size_t>(2));
  EXPECT_EQ(InteractionSet(3, {{}, {0}}).as_k_interaction(), std::nullopt);
}

TEST(Suffstat, BinaryIndependenceByHand) {
  const auto spec = HierarchicalSpec::k_interaction(StateSpace::binary(2), 1);
  const QMatrix a = build_suffstat(spec);
  EXPECT_EQ(a.row_labels(), (std::vector<std::string>{"{}", "{1}=(1)", "{2}=(1)"}));
  EXPECT_EQ(a.col_labels(), (std::vector<std::string>{"00", "01", "10", "11"}));
  EXPECT_TRUE(a.same_entries(QMatrix::from_ints({{1, 1, 1, 1}, {0, 0, 1, 1}, {0, 1, 0, 1}})));
}

TEST(Suffstat, SignedRowsByHand) {
  const auto spec = HierarchicalSpec::k_interaction(StateSpace::binary(2), 2);
  const QMatrix s = build_signed_suffstat(spec);
  // Rows {}, {1}=(0), {1}=(1), {2}=(0), {2}=(1), {1,2}=(0,0), ... in +-1 form.
  ASSERT_EQ(s.rows(), 9u);
  EXPECT_EQ(s.row_labels()[1], "{1}=(0)");
  EXPECT_EQ(s.row_labels()[5], "{1,2}=(0,0)");
  for (std::size_t c = 0; c < 4; ++c) EXPECT_EQ(s(0, c), 1);
  EXPECT_EQ(s.row(1), (std::vector<Rational>{1, 1, -1, -1}));
  EXPECT_EQ(s.row(5), (std::vector<Rational>{1, -1, -1, -1}));
}

TEST(Suffstat, DocumentedRanks) {
  EXPECT_EQ(rank(build_suffstat(HierarchicalSpec::k_interaction(StateSpace::binary(4), 1))), 5u);
  EXPECT_EQ(rank(build_suffstat(HierarchicalSpec::k_interaction(StateSpace::binary(3), 2))), 7u);
}

TEST(Suffstat, RankMatchesDimensionFormulaAndSignedForm) {
  std::mt19937_64 g(23);
  std::uniform_int_distribution<int> card(1, 3), nvars(1, 4);
  for (int t = 0; t < 60; ++t) {
    const auto n = static_cast<std::size_t>(nvars(g));
    std::vector<int> cards(n);
    for (auto& c : cards) c = card(g);
    const std::size_t k = static_cast<std::size_t>(g() % (n + 1));
    const auto family = all_subsets_up_to(n, k);
    const HierarchicalSpec spec(StateSpace(cards), InteractionSet(n, family));
    const QMatrix a = build_suffstat(spec);
    const QMatrix s = build_signed_suffstat(spec);
    const std::size_t expect = dimension_formula(cards, family);
    EXPECT_EQ(rank(a), expect);
    EXPECT_EQ(dim_V(spec), expect);
    EXPECT_EQ(rank(s), expect);
    EXPECT_EQ(rank(vstack({a, s})), expect);  // same row span
    // Every 0/1 entry follows its definition.
    const auto rows = stat_rows(spec, false);
    for (std::size_t r = 0; r < rows.size(); ++r)
      for (std::size_t c = 0; c < a.cols(); ++c) {
        const State x = spec.space.state(c);
        bool hit = true;
        for (std::size_t j = 0; j < rows[r].lambda.size(); ++j)
          hit = hit && x[static_cast<std::size_t>(rows[r].lambda[j])] == rows[r].values[j];
        EXPECT_EQ(a(r, c), hit ? 1 : 0);
      }
  }
}

TEST(LambdaBall, KInteractionBallIsHammingBall) {
  const StateSpace space = StateSpace::uniform(4, 3);
  for (std::size_t k = 0; k <= 4; ++k) {
    const auto spec = HierarchicalSpec::k_interaction(space, k);
    const State center{2, 0, 1, 1};
    std::vector<std::size_t> expect;
    for (std::size_t i = 0; i < space.size(); ++i)
      if (hamming_distance(space.state(i), center) <= k) expect.push_back(i);
    EXPECT_EQ(lambda_ball(spec, center), expect);
    EXPECT_TRUE(check_full_rank_ball(spec, center));
  }
}

TEST(LambdaBall, NonUniformFamilies) {
  const HierarchicalSpec spec(StateSpace({2, 3, 2}), InteractionSet(3, {{}, {0}, {1}, {2}, {1, 2}}));
  const State c{1, 2, 0};
  const auto ball = lambda_ball(spec, c);
  EXPECT_EQ(ball.size(), dim_V(spec));
  EXPECT_TRUE(check_full_rank_ball(spec, c));
}

TEST(IndicatorExpansion, ReproducesIndicators) {
  const HierarchicalSpec spec(StateSpace({3, 2, 3}), k_interaction(3, 2));
  const QMatrix a = build_suffstat(spec);
  for (const auto& lambda : spec.interactions.subsets()) {
    std::vector<int> target(lambda.size(), 0);
    // Walk every target tuple over the full alphabets.
    for (;;) {
      const auto coeff = indicator_expansion(spec, lambda, target);
      for (std::size_t c = 0; c < a.cols(); ++c) {
        const State x = spec.space.state(c);
        Rational v = 0;
        for (std::size_t r = 0; r < a.rows(); ++r) v += coeff[r] * a(r, c);
        bool hit = true;
        for (std::size_t j = 0; j < lambda.size(); ++j) hit = hit && x[static_cast<std::size_t>(lambda[j])] == target[j];
        EXPECT_EQ(v, hit ? 1 : 0);
      }
      std::size_t pos = target.size();
      while (pos > 0 && ++target[pos - 1] == spec.space.cardinality(static_cast<std::size_t>(lambda[pos - 1])))
        target[--pos] = 0;
      if (pos == 0) break;
    }
  }
  EXPECT_THROW(indicator_expansion(spec, {0, 1, 2}, {0, 0, 0}), ArgumentError);
}
