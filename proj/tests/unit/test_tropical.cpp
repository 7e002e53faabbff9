#include <gtest/gtest.h>

#include "krondim/codes.hpp"
#include "krondim/tropical.hpp"

using namespace krondim;

namespace {

// The planar configuration: A = I_2, B has columns (1; p_y).
KroneckerModelSpec planar_spec() {
  const std::vector<std::vector<Rational>> b = {
      {1, 1, 1, 1, 1, 1},
      {0, 0, 1, -1, -1, Rational(1, 2)},
      {-1, 1, 1, 1, 0, -1},
  };
  return {FactorSpec::raw(QMatrix::identity(2)), FactorSpec::raw(QMatrix::from_rows(b))};
}

QMatrix planar_theta() {
  // Column x holds the functional applied to (1; p).
  return QMatrix::from_ints({{0, 0}, {2, 0}, {1, 1}});
}

std::vector<State> states(const StateSpace& s, std::initializer_list<const char*> labels) {
  std::vector<State> out;
  for (const char* l : labels) out.push_back(s.parse(l));
  return out;
}

// Scores computed entry by entry: S(y,x) = sum_{k,i} B(k,y) Theta(k,i) A(i,x).
QMatrix direct_scores(const KroneckerModelSpec& spec, const QMatrix& theta) {
  const QMatrix& a = spec.A();
  const QMatrix& b = spec.B();
  QMatrix s(b.cols(), a.cols());
  for (std::size_t y = 0; y < b.cols(); ++y)
    for (std::size_t x = 0; x < a.cols(); ++x)
      for (std::size_t k = 0; k < b.rows(); ++k)
        for (std::size_t i = 0; i < a.rows(); ++i) s(y, x) += b(k, y) * theta(k, i) * a(i, x);
  return s;
}

}  // namespace

TEST(Inference, PlanarConfiguration) {
  const auto spec = planar_spec();
  const auto theta = planar_theta();
  EXPECT_TRUE(score_matrix(spec, theta).same_entries(direct_scores(spec, theta)));
  const auto h = infer(spec, theta);
  ASSERT_EQ(h.images.size(), 2u);
  EXPECT_EQ(h.images[0], (std::vector<std::size_t>{2}));
  EXPECT_EQ(h.images[1], (std::vector<std::size_t>{1, 2, 3}));
  EXPECT_FALSE(h.generic());
  EXPECT_THROW(h.values(), ArgumentError);

  // Tie columns average A_x (x) B_y over the tie set.
  const QMatrix t = tropical_matrix(spec, h);
  const QMatrix& b = spec.B();
  for (std::size_t k = 0; k < 3; ++k) {
    EXPECT_EQ(t(0 * 3 + k, 0), b(k, 2));
    EXPECT_EQ(t(1 * 3 + k, 0), 0);
    EXPECT_EQ(t(0 * 3 + k, 1), 0);
    EXPECT_EQ(t(1 * 3 + k, 1), (b(k, 1) + b(k, 2) + b(k, 3)) / 3);
  }
  const auto cert = certify(spec, theta);
  EXPECT_EQ(cert.rank, 2u);
  EXPECT_EQ(cert.dim, 1u);
}

TEST(Inference, MakeGenericKeepsStrictPreferences) {
  const auto spec = planar_spec();
  const auto h0 = infer(spec, planar_theta());
  const QMatrix g = make_generic(spec, planar_theta(), 3);
  const auto h = infer(spec, g);
  ASSERT_TRUE(h.generic());
  for (std::size_t x = 0; x < 2; ++x)
    EXPECT_NE(std::find(h0.images[x].begin(), h0.images[x].end(), h.images[x][0]), h0.images[x].end());
  EXPECT_TRUE(make_generic(spec, g, 3).same_entries(g));
}

TEST(Inference, GenericTropicalMatrixIsKhatriRao) {
  const auto spec = mixture_spec(binary_independence(3), 2);
  const QMatrix theta = QMatrix::from_ints({{3, -1, -1, -1}, {-4, 3, 3, 3}});
  const auto h = infer(spec, theta);
  ASSERT_TRUE(h.generic());
  const auto v = h.values();
  const QMatrix t = tropical_matrix(spec, h);
  for (std::size_t x = 0; x < 8; ++x) {
    std::vector<Rational> expect;
    for (std::size_t i = 0; i < spec.A().rows(); ++i)
      for (std::size_t k = 0; k < 2; ++k) expect.push_back(spec.A()(i, x) * spec.B()(k, v[x]));
    EXPECT_EQ(t.column(x), expect);
  }
}

TEST(Realizable, XorIsNotRealizableByTwoAffineScores) {
  const auto spec = mixture_spec(binary_independence(2), 2);
  const std::vector<std::size_t> xorh{0, 1, 1, 0};
  EXPECT_FALSE(realizable(spec, xorh).has_value());
  const std::vector<std::size_t> split{0, 0, 1, 1};
  const auto theta = realizable(spec, split);
  ASSERT_TRUE(theta.has_value());
  EXPECT_EQ(infer(spec, *theta).values(), split);
}

TEST(Realizable, CountsLinearDichotomiesOfTheSquare) {
  // Of the 16 two-colourings of the square's corners, all but XOR and its
  // complement are cut by a line.
  const auto spec = mixture_spec(binary_independence(2), 2);
  std::size_t count = 0;
  for (unsigned m = 0; m < 16; ++m) {
    std::vector<std::size_t> h(4);
    for (std::size_t x = 0; x < 4; ++x) h[x] = m >> x & 1u;
    if (auto theta = realizable(spec, h)) {
      ++count;
      EXPECT_EQ(infer(spec, *theta).values(), h);
    }
  }
  EXPECT_EQ(count, 14u);
}

TEST(SignedStatistics, InnerProductIdentity) {
  for (std::size_t n = 2; n <= 5; ++n)
    for (std::size_t k = 1; k <= std::min<std::size_t>(n, 3); ++k)
      for (int q : {2, 3}) {
        if (q == 3 && n > 4) continue;
        const auto spec = HierarchicalSpec::k_interaction(StateSpace::uniform(n, q), k);
        const QMatrix s = build_signed_suffstat(spec);
        const State c(n, 0);
        for (std::size_t x = 0; x < spec.space.size(); ++x) {
          const State xs = spec.space.state(x);
          Rational ip = 0;
          for (std::size_t r = 0; r < s.rows(); ++r) ip += s(r, x) * s(r, 0);
          const std::size_t d = hamming_distance(xs, c);
          EXPECT_EQ(ip, Rational(static_cast<long>(s.rows())) - 4 * Rational(lambda_hits(n, k, d)));
        }
      }
}

TEST(SignedStatistics, SeparatingOffsetCutsOutTheBall) {
  for (std::size_t n = 2; n <= 6; ++n)
    for (std::size_t k = 1; k <= std::min<std::size_t>(n, 2); ++k) {
      const auto spec = HierarchicalSpec::k_interaction(StateSpace::binary(n), k);
      const QMatrix s = build_signed_suffstat(spec);
      const Integer base = static_cast<long>(s.rows() - 1);
      for (std::size_t r = 0; r <= n; ++r) {
        const Integer tau = ball_separating_offset(n, k, r, base);
        for (std::size_t x = 0; x < spec.space.size(); ++x) {
          Rational score = Rational(tau);
          for (std::size_t row = 1; row < s.rows(); ++row) score += s(row, x) * s(row, 0);
          const bool inside = hamming_distance(spec.space.state(x), State(n, 0)) <= r;
          EXPECT_EQ(score > 0, inside) << "n=" << n << " k=" << k << " r=" << r << " x=" << x;
          EXPECT_GE(abs(score), 2);
        }
      }
    }
}

TEST(Truncation, HandExample) {
  // A: binary independence on 2 variables, states 00, 01, 10, 11.
  const QMatrix a = binary_independence(2).matrix();
  const QMatrix tc = QMatrix::from_ints({{0, 0, 0}, {-1, 2, 0}});  // C_1 = {x1 = 1}
  const QMatrix td = QMatrix::from_ints({{0, 0, 0}, {1, 0, -2}});  // D_2 = {x2 = 0}
  const auto tr = truncate_slicing(a, tc, td);
  EXPECT_EQ(tr.c, 2);
  ASSERT_EQ(tr.blocks.size(), 3u);
  EXPECT_EQ(tr.blocks[0], (std::vector<std::size_t>{0}));
  EXPECT_EQ(tr.blocks[1], (std::vector<std::size_t>{2}));
  EXPECT_EQ(tr.blocks[2], (std::vector<std::size_t>{1, 3}));
  const auto explicit_c = truncate_slicing(a, tc, td, Rational(5));
  EXPECT_EQ(explicit_c.blocks, tr.blocks);
  EXPECT_THROW(truncate_slicing(a, tc, QMatrix::from_ints({{0, 0, 0}, {0, 0, 0}})), ArgumentError);
}

TEST(Constructions, BallPackingAndCovering) {
  const StateSpace s4 = StateSpace::binary(4);
  const auto spec = mixture_spec(binary_independence(4), 2);
  const auto rep = construct_ball_slicing(spec, states(s4, {"0000", "1111"}));
  EXPECT_EQ(rep.rank, 10u);
  EXPECT_EQ(rep.dim(), 9u);
  EXPECT_TRUE(rep.matches());
  for (auto x : detail::ball_indices(s4, s4.parse("0000"), 1))
    EXPECT_TRUE(std::binary_search(rep.blocks[0].begin(), rep.blocks[0].end(), x));

  const StateSpace s3 = StateSpace::binary(3);
  const auto cover = construct_ball_slicing(mixture_spec(binary_independence(3), 2), states(s3, {"000", "111"}),
                                            CoverMode::covering);
  EXPECT_EQ(cover.rank, 8u);
  EXPECT_EQ(cover.dim(), 7u);

  EXPECT_THROW(construct_ball_slicing(spec, states(s4, {"0000", "0011"})), PreconditionError);
  EXPECT_THROW(construct_ball_slicing(spec, states(s4, {"0000"})), PreconditionError);
  EXPECT_THROW(construct_ball_slicing(rbm_spec(4, 1), states(s4, {"0000", "1111"})), PreconditionError);
}

TEST(Constructions, HadamardUnits) {
  const StateSpace s4 = StateSpace::binary(4);
  const auto rep = construct_hadamard_slicings(binary_independence(4), {{s4.parse("0000"), 1}, {s4.parse("1111"), 1}},
                                               {states(s4, {"0000"}), states(s4, {"1111"})});
  // The weight-2 states left outside the balls span only rank 4 < 5.
  EXPECT_FALSE(rep.rank_hypothesis);
  EXPECT_EQ(rep.result.predicted_rank, 15u);
  EXPECT_EQ(rep.result.rank, 14u);
  EXPECT_EQ(rep.units.size(), 2u);

  const StateSpace s3 = StateSpace::binary(3);
  const auto cover =
      construct_hadamard_slicings(binary_independence(3), {{s3.parse("000"), 1}, {s3.parse("111"), 1}},
                                  {states(s3, {"000"}), states(s3, {"111"})}, CoverMode::covering);
  EXPECT_EQ(cover.result.rank, 8u);

  EXPECT_THROW(construct_hadamard_slicings(binary_independence(4), {{s4.parse("0000"), 2}, {s4.parse("1111"), 2}},
                                           {states(s4, {"0000"}), states(s4, {"1111"})}),
               PreconditionError);
}

TEST(Constructions, ThresholdPairReachesFullRankForRbm42) {
  // Two threshold functions whose cells leave every quadrant of states with
  // full affine rank; the tropical rank meets the upper bound 15.
  const std::vector<std::size_t> d1{0, 2, 3, 4, 5, 6, 7, 12, 14, 15}, d2{0, 1, 2, 4, 5, 6, 8, 12, 13};
  std::vector<std::size_t> h(16, 0);
  for (auto x : d1) h[x] += 2;
  for (auto x : d2) h[x] += 1;
  const auto spec = rbm_spec(4, 2);
  const auto theta = realizable(spec, h);
  ASSERT_TRUE(theta.has_value());
  EXPECT_EQ(rank(tropical_matrix(spec, InferenceFunction::from_values(h))), 15u);
}

TEST(Constructions, RrefForIndependentHiddenPair) {
  const StateSpace s5 = StateSpace::binary(5);
  const auto spec = rbm_spec(5, 2);
  const auto rep = construct_rref_slicing(spec, states(s5, {"00000", "11100", "00111"}));
  EXPECT_EQ(rep.result.rank, 18u);
  EXPECT_EQ(rep.result.dim(), 17u);
  EXPECT_FALSE(rep.used_echelon_form);

  const KroneckerModelSpec signed_hidden(binary_independence(5), binary_independence(2, Convention::plus_minus_one));
  const auto echelon = construct_rref_slicing(signed_hidden, states(s5, {"00000", "11100", "00111"}));
  EXPECT_TRUE(echelon.used_echelon_form);
  EXPECT_EQ(echelon.result.rank, 18u);

  // 00000 and 00011 are only distance 2 apart.
  EXPECT_THROW(construct_rref_slicing(spec, states(s5, {"00000", "11100", "00011"})), PreconditionError);
}

TEST(Constructions, AdaptHiddenPreservesScores) {
  const auto src = FactorSpec::hadamard({2, 2});
  const auto dst = binary_independence(2);
  const QMatrix theta = QMatrix::from_ints({{1, 0, 2}, {0, 1, -1}, {3, 1, 0}, {-2, 0, 1}});
  const QMatrix moved = adapt_hidden(src.matrix(), dst.matrix(), theta);
  EXPECT_TRUE((src.matrix().transpose() * theta).same_entries(dst.matrix().transpose() * moved));
}

TEST(Oracle, SmallMixtures) {
  OracleOptions opt;
  const auto two = brute_force_tropical_dim(mixture_spec(binary_independence(2), 2), opt);
  EXPECT_EQ(two.dim, 3u);
  const auto spec3 = mixture_spec(binary_independence(3), 2);
  const auto r3 = brute_force_tropical_dim(spec3, opt);
  EXPECT_EQ(r3.dim, 7u);
  EXPECT_EQ(infer(spec3, r3.realizer).values(), r3.witness);
  EXPECT_LE(r3.dim, generic_dim(spec3).dim);
  EXPECT_FALSE(r3.tie_exceeds);
}

TEST(Oracle, InvariantUnderRowTransforms) {
  const auto base = mixture_spec(binary_independence(2), 3);
  const QMatrix q = QMatrix::from_ints({{1, 1, 0}, {0, 1, 2}, {1, 0, -1}});
  ASSERT_EQ(rank(q), 3u);
  const KroneckerModelSpec moved(FactorSpec::raw(q * base.A()), base.hidden);
  OracleOptions opt;
  opt.tie_samples = 0;
  EXPECT_EQ(brute_force_tropical_dim(base, opt).dim, brute_force_tropical_dim(moved, opt).dim);
}

TEST(Oracle, RespectsBudget) {
  OracleOptions opt;
  opt.budget = 1000;
  EXPECT_THROW(brute_force_tropical_dim(mixture_spec(binary_independence(4), 2), opt), ResourceError);
}
