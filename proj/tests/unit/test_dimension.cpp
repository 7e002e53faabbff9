#include <gtest/gtest.h>

#include <random>

#include "krondim/dimension.hpp"

using namespace krondim;

namespace {

// q_x(t) = sum_y prod_r t_r^{F_r(x,y)} with F = A (x) B written out here.
Rational marginal(const QMatrix& a, const QMatrix& b, std::size_t x, const std::vector<Rational>& t) {
  Rational total = 0;
  for (std::size_t y = 0; y < b.cols(); ++y) {
    Rational w = 1;
    for (std::size_t i = 0; i < a.rows(); ++i)
      for (std::size_t k = 0; k < b.rows(); ++k)
        if (sgn(a(i, x) * b(k, y)) != 0) w *= t[i * b.rows() + k];
    total += w;
  }
  return total;
}

std::vector<Rational> random_t(std::mt19937_64& g, std::size_t n) {
  std::uniform_int_distribution<int> num(1, 50), den(1, 7);
  std::vector<Rational> t(n);
  for (auto& v : t) {
    v = Rational(num(g), den(g));
    v.canonicalize();
  }
  return t;
}

}  // namespace

TEST(Jacobian, MatchesExactDifferencesForZeroOneStatistics) {
  // With 0/1 statistics q_x is affine in every t_r, so
  // t_r dq_x/dt_r = t_r (q_x(t + e_r) - q_x(t)) exactly.
  std::mt19937_64 g(9);
  for (const auto& spec : {rbm_spec(3, 1), mixture_spec(binary_independence(3), 2), rbm_spec(2, 2)}) {
    const auto t = random_t(g, spec.A().rows() * spec.B().rows());
    const QMatrix m = jacobian_eval(spec, t);
    for (std::size_t x = 0; x < spec.A().cols(); ++x)
      for (std::size_t r = 0; r < t.size(); ++r) {
        auto bumped = t;
        bumped[r] += 1;
        const Rational expect =
            t[r] * (marginal(spec.A(), spec.B(), x, bumped) - marginal(spec.A(), spec.B(), x, t));
        EXPECT_EQ(m(r, x), expect);
      }
  }
}

TEST(Jacobian, RejectsBadSubstitutions) {
  const auto spec = rbm_spec(2, 1);
  std::vector<Rational> t(spec.A().rows() * spec.B().rows(), Rational(2));
  t[0] = 0;
  EXPECT_THROW(jacobian_eval(spec, t), ArgumentError);
  t.pop_back();
  EXPECT_THROW(jacobian_eval(spec, t), ArgumentError);
  const KroneckerModelSpec frac(FactorSpec::raw(QMatrix::from_rows({{Rational(1), Rational(1)}, {Rational(0), Rational(1, 2)}})),
                                FactorSpec::identity(1));
  const std::vector<Rational> t2(2, Rational(3));
  EXPECT_THROW(jacobian_eval(frac, t2), UnsupportedSpecError);
}

TEST(GenericDim, DocumentedValues) {
  const auto rbm = generic_dim(rbm_spec(4, 2), 3, 0);
  EXPECT_EQ(rbm.dim, 14u);
  EXPECT_EQ(expected_dim(rbm_spec(4, 2)), 14u);

  const auto mix = mixture_spec(binary_independence(4), 3);
  EXPECT_EQ(expected_dim(mix), 14u);
  EXPECT_EQ(generic_dim(mix).dim, 13u);

  const auto single = mixture_spec(binary_independence(5), 1);
  EXPECT_EQ(generic_dim(single).dim, 5u);
  EXPECT_EQ(expected_dim(single), 5u);
}

TEST(GenericDim, AgreesWithRandomRationalPoints) {
  std::mt19937_64 g(4);
  for (const auto& spec : {rbm_spec(3, 2), mixture_spec(binary_independence(4), 2), rbm_spec(4, 1)}) {
    const auto d = generic_dim(spec, 3, 7).dim;
    std::size_t best = 0;
    for (int i = 0; i < 3; ++i) best = std::max(best, rank(jacobian_eval(spec, random_t(g, spec.A().rows() * spec.B().rows()))));
    EXPECT_EQ(best - 1, d);
    EXPECT_LE(d, expected_dim(spec));
  }
}

TEST(GenericDim, CertificateIsReproducibleAcrossThreadCounts) {
  const auto spec = rbm_spec(4, 3);
  const auto one = generic_dim(spec, 4, 99, 1);
  const auto many = generic_dim(spec, 4, 99, 4);
  ASSERT_EQ(one.certificate.trials.size(), 4u);
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_EQ(one.certificate.trials[i].seed, derive_seed(99, i));
    EXPECT_EQ(one.certificate.trials[i].seed, many.certificate.trials[i].seed);
    EXPECT_EQ(one.certificate.trials[i].substitution, many.certificate.trials[i].substitution);
    EXPECT_EQ(one.certificate.trials[i].rank, many.certificate.trials[i].rank);
    for (const auto& v : one.certificate.trials[i].substitution) {
      EXPECT_GE(v, 1);
      EXPECT_LE(v, kSubstitutionRange);
    }
  }
  EXPECT_EQ(one.certificate.failure_bound, many.certificate.failure_bound);
  EXPECT_EQ(generic_dim(rbm_spec(4, 2)).certificate.failure_bound, Rational(3, 20000));
}

TEST(GenericDim, RbmTableSmallCases) {
  for (std::size_t n = 1; n <= 4; ++n)
    for (std::size_t m = 1; m <= 3; ++m) {
      const std::size_t expect = std::min((std::size_t{1} << n) - 1, (n + 1) * (m + 1) - 1);
      EXPECT_EQ(generic_dim(rbm_spec(n, m)).dim, expect) << n << "," << m;
    }
}

TEST(GenericDim, MixtureBound) {
  const auto r = mixture_bound_check(4, 2);
  EXPECT_EQ(r.rbm_dim, 14u);
  EXPECT_EQ(r.mixture_dim, 13u);
  EXPECT_TRUE(r.holds);
  EXPECT_TRUE(r.strict);
}

TEST(Factors, ValidationAndShapes) {
  EXPECT_THROW(FactorSpec::raw(QMatrix::from_ints({{1, 0}, {0, 0}})), ArgumentError);  // no constant row
  EXPECT_NO_THROW(FactorSpec::raw(QMatrix::from_ints({{1, 0}, {0, 1}})));
  EXPECT_THROW(KroneckerModelSpec(binary_independence(2), FactorSpec::raw(QMatrix::from_ints({{1, 1}, {0, 0}}))),
               ArgumentError);
  const auto h = FactorSpec::hadamard({2, 3});
  EXPECT_EQ(h.matrix().rows(), 5u);
  EXPECT_EQ(h.matrix().cols(), 6u);
  EXPECT_EQ(h.rank(), 4u);
  EXPECT_EQ(h.matrix().row_labels()[2], "u2=0");
  // Binary independent units span the same rows as the Hadamard factor.
  const auto units = FactorSpec::hadamard({2, 2});
  const auto rbm_hidden = binary_independence(2);
  EXPECT_EQ(rank(vstack({units.matrix(), rbm_hidden.matrix()})), 3u);
  EXPECT_EQ(realize(rbm_spec(2, 1)).rows(), 6u);
}
