#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "krondim/errors.hpp"
#include "krondim/hierarchical.hpp"
#include "krondim/linalg.hpp"
#include "krondim/parallel.hpp"
#include "krondim/qmatrix.hpp"
#include "krondim/random.hpp"
#include "krondim/rational.hpp"

namespace krondim {

enum class Convention { zero_one, plus_minus_one };

/// One factor (A or B) of a Kronecker product model. Keeps the description it
/// was built from next to the realized matrix so constructions can recover the
/// hierarchical structure.
class FactorSpec {
 public:
  enum class Kind { raw, hierarchical, identity, hadamard };

  static FactorSpec raw(QMatrix m) {
    FactorSpec f;
    f.kind_ = Kind::raw;
    f.matrix_ = std::move(m);
    f.validate();
    return f;
  }

  static FactorSpec hierarchical(HierarchicalSpec spec, Convention conv = Convention::zero_one) {
    FactorSpec f;
    f.kind_ = Kind::hierarchical;
    f.matrix_ = conv == Convention::zero_one ? build_suffstat(spec) : build_signed_suffstat(spec);
    f.hier_ = std::move(spec);
    f.conv_ = conv;
    f.validate();
    return f;
  }

  /// k x k identity, the hidden factor of a k-mixture.
  static FactorSpec identity(std::size_t k) {
    if (k < 1) throw ArgumentError("identity factor needs k >= 1");
    FactorSpec f;
    f.kind_ = Kind::identity;
    f.matrix_ = QMatrix::identity(k);
    f.validate();
    return f;
  }

  /// Hidden factor of a Hadamard product of mixtures: independent units with
  /// |Y_j| = sizes[j] states, rows "u<j>=<v>" holding 1[y_j = v].
  static FactorSpec hadamard(std::vector<int> sizes) {
    if (sizes.empty()) throw ArgumentError("hadamard factor needs at least one unit");
    const StateSpace ys(sizes);
    std::vector<std::string> rows;
    for (std::size_t j = 0; j < sizes.size(); ++j)
      for (int v = 0; v < sizes[j]; ++v) rows.push_back("u" + std::to_string(j + 1) + "=" + std::to_string(v));
    QMatrix m(rows, ys.labels());
    for (std::size_t c = 0; c < ys.size(); ++c) {
      const State y = ys.state(c);
      std::size_t r = 0;
      for (std::size_t j = 0; j < sizes.size(); ++j)
        for (int v = 0; v < sizes[j]; ++v, ++r)
          if (y[j] == v) m(r, c) = 1;
    }
    FactorSpec f;
    f.kind_ = Kind::hadamard;
    f.matrix_ = std::move(m);
    f.units_ = std::move(sizes);
    f.validate();
    return f;
  }

  Kind kind() const { return kind_; }
  const QMatrix& matrix() const { return matrix_; }
  const std::optional<HierarchicalSpec>& hierarchical_spec() const { return hier_; }
  Convention convention() const { return conv_; }
  const std::vector<int>& unit_sizes() const { return units_; }

  /// State space of the columns, when the factor has one.
  std::optional<StateSpace> space() const {
    if (hier_) return hier_->space;
    if (kind_ == Kind::hadamard) return StateSpace(units_);
    return std::nullopt;
  }

  std::size_t rank() const { return krondim::rank(matrix_); }

  bool has_distinct_columns() const {
    std::set<std::vector<Rational>> seen;
    for (std::size_t c = 0; c < matrix_.cols(); ++c)
      if (!seen.insert(matrix_.column(c)).second) return false;
    return true;
  }

 private:
  void validate() const {
    if (matrix_.cols() == 0) throw ArgumentError("factor matrix has no columns");
    QMatrix ones(std::vector<std::string>{"1"}, matrix_.col_labels());
    for (std::size_t c = 0; c < matrix_.cols(); ++c) ones(0, c) = 1;
    if (krondim::rank(vstack({matrix_, ones})) != krondim::rank(matrix_))
      throw ArgumentError("factor matrix must contain a constant row in its row span");
  }

  Kind kind_ = Kind::raw;
  QMatrix matrix_;
  std::optional<HierarchicalSpec> hier_;
  Convention conv_ = Convention::zero_one;
  std::vector<int> units_;
};

/// The model with statistics F(x,y) = A_x (x) B_y.
struct KroneckerModelSpec {
  FactorSpec visible;
  FactorSpec hidden;

  KroneckerModelSpec(FactorSpec a, FactorSpec b) : visible(std::move(a)), hidden(std::move(b)) {
    if (!hidden.has_distinct_columns()) throw ArgumentError("hidden factor has repeated columns");
  }

  const QMatrix& A() const { return visible.matrix(); }
  const QMatrix& B() const { return hidden.matrix(); }
};

/// F with rows (i,k) and columns (x,y), x-major.
inline QMatrix realize(const KroneckerModelSpec& spec) {
  QMatrix f = kronecker(spec.A(), spec.B());
  return f;
}

inline std::size_t expected_dim(const KroneckerModelSpec& spec) {
  const std::size_t x = spec.A().cols();
  if (x <= 1) return 0;
  return std::min(spec.visible.rank() * spec.hidden.rank() - 1, x - 1);
}

namespace detail {

inline void require_integral(const KroneckerModelSpec& spec) {
  if (!spec.A().is_integral() || !spec.B().is_integral())
    throw UnsupportedSpecError("Jacobian substitution needs integer sufficient statistics");
}

inline long to_long(const Rational& q) { return q.get_num().get_si(); }

}  // namespace detail

/// M(t): column x is sum_y prod_i t_i^{F_i(x,y)} F(x,y), with one positive
/// rational t_i per row of F (rows ordered as in realize()).
inline QMatrix jacobian_eval(const KroneckerModelSpec& spec, std::span<const Rational> t) {
  detail::require_integral(spec);
  const QMatrix& a = spec.A();
  const QMatrix& b = spec.B();
  const std::size_t rows = a.rows() * b.rows();
  if (t.size() != rows) throw ArgumentError("jacobian_eval: need one substitution value per row of F");
  for (const auto& ti : t)
    if (sgn(ti) <= 0) throw ArgumentError("jacobian_eval: substitution values must be positive");
  std::vector<std::string> labels;
  for (const auto& i : a.row_labels())
    for (const auto& k : b.row_labels()) labels.push_back("(" + i + "," + k + ")");
  QMatrix m(std::move(labels), a.col_labels());
  for (std::size_t x = 0; x < a.cols(); ++x)
    for (std::size_t y = 0; y < b.cols(); ++y) {
      Rational w = 1;
      for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t k = 0; k < b.rows(); ++k) {
          const long e = detail::to_long(a(i, x) * b(k, y));
          if (e == 0) continue;
          const Rational& base = t[i * b.rows() + k];
          Integer num, den;
          mpz_pow_ui(num.get_mpz_t(), base.get_num_mpz_t(), static_cast<unsigned long>(e > 0 ? e : -e));
          mpz_pow_ui(den.get_mpz_t(), base.get_den_mpz_t(), static_cast<unsigned long>(e > 0 ? e : -e));
          w *= e > 0 ? Rational(num, den) : Rational(den, num);
        }
      for (std::size_t i = 0; i < a.rows(); ++i) {
        if (sgn(a(i, x)) == 0) continue;
        for (std::size_t k = 0; k < b.rows(); ++k)
          if (sgn(b(k, y)) != 0) m(i * b.rows() + k, x) += w * a(i, x) * b(k, y);
      }
    }
  return m;
}

namespace detail {

/// M(t) for integer t with column x multiplied by prod_i t_i^{-min_y F_i(x,y)},
/// which clears negative exponents without changing the rank. Also reports
/// the largest total degree of an entry after that shift.
inline IntegerMatrix jacobian_integer(const KroneckerModelSpec& spec, std::span<const Integer> t,
                                      std::size_t* max_degree = nullptr) {
  const QMatrix& a = spec.A();
  const QMatrix& b = spec.B();
  const std::size_t ar = a.rows(), br = b.rows();
  std::vector<long> av(a.rows() * a.cols()), bv(b.rows() * b.cols());
  for (std::size_t i = 0; i < ar; ++i)
    for (std::size_t x = 0; x < a.cols(); ++x) av[i * a.cols() + x] = to_long(a(i, x));
  for (std::size_t k = 0; k < br; ++k)
    for (std::size_t y = 0; y < b.cols(); ++y) bv[k * b.cols() + y] = to_long(b(k, y));

  IntegerMatrix m(ar * br, a.cols());
  std::size_t degree = 0;
  std::vector<long> emin(ar * br);
  Integer w, p;
  for (std::size_t x = 0; x < a.cols(); ++x) {
    for (std::size_t r = 0; r < ar * br; ++r) {
      long lo = 0;
      for (std::size_t y = 0; y < b.cols(); ++y) {
        const long e = av[(r / br) * a.cols() + x] * bv[(r % br) * b.cols() + y];
        lo = y == 0 ? e : std::min(lo, e);
      }
      emin[r] = lo;
    }
    for (std::size_t y = 0; y < b.cols(); ++y) {
      w = 1;
      std::size_t deg = 0;
      for (std::size_t r = 0; r < ar * br; ++r) {
        const long e = av[(r / br) * a.cols() + x] * bv[(r % br) * b.cols() + y] - emin[r];
        if (e == 0) continue;
        deg += static_cast<std::size_t>(e);
        if (e == 1) {
          w *= t[r];
        } else {
          mpz_pow_ui(p.get_mpz_t(), t[r].get_mpz_t(), static_cast<unsigned long>(e));
          w *= p;
        }
      }
      degree = std::max(degree, deg);
      for (std::size_t i = 0; i < ar; ++i) {
        const long ai = av[i * a.cols() + x];
        if (ai == 0) continue;
        for (std::size_t k = 0; k < br; ++k) {
          const long f = ai * bv[k * b.cols() + y];
          if (f == 0) continue;
          Integer& cell = m(i * br + k, x);
          if (f == 1)
            cell += w;
          else if (f == -1)
            cell -= w;
          else
            cell += w * f;
        }
      }
    }
  }
  if (max_degree) *max_degree = degree;
  return m;
}

}  // namespace detail

struct RankTrial {
  std::uint64_t seed = 0;
  std::vector<Integer> substitution;
  std::size_t rank = 0;
};

struct RankCertificate {
  std::vector<RankTrial> trials;
  std::size_t best_rank = 0;
  /// Schwartz-Zippel bound r*D/N on the chance that one trial misses the
  /// generic rank r, D the largest entry degree and N the sampling range.
  Rational failure_bound;
};

struct GenericDimResult {
  std::size_t dim = 0;
  RankCertificate certificate;
};

inline constexpr std::int64_t kSubstitutionRange = 1000000;

/// Rank of M(t) at integer t drawn from `trial_seed`; reproducible.
inline RankTrial jacobian_trial(const KroneckerModelSpec& spec, std::uint64_t trial_seed,
                                std::size_t* max_degree = nullptr) {
  detail::require_integral(spec);
  RankTrial trial;
  trial.seed = trial_seed;
  Rng rng(trial_seed);
  const std::size_t rows = spec.A().rows() * spec.B().rows();
  trial.substitution.reserve(rows);
  for (std::size_t i = 0; i < rows; ++i) trial.substitution.emplace_back(static_cast<long>(rng.uniform(1, kSubstitutionRange)));
  trial.rank = rank(detail::jacobian_integer(spec, trial.substitution, max_degree));
  return trial;
}

/// Best rank of M(t) over `trials` random substitutions, minus one. Trial i
/// uses seed derive_seed(seed, i) whatever the thread count.
inline GenericDimResult generic_dim(const KroneckerModelSpec& spec, std::size_t trials = 3, std::uint64_t seed = 0,
                                    unsigned threads = 1) {
  if (trials < 1) throw ArgumentError("generic_dim: trials must be at least 1");
  detail::require_integral(spec);
  GenericDimResult out;
  out.certificate.trials.resize(trials);
  std::vector<std::size_t> degrees(trials);
  parallel_for(trials, threads, [&](std::size_t i) {
    out.certificate.trials[i] = jacobian_trial(spec, derive_seed(seed, i), &degrees[i]);
  });
  for (const auto& t : out.certificate.trials) out.certificate.best_rank = std::max(out.certificate.best_rank, t.rank);
  const std::size_t r = out.certificate.best_rank;
  const std::size_t d = *std::max_element(degrees.begin(), degrees.end());
  Rational bound(Integer(static_cast<unsigned long>(r * d)), Integer(static_cast<long>(kSubstitutionRange)));
  bound.canonicalize();
  out.certificate.failure_bound = bound > 1 ? Rational(1) : bound;
  out.dim = r == 0 ? 0 : r - 1;
  return out;
}

/// Lambda_1 statistics of {0,1}^n in the 0/1 convention.
inline FactorSpec binary_independence(std::size_t n, Convention conv = Convention::zero_one) {
  return FactorSpec::hierarchical(HierarchicalSpec::k_interaction(StateSpace::binary(n), 1), conv);
}

inline KroneckerModelSpec mixture_spec(FactorSpec visible, std::size_t k) {
  if (k < 1) throw ArgumentError("mixture_spec: k must be at least 1");
  return {std::move(visible), FactorSpec::identity(k)};
}

/// n visible and m hidden binary units.
inline KroneckerModelSpec rbm_spec(std::size_t n, std::size_t m) {
  if (n < 1 || m < 1) throw ArgumentError("rbm_spec: n and m must be positive");
  return {binary_independence(n), binary_independence(m)};
}

struct MixtureBoundReport {
  std::size_t rbm_dim = 0;
  std::size_t mixture_dim = 0;
  bool holds = false;   // rbm_dim >= mixture_dim
  bool strict = false;  // rbm_dim > mixture_dim
};

/// Compares RBM(n,m) with the (m+1)-mixture of the binary independence model.
inline MixtureBoundReport mixture_bound_check(std::size_t n, std::size_t m, std::size_t trials = 3,
                                              std::uint64_t seed = 0, unsigned threads = 1) {
  MixtureBoundReport r;
  r.rbm_dim = generic_dim(rbm_spec(n, m), trials, seed, threads).dim;
  r.mixture_dim = generic_dim(mixture_spec(binary_independence(n), m + 1), trials, seed, threads).dim;
  r.holds = r.rbm_dim >= r.mixture_dim;
  r.strict = r.rbm_dim > r.mixture_dim;
  return r;
}

}  // namespace krondim
