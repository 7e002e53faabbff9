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

#include "krondim/dimension.hpp"
#include "krondim/errors.hpp"
#include "krondim/hierarchical.hpp"
#include "krondim/linalg.hpp"
#include "krondim/qmatrix.hpp"
#include "krondim/random.hpp"
#include "krondim/rational.hpp"
#include "krondim/simplex.hpp"

namespace krondim {

/// h(x) as a sorted set of hidden column indices per visible column.
struct InferenceFunction {
  std::vector<std::vector<std::size_t>> images;

  bool generic() const {
    return std::all_of(images.begin(), images.end(), [](const auto& s) { return s.size() == 1; });
  }

  /// The singleton values; throws if some h(x) is a tie set.
  std::vector<std::size_t> values() const {
    std::vector<std::size_t> out;
    out.reserve(images.size());
    for (const auto& s : images) {
      if (s.size() != 1) throw ArgumentError("inference function is not singleton-valued");
      out.push_back(s.front());
    }
    return out;
  }

  static InferenceFunction from_values(std::span<const std::size_t> h) {
    InferenceFunction f;
    for (auto y : h) f.images.push_back({y});
    return f;
  }

  friend bool operator==(const InferenceFunction&, const InferenceFunction&) = default;
};

/// Blocks C_y = h^{-1}(y), with an optional realizing parameter matrix.
/// With ties a state lands in several blocks.
struct Slicing {
  std::vector<std::vector<std::size_t>> blocks;
  std::optional<QMatrix> realizer;
};

inline Slicing slicing_of(const InferenceFunction& h, std::size_t hidden_states) {
  Slicing s;
  s.blocks.resize(hidden_states);
  for (std::size_t x = 0; x < h.images.size(); ++x)
    for (auto y : h.images[x]) s.blocks.at(y).push_back(x);
  return s;
}

namespace detail {

inline void check_theta(const KroneckerModelSpec& spec, const QMatrix& theta) {
  if (theta.rows() != spec.B().rows() || theta.cols() != spec.A().rows())
    throw ArgumentError("parameter matrix must be (rows of B) x (rows of A)");
}

}  // namespace detail

/// Empty parameter matrix with rows labeled by B's rows and columns by A's.
inline QMatrix zero_theta(const KroneckerModelSpec& spec) { return QMatrix(spec.B().row_labels(), spec.A().row_labels()); }

/// S(y,x) = <Theta A_x, B_y>, i.e. B^T Theta A.
inline QMatrix score_matrix(const KroneckerModelSpec& spec, const QMatrix& theta) {
  detail::check_theta(spec, theta);
  return spec.B().transpose() * (theta * spec.A());
}

inline InferenceFunction infer_from_scores(const QMatrix& scores) {
  InferenceFunction h;
  h.images.resize(scores.cols());
  for (std::size_t x = 0; x < scores.cols(); ++x) {
    const Rational* best = nullptr;
    for (std::size_t y = 0; y < scores.rows(); ++y) {
      const Rational& s = scores(y, x);
      if (!best || s > *best) {
        best = &s;
        h.images[x] = {y};
      } else if (s == *best) {
        h.images[x].push_back(y);
      }
    }
  }
  return h;
}

/// h(x) = argmax_y <Theta A_x, B_y>, compared exactly.
inline InferenceFunction infer(const KroneckerModelSpec& spec, const QMatrix& theta) {
  return infer_from_scores(score_matrix(spec, theta));
}

/// Column x is the average of A_x (x) B_y over y in h(x).
inline QMatrix tropical_matrix(const KroneckerModelSpec& spec, const InferenceFunction& h) {
  const QMatrix& a = spec.A();
  const QMatrix& b = spec.B();
  if (h.images.size() != a.cols()) throw ArgumentError("inference function must cover every visible state");
  if (h.generic()) return khatri_rao(a, b, h.values());
  std::vector<std::string> rows;
  for (const auto& i : a.row_labels())
    for (const auto& k : b.row_labels()) rows.push_back("(" + i + "," + k + ")");
  QMatrix out(std::move(rows), a.col_labels());
  for (std::size_t x = 0; x < a.cols(); ++x) {
    const auto& ys = h.images[x];
    if (ys.empty()) throw ArgumentError("inference function has an empty image");
    const Rational w(1, static_cast<unsigned long>(ys.size()));
    for (auto y : ys)
      for (std::size_t i = 0; i < a.rows(); ++i) {
        if (sgn(a(i, x)) == 0) continue;
        for (std::size_t k = 0; k < b.rows(); ++k)
          if (sgn(b(k, y)) != 0) out(i * b.rows() + k, x) += w * a(i, x) * b(k, y);
      }
  }
  return out;
}

inline QMatrix tropical_matrix(const KroneckerModelSpec& spec, const QMatrix& theta) {
  return tropical_matrix(spec, infer(spec, theta));
}

struct TropicalCertificate {
  QMatrix theta;
  InferenceFunction h;
  QMatrix matrix;
  std::size_t rank = 0;
  std::size_t dim = 0;  // rank - 1
};

inline TropicalCertificate certify(const KroneckerModelSpec& spec, const QMatrix& theta) {
  TropicalCertificate c;
  c.theta = theta;
  c.h = infer(spec, theta);
  c.matrix = tropical_matrix(spec, c.h);
  c.rank = rank(c.matrix);
  c.dim = c.rank == 0 ? 0 : c.rank - 1;
  return c;
}

/// Breaks the ties of h_Theta without changing any strict preference: adds
/// eps*R for a random integer R, with eps below half the smallest strict
/// score gap divided by the largest score change R can cause. Returns Theta
/// unchanged when it is already generic.
inline QMatrix make_generic(const KroneckerModelSpec& spec, const QMatrix& theta, std::uint64_t seed = 0) {
  const QMatrix s = score_matrix(spec, theta);
  const InferenceFunction h = infer_from_scores(s);
  if (h.generic()) return theta;
  // Smallest gap between a best score and a strictly worse one.
  std::optional<Rational> gap;
  for (std::size_t x = 0; x < s.cols(); ++x) {
    const Rational& top = s(h.images[x].front(), x);
    for (std::size_t y = 0; y < s.rows(); ++y) {
      const Rational d = top - s(y, x);
      if (sgn(d) > 0 && (!gap || d < *gap)) gap = d;
    }
  }
  for (std::uint64_t attempt = 0; attempt < 256; ++attempt) {
    Rng rng(derive_seed(seed, attempt));
    QMatrix r(theta.row_labels(), theta.col_labels());
    for (std::size_t i = 0; i < r.rows(); ++i)
      for (std::size_t j = 0; j < r.cols(); ++j) r(i, j) = Rational(rng.uniform(-1000, 1000));
    const QMatrix rs = score_matrix(spec, r);
    Rational spread = 0;
    for (std::size_t y = 0; y < rs.rows(); ++y)
      for (std::size_t x = 0; x < rs.cols(); ++x) spread = std::max(spread, Rational(abs(rs(y, x))));
    if (sgn(spread) == 0) continue;
    const Rational eps = gap ? Rational(*gap / (4 * spread)) : Rational(1);
    QMatrix candidate = theta + eps * r;
    const InferenceFunction h2 = infer(spec, candidate);
    if (!h2.generic()) continue;
    bool refines = true;
    for (std::size_t x = 0; x < h.images.size() && refines; ++x)
      refines = std::binary_search(h.images[x].begin(), h.images[x].end(), h2.images[x].front());
    if (refines) return candidate;
  }
  throw PreconditionError("could not break the ties of the parameter matrix (repeated hidden columns?)");
}

/// Some Theta realizing the singleton inference function h, or nullopt.
/// Unknowns are the entries of Theta in row-major order.
inline std::optional<QMatrix> realizable(const KroneckerModelSpec& spec, std::span<const std::size_t> h) {
  const QMatrix& a = spec.A();
  const QMatrix& b = spec.B();
  if (h.size() != a.cols()) throw ArgumentError("realizable: h must assign every visible state");
  StrictFeasibilityProblem p(a.rows() * b.rows());
  std::set<std::vector<Rational>> seen;
  for (std::size_t x = 0; x < a.cols(); ++x) {
    if (h[x] >= b.cols()) throw ArgumentError("realizable: hidden index out of range");
    for (std::size_t y = 0; y < b.cols(); ++y) {
      if (y == h[x]) continue;
      std::vector<Rational> c(p.unknowns);
      for (std::size_t k = 0; k < b.rows(); ++k) {
        const Rational diff = b(k, h[x]) - b(k, y);
        if (sgn(diff) == 0) continue;
        for (std::size_t i = 0; i < a.rows(); ++i)
          if (sgn(a(i, x)) != 0) c[k * a.rows() + i] = diff * a(i, x);
      }
      if (seen.insert(c).second) p.add(std::move(c));
    }
  }
  auto u = strict_feasible(p);
  if (!u) return std::nullopt;
  QMatrix theta = zero_theta(spec);
  for (std::size_t k = 0; k < b.rows(); ++k)
    for (std::size_t i = 0; i < a.rows(); ++i) theta(k, i) = (*u)[k * a.rows() + i];
  return theta;
}

// ---------------------------------------------------------------------------
// Helpers shared by the constructions.

/// k when the factor is hierarchical with interactions exactly Lambda_k.
inline std::optional<std::size_t> interaction_order(const FactorSpec& f) {
  if (!f.hierarchical_spec()) return std::nullopt;
  return f.hierarchical_spec()->interactions.as_k_interaction();
}

/// #{lambda in Lambda_k \ {} : lambda meets a fixed d-element set}.
inline Integer lambda_hits(std::size_t n, std::size_t k, std::size_t d) {
  Integer total = 0;
  for (std::size_t j = 1; j <= k; ++j) {
    total += binomial(n, j);
    if (d <= n) total -= binomial(n - d, j);
  }
  return total;
}

/// Offset tau such that base - 4 N(d) + tau is positive iff d <= r, where base
/// is the self inner product of the signed statistics in use and N counts the
/// interactions hit by the difference set. The score is then at least 2 in
/// absolute value.
inline Integer ball_separating_offset(std::size_t n, std::size_t k, std::size_t r, const Integer& base) {
  if (r >= n) return 4 * lambda_hits(n, k, n) - base + 2;
  return 2 * (lambda_hits(n, k, r) + lambda_hits(n, k, r + 1)) - base;
}

/// M with target = M * A for the visible matrix A of `f`; the rows of target
/// must lie in the row span of A.
inline QMatrix signed_transform(const FactorSpec& f, const QMatrix& target) {
  auto m = solve_left(f.matrix(), target);
  if (!m) throw PreconditionError("statistics are not in the row span of the visible factor");
  return *m;
}

/// Theta for hidden matrix b_dst producing the same scores as theta_src does
/// for b_src; needs the rows of b_src in the row span of b_dst.
inline QMatrix adapt_hidden(const QMatrix& b_src, const QMatrix& b_dst, const QMatrix& theta_src) {
  auto n = solve_left(b_dst, b_src);
  if (!n) throw PreconditionError("source hidden statistics are not in the row span of the target");
  QMatrix out = n->transpose() * theta_src;
  out.set_row_labels(b_dst.row_labels());
  return out;
}

namespace detail {

struct SignedVisible {
  HierarchicalSpec spec;
  std::size_t k = 0;
  QMatrix signed_stats;  // +-1 statistics including the empty row
  QMatrix to_visible;    // signed_stats = to_visible * A
};

inline SignedVisible signed_visible(const FactorSpec& visible) {
  const auto k = interaction_order(visible);
  if (!k) throw PreconditionError("visible factor must be a hierarchical k-interaction model");
  SignedVisible sv;
  sv.spec = *visible.hierarchical_spec();
  sv.k = *k;
  sv.signed_stats = build_signed_suffstat(sv.spec);
  sv.to_visible = signed_transform(visible, sv.signed_stats);
  return sv;
}

inline std::vector<State> ball_states(const StateSpace& space, const State& center, std::size_t radius) {
  std::vector<State> out;
  for (std::size_t i = 0; i < space.size(); ++i) {
    State x = space.state(i);
    if (hamming_distance(x, center) <= radius) out.push_back(std::move(x));
  }
  return out;
}

inline std::set<std::size_t> ball_indices(const StateSpace& space, const State& center, std::size_t radius) {
  std::set<std::size_t> out;
  for (const auto& x : ball_states(space, center, radius)) out.insert(space.index(x));
  return out;
}

inline void check_centers(const StateSpace& space, const std::vector<State>& centers) {
  if (centers.empty()) throw ArgumentError("need at least one center");
  for (const auto& c : centers)
    if (!space.contains(c)) throw ArgumentError("center '" + space.label(c) + "' is not in the visible state space");
}

inline void check_packing(const StateSpace& space, const std::vector<State>& centers, std::size_t k) {
  for (std::size_t i = 0; i < centers.size(); ++i)
    for (std::size_t j = i + 1; j < centers.size(); ++j)
      if (hamming_distance(centers[i], centers[j]) < 2 * k + 1)
        throw PreconditionError("centers " + space.label(centers[i]) + " and " + space.label(centers[j]) +
                                " are at distance " + std::to_string(hamming_distance(centers[i], centers[j])) +
                                " < 2k+1 = " + std::to_string(2 * k + 1));
}

inline void check_covering(const StateSpace& space, const std::vector<State>& centers, std::size_t k,
                           const std::set<std::size_t>* region = nullptr) {
  for (std::size_t i = 0; i < space.size(); ++i) {
    if (region && !region->count(i)) continue;
    const State x = space.state(i);
    const bool hit = std::any_of(centers.begin(), centers.end(), [&](const State& c) { return hamming_distance(x, c) <= k; });
    if (!hit)
      throw PreconditionError("state " + space.label(x) + " is not covered by the radius-" + std::to_string(k) + " balls");
  }
}

/// Theta in signed coordinates with row i equal to the signed statistics of
/// centers[i], mapped back to the visible factor.
inline QMatrix center_rows(const SignedVisible& sv, const std::vector<State>& centers) {
  QMatrix rows(QMatrix::index_labels(centers.size()), sv.signed_stats.row_labels());
  for (std::size_t i = 0; i < centers.size(); ++i) {
    const std::size_t c = sv.spec.space.index(centers[i]);
    for (std::size_t r = 0; r < sv.signed_stats.rows(); ++r) rows(i, r) = sv.signed_stats(r, c);
  }
  return rows * sv.to_visible;
}

inline bool contains_all(const std::vector<std::size_t>& block, const std::set<std::size_t>& ball) {
  return std::all_of(ball.begin(), ball.end(), [&](std::size_t x) { return std::binary_search(block.begin(), block.end(), x); });
}

inline std::vector<std::vector<std::size_t>> blocks_of(const InferenceFunction& h, std::size_t ys) {
  return slicing_of(h, ys).blocks;
}

}  // namespace detail

enum class CoverMode { packing, covering };

/// Outcome of one of the explicit constructions.
struct ConstructionReport {
  QMatrix theta;                                   // realizer for `spec`
  InferenceFunction h;
  std::vector<std::vector<std::size_t>> blocks;    // C_y
  std::size_t rank = 0;
  std::size_t predicted_rank = 0;
  bool hypotheses_hold = true;                     // conditions reported rather than enforced
  std::vector<std::string> notes;

  std::size_t dim() const { return rank == 0 ? 0 : rank - 1; }
  std::size_t predicted_dim() const { return predicted_rank == 0 ? 0 : predicted_rank - 1; }
  bool matches() const { return rank == predicted_rank; }
};

inline void finish_report(const KroneckerModelSpec& spec, ConstructionReport& r) {
  r.h = infer(spec, r.theta);
  r.blocks = detail::blocks_of(r.h, spec.B().cols());
  r.rank = rank(tropical_matrix(spec, r.h));
}

/// Mixture slicing by nearest center: Theta row y is the signed statistics of
/// centers[y]. Packing mode requires pairwise distance >= 2k+1 and predicts
/// rank |Y| rank(A); covering mode requires the radius-k balls to cover X and
/// predicts rank |X|.
inline ConstructionReport construct_ball_slicing(const KroneckerModelSpec& spec, const std::vector<State>& centers,
                                                 CoverMode mode = CoverMode::packing, std::uint64_t seed = 0) {
  const auto sv = detail::signed_visible(spec.visible);
  const auto& space = sv.spec.space;
  detail::check_centers(space, centers);
  const QMatrix& b = spec.B();
  if (!b.same_entries(QMatrix::identity(b.rows())))
    throw PreconditionError("ball slicing needs an identity hidden factor (mixture model)");
  if (centers.size() != b.cols())
    throw PreconditionError("number of centers (" + std::to_string(centers.size()) + ") must equal |Y| (" +
                            std::to_string(b.cols()) + ")");
  if (mode == CoverMode::packing)
    detail::check_packing(space, centers, sv.k);
  else
    detail::check_covering(space, centers, sv.k);

  ConstructionReport r;
  QMatrix theta = detail::center_rows(sv, centers);
  theta.set_row_labels(b.row_labels());
  theta.set_col_labels(spec.A().row_labels());
  r.theta = make_generic(spec, theta, seed);
  finish_report(spec, r);
  const std::size_t ra = spec.visible.rank();
  r.predicted_rank = mode == CoverMode::packing ? centers.size() * ra : space.size();
  for (std::size_t y = 0; y < centers.size(); ++y) {
    const auto ball = detail::ball_indices(space, centers[y], sv.k);
    if (mode == CoverMode::packing && !detail::contains_all(r.blocks[y], ball))
      throw std::logic_error("ball slicing block does not contain its ball");
    if (mode == CoverMode::covering)
      for (auto x : r.blocks[y])
        if (!ball.count(x)) throw std::logic_error("covering slicing block leaves its ball");
  }
  return r;
}

struct TruncationResult {
  QMatrix theta;  // N+1 rows: D2 & C_1, ..., D2 & C_N, D1
  Rational c;
  std::vector<std::vector<std::size_t>> blocks;
};

/// Combines an N-slicing (rows of theta_c score C_1..C_N) with a 2-slicing
/// (rows score D_1, D_2) into the slicing D2&C_1, ..., D2&C_N, D1 of A.
/// Both inputs use identity hidden factors, so a row of Theta is the score
/// functional of one block. Without `c` the multiplier is
/// 1 + max|S'| / min|S''_2 - S''_1|.
inline TruncationResult truncate_slicing(const QMatrix& a, const QMatrix& theta_c, const QMatrix& theta_d,
                                         std::optional<Rational> c = std::nullopt) {
  if (theta_c.cols() != a.rows() || theta_d.cols() != a.rows())
    throw ArgumentError("truncate_slicing: parameter matrices must have one column per row of A");
  if (theta_d.rows() != 2) throw ArgumentError("truncate_slicing: the second slicing must have two blocks");
  const std::size_t n = theta_c.rows();
  if (n == 0) throw ArgumentError("truncate_slicing: the first slicing needs at least one block");
  const QMatrix sc = theta_c * a;
  const QMatrix sd = theta_d * a;
  if (!c) {
    Rational max_s = 0, min_g;
    bool have_g = false;
    for (std::size_t x = 0; x < a.cols(); ++x) {
      for (std::size_t i = 0; i < n; ++i) max_s = std::max(max_s, Rational(abs(sc(i, x))));
      const Rational g = abs(sd(1, x) - sd(0, x));
      if (sgn(g) == 0) throw ArgumentError("truncate_slicing: the two-block slicing has a tie");
      if (!have_g || g < min_g) min_g = g;
      have_g = true;
    }
    c = 1 + max_s / min_g;
  }
  if (sgn(*c) <= 0) throw ArgumentError("truncate_slicing: c must be positive");

  TruncationResult out;
  out.c = *c;
  std::vector<std::string> labels = QMatrix::index_labels(n + 1);
  out.theta = QMatrix(labels, theta_c.col_labels());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < a.rows(); ++j) out.theta(i, j) = theta_c(i, j) + *c * theta_d(1, j);
  for (std::size_t j = 0; j < a.rows(); ++j) out.theta(n, j) = *c * theta_d(0, j);
  out.blocks = detail::blocks_of(infer_from_scores(out.theta * a), n + 1);
  return out;
}

/// One Hamming ball by center and radius.
struct HammingBall {
  State center;
  std::size_t radius = 0;
};

struct HadamardReport {
  KroneckerModelSpec spec;               // visible x hadamard(|Y_1|, ..., |Y_m|)
  ConstructionReport result;
  bool rank_hypothesis = true;           // rank(A restricted to X minus the outer balls) == rank(A)
  std::vector<TruncationResult> units;   // per-unit truncated slicings
};

/// Truncated-slicing construction for independent hidden units. Unit j has
/// |Y_j| = inner[j].size() + 1 states; state 0 takes the complement of the
/// outer ball K^j and state i the part of K^j nearest to inner[j][i-1].
inline HadamardReport construct_hadamard_slicings(const FactorSpec& visible, const std::vector<HammingBall>& outer,
                                                  const std::vector<std::vector<State>>& inner,
                                                  CoverMode mode = CoverMode::packing, std::uint64_t seed = 0) {
  const auto sv = detail::signed_visible(visible);
  const auto& space = sv.spec.space;
  const std::size_t n = space.variables();
  if (outer.empty()) throw ArgumentError("need at least one hidden unit");
  if (outer.size() != inner.size()) throw ArgumentError("need one list of inner centers per outer ball");
  std::vector<std::set<std::size_t>> balls;
  for (std::size_t j = 0; j < outer.size(); ++j) {
    detail::check_centers(space, {outer[j].center});
    detail::check_centers(space, inner[j]);
    balls.push_back(detail::ball_indices(space, outer[j].center, outer[j].radius));
  }

  std::vector<int> sizes;
  for (const auto& in : inner) sizes.push_back(static_cast<int>(in.size()) + 1);
  HadamardReport rep{KroneckerModelSpec(visible, FactorSpec::hadamard(sizes)), {}, true, {}};

  if (mode == CoverMode::packing) {
    for (std::size_t i = 0; i < balls.size(); ++i)
      for (std::size_t j = i + 1; j < balls.size(); ++j)
        for (auto x : balls[i])
          if (balls[j].count(x))
            throw PreconditionError("outer balls " + std::to_string(i + 1) + " and " + std::to_string(j + 1) +
                                    " intersect");
    for (std::size_t j = 0; j < inner.size(); ++j) {
      detail::check_packing(space, inner[j], sv.k);
      for (const auto& c : inner[j])
        for (auto x : detail::ball_indices(space, c, sv.k))
          if (!balls[j].count(x))
            throw PreconditionError("inner ball at " + space.label(c) + " is not inside outer ball " +
                                    std::to_string(j + 1));
    }
  } else {
    std::set<std::size_t> all;
    for (const auto& b : balls) all.insert(b.begin(), b.end());
    if (all.size() != space.size()) throw PreconditionError("outer balls do not cover the visible state space");
    for (std::size_t j = 0; j < inner.size(); ++j) detail::check_covering(space, inner[j], sv.k, &balls[j]);
  }

  const QMatrix& a = visible.matrix();
  const Integer base = static_cast<long>(sv.signed_stats.rows());
  std::vector<QMatrix> unit_rows;
  for (std::size_t j = 0; j < outer.size(); ++j) {
    // Inner N-slicing by nearest inner center, with ties broken.
    const KroneckerModelSpec mix(visible, FactorSpec::identity(inner[j].size()));
    QMatrix tc = detail::center_rows(sv, inner[j]);
    tc.set_row_labels(mix.B().row_labels());
    tc.set_col_labels(a.row_labels());
    tc = make_generic(mix, tc, derive_seed(seed, j));
    // Two-slicing: D_1 outside K^j scores 0, D_2 inside scores positive.
    QMatrix td(QMatrix::index_labels(2), sv.signed_stats.row_labels());
    const std::size_t c = space.index(outer[j].center);
    for (std::size_t r = 0; r < sv.signed_stats.rows(); ++r) td(1, r) = sv.signed_stats(r, c);
    td(1, 0) += Rational(ball_separating_offset(n, sv.k, outer[j].radius, base));
    td = td * sv.to_visible;
    auto tr = truncate_slicing(a, tc, td);
    const std::size_t nb = inner[j].size();
    QMatrix rows(QMatrix::index_labels(nb + 1), a.row_labels());
    for (std::size_t col = 0; col < a.rows(); ++col) {
      rows(0, col) = tr.theta(nb, col);
      for (std::size_t i = 0; i < nb; ++i) rows(i + 1, col) = tr.theta(i, col);
    }
    unit_rows.push_back(std::move(rows));
    rep.units.push_back(std::move(tr));
  }
  QMatrix theta = vstack(unit_rows);
  theta.set_row_labels(rep.spec.B().row_labels());
  theta.set_col_labels(a.row_labels());
  rep.result.theta = std::move(theta);
  finish_report(rep.spec, rep.result);

  std::vector<std::size_t> rest;
  for (std::size_t x = 0; x < space.size(); ++x)
    if (std::none_of(balls.begin(), balls.end(), [&](const auto& b) { return b.count(x) > 0; })) rest.push_back(x);
  const std::size_t ra = visible.rank();
  rep.rank_hypothesis = rank(a.select_columns(rest)) == ra;
  std::size_t factor = 1;
  for (int s : sizes) factor += static_cast<std::size_t>(s - 1);
  if (mode == CoverMode::packing) {
    rep.result.predicted_rank = factor * ra;
    rep.result.hypotheses_hold = rep.rank_hypothesis;
    if (!rep.rank_hypothesis)
      rep.result.notes.push_back("rank(A) on the states outside the outer balls is " +
                                 std::to_string(rank(a.select_columns(rest))) + " < rank(A) = " + std::to_string(ra));
  } else {
    rep.result.predicted_rank = space.size();
  }
  return rep;
}

struct RrefReport {
  ConstructionReport result;
  std::vector<std::size_t> groups;  // l(y), 0-based row of the grouping matrix
  bool used_echelon_form = false;   // B's own rows did not group; an echelon basis was used
  QMatrix signed_theta;             // rows kappa_j (tau; A_{c_j}) before mapping to A and B
};

namespace detail {

/// Index of the last nonzero entry of each column, if every row is the
/// positive leading entry of some column and the rows are independent.
inline std::optional<std::vector<std::size_t>> last_nonzero_groups(const QMatrix& b) {
  if (rank(b) != b.rows()) return std::nullopt;
  std::vector<std::size_t> g(b.cols());
  std::vector<bool> positive(b.rows(), false);
  for (std::size_t y = 0; y < b.cols(); ++y) {
    std::size_t r = b.rows();
    while (r > 0 && sgn(b(r - 1, y)) == 0) --r;
    if (r == 0) return std::nullopt;
    g[y] = r - 1;
    if (sgn(b(r - 1, y)) > 0) positive[r - 1] = true;
  }
  if (!std::all_of(positive.begin(), positive.end(), [](bool p) { return p; })) return std::nullopt;
  return g;
}

}  // namespace detail

/// Construction for an arbitrary hidden factor: columns of B are grouped by
/// their last nonzero row l(y), and group j is steered to the ball around
/// centers[j] with weights kappa_j growing fast enough that the group of the
/// highest positive term decides the argmax.
inline RrefReport construct_rref_slicing(const KroneckerModelSpec& spec, const std::vector<State>& centers,
                                         CoverMode mode = CoverMode::packing, std::uint64_t seed = 0) {
  const auto sv = detail::signed_visible(spec.visible);
  const auto& space = sv.spec.space;
  const std::size_t n = space.variables();
  detail::check_centers(space, centers);
  const QMatrix& b = spec.B();

  RrefReport rep;
  QMatrix grouping = b;
  auto groups = detail::last_nonzero_groups(b);
  if (!groups) {
    const auto red = rref(b);
    std::vector<std::size_t> keep(red.pivot_columns.size());
    for (std::size_t i = 0; i < keep.size(); ++i) keep[i] = i;
    grouping = red.matrix.select_rows(keep);
    groups = detail::last_nonzero_groups(grouping);
    rep.used_echelon_form = true;
    if (!groups) throw std::logic_error("echelon form of B does not group");
  }
  const std::size_t rb = grouping.rows();
  if (centers.size() != rb)
    throw PreconditionError("number of centers (" + std::to_string(centers.size()) + ") must equal rank(B) (" +
                            std::to_string(rb) + ")");
  detail::check_packing(space, centers, sv.k);
  if (mode == CoverMode::covering) detail::check_covering(space, centers, sv.k);
  rep.groups = *groups;

  // Visible statistics (1; A') with A' the signed rows without the empty one.
  const std::size_t a_s = sv.signed_stats.rows();
  const Integer inner_base = static_cast<long>(a_s - 1);
  const Integer tau = ball_separating_offset(n, sv.k, sv.k, inner_base);

  Rational b_max = 0, b_min_lead;
  bool have_min = false;
  for (std::size_t y = 0; y < grouping.cols(); ++y) {
    for (std::size_t r = 0; r < rb; ++r) b_max = std::max(b_max, Rational(abs(grouping(r, y))));
    const Rational& lead = grouping((*groups)[y], y);
    if (sgn(lead) > 0 && (!have_min || lead < b_min_lead)) {
      b_min_lead = lead;
      have_min = true;
    }
  }
  const Rational x_norm = Rational(static_cast<long>(a_s));  // ||(1; A'_x)||_1, entries are +-1

  QMatrix st(grouping.row_labels(), sv.signed_stats.row_labels());
  Rational lower_mass = 0;  // sum of ||row||_1 over earlier groups
  for (std::size_t j = 0; j < rb; ++j) {
    const Rational kappa = 1 + (b_max / b_min_lead) * lower_mass * x_norm;
    const std::size_t c = space.index(centers[j]);
    st(j, 0) = kappa * Rational(tau);
    for (std::size_t r = 1; r < a_s; ++r) st(j, r) = kappa * sv.signed_stats(r, c);
    Rational norm = 0;
    for (std::size_t r = 0; r < a_s; ++r) norm += abs(st(j, r));
    lower_mass += norm;
  }
  rep.signed_theta = st;

  QMatrix theta = st * sv.to_visible;
  theta.set_row_labels(grouping.row_labels());
  if (rep.used_echelon_form) theta = adapt_hidden(grouping, b, theta);
  theta.set_row_labels(b.row_labels());
  theta.set_col_labels(spec.A().row_labels());
  rep.result.theta = make_generic(spec, theta, seed);
  finish_report(spec, rep.result);

  // Group unions contain (packing) or lie inside (covering) their balls.
  for (std::size_t j = 0; j < rb; ++j) {
    std::set<std::size_t> un;
    for (std::size_t y = 0; y < b.cols(); ++y)
      if ((*groups)[y] == j) un.insert(rep.result.blocks[y].begin(), rep.result.blocks[y].end());
    const auto ball = detail::ball_indices(space, centers[j], sv.k);
    for (auto x : ball)
      if (!un.count(x)) throw std::logic_error("group union misses a state of its ball");
  }
  rep.result.predicted_rank = mode == CoverMode::packing ? rb * spec.visible.rank() : space.size();
  return rep;
}

// ---------------------------------------------------------------------------
// Oracle.

struct OracleOptions {
  std::uint64_t budget = 10000000;  // bound on |Y|^|X|
  std::size_t tie_samples = 64;
  std::uint64_t seed = 0;
};

struct OracleResult {
  std::size_t rank = 0;
  std::size_t dim = 0;
  std::vector<std::size_t> witness;  // best singleton h
  QMatrix realizer;                  // Theta realizing the witness
  std::uint64_t leaves = 0;          // realizable complete assignments examined
  std::uint64_t lp_calls = 0;
  std::size_t tie_best_rank = 0;     // best rank among sampled tie cells
  bool tie_exceeds = false;          // a sampled tie cell beat every singleton cell
};

namespace detail {

/// Incrementally reduced row basis over the rationals.
struct IncrementalBasis {
  std::vector<std::vector<Rational>> rows;
  std::vector<std::size_t> pivots;

  bool add(std::vector<Rational> v) {
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const Rational f = v[pivots[i]];
      if (sgn(f) == 0) continue;
      for (std::size_t j = 0; j < v.size(); ++j)
        if (sgn(rows[i][j]) != 0) v[j] -= f * rows[i][j];
    }
    std::size_t p = 0;
    while (p < v.size() && sgn(v[p]) == 0) ++p;
    if (p == v.size()) return false;
    const Rational lead = v[p];
    for (auto& e : v) e /= lead;
    rows.push_back(std::move(v));
    pivots.push_back(p);
    return true;
  }
};

struct OracleSearch {
  const KroneckerModelSpec& spec;
  const OracleOptions& opt;
  std::size_t xs, ys, cap;
  std::vector<std::vector<std::vector<Rational>>> columns;  // columns[x][y] = A_x (x) B_y
  std::vector<std::size_t> h;
  OracleResult best;
  bool have_best = false;

  OracleSearch(const KroneckerModelSpec& s, const OracleOptions& o) : spec(s), opt(o) {
    xs = s.A().cols();
    ys = s.B().cols();
    cap = std::min(s.visible.rank() * s.hidden.rank(), xs);
    columns.resize(xs);
    for (std::size_t x = 0; x < xs; ++x)
      for (std::size_t y = 0; y < ys; ++y) {
        std::vector<Rational> v;
        v.reserve(s.A().rows() * s.B().rows());
        for (std::size_t i = 0; i < s.A().rows(); ++i)
          for (std::size_t k = 0; k < s.B().rows(); ++k) v.push_back(s.A()(i, x) * s.B()(k, y));
        columns[x].push_back(std::move(v));
      }
    h.assign(xs, 0);
  }

  /// Realizability of the partial assignment h[0..depth).
  std::optional<QMatrix> partial_realizer(std::size_t depth, const std::optional<QMatrix>& parent) {
    // The parent's witness settles it when it already prefers h[depth-1] strictly.
    if (parent) {
      const std::size_t x = depth - 1;
      const QMatrix s = score_matrix(spec, *parent);
      bool strict = true;
      for (std::size_t y = 0; y < ys && strict; ++y)
        if (y != h[x] && s(y, x) >= s(h[x], x)) strict = false;
      if (strict) return parent;
    }
    const QMatrix& a = spec.A();
    const QMatrix& b = spec.B();
    StrictFeasibilityProblem p(a.rows() * b.rows());
    std::set<std::vector<Rational>> seen;
    for (std::size_t x = 0; x < depth; ++x)
      for (std::size_t y = 0; y < ys; ++y) {
        if (y == h[x]) continue;
        std::vector<Rational> c(p.unknowns);
        for (std::size_t k = 0; k < b.rows(); ++k) {
          const Rational diff = b(k, h[x]) - b(k, y);
          if (sgn(diff) == 0) continue;
          for (std::size_t i = 0; i < a.rows(); ++i)
            if (sgn(a(i, x)) != 0) c[k * a.rows() + i] = diff * a(i, x);
        }
        if (seen.insert(c).second) p.add(std::move(c));
      }
    ++best.lp_calls;
    auto u = strict_feasible(p);
    if (!u) return std::nullopt;
    QMatrix theta = zero_theta(spec);
    for (std::size_t k = 0; k < b.rows(); ++k)
      for (std::size_t i = 0; i < a.rows(); ++i) theta(k, i) = (*u)[k * a.rows() + i];
    return theta;
  }

  bool done() const { return have_best && best.rank >= cap; }

  void dfs(std::size_t depth, const IncrementalBasis& basis, const std::optional<QMatrix>& witness) {
    if (done()) return;
    if (depth == xs) {
      ++best.leaves;
      if (!have_best || basis.rows.size() > best.rank) {
        best.rank = basis.rows.size();
        best.witness = h;
        best.realizer = *witness;
        have_best = true;
      }
      return;
    }
    for (std::size_t y = 0; y < ys && !done(); ++y) {
      h[depth] = y;
      IncrementalBasis next = basis;
      next.add(columns[depth][y]);
      const std::size_t bound = std::min(next.rows.size() + (xs - depth - 1), cap);
      if (have_best && bound <= best.rank) continue;
      auto w = partial_realizer(depth + 1, witness);
      if (!w) continue;
      dfs(depth + 1, next, w);
    }
  }
};

}  // namespace detail

/// Maximum rank of A (.) B_h over realizable singleton h, by lexicographic
/// depth-first search with rank-bound pruning and strict-LP realizability.
/// Tie cells are only sampled (random Theta with entries in {-1,0,1}).
inline OracleResult brute_force_tropical_dim(const KroneckerModelSpec& spec, const OracleOptions& opt = {}) {
  const std::size_t xs = spec.A().cols();
  const std::size_t ys = spec.B().cols();
  {
    long double total = 1;
    for (std::size_t i = 0; i < xs; ++i) {
      total *= static_cast<long double>(ys);
      if (total > static_cast<long double>(opt.budget))
        throw ResourceError("oracle enumeration |Y|^|X| = " + std::to_string(ys) + "^" + std::to_string(xs) +
                            " exceeds the budget of " + std::to_string(opt.budget));
    }
  }
  detail::OracleSearch search(spec, opt);
  search.dfs(0, {}, zero_theta(spec));
  if (!search.have_best) throw std::logic_error("oracle found no realizable inference function");
  OracleResult out = std::move(search.best);
  out.dim = out.rank == 0 ? 0 : out.rank - 1;

  for (std::size_t s = 0; s < opt.tie_samples; ++s) {
    Rng rng(derive_seed(opt.seed, s));
    QMatrix theta = zero_theta(spec);
    for (std::size_t i = 0; i < theta.rows(); ++i)
      for (std::size_t j = 0; j < theta.cols(); ++j) theta(i, j) = Rational(rng.uniform(-1, 1));
    const InferenceFunction h = infer(spec, theta);
    if (h.generic()) continue;
    const std::size_t r = rank(tropical_matrix(spec, h));
    out.tie_best_rank = std::max(out.tie_best_rank, r);
  }
  out.tie_exceeds = out.tie_best_rank > out.rank;
  return out;
}

}  // namespace krondim
