#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

#include "krondim/errors.hpp"
#include "krondim/linalg.hpp"
#include "krondim/qmatrix.hpp"
#include "krondim/rational.hpp"

namespace krondim {

using State = std::vector<int>;

/// Number of coordinates on which two states differ.
inline std::size_t hamming_distance(const State& a, const State& b) {
  if (a.size() != b.size()) throw ArgumentError("hamming_distance: states of different length");
  std::size_t d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) d += a[i] != b[i];
  return d;
}

/// Product space X_1 x ... x X_n with X_i = {0, ..., |X_i|-1}. States are
/// numbered in mixed radix with variable 1 most significant.
class StateSpace {
 public:
  StateSpace() = default;

  explicit StateSpace(std::vector<int> cardinalities) : cards_(std::move(cardinalities)) {
    if (cards_.empty()) throw ArgumentError("state space needs at least one variable");
    size_ = 1;
    for (int c : cards_) {
      if (c < 1) throw ArgumentError("variable cardinalities must be at least 1");
      if (size_ > (std::size_t{1} << 40) / static_cast<std::size_t>(c))
        throw ArgumentError("state space too large to enumerate");
      size_ *= static_cast<std::size_t>(c);
    }
  }

  static StateSpace binary(std::size_t n) { return StateSpace(std::vector<int>(n, 2)); }
  static StateSpace uniform(std::size_t n, int q) { return StateSpace(std::vector<int>(n, q)); }

  std::size_t variables() const { return cards_.size(); }
  const std::vector<int>& cardinalities() const { return cards_; }
  int cardinality(std::size_t i) const { return cards_.at(i); }
  std::size_t size() const { return size_; }

  /// Uniform alphabet size, or 0 when the cardinalities differ.
  int uniform_q() const {
    return std::all_of(cards_.begin(), cards_.end(), [&](int c) { return c == cards_.front(); }) ? cards_.front()
                                                                                                  : 0;
  }

  State state(std::size_t index) const {
    if (index >= size_) throw ArgumentError("state index out of range");
    State x(cards_.size());
    for (std::size_t i = cards_.size(); i-- > 0;) {
      x[i] = static_cast<int>(index % static_cast<std::size_t>(cards_[i]));
      index /= static_cast<std::size_t>(cards_[i]);
    }
    return x;
  }

  bool contains(const State& x) const {
    if (x.size() != cards_.size()) return false;
    for (std::size_t i = 0; i < x.size(); ++i)
      if (x[i] < 0 || x[i] >= cards_[i]) return false;
    return true;
  }

  std::size_t index(const State& x) const {
    if (!contains(x)) throw ArgumentError("state '" + label(x) + "' is not in the state space");
    std::size_t idx = 0;
    for (std::size_t i = 0; i < x.size(); ++i) idx = idx * static_cast<std::size_t>(cards_[i]) + static_cast<std::size_t>(x[i]);
    return idx;
  }

  std::vector<State> states() const {
    std::vector<State> out;
    out.reserve(size_);
    for (std::size_t i = 0; i < size_; ++i) out.push_back(state(i));
    return out;
  }

  /// Digits run together ("0110") when every alphabet has at most 10 symbols,
  /// otherwise comma separated ("0,11,2").
  std::string label(const State& x) const {
    const bool compact = std::all_of(cards_.begin(), cards_.end(), [](int c) { return c <= 10; });
    std::string s;
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (!compact && i) s += ',';
      s += std::to_string(x[i]);
    }
    return s;
  }

  std::vector<std::string> labels() const {
    std::vector<std::string> out;
    out.reserve(size_);
    for (std::size_t i = 0; i < size_; ++i) out.push_back(label(state(i)));
    return out;
  }

  /// Inverse of label(); also accepts the comma form for small alphabets.
  State parse(std::string_view text) const {
    State x;
    if (text.find(',') != std::string_view::npos) {
      std::size_t start = 0;
      while (start <= text.size()) {
        const auto end = std::min(text.find(',', start), text.size());
        const auto tok = text.substr(start, end - start);
        if (tok.empty() || !std::all_of(tok.begin(), tok.end(), [](char ch) { return ch >= '0' && ch <= '9'; }))
          throw ArgumentError("malformed state '" + std::string(text) + "'");
        x.push_back(std::stoi(std::string(tok)));
        start = end + 1;
      }
    } else {
      for (char ch : text) {
        if (ch < '0' || ch > '9') throw ArgumentError("malformed state '" + std::string(text) + "'");
        x.push_back(ch - '0');
      }
    }
    if (!contains(x)) throw ArgumentError("state '" + std::string(text) + "' is not in the state space");
    return x;
  }

  friend bool operator==(const StateSpace& a, const StateSpace& b) { return a.cards_ == b.cards_; }

 private:
  std::vector<int> cards_;
  std::size_t size_ = 0;
};

/// Sorted 0-based variable indices. Printed 1-based.
using Subset = std::vector<int>;

inline std::string subset_label(const Subset& s) {
  std::string out = "{";
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(s[i] + 1);
  }
  return out + "}";
}

/// Inclusion-closed family of subsets of {0..n-1}, containing the empty set.
/// Kept sorted by (size, lexicographic).
class InteractionSet {
 public:
  InteractionSet() = default;

  InteractionSet(std::size_t n, std::vector<Subset> subsets) : n_(n) {
    for (auto& s : subsets) {
      std::sort(s.begin(), s.end());
      if (std::adjacent_find(s.begin(), s.end()) != s.end())
        throw ArgumentError("interaction " + subset_label(s) + " repeats a variable");
      for (int i : s)
        if (i < 0 || static_cast<std::size_t>(i) >= n)
          throw ArgumentError("interaction mentions variable " + std::to_string(i + 1) + " outside 1.." +
                              std::to_string(n));
    }
    std::sort(subsets.begin(), subsets.end(), order);
    subsets.erase(std::unique(subsets.begin(), subsets.end()), subsets.end());
    if (subsets.empty() || !subsets.front().empty()) throw ArgumentError("interaction set must contain the empty set");
    std::set<Subset> have(subsets.begin(), subsets.end());
    for (const auto& s : subsets)
      for (std::size_t drop = 0; drop < s.size(); ++drop) {
        Subset t = s;
        t.erase(t.begin() + static_cast<std::ptrdiff_t>(drop));
        if (!have.count(t))
          throw ArgumentError("interaction set is not inclusion-closed: " + subset_label(s) + " present but " +
                              subset_label(t) + " missing");
      }
    subsets_ = std::move(subsets);
  }

  std::size_t variables() const { return n_; }
  const std::vector<Subset>& subsets() const { return subsets_; }
  std::size_t size() const { return subsets_.size(); }

  bool contains(Subset s) const {
    std::sort(s.begin(), s.end());
    return std::binary_search(subsets_.begin(), subsets_.end(), s, order);
  }

  /// Largest k with this set equal to Lambda_k, if it is one.
  std::optional<std::size_t> as_k_interaction() const;

  static bool order(const Subset& a, const Subset& b) {
    if (a.size() != b.size()) return a.size() < b.size();
    return a < b;
  }

  friend bool operator==(const InteractionSet& a, const InteractionSet& b) {
    return a.n_ == b.n_ && a.subsets_ == b.subsets_;
  }

 private:
  std::size_t n_ = 0;
  std::vector<Subset> subsets_;
};

/// Lambda_k: all subsets of {1..n} with at most k elements.
inline InteractionSet k_interaction(std::size_t n, std::size_t k) {
  if (n < 1) throw ArgumentError("k_interaction: n must be positive");
  if (k > n) throw ArgumentError("k_interaction: k must satisfy 0 <= k <= n");
  std::vector<Subset> out;
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    if (static_cast<std::size_t>(__builtin_popcount(mask)) > k) continue;
    Subset s;
    for (std::size_t i = 0; i < n; ++i)
      if (mask >> i & 1u) s.push_back(static_cast<int>(i));
    out.push_back(std::move(s));
  }
  return InteractionSet(n, std::move(out));
}

inline std::optional<std::size_t> InteractionSet::as_k_interaction() const {
  std::size_t k = 0;
  for (const auto& s : subsets_) k = std::max(k, s.size());
  if (k <= n_ && size() == k_interaction(n_, k).size()) return k;
  return std::nullopt;
}

struct HierarchicalSpec {
  StateSpace space;
  InteractionSet interactions;

  HierarchicalSpec() = default;
  HierarchicalSpec(StateSpace s, InteractionSet l) : space(std::move(s)), interactions(std::move(l)) {
    if (interactions.variables() != space.variables())
      throw ArgumentError("interaction set and state space disagree on the number of variables");
  }

  /// Lambda_k over `space`.
  static HierarchicalSpec k_interaction(StateSpace s, std::size_t k) {
    const auto n = s.variables();
    return {std::move(s), krondim::k_interaction(n, k)};
  }
};

/// One statistics row: an interaction and a value tuple on it.
struct StatRow {
  Subset lambda;
  std::vector<int> values;
};

inline std::string stat_row_label(const StatRow& r) {
  if (r.lambda.empty()) return "{}";
  std::string s = subset_label(r.lambda) + "=(";
  for (std::size_t i = 0; i < r.values.size(); ++i) {
    if (i) s += ',';
    s += std::to_string(r.values[i]);
  }
  return s + ")";
}

/// Rows in (|lambda|, lambda, values) order. With `full_alphabet` the values
/// range over all of X_i, otherwise over X_i \ {0}.
inline std::vector<StatRow> stat_rows(const HierarchicalSpec& spec, bool full_alphabet) {
  std::vector<StatRow> rows;
  const int low = full_alphabet ? 0 : 1;
  for (const auto& lambda : spec.interactions.subsets()) {
    std::vector<int> v(lambda.size(), low);
    bool any = true;
    for (int i : lambda)
      if (spec.space.cardinality(static_cast<std::size_t>(i)) <= low) any = false;
    while (any) {
      rows.push_back({lambda, v});
      std::size_t pos = v.size();
      for (;;) {
        if (pos == 0) {
          any = false;
          break;
        }
        --pos;
        if (++v[pos] < spec.space.cardinality(static_cast<std::size_t>(lambda[pos]))) break;
        v[pos] = low;
      }
    }
  }
  return rows;
}

namespace detail {

inline bool row_matches(const StatRow& r, const State& x) {
  for (std::size_t j = 0; j < r.lambda.size(); ++j)
    if (x[static_cast<std::size_t>(r.lambda[j])] != r.values[j]) return false;
  return true;
}

inline QMatrix stats_matrix(const HierarchicalSpec& spec, bool signed_convention) {
  const auto rows = stat_rows(spec, signed_convention);
  std::vector<std::string> labels;
  labels.reserve(rows.size());
  for (const auto& r : rows) labels.push_back(stat_row_label(r));
  QMatrix m(std::move(labels), spec.space.labels());
  for (std::size_t c = 0; c < spec.space.size(); ++c) {
    const State x = spec.space.state(c);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      const bool hit = row_matches(rows[r], x);
      if (signed_convention)
        m(r, c) = hit ? 1 : -1;
      else if (hit)
        m(r, c) = 1;
    }
  }
  return m;
}

}  // namespace detail

/// 0/1 sufficient statistics: the all-ones row, then one indicator row per
/// (lambda, nonzero value tuple).
inline QMatrix build_suffstat(const HierarchicalSpec& spec) { return detail::stats_matrix(spec, false); }

/// +-1 statistics over the full alphabets, the empty interaction included.
inline QMatrix build_signed_suffstat(const HierarchicalSpec& spec) { return detail::stats_matrix(spec, true); }

/// Rank of the statistics, 1 + sum over nonempty lambda of prod (|X_i|-1).
inline std::size_t dim_V(const HierarchicalSpec& spec) {
  std::size_t total = 1;
  for (const auto& lambda : spec.interactions.subsets()) {
    if (lambda.empty()) continue;
    std::size_t p = 1;
    for (int i : lambda) p *= static_cast<std::size_t>(spec.space.cardinality(static_cast<std::size_t>(i)) - 1);
    total += p;
  }
  return total;
}

/// States differing from `center` exactly on some lambda, as sorted indices.
inline std::vector<std::size_t> lambda_ball(const HierarchicalSpec& spec, const State& center) {
  if (!spec.space.contains(center)) throw ArgumentError("lambda_ball: center is not in the state space");
  std::vector<std::size_t> out;
  for (std::size_t idx = 0; idx < spec.space.size(); ++idx) {
    const State x = spec.space.state(idx);
    Subset diff;
    for (std::size_t i = 0; i < x.size(); ++i)
      if (x[i] != center[i]) diff.push_back(static_cast<int>(i));
    if (spec.interactions.contains(diff)) out.push_back(idx);
  }
  return out;
}

/// Coefficients c over the rows of build_suffstat(spec) with c * A equal to
/// the indicator of {x : x_lambda = target}. Zero target coordinates are
/// expanded as 1 - sum of the nonzero indicators, which gives an alternating
/// sum over lambda* <= lambda' <= lambda, lambda* the support of the target.
inline std::vector<Rational> indicator_expansion(const HierarchicalSpec& spec, Subset lambda,
                                                 std::vector<int> target) {
  if (lambda.size() != target.size()) throw ArgumentError("indicator_expansion: target length must match lambda");
  {
    std::vector<std::pair<int, int>> zipped;
    for (std::size_t i = 0; i < lambda.size(); ++i) zipped.emplace_back(lambda[i], target[i]);
    std::sort(zipped.begin(), zipped.end());
    for (std::size_t i = 0; i < zipped.size(); ++i) std::tie(lambda[i], target[i]) = zipped[i];
  }
  if (!spec.interactions.contains(lambda)) throw ArgumentError("indicator_expansion: lambda is not in the interaction set");
  for (std::size_t j = 0; j < lambda.size(); ++j)
    if (target[j] < 0 || target[j] >= spec.space.cardinality(static_cast<std::size_t>(lambda[j])))
      throw ArgumentError("indicator_expansion: target value outside the alphabet");

  const auto rows = stat_rows(spec, false);
  std::map<std::pair<Subset, std::vector<int>>, std::size_t> where;
  for (std::size_t r = 0; r < rows.size(); ++r) where[{rows[r].lambda, rows[r].values}] = r;

  std::vector<std::size_t> zero_pos;
  for (std::size_t j = 0; j < lambda.size(); ++j)
    if (target[j] == 0) zero_pos.push_back(j);

  std::vector<Rational> coeff(rows.size());
  // Choose which zero coordinates enter lambda', then a nonzero value on each.
  for (unsigned mask = 0; mask < (1u << zero_pos.size()); ++mask) {
    std::vector<std::size_t> free;
    for (std::size_t b = 0; b < zero_pos.size(); ++b)
      if (mask >> b & 1u) free.push_back(zero_pos[b]);
    const int sign = (free.size() % 2 == 0) ? 1 : -1;
    std::vector<int> v(free.size(), 1);
    for (;;) {
      Subset lp;
      std::vector<int> vals;
      std::size_t f = 0;
      for (std::size_t j = 0; j < lambda.size(); ++j) {
        const bool in_free = f < free.size() && free[f] == j;
        if (target[j] != 0 || in_free) {
          lp.push_back(lambda[j]);
          vals.push_back(in_free ? v[f] : target[j]);
        }
        if (in_free) ++f;
      }
      auto it = where.find({lp, vals});
      if (it != where.end()) coeff[it->second] += sign;
      std::size_t pos = v.size();
      bool done = true;
      while (pos-- > 0) {
        if (++v[pos] < spec.space.cardinality(static_cast<std::size_t>(lambda[free[pos]]))) {
          done = false;
          break;
        }
        v[pos] = 1;
      }
      if (done) break;
    }
  }
  return coeff;
}

/// Whether the statistics restricted to the Lambda-ball at `center` have
/// full rank dim_V(spec).
inline bool check_full_rank_ball(const HierarchicalSpec& spec, const State& center) {
  const auto ball = lambda_ball(spec, center);
  return rank(build_suffstat(spec).select_columns(ball)) == dim_V(spec);
}

}  // namespace krondim
