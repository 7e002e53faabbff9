#pragma once

#include <algorithm>
#include <optional>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "krondim/errors.hpp"
#include "krondim/hierarchical.hpp"
#include "krondim/rational.hpp"

namespace krondim {

/// Centers in a state space, validated as a packing (pairwise distance >= d)
/// or a covering (every state within distance k of a center).
class Code {
 public:
  enum class Kind { packing, covering };

  static Code packing(StateSpace space, std::vector<State> centers, std::size_t min_distance) {
    for (const auto& c : centers)
      if (!space.contains(c)) throw ArgumentError("code center outside the state space");
    for (std::size_t i = 0; i < centers.size(); ++i)
      for (std::size_t j = i + 1; j < centers.size(); ++j)
        if (hamming_distance(centers[i], centers[j]) < min_distance)
          throw ArgumentError("code centers " + space.label(centers[i]) + " and " + space.label(centers[j]) +
                              " are closer than " + std::to_string(min_distance));
    return Code(std::move(space), std::move(centers), Kind::packing, min_distance);
  }

  static Code covering(StateSpace space, std::vector<State> centers, std::size_t radius) {
    for (const auto& c : centers)
      if (!space.contains(c)) throw ArgumentError("code center outside the state space");
    for (std::size_t i = 0; i < space.size(); ++i) {
      const State x = space.state(i);
      if (std::none_of(centers.begin(), centers.end(), [&](const State& c) { return hamming_distance(c, x) <= radius; }))
        throw ArgumentError("state " + space.label(x) + " is not covered");
    }
    return Code(std::move(space), std::move(centers), Kind::covering, radius);
  }

  const StateSpace& space() const { return space_; }
  const std::vector<State>& centers() const { return centers_; }
  std::size_t size() const { return centers_.size(); }
  Kind kind() const { return kind_; }
  /// Minimum distance for a packing, radius for a covering.
  std::size_t parameter() const { return param_; }

  /// Set by greedy_pack when a requested size was not reached.
  bool short_of_target = false;

 private:
  Code(StateSpace s, std::vector<State> c, Kind k, std::size_t p)
      : space_(std::move(s)), centers_(std::move(c)), kind_(k), param_(p) {}

  StateSpace space_;
  std::vector<State> centers_;
  Kind kind_;
  std::size_t param_;
};

/// Lexicographic greedy code of minimum distance 2k+1. Stops early once
/// `want` centers are found; flags the code short if fewer exist.
inline Code greedy_pack(const StateSpace& space, std::size_t k, std::optional<std::size_t> want = std::nullopt) {
  std::vector<State> centers;
  for (std::size_t i = 0; i < space.size(); ++i) {
    if (want && centers.size() >= *want) break;
    State x = space.state(i);
    if (std::all_of(centers.begin(), centers.end(), [&](const State& c) { return hamming_distance(c, x) >= 2 * k + 1; }))
      centers.push_back(std::move(x));
  }
  Code code = Code::packing(space, std::move(centers), 2 * k + 1);
  code.short_of_target = want && code.size() < *want;
  return code;
}

/// Greedy set cover by radius-k balls: repeatedly the center covering the most
/// uncovered states, ties to the lexicographically first.
inline Code greedy_cover(const StateSpace& space, std::size_t k) {
  const std::size_t total = space.size();
  const auto states = space.states();
  std::vector<bool> covered(total, false);
  std::size_t remaining = total;
  std::vector<State> centers;
  while (remaining > 0) {
    std::size_t best = 0, best_gain = 0;
    for (std::size_t c = 0; c < total; ++c) {
      std::size_t gain = 0;
      for (std::size_t x = 0; x < total; ++x)
        if (!covered[x] && hamming_distance(states[c], states[x]) <= k) ++gain;
      if (gain > best_gain) {
        best_gain = gain;
        best = c;
      }
    }
    for (std::size_t x = 0; x < total; ++x)
      if (!covered[x] && hamming_distance(states[best], states[x]) <= k) {
        covered[x] = true;
        --remaining;
      }
    centers.push_back(states[best]);
  }
  return Code::covering(space, std::move(centers), k);
}

/// |K(t)| in the q-ary n-cube: sum_{j<=t} C(n,j)(q-1)^j.
inline Integer hamming_ball_size(unsigned q, unsigned n, unsigned t) {
  Integer s = 0;
  for (unsigned j = 0; j <= std::min(t, n); ++j) s += binomial(n, j) * ipow(Integer(q - 1), j);
  return s;
}

namespace detail {

inline void check_code_params(unsigned q, unsigned n, unsigned d) {
  if (q < 2) throw ArgumentError("alphabet size q must be at least 2");
  if (n < 1) throw ArgumentError("length n must be at least 1");
  if (d < 1 || d > n) throw ArgumentError("distance d must satisfy 1 <= d <= n");
}

}  // namespace detail

/// Gilbert-Varshamov lower bound q^n / |K(d-1)|.
inline Rational gv_bound(unsigned q, unsigned n, unsigned d) {
  detail::check_code_params(q, n, d);
  Rational r(ipow(Integer(q), n), hamming_ball_size(q, n, d - 1));
  r.canonicalize();
  return r;
}

/// Whether q = p^e for a prime p, by trial division.
inline bool is_prime_power(unsigned q) {
  if (q < 2) return false;
  for (unsigned p = 2; p * p <= q; ++p)
    if (q % p == 0) {
      while (q % p == 0) q /= p;
      return q == 1;
    }
  return true;
}

/// q^{n-1-floor(log_q(sum_{j<=d-2} C(n-1,j)(q-1)^j))} for prime powers q.
inline Integer gv_prime_power_bound(unsigned q, unsigned n, unsigned d) {
  detail::check_code_params(q, n, d);
  if (!is_prime_power(q)) throw ArgumentError("q = " + std::to_string(q) + " is not a prime power");
  const Integer s = d >= 2 ? hamming_ball_size(q, n - 1, d - 2) : Integer(0);
  unsigned log = 0;
  if (s > 0) {
    Integer p = q;
    while (p <= s) {
      p *= q;
      ++log;
    }
  }
  if (log > n - 1) return 1;
  return ipow(Integer(q), n - 1 - log);
}

/// q^n / |K(floor((d-1)/2))|.
inline Rational sphere_packing_bound(unsigned q, unsigned n, unsigned d) {
  detail::check_code_params(q, n, d);
  Rational r(ipow(Integer(q), n), hamming_ball_size(q, n, (d - 1) / 2));
  r.canonicalize();
  return r;
}

struct NestedPack {
  Code code;
  Integer required;  // ceil(|K(l-k)| / |K(2k)|)
  bool meets_ratio = false;
};

/// Greedy radius-k packing whose balls stay inside K(0,l): centers within
/// distance l-k of the all-zero state, scanned lexicographically.
inline NestedPack nested_ball_pack(const StateSpace& space, std::size_t k, std::size_t l) {
  const std::size_t n = space.variables();
  if (k > l || l > n) throw ArgumentError("nested_ball_pack needs k <= l <= n");
  const int q = space.uniform_q();
  if (q < 2) throw ArgumentError("nested_ball_pack needs a uniform q-ary cube with q >= 2");
  const State zero(n, 0);
  std::vector<State> centers;
  for (std::size_t i = 0; i < space.size(); ++i) {
    State x = space.state(i);
    if (hamming_distance(x, zero) > l - k) continue;
    if (std::all_of(centers.begin(), centers.end(), [&](const State& c) { return hamming_distance(c, x) >= 2 * k + 1; }))
      centers.push_back(std::move(x));
  }
  const auto uq = static_cast<unsigned>(q);
  const auto un = static_cast<unsigned>(n);
  Rational ratio(hamming_ball_size(uq, un, static_cast<unsigned>(l - k)), hamming_ball_size(uq, un, static_cast<unsigned>(2 * k)));
  ratio.canonicalize();
  NestedPack out{Code::packing(space, std::move(centers), 2 * k + 1), ceil(ratio), false};
  out.meets_ratio = Integer(static_cast<unsigned long>(out.code.size())) >= out.required;
  return out;
}

namespace detail {

/// Maximum clique by branch and bound with a greedy coloring bound.
class MaxClique {
 public:
  static constexpr std::size_t kMax = 1 << 16;
  using Bits = std::vector<std::uint64_t>;

  explicit MaxClique(std::vector<Bits> adj) : adj_(std::move(adj)), n_(adj_.size()), words_((n_ + 63) / 64) {}

  std::size_t solve(std::size_t lower = 0) {
    best_ = lower;
    Bits all(words_, 0);
    for (std::size_t v = 0; v < n_; ++v) all[v / 64] |= std::uint64_t{1} << (v % 64);
    expand(all, 0);
    return best_;
  }

 private:
  static std::size_t count(const Bits& b) {
    std::size_t c = 0;
    for (auto w : b) c += static_cast<std::size_t>(__builtin_popcountll(w));
    return c;
  }

  void expand(Bits cand, std::size_t size) {
    // Greedy coloring: vertices in order with color bounds.
    std::vector<std::size_t> order, color;
    Bits uncolored = cand;
    std::size_t c = 0;
    while (count(uncolored) > 0) {
      ++c;
      Bits avail = uncolored;
      for (std::size_t w = 0; w < words_; ++w)
        while (avail[w]) {
          const std::size_t v = w * 64 + static_cast<std::size_t>(__builtin_ctzll(avail[w]));
          avail[w] &= avail[w] - 1;
          order.push_back(v);
          color.push_back(c);
          uncolored[v / 64] &= ~(std::uint64_t{1} << (v % 64));
          for (std::size_t u = 0; u < words_; ++u) avail[u] &= ~adj_[v][u];
        }
    }
    for (std::size_t i = order.size(); i-- > 0;) {
      if (size + color[i] <= best_) return;
      const std::size_t v = order[i];
      Bits next(words_);
      for (std::size_t w = 0; w < words_; ++w) next[w] = cand[w] & adj_[v][w];
      if (count(next) == 0) {
        best_ = std::max(best_, size + 1);
      } else {
        expand(next, size + 1);
      }
      cand[v / 64] &= ~(std::uint64_t{1} << (v % 64));
    }
  }

  std::vector<Bits> adj_;
  std::size_t n_, words_;
  std::size_t best_ = 0;
};

}  // namespace detail

/// Exact maximum size of a code with minimum distance d. By translation
/// symmetry of the Hamming metric one center is fixed at the zero state, so
/// the search runs over its distance->=d neighbours.
inline std::size_t brute_force_max_code(const StateSpace& space, std::size_t d,
                                        std::size_t budget = detail::MaxClique::kMax) {
  if (space.size() > budget)
    throw ResourceError("brute_force_max_code: |X| = " + std::to_string(space.size()) + " exceeds the budget of " +
                        std::to_string(budget));
  if (d <= 1) return space.size();
  const auto states = space.states();
  const State zero(space.variables(), 0);
  std::vector<std::size_t> verts;
  for (std::size_t i = 0; i < states.size(); ++i)
    if (hamming_distance(states[i], zero) >= d) verts.push_back(i);
  if (verts.empty()) return 1;
  const std::size_t words = (verts.size() + 63) / 64;
  std::vector<detail::MaxClique::Bits> adj(verts.size(), detail::MaxClique::Bits(words, 0));
  for (std::size_t i = 0; i < verts.size(); ++i)
    for (std::size_t j = i + 1; j < verts.size(); ++j)
      if (hamming_distance(states[verts[i]], states[verts[j]]) >= d) {
        adj[i][j / 64] |= std::uint64_t{1} << (j % 64);
        adj[j][i / 64] |= std::uint64_t{1} << (i % 64);
      }
  return 1 + detail::MaxClique(std::move(adj)).solve();
}

}  // namespace krondim
