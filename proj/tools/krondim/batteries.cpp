#include "krondim/batteries.hpp"

#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include "krondim/dimension.hpp"
#include "krondim/hierarchical.hpp"
#include "krondim/random.hpp"
#include "krondim/tropical.hpp"

namespace krondim::batteries {
namespace {

void record(BatteryResult& r, bool ok, const std::string& what) {
  ++r.cases;
  if (ok) return;
  ++r.failures;
  if (r.failure_notes.size() < 5) r.failure_notes.push_back(what);
}

std::string describe(const StateSpace& s) {
  std::string out = "[";
  for (std::size_t i = 0; i < s.variables(); ++i) out += (i ? "," : "") + std::to_string(s.cardinality(i));
  return out + "]";
}

// Downward closure of a few random generator subsets.
InteractionSet random_interactions(Rng& rng, std::size_t n) {
  std::set<Subset> family{Subset{}};
  const auto gens = rng.uniform(1, 3);
  for (std::int64_t g = 0; g < gens; ++g) {
    const auto mask = static_cast<unsigned>(rng.uniform(0, (1 << n) - 1));
    for (unsigned sub = mask;; sub = (sub - 1) & mask) {
      Subset s;
      for (std::size_t i = 0; i < n; ++i)
        if (sub >> i & 1u) s.push_back(static_cast<int>(i));
      family.insert(s);
      if (sub == 0) break;
    }
  }
  return InteractionSet(n, {family.begin(), family.end()});
}

State random_state(Rng& rng, const StateSpace& s) {
  return s.state(static_cast<std::size_t>(rng.uniform(0, static_cast<std::int64_t>(s.size()) - 1)));
}

QMatrix random_integer_matrix(Rng& rng, const std::vector<std::string>& rows, const std::vector<std::string>& cols,
                              int lo, int hi) {
  QMatrix m(rows, cols);
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) m(i, j) = Rational(rng.uniform(lo, hi));
  return m;
}

QMatrix random_nonsingular(Rng& rng, std::size_t n) {
  for (;;) {
    QMatrix q = random_integer_matrix(rng, QMatrix::index_labels(n), QMatrix::index_labels(n), -2, 2);
    if (rank(q) == n) return q;
  }
}

}  // namespace

BatteryResult full_rank_balls(std::size_t cases, std::uint64_t seed) {
  BatteryResult r{"full-rank balls", 0, 0, {}};
  for (std::size_t c = 0; c < cases; ++c) {
    Rng rng(derive_seed(seed, c));
    const auto n = static_cast<std::size_t>(rng.uniform(1, 5));
    std::vector<int> cards(n);
    for (auto& v : cards) v = static_cast<int>(rng.uniform(1, 3));
    const HierarchicalSpec spec(StateSpace(cards), random_interactions(rng, n));
    const State center = random_state(rng, spec.space);
    const auto ball = lambda_ball(spec, center);
    const bool ok = ball.size() == dim_V(spec) && check_full_rank_ball(spec, center);
    record(r, ok, "space " + describe(spec.space) + " center " + spec.space.label(center));
  }
  return r;
}

BatteryResult ball_containment(std::size_t cases, std::uint64_t seed) {
  BatteryResult r{"ball containment", 0, 0, {}};
  for (std::size_t c = 0; c < cases; ++c) {
    Rng rng(derive_seed(seed, c));
    const int q = static_cast<int>(rng.uniform(2, 3));
    const auto n = static_cast<std::size_t>(q == 2 ? rng.uniform(3, 6) : rng.uniform(3, 4));
    const std::size_t k = (n >= 5 && rng.uniform(0, 1) == 1) ? 2 : 1;
    const auto space = StateSpace::uniform(n, q);
    const auto conv = rng.uniform(0, 1) ? Convention::plus_minus_one : Convention::zero_one;
    const auto visible = FactorSpec::hierarchical(HierarchicalSpec::k_interaction(space, k), conv);

    // Random greedy packing: shuffled scan order, random target size.
    std::vector<std::size_t> order(space.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    for (std::size_t i = order.size(); i > 1; --i)
      std::swap(order[i - 1], order[static_cast<std::size_t>(rng.uniform(0, static_cast<std::int64_t>(i) - 1))]);
    const auto target = static_cast<std::size_t>(rng.uniform(1, 4));
    std::vector<State> centers;
    for (auto idx : order) {
      if (centers.size() == target) break;
      State x = space.state(idx);
      if (std::all_of(centers.begin(), centers.end(), [&](const State& y) { return hamming_distance(x, y) >= 2 * k + 1; }))
        centers.push_back(std::move(x));
    }

    const auto spec = mixture_spec(visible, centers.size());
    bool ok = true;
    try {
      const auto rep = construct_ball_slicing(spec, centers, CoverMode::packing, derive_seed(seed, c + 1000));
      for (std::size_t y = 0; y < centers.size() && ok; ++y)
        for (std::size_t x = 0; x < space.size() && ok; ++x)
          if (hamming_distance(space.state(x), centers[y]) <= k)
            ok = std::binary_search(rep.blocks[y].begin(), rep.blocks[y].end(), x);
      ok = ok && rep.rank == rep.predicted_rank;
    } catch (const std::exception&) {
      ok = false;
    }
    // Signed inner products: <A_x, A_x'> = a - 4 N(d(x, x')).
    const QMatrix s = build_signed_suffstat(HierarchicalSpec::k_interaction(space, k));
    for (int t = 0; t < 4 && ok; ++t) {
      const State x = random_state(rng, space), y = random_state(rng, space);
      Rational ip = 0;
      for (std::size_t row = 0; row < s.rows(); ++row) ip += s(row, space.index(x)) * s(row, space.index(y));
      ok = ip == Rational(static_cast<long>(s.rows())) - 4 * Rational(lambda_hits(n, k, hamming_distance(x, y)));
    }
    record(r, ok, "q=" + std::to_string(q) + " n=" + std::to_string(n) + " k=" + std::to_string(k) + " centers=" +
                      std::to_string(centers.size()));
  }
  return r;
}

BatteryResult truncated_slicings(std::size_t cases, std::uint64_t seed) {
  BatteryResult r{"truncated slicings", 0, 0, {}};
  for (std::size_t c = 0; c < cases; ++c) {
    Rng rng(derive_seed(seed, c));
    const auto n = static_cast<std::size_t>(rng.uniform(2, 4));
    const auto k = static_cast<std::size_t>(rng.uniform(1, 2));
    const auto visible = FactorSpec::hierarchical(HierarchicalSpec::k_interaction(StateSpace::binary(n), std::min(k, n)));
    const QMatrix& a = visible.matrix();
    const auto blocks = static_cast<std::size_t>(rng.uniform(1, 4));
    const auto mix_c = mixture_spec(visible, blocks);
    const auto mix_d = mixture_spec(visible, 2);
    QMatrix tc = make_generic(mix_c, random_integer_matrix(rng, mix_c.B().row_labels(), a.row_labels(), -5, 5), seed + c);
    QMatrix td = make_generic(mix_d, random_integer_matrix(rng, mix_d.B().row_labels(), a.row_labels(), -5, 5), seed + c);
    const auto cs = slicing_of(infer(mix_c, tc), blocks).blocks;
    const auto ds = slicing_of(infer(mix_d, td), 2).blocks;
    const auto tr = truncate_slicing(a, tc, td);
    bool ok = tr.blocks.size() == blocks + 1 && tr.blocks[blocks] == ds[0];
    for (std::size_t i = 0; i < blocks && ok; ++i) {
      std::vector<std::size_t> expect;
      std::set_intersection(ds[1].begin(), ds[1].end(), cs[i].begin(), cs[i].end(), std::back_inserter(expect));
      ok = tr.blocks[i] == expect;
    }
    record(r, ok, "n=" + std::to_string(n) + " N=" + std::to_string(blocks));
  }
  return r;
}

BatteryResult linear_invariance(std::size_t cases, std::uint64_t seed) {
  BatteryResult r{"linear invariance", 0, 0, {}};
  for (std::size_t c = 0; c < cases; ++c) {
    Rng rng(derive_seed(seed, c));
    const auto n = static_cast<std::size_t>(rng.uniform(2, 3));
    const auto hidden = static_cast<std::size_t>(rng.uniform(2, 3));
    const auto base = mixture_spec(binary_independence(n), hidden);
    const QMatrix qa = random_nonsingular(rng, base.A().rows()) * base.A();
    const QMatrix qb = random_nonsingular(rng, base.B().rows()) * base.B();
    const KroneckerModelSpec left(FactorSpec::raw(qa), base.hidden);
    const KroneckerModelSpec right(base.visible, FactorSpec::raw(qb));

    const std::uint64_t s = derive_seed(seed, c + 5000);
    const auto d0 = generic_dim(base, 5, s).dim;
    const auto d1 = generic_dim(left, 5, s).dim;
    const auto d2 = generic_dim(right, 5, s).dim;
    OracleOptions opt;
    opt.tie_samples = 0;
    const auto t0 = brute_force_tropical_dim(base, opt).dim;
    const auto t1 = brute_force_tropical_dim(left, opt).dim;
    const auto t2 = brute_force_tropical_dim(right, opt).dim;
    record(r, d0 == d1 && d0 == d2 && t0 == t1 && t0 == t2,
           "n=" + std::to_string(n) + " |Y|=" + std::to_string(hidden) + " dims " + std::to_string(d0) + "/" +
               std::to_string(d1) + "/" + std::to_string(d2) + " tropical " + std::to_string(t0) + "/" +
               std::to_string(t1) + "/" + std::to_string(t2));
  }
  return r;
}

}  // namespace krondim::batteries
