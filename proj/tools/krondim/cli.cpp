#include "krondim/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "krondim/batteries.hpp"
#include "krondim/codes.hpp"
#include "krondim/errors.hpp"
#include "krondim/tropical.hpp"

namespace krondim::cli {
namespace {

// ---------------------------------------------------------------------------
// Document parsing.

void require_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ArgumentError(where + " must be a JSON object");
  for (const auto& [key, _] : j.items())
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }))
      throw ArgumentError(where + ": unknown key '" + key + "'");
}

std::size_t positive_count(const json& j, const std::string& what) {
  if (!j.is_number_integer() || j.get<long long>() < 1) throw ArgumentError(what + " must be a positive integer");
  return j.get<std::size_t>();
}

Rational parse_entry(const json& j) {
  if (j.is_number_integer()) return Rational(j.get<long>());
  if (j.is_string()) return parse_rational(j.get<std::string>());
  throw ArgumentError("matrix entries must be integers or \"num/den\" strings, got " + j.dump());
}

QMatrix parse_matrix(const json& j) {
  if (!j.is_array() || j.empty()) throw ArgumentError("matrix must be a non-empty array of rows");
  std::vector<std::vector<Rational>> rows;
  for (const auto& row : j) {
    if (!row.is_array() || row.empty()) throw ArgumentError("matrix rows must be non-empty arrays");
    if (!rows.empty() && row.size() != rows.front().size()) throw ArgumentError("matrix rows have different lengths");
    std::vector<Rational> r;
    for (const auto& e : row) r.push_back(parse_entry(e));
    rows.push_back(std::move(r));
  }
  return QMatrix::from_rows(rows);
}

StateSpace parse_space(const json& j) {
  if (!j.is_array() || j.empty()) throw ArgumentError("space must be a non-empty array of cardinalities");
  std::vector<int> cards;
  for (const auto& c : j) cards.push_back(static_cast<int>(positive_count(c, "cardinality")));
  return StateSpace(cards);
}

InteractionSet parse_interactions(const json& j, std::size_t n) {
  if (j.is_string()) {
    const auto text = j.get<std::string>();
    if (text.rfind("k:", 0) != 0) throw ArgumentError("interactions must be \"k:<int>\" or a list of subsets");
    std::size_t pos = 0;
    long k = -1;
    try {
      k = std::stol(text.substr(2), &pos);
    } catch (const std::exception&) {
    }
    if (k < 0 || pos + 2 != text.size()) throw ArgumentError("malformed interactions '" + text + "'");
    return k_interaction(n, static_cast<std::size_t>(k));
  }
  if (!j.is_array()) throw ArgumentError("interactions must be \"k:<int>\" or a list of subsets");
  std::vector<Subset> subsets;
  for (const auto& s : j) {
    if (!s.is_array()) throw ArgumentError("each interaction must be an array of 1-based variable indices");
    Subset sub;
    for (const auto& v : s) {
      const auto i = positive_count(v, "variable index");
      if (i > n) throw ArgumentError("interaction mentions variable " + std::to_string(i) + " outside 1.." + std::to_string(n));
      sub.push_back(static_cast<int>(i - 1));
    }
    subsets.push_back(std::move(sub));
  }
  return InteractionSet(n, subsets);
}

Convention parse_convention(const json& j) {
  if (j == "01") return Convention::zero_one;
  if (j == "pm1") return Convention::plus_minus_one;
  throw ArgumentError("convention must be \"01\" or \"pm1\"");
}

// ---------------------------------------------------------------------------
// Report helpers.

json integer_json(const Integer& z) {
  if (z.fits_slong_p()) return z.get_si();
  return to_string(z);
}

json rational_json(const Rational& q) { return to_string(q); }

json entry_json(const Rational& q) {
  if (is_integer(q)) return integer_json(q.get_num());
  return rational_json(q);
}

json matrix_json(const QMatrix& m) {
  json entries = json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < m.cols(); ++j) row.push_back(entry_json(m(i, j)));
    entries.push_back(std::move(row));
  }
  return {{"rows", m.rows()},
          {"cols", m.cols()},
          {"row_labels", m.row_labels()},
          {"col_labels", m.col_labels()},
          {"entries", std::move(entries)}};
}

json blocks_json(const std::vector<std::vector<std::size_t>>& blocks, const QMatrix& a, const QMatrix& b) {
  json out = json::array();
  for (std::size_t y = 0; y < blocks.size(); ++y) {
    json states = json::array();
    for (auto x : blocks[y]) states.push_back(a.col_labels()[x]);
    out.push_back({{"hidden", b.col_labels()[y]}, {"size", blocks[y].size()}, {"states", std::move(states)}});
  }
  return out;
}

std::string verdict(bool ok) { return ok ? "PASS" : "FAIL"; }

std::string kind_name(FactorSpec::Kind k) {
  switch (k) {
    case FactorSpec::Kind::raw: return "raw";
    case FactorSpec::Kind::hierarchical: return "hierarchical";
    case FactorSpec::Kind::identity: return "identity";
    case FactorSpec::Kind::hadamard: return "hadamard";
  }
  return "raw";
}

// Table rendering: scalar fields as aligned key/value lines, then one
// section per array of objects or matrix.
std::string cell(const json& j) {
  if (j.is_string()) return j.get<std::string>();
  if (j.is_null()) return "-";
  if (j.is_array() && std::all_of(j.begin(), j.end(), [](const json& e) { return e.is_primitive(); })) {
    std::string s;
    for (const auto& e : j) s += (s.empty() ? "" : " ") + cell(e);
    return s.empty() ? "[]" : s;
  }
  return j.dump();
}

struct Section {
  std::string title;
  std::vector<std::vector<std::string>> rows;
};

void collect(const json& j, const std::string& prefix, std::vector<std::pair<std::string, std::string>>& pairs,
             std::vector<Section>& sections) {
  for (const auto& [k, v] : j.items()) {
    const std::string key = prefix.empty() ? k : prefix + "." + k;
    if (v.is_object() && v.contains("entries")) {
      Section s{key, {}};
      std::vector<std::string> head{""};
      for (const auto& c : v["col_labels"]) head.push_back(c.get<std::string>());
      s.rows.push_back(head);
      for (std::size_t i = 0; i < v["entries"].size(); ++i) {
        std::vector<std::string> row{v["row_labels"][i].get<std::string>()};
        for (const auto& e : v["entries"][i]) row.push_back(cell(e));
        s.rows.push_back(std::move(row));
      }
      sections.push_back(std::move(s));
    } else if (v.is_object()) {
      collect(v, key, pairs, sections);
    } else if (v.is_array() && !v.empty() && std::all_of(v.begin(), v.end(), [](const json& e) { return e.is_object(); })) {
      std::vector<std::string> cols;
      for (const auto& e : v)
        for (const auto& [ck, _] : e.items())
          if (std::find(cols.begin(), cols.end(), ck) == cols.end()) cols.push_back(ck);
      Section s{key, {cols}};
      for (const auto& e : v) {
        std::vector<std::string> row;
        for (const auto& c : cols) row.push_back(e.contains(c) ? cell(e[c]) : "");
        s.rows.push_back(std::move(row));
      }
      sections.push_back(std::move(s));
    } else {
      pairs.emplace_back(key, cell(v));
    }
  }
}

void render_table(const json& report, std::ostream& out) {
  std::vector<std::pair<std::string, std::string>> pairs;
  std::vector<Section> sections;
  collect(report, "", pairs, sections);
  std::size_t w = 0;
  for (const auto& p : pairs) w = std::max(w, p.first.size());
  for (const auto& [k, v] : pairs) out << k << std::string(w - k.size() + 2, ' ') << v << '\n';
  for (const auto& s : sections) {
    out << '\n' << s.title << ":\n";
    std::vector<std::size_t> widths;
    for (const auto& row : s.rows)
      for (std::size_t i = 0; i < row.size(); ++i) {
        if (widths.size() <= i) widths.push_back(0);
        widths[i] = std::max(widths[i], row[i].size());
      }
    for (const auto& row : s.rows) {
      std::string line = " ";
      for (std::size_t i = 0; i < row.size(); ++i)
        line += " " + row[i] + (i + 1 < row.size() ? std::string(widths[i] - row[i].size(), ' ') : "");
      out << line << '\n';
    }
  }
}

// ---------------------------------------------------------------------------
// Command-line values.

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

// Lists use ';' when present, so comma-form state labels stay intact.
char list_separator(const std::string& text) { return text.find(';') != std::string::npos ? ';' : ','; }

std::vector<State> parse_centers(const StateSpace& space, const std::string& text, char sep) {
  std::vector<State> out;
  for (const auto& part : split(text, sep)) {
    if (part.empty()) throw ArgumentError("empty center in '" + text + "'");
    out.push_back(space.parse(part));
  }
  return out;
}

std::vector<HammingBall> parse_outer(const StateSpace& space, const std::string& text) {
  std::vector<HammingBall> out;
  for (const auto& part : split(text, list_separator(text))) {
    const auto colon = part.rfind(':');
    if (colon == std::string::npos) throw ArgumentError("outer ball '" + part + "' must be <center>:<radius>");
    const std::string r = part.substr(colon + 1);
    if (r.empty() || !std::all_of(r.begin(), r.end(), [](char c) { return c >= '0' && c <= '9'; }))
      throw ArgumentError("outer ball '" + part + "' has a malformed radius");
    out.push_back({space.parse(part.substr(0, colon)), std::stoul(r)});
  }
  return out;
}

std::vector<std::vector<State>> parse_inner(const StateSpace& space, const std::string& text) {
  std::vector<std::vector<State>> out;
  for (const auto& unit : split(text, '/')) out.push_back(parse_centers(space, unit, '+'));
  return out;
}

json labels_json(const StateSpace& space, const std::vector<State>& states) {
  json out = json::array();
  for (const auto& s : states) out.push_back(space.label(s));
  return out;
}

StateSpace code_space(const std::vector<int>& cards, int q, std::size_t n) {
  if (!cards.empty()) return StateSpace(cards);
  if (n < 1) throw ArgumentError("codes: give --n (and --q) or --space");
  if (q < 1) throw ArgumentError("codes: --q must be positive");
  return StateSpace::uniform(n, q);
}

unsigned resolve_threads(unsigned requested) {
  unsigned t = requested;
  if (t == 0) t = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("KRONDIM_THREADS")) {
    char* end = nullptr;
    const unsigned long cap = std::strtoul(env, &end, 10);
    if (end != env && *end == '\0' && cap > 0) t = std::min<unsigned>(t, static_cast<unsigned>(cap));
  }
  return t;
}

struct Outcome {
  json results = json::object();
  std::optional<bool> pass;  // unset when the command has no verdict
};

struct Options {
  std::string format = "json";
  std::uint64_t seed = 0;
  unsigned threads = 0;
  std::string emit;
  bool timing = false;

  bool emit_matrix() const { return emit == "matrix"; }
};

// ---------------------------------------------------------------------------
// Commands.

Outcome cmd_stats(const KroneckerModelSpec& spec, const std::string& which, const Options& opt) {
  const FactorSpec& f = which == "hidden" ? spec.hidden : spec.visible;
  Outcome o;
  auto& r = o.results;
  r["factor"] = which;
  r["kind"] = kind_name(f.kind());
  r["rows"] = f.matrix().rows();
  r["cols"] = f.matrix().cols();
  r["rank"] = f.rank();
  if (const auto& h = f.hierarchical_spec()) {
    r["convention"] = f.convention() == Convention::zero_one ? "01" : "pm1";
    json subsets = json::array();
    for (const auto& s : h->interactions.subsets()) subsets.push_back(subset_label(s));
    r["interactions"] = std::move(subsets);
    r["dim_V"] = dim_V(*h);
  }
  if (opt.emit_matrix()) r["matrix"] = matrix_json(f.matrix());
  return o;
}

Outcome cmd_dim(const KroneckerModelSpec& spec, std::size_t trials, std::optional<std::size_t> expect,
                const Options& opt) {
  const auto res = generic_dim(spec, trials, opt.seed, resolve_threads(opt.threads));
  Outcome o;
  auto& r = o.results;
  const std::size_t e = expected_dim(spec);
  r["visible_rank"] = spec.visible.rank();
  r["hidden_rank"] = spec.hidden.rank();
  r["states"] = spec.A().cols();
  r["expected_dim"] = e;
  r["generic_dim"] = res.dim;
  r["defect"] = static_cast<long long>(e) - static_cast<long long>(res.dim);
  json ts = json::array();
  for (const auto& t : res.certificate.trials) {
    json row = {{"seed", t.seed}, {"rank", t.rank}};
    if (opt.emit_matrix()) {
      json sub = json::array();
      for (const auto& v : t.substitution) sub.push_back(integer_json(v));
      row["substitution"] = std::move(sub);
    }
    ts.push_back(std::move(row));
  }
  r["certificate"] = {{"best_rank", res.certificate.best_rank},
                      {"failure_bound", rational_json(res.certificate.failure_bound)},
                      {"trials", std::move(ts)}};
  if (expect) {
    r["expected_generic_dim"] = *expect;
    o.pass = res.dim == *expect;
  }
  return o;
}

void report_construction(Outcome& o, const KroneckerModelSpec& spec, const ConstructionReport& rep, const Options& opt) {
  auto& r = o.results;
  r["rank"] = rep.rank;
  r["dim"] = rep.dim();
  r["predicted_rank"] = rep.predicted_rank;
  r["predicted_dim"] = rep.predicted_dim();
  r["hypotheses_hold"] = rep.hypotheses_hold;
  r["match"] = rep.matches() ? "match" : "mismatch";
  r["notes"] = rep.notes;
  r["theta"] = matrix_json(rep.theta);
  r["blocks"] = blocks_json(rep.blocks, spec.A(), spec.B());
  if (opt.emit_matrix()) r["tropical_matrix"] = matrix_json(tropical_matrix(spec, rep.h));
  o.pass = rep.matches();
}

struct TropicalArgs {
  std::string construction = "ball";
  std::string centers, mode = "packing", outer, inner;
  std::uint64_t budget = OracleOptions{}.budget;
  std::size_t tie_samples = OracleOptions{}.tie_samples;
  std::optional<std::size_t> expect;
};

std::vector<State> construction_centers(const KroneckerModelSpec& spec, const TropicalArgs& ta, std::size_t want) {
  const auto sv = detail::signed_visible(spec.visible);
  const StateSpace& space = sv.spec.space;
  if (!ta.centers.empty()) return parse_centers(space, ta.centers, list_separator(ta.centers));
  if (ta.mode == "covering") {
    auto code = greedy_cover(space, sv.k);
    if (code.size() != want)
      throw PreconditionError("greedy covering of radius " + std::to_string(sv.k) + " has " + std::to_string(code.size()) +
                              " centers but the construction needs " + std::to_string(want) + "; pass --centers");
    return code.centers();
  }
  auto code = greedy_pack(space, sv.k, want);
  if (code.short_of_target)
    throw PreconditionError("only " + std::to_string(code.size()) + " centers at distance >= " +
                            std::to_string(2 * sv.k + 1) + " exist, the construction needs " + std::to_string(want));
  return code.centers();
}

Outcome cmd_tropical(const KroneckerModelSpec& spec, bool doc_has_hidden, const TropicalArgs& ta, const Options& opt) {
  Outcome o;
  auto& r = o.results;
  r["construction"] = ta.construction;
  if (ta.construction == "oracle") {
    OracleOptions oo;
    oo.budget = ta.budget;
    oo.tie_samples = ta.tie_samples;
    oo.seed = opt.seed;
    const auto res = brute_force_tropical_dim(spec, oo);
    r["rank"] = res.rank;
    r["dim"] = res.dim;
    r["expected_dim"] = expected_dim(spec);
    json witness = json::array();
    for (auto y : res.witness) witness.push_back(spec.B().col_labels()[y]);
    r["witness"] = std::move(witness);
    r["leaves"] = res.leaves;
    r["lp_calls"] = res.lp_calls;
    r["tie_samples"] = ta.tie_samples;
    r["tie_best_rank"] = res.tie_best_rank;
    r["tie_exceeds"] = res.tie_exceeds;
    if (opt.emit_matrix()) r["realizer"] = matrix_json(res.realizer);
    if (ta.expect) {
      r["expected_tropical_dim"] = *ta.expect;
      o.pass = res.dim == *ta.expect;
    }
    return o;
  }

  if (ta.mode != "packing" && ta.mode != "covering") throw ArgumentError("--mode must be packing or covering");
  const CoverMode mode = ta.mode == "covering" ? CoverMode::covering : CoverMode::packing;
  r["mode"] = ta.mode;
  const std::optional<StateSpace> space = spec.visible.space();

  if (ta.construction == "ball") {
    const auto centers = construction_centers(spec, ta, spec.B().cols());
    r["centers"] = labels_json(*space, centers);
    report_construction(o, spec, construct_ball_slicing(spec, centers, mode, opt.seed), opt);
  } else if (ta.construction == "rref") {
    const auto centers = construction_centers(spec, ta, spec.hidden.rank());
    r["centers"] = labels_json(*space, centers);
    const auto rep = construct_rref_slicing(spec, centers, mode, opt.seed);
    r["used_echelon_form"] = rep.used_echelon_form;
    json groups = json::array();
    for (std::size_t y = 0; y < rep.groups.size(); ++y)
      groups.push_back({{"hidden", spec.B().col_labels()[y]}, {"group", rep.groups[y] + 1}});
    r["groups"] = std::move(groups);
    report_construction(o, spec, rep.result, opt);
  } else if (ta.construction == "hadamard") {
    if (ta.outer.empty() || ta.inner.empty()) throw ArgumentError("hadamard construction needs --outer and --inner");
    if (!space) throw PreconditionError("visible factor must be a hierarchical k-interaction model");
    const auto outer = parse_outer(*space, ta.outer);
    const auto inner = parse_inner(*space, ta.inner);
    auto rep = construct_hadamard_slicings(spec.visible, outer, inner, mode, opt.seed);
    r["rank_hypothesis"] = rep.rank_hypothesis;
    json units = json::array();
    for (const auto& u : rep.units) units.push_back({{"c", rational_json(u.c)}, {"blocks", u.blocks.size()}});
    r["units"] = std::move(units);
    const bool same = !doc_has_hidden || spec.B().same_entries(rep.spec.B());
    if (same) {
      report_construction(o, rep.spec, rep.result, opt);
    } else {
      // Carry the parameters over to the document's own hidden factor.
      if (spec.B().cols() != rep.spec.B().cols())
        throw PreconditionError("hidden factor has " + std::to_string(spec.B().cols()) + " states but the units give " +
                                std::to_string(rep.spec.B().cols()));
      ConstructionReport moved = rep.result;
      moved.theta = adapt_hidden(rep.spec.B(), spec.B(), rep.result.theta);
      moved.theta.set_col_labels(spec.A().row_labels());
      finish_report(spec, moved);
      report_construction(o, spec, moved, opt);
    }
  } else {
    throw ArgumentError("unknown construction '" + ta.construction + "'");
  }
  return o;
}

struct CodeArgs {
  std::string action;
  int q = 2;
  std::size_t n = 0, k = 1, d = 3, l = 0;
  std::optional<std::size_t> want;
  std::vector<int> space;
};

Outcome cmd_codes(const CodeArgs& ca) {
  Outcome o;
  auto& r = o.results;
  r["action"] = ca.action;
  if (ca.action == "bounds") {
    if (!ca.space.empty()) throw ArgumentError("codes bounds needs a uniform cube: use --q and --n");
    const auto q = static_cast<unsigned>(ca.q), n = static_cast<unsigned>(ca.n), d = static_cast<unsigned>(ca.d);
    r["q"] = q;
    r["n"] = n;
    r["d"] = d;
    r["gv"] = rational_json(gv_bound(q, n, d));
    r["gv_prime_power"] = is_prime_power(q) ? integer_json(gv_prime_power_bound(q, n, d)) : json(nullptr);
    r["sphere_packing"] = rational_json(sphere_packing_bound(q, n, d));
    return o;
  }
  const StateSpace space = code_space(ca.space, ca.q, ca.n);
  r["space"] = space.cardinalities();
  if (ca.action == "pack") {
    const auto code = greedy_pack(space, ca.k, ca.want);
    r["k"] = ca.k;
    r["min_distance"] = code.parameter();
    r["size"] = code.size();
    r["centers"] = labels_json(space, code.centers());
    if (ca.want) {
      r["want"] = *ca.want;
      o.pass = !code.short_of_target;
    }
  } else if (ca.action == "cover") {
    const auto code = greedy_cover(space, ca.k);
    r["radius"] = code.parameter();
    r["size"] = code.size();
    r["centers"] = labels_json(space, code.centers());
  } else if (ca.action == "nested") {
    const auto res = nested_ball_pack(space, ca.k, ca.l);
    r["k"] = ca.k;
    r["l"] = ca.l;
    r["size"] = res.code.size();
    r["required"] = integer_json(res.required);
    r["centers"] = labels_json(space, res.code.centers());
    r["meets_ratio"] = res.meets_ratio;
    o.pass = res.meets_ratio;
  } else if (ca.action == "max") {
    const std::size_t best = brute_force_max_code(space, ca.d);
    r["d"] = ca.d;
    r["max_size"] = best;
    const int q = space.uniform_q();
    if (q >= 2 && ca.d >= 1 && ca.d <= space.variables()) {
      const auto uq = static_cast<unsigned>(q), un = static_cast<unsigned>(space.variables()),
                 ud = static_cast<unsigned>(ca.d);
      const Rational lo = gv_bound(uq, un, ud), hi = sphere_packing_bound(uq, un, ud);
      const Rational m(static_cast<long>(best));
      r["gv"] = rational_json(lo);
      r["sphere_packing"] = rational_json(hi);
      o.pass = lo <= m && m <= hi;
    }
  } else {
    throw ArgumentError("unknown codes action '" + ca.action + "' (pack, cover, bounds, nested, max)");
  }
  return o;
}

struct VerifyArgs {
  std::string target;
  std::vector<std::size_t> values;
  std::size_t n_max = 5, m_max = 5, trials = 3;
  std::size_t scale = 1;
};

Outcome cmd_verify(const VerifyArgs& va, const Options& opt) {
  Outcome o;
  auto& r = o.results;
  r["target"] = va.target;
  const unsigned threads = resolve_threads(opt.threads);
  if (va.target == "rbm-table") {
    if (va.n_max < 1 || va.m_max < 1) throw ArgumentError("--n-max and --m-max must be positive");
    json rows = json::array();
    bool all = true;
    for (std::size_t n = 1; n <= va.n_max; ++n)
      for (std::size_t m = 1; m <= va.m_max; ++m) {
        const std::size_t expected = std::min((std::size_t{1} << n) - 1, (n + 1) * (m + 1) - 1);
        const std::size_t got = generic_dim(rbm_spec(n, m), va.trials, opt.seed, threads).dim;
        all = all && got == expected;
        rows.push_back({{"n", n}, {"m", m}, {"expected", expected}, {"generic", got}, {"verdict", verdict(got == expected)}});
      }
    r["rows"] = std::move(rows);
    o.pass = all;
  } else if (va.target == "mixture-bound") {
    if (va.values.size() != 2) throw ArgumentError("mixture-bound takes two values: n m");
    const auto rep = mixture_bound_check(va.values[0], va.values[1], va.trials, opt.seed, threads);
    r["n"] = va.values[0];
    r["m"] = va.values[1];
    r["rbm_dim"] = rep.rbm_dim;
    r["mixture_dim"] = rep.mixture_dim;
    r["holds"] = rep.holds;
    r["strict"] = rep.strict;
    o.pass = rep.holds;
  } else if (va.target == "lemma-suite") {
    if (va.scale < 1) throw ArgumentError("--scale must be positive");
    const std::vector<batteries::BatteryResult> runs = {
        batteries::full_rank_balls(50 * va.scale, opt.seed),
        batteries::ball_containment(20 * va.scale, opt.seed),
        batteries::truncated_slicings(20 * va.scale, opt.seed),
        batteries::linear_invariance(10 * va.scale, opt.seed),
    };
    json rows = json::array();
    bool all = true;
    for (const auto& b : runs) {
      all = all && b.passed();
      rows.push_back({{"battery", b.name},
                      {"cases", b.cases},
                      {"failures", b.failures},
                      {"verdict", verdict(b.passed())},
                      {"failing_cases", b.failure_notes}});
    }
    r["batteries"] = std::move(rows);
    o.pass = all;
  } else {
    throw ArgumentError("unknown verify target '" + va.target + "' (rbm-table, mixture-bound, lemma-suite)");
  }
  return o;
}

}  // namespace

FactorSpec parse_factor(const json& j, bool hidden) {
  const std::string where = hidden ? "hidden" : "visible";
  if (!j.is_object()) throw ArgumentError(where + " factor must be a JSON object");
  if (j.contains("identity")) {
    if (!hidden) throw ArgumentError("identity factors are only allowed as the hidden factor");
    require_keys(j, where, {"identity"});
    return FactorSpec::identity(positive_count(j["identity"], "identity size"));
  }
  if (j.contains("hadamard")) {
    if (!hidden) throw ArgumentError("hadamard factors are only allowed as the hidden factor");
    require_keys(j, where, {"hadamard"});
    const auto& sizes = j["hadamard"];
    if (!sizes.is_array() || sizes.empty()) throw ArgumentError("hadamard must be a non-empty array of unit sizes");
    std::vector<int> s;
    for (const auto& v : sizes) s.push_back(static_cast<int>(positive_count(v, "hadamard unit size")));
    return FactorSpec::hadamard(s);
  }
  if (j.contains("raw")) {
    require_keys(j, where, {"raw"});
    return FactorSpec::raw(parse_matrix(j["raw"]));
  }
  if (j.contains("interactions") && j["interactions"] == "raw") {
    require_keys(j, where, {"interactions", "matrix"});
    if (!j.contains("matrix")) throw ArgumentError(where + ": raw interactions need a \"matrix\"");
    return FactorSpec::raw(parse_matrix(j["matrix"]));
  }
  require_keys(j, where, {"space", "interactions", "convention"});
  if (!j.contains("space")) throw ArgumentError(where + ": missing \"space\"");
  StateSpace space = parse_space(j["space"]);
  const std::size_t n = space.variables();
  InteractionSet lambda = j.contains("interactions") ? parse_interactions(j["interactions"], n) : k_interaction(n, 1);
  const Convention conv = j.contains("convention") ? parse_convention(j["convention"]) : Convention::zero_one;
  return FactorSpec::hierarchical(HierarchicalSpec(std::move(space), std::move(lambda)), conv);
}

KroneckerModelSpec parse_model(const json& doc) {
  require_keys(doc, "model document", {"name", "description", "visible", "hidden"});
  if (!doc.contains("visible")) throw ArgumentError("model document: missing \"visible\"");
  FactorSpec a = parse_factor(doc["visible"], false);
  FactorSpec b = doc.contains("hidden") ? parse_factor(doc["hidden"], true) : FactorSpec::identity(1);
  return {std::move(a), std::move(b)};
}

json load_document(const std::string& source) {
  std::string text;
  if (source == "-") {
    std::ostringstream ss;
    ss << std::cin.rdbuf();
    text = ss.str();
  } else if (!source.empty() && source.front() == '{') {
    text = source;
  } else {
    std::ifstream in(source);
    if (!in) throw ArgumentError("cannot open model document '" + source + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    text = ss.str();
  }
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ArgumentError("model document is not valid JSON: " + std::string(e.what()));
  }
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Dimensions of Kronecker-product models, their tropicalizations and Hamming codes", "krondim"};
  Options opt;
  app.add_option("--format", opt.format, "Report format")->check(CLI::IsMember({"json", "table"}));
  app.add_option("--seed", opt.seed, "64-bit seed for every randomized step");
  app.add_option("--threads", opt.threads, "Worker threads (0: hardware, capped by KRONDIM_THREADS)");
  app.add_option("--emit", opt.emit, "Include large payloads in the report")->check(CLI::IsMember({"matrix"}));
  app.add_flag("--timing", opt.timing, "Add wall-clock milliseconds to the report");
  app.require_subcommand(1);

  std::string doc_source;
  auto add_doc = [&](CLI::App* sub) {
    sub->add_option("document", doc_source, "Model document: path, '-' for stdin, or inline JSON")->required();
    sub->fallthrough();
  };

  std::string factor = "visible";
  auto* stats = app.add_subcommand("stats", "Sufficient statistics of one factor");
  add_doc(stats);
  stats->add_option("--factor", factor)->check(CLI::IsMember({"visible", "hidden"}));

  std::size_t trials = 3;
  std::optional<std::size_t> expect;
  auto* dim = app.add_subcommand("dim", "Expected and generic dimension via the Jacobian rank");
  add_doc(dim);
  dim->add_option("--trials", trials, "Random substitutions")->check(CLI::PositiveNumber);
  dim->add_option("--expect", expect, "Required generic dimension");

  TropicalArgs ta;
  auto* trop = app.add_subcommand("tropical", "Tropical dimension by an explicit construction or the oracle");
  add_doc(trop);
  trop->add_option("--construction", ta.construction)->check(CLI::IsMember({"ball", "hadamard", "rref", "oracle"}));
  trop->add_option("--centers", ta.centers, "Centers, comma separated (';' for comma-form labels)");
  trop->add_option("--mode", ta.mode)->check(CLI::IsMember({"packing", "covering"}));
  trop->add_option("--outer", ta.outer, "Outer balls <center>:<radius>, one per hidden unit");
  trop->add_option("--inner", ta.inner, "Inner centers per unit: '+' within a unit, '/' between units");
  trop->add_option("--budget", ta.budget, "Oracle bound on |Y|^|X|");
  trop->add_option("--tie-samples", ta.tie_samples, "Oracle samples of non-generic parameters");
  trop->add_option("--expect", ta.expect, "Required oracle dimension");

  auto* oracle = app.add_subcommand("oracle", "Exhaustive tropical dimension for small models");
  add_doc(oracle);
  oracle->add_option("--budget", ta.budget, "Bound on |Y|^|X|");
  oracle->add_option("--tie-samples", ta.tie_samples, "Samples of non-generic parameters");
  oracle->add_option("--expect", ta.expect, "Required tropical dimension");

  CodeArgs ca;
  auto* codes = app.add_subcommand("codes", "Hamming codes and bounds");
  codes->fallthrough();
  codes->add_option("action", ca.action, "pack, cover, bounds, nested or max")
      ->required()
      ->check(CLI::IsMember({"pack", "cover", "bounds", "nested", "max"}));
  codes->add_option("--q", ca.q);
  codes->add_option("--n", ca.n);
  codes->add_option("--k", ca.k);
  codes->add_option("--d", ca.d);
  codes->add_option("--l", ca.l);
  codes->add_option("--want", ca.want);
  codes->add_option("--space", ca.space, "Mixed cardinalities instead of --q/--n")->delimiter(',');

  VerifyArgs va;
  auto* verify = app.add_subcommand("verify", "Batch checks: rbm-table, mixture-bound n m, lemma-suite");
  verify->fallthrough();
  verify->add_option("target", va.target)->required()->check(CLI::IsMember({"rbm-table", "mixture-bound", "lemma-suite"}));
  verify->add_option("values", va.values, "n m for mixture-bound");
  verify->add_option("--n-max", va.n_max);
  verify->add_option("--m-max", va.m_max);
  verify->add_option("--trials", va.trials)->check(CLI::PositiveNumber);
  verify->add_option("--scale", va.scale, "Multiplier on the battery sizes");

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kPass;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kPass;
  } catch (const CLI::ParseError& e) {
    err << "krondim: " << e.what() << '\n';
    return kInputError;
  }

  const auto start = std::chrono::steady_clock::now();
  Outcome o;
  std::string command;
  try {
    if (oracle->parsed()) {
      ta.construction = "oracle";
      command = "oracle";
    }
    auto model = [&] { return parse_model(load_document(doc_source)); };
    if (stats->parsed()) {
      command = "stats";
      o = cmd_stats(model(), factor, opt);
    } else if (dim->parsed()) {
      command = "dim";
      o = cmd_dim(model(), trials, expect, opt);
    } else if (trop->parsed() || oracle->parsed()) {
      if (command.empty()) command = "tropical";
      const json doc = load_document(doc_source);
      o = cmd_tropical(parse_model(doc), doc.is_object() && doc.contains("hidden"), ta, opt);
    } else if (codes->parsed()) {
      command = "codes";
      o = cmd_codes(ca);
    } else if (verify->parsed()) {
      command = "verify";
      o = cmd_verify(va, opt);
    }
  } catch (const ResourceError& e) {
    err << "krondim: resource budget exceeded: " << e.what() << '\n';
    return kResourceError;
  } catch (const PreconditionError& e) {
    err << "krondim: hypothesis failed: " << e.what() << '\n';
    return kInputError;
  } catch (const ArgumentError& e) {
    err << "krondim: invalid input: " << e.what() << '\n';
    return kInputError;
  } catch (const json::exception& e) {
    err << "krondim: invalid input: " << e.what() << '\n';
    return kInputError;
  } catch (const std::logic_error& e) {
    err << "krondim: internal check failed: " << e.what() << '\n';
    return kVerdictFail;
  }

  json report;
  report["command"] = command;
  report["args"] = args;
  report["seed"] = opt.seed;
  report["results"] = std::move(o.results);
  report["verdict"] = o.pass ? json(verdict(*o.pass)) : json(nullptr);
  if (opt.timing)
    report["timing_ms"] = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start).count();

  if (opt.format == "table")
    render_table(report, out);
  else
    out << report.dump(2) << '\n';
  return o.pass && !*o.pass ? kVerdictFail : kPass;
}

}  // namespace krondim::cli
