#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "krondim/errors.hpp"
#include "krondim/rational.hpp"

namespace krondim {

/// Homogeneous system of strict inequalities <c_i, u> > 0 in `unknowns`
/// real variables.
struct StrictFeasibilityProblem {
  std::size_t unknowns = 0;
  std::vector<std::vector<Rational>> constraints;

  explicit StrictFeasibilityProblem(std::size_t n = 0) : unknowns(n) {}

  void add(std::vector<Rational> c) {
    if (c.size() != unknowns) throw ArgumentError("constraint length does not match the number of unknowns");
    constraints.push_back(std::move(c));
  }

  bool satisfied_by(std::span<const Rational> u) const {
    if (u.size() != unknowns) return false;
    for (const auto& c : constraints) {
      Rational s = 0;
      for (std::size_t j = 0; j < unknowns; ++j)
        if (sgn(c[j]) != 0) s += c[j] * u[j];
      if (sgn(s) <= 0) return false;
    }
    return true;
  }
};

struct MarginResult {
  Rational margin;              // optimum s, in [0, 1]
  std::vector<Rational> point;  // u attaining <c_i,u> >= margin for all i
};

namespace detail {

/// Dense tableau simplex for  max c^T x  s.t.  A x <= b, x >= 0  with b >= 0,
/// started from the slack basis. Bland's rule, so degenerate pivots cannot
/// cycle. solve() returns false if the objective is unbounded.
class Tableau {
 public:
  Tableau(std::vector<std::vector<Rational>> a, std::vector<Rational> b, std::vector<Rational> c)
      : m_(a.size()), n_(c.size()), t_(m_ + 1, std::vector<Rational>(n_ + m_ + 1)), basis_(m_) {
    for (std::size_t i = 0; i < m_; ++i) {
      for (std::size_t j = 0; j < n_; ++j) t_[i][j] = a[i][j];
      t_[i][n_ + i] = 1;
      t_[i][n_ + m_] = b[i];
      basis_[i] = n_ + i;
    }
    // Objective row stores -c so that a negative entry marks an improving column.
    for (std::size_t j = 0; j < n_; ++j) t_[m_][j] = -c[j];
  }

  bool solve() {
    const std::size_t width = n_ + m_;
    for (;;) {
      std::size_t enter = width;
      for (std::size_t j = 0; j < width; ++j)
        if (sgn(t_[m_][j]) < 0) {
          enter = j;
          break;
        }
      if (enter == width) return true;
      std::size_t leave = m_;
      Rational best;
      for (std::size_t i = 0; i < m_; ++i) {
        if (sgn(t_[i][enter]) <= 0) continue;
        Rational ratio = t_[i][width] / t_[i][enter];
        if (leave == m_ || ratio < best || (ratio == best && basis_[i] < basis_[leave])) {
          leave = i;
          best = ratio;
        }
      }
      if (leave == m_) return false;
      pivot(leave, enter);
    }
  }

  Rational objective() const { return t_[m_][n_ + m_]; }

  std::vector<Rational> primal() const {
    std::vector<Rational> x(n_);
    for (std::size_t i = 0; i < m_; ++i)
      if (basis_[i] < n_) x[basis_[i]] = t_[i][n_ + m_];
    return x;
  }

 private:
  void pivot(std::size_t r, std::size_t c) {
    const std::size_t width = n_ + m_ + 1;
    const Rational p = t_[r][c];
    for (auto& v : t_[r])
      if (sgn(v) != 0) v /= p;
    for (std::size_t i = 0; i <= m_; ++i) {
      if (i == r || sgn(t_[i][c]) == 0) continue;
      const Rational f = t_[i][c];
      for (std::size_t j = 0; j < width; ++j)
        if (sgn(t_[r][j]) != 0) t_[i][j] -= f * t_[r][j];
    }
    basis_[r] = c;
  }

  std::size_t m_, n_;
  std::vector<std::vector<Rational>> t_;
  std::vector<std::size_t> basis_;
};

}  // namespace detail

/// Solves  max s  s.t.  <c_i,u> >= s,  s <= 1  exactly. Free u is split as
/// u+ - u-. The optimum is 1 when the system is strictly feasible (scale any
/// strict solution) and 0 otherwise.
inline MarginResult maximize_margin(const StrictFeasibilityProblem& p) {
  const std::size_t n = p.unknowns;
  const std::size_t vars = 2 * n + 1;  // u+, u-, s
  std::vector<std::vector<Rational>> a;
  std::vector<Rational> b;
  a.reserve(p.constraints.size() + 1);
  for (const auto& c : p.constraints) {
    std::vector<Rational> row(vars);
    for (std::size_t j = 0; j < n; ++j) {
      row[j] = -c[j];
      row[n + j] = c[j];
    }
    row[2 * n] = 1;
    a.push_back(std::move(row));
    b.emplace_back(0);
  }
  std::vector<Rational> cap(vars);
  cap[2 * n] = 1;
  a.push_back(std::move(cap));
  b.emplace_back(1);
  std::vector<Rational> obj(vars);
  obj[2 * n] = 1;

  detail::Tableau tab(std::move(a), std::move(b), std::move(obj));
  tab.solve();  // bounded by s <= 1
  const auto x = tab.primal();
  MarginResult out{tab.objective(), std::vector<Rational>(n)};
  for (std::size_t j = 0; j < n; ++j) out.point[j] = x[j] - x[n + j];
  return out;
}

/// A point with <c_i,u> > 0 for every constraint, or nullopt when none exists.
/// An empty constraint list yields the zero vector.
inline std::optional<std::vector<Rational>> strict_feasible(const StrictFeasibilityProblem& p) {
  if (p.constraints.empty()) return std::vector<Rational>(p.unknowns);
  auto r = maximize_margin(p);
  if (sgn(r.margin) <= 0) return std::nullopt;
  if (!p.satisfied_by(r.point)) throw std::logic_error("simplex returned a point that violates a strict constraint");
  return std::move(r.point);
}

}  // namespace krondim
