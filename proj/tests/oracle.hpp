#pragma once

// Brute-force reference solver used only by tests. Converts the problem to
// standard form (one slack per inequality row), presolves fixed variables,
// then enumerates every candidate basis; for each basis it walks all
// lower/upper assignments of the nonbasic variables in Gray-code order,
// updating the basic solution incrementally. The minimum objective over all
// feasible basic solutions is the LP optimum whenever the objective is
// bounded (e.g. every structural variable lives in a finite box).
//
// Preconditions: every variable, slack included, has at least one finite
// bound; the feasible set then contains no line, so feasibility implies a
// feasible basic solution exists. Exponential cost: test sizes only.

#include <cmath>
#include <stdexcept>
#include <vector>

#include "bmsim/lp.hpp"

namespace oracle {

struct Result {
  bmsim::LpStatus status = bmsim::LpStatus::Infeasible;
  double objective = 0.0;
  std::vector<double> values;  // structural variables only
};

namespace detail {

struct StandardForm {
  int rows = 0;
  int n_struct = 0;
  std::vector<std::vector<double>> col;  // dense columns, rows entries each
  std::vector<double> cost, lo, up;
  std::vector<double> rhs;
};

inline StandardForm to_standard(const bmsim::LpProblem& p) {
  StandardForm sf;
  sf.rows = p.num_constraints();
  sf.n_struct = p.num_variables();
  const size_t m = static_cast<size_t>(sf.rows);
  for (int j = 0; j < p.num_variables(); ++j) {
    sf.col.emplace_back(m, 0.0);
    sf.cost.push_back(p.objective()[static_cast<size_t>(j)]);
    sf.lo.push_back(p.lower()[static_cast<size_t>(j)]);
    sf.up.push_back(p.upper()[static_cast<size_t>(j)]);
  }
  for (size_t i = 0; i < m; ++i) {
    const auto& row = p.rows()[i];
    for (const auto& term : row.terms)
      sf.col[static_cast<size_t>(term.variable)][i] += term.coefficient;
    sf.rhs.push_back(row.rhs);
    if (row.relation != bmsim::Relation::Equal) {
      sf.col.emplace_back(m, 0.0);
      sf.col.back()[i] = 1.0;
      sf.cost.push_back(0.0);
      if (row.relation == bmsim::Relation::LessEqual) {
        sf.lo.push_back(0.0);
        sf.up.push_back(bmsim::kInf);
      } else {
        sf.lo.push_back(-bmsim::kInf);
        sf.up.push_back(0.0);
      }
    }
  }
  return sf;
}

// Dense LU with partial pivoting; returns false when singular.
struct Lu {
  int n = 0;
  std::vector<double> a;
  std::vector<int> perm;

  bool factor(std::vector<double> mat, int size) {
    n = size;
    a = std::move(mat);
    perm.resize(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) perm[static_cast<size_t>(i)] = i;
    for (int k = 0; k < n; ++k) {
      int piv = k;
      double best = std::abs(a[static_cast<size_t>(k) * n + k]);
      for (int i = k + 1; i < n; ++i) {
        const double v = std::abs(a[static_cast<size_t>(i) * n + k]);
        if (v > best) {
          best = v;
          piv = i;
        }
      }
      if (best < 1e-11) return false;
      if (piv != k) {
        for (int c = 0; c < n; ++c)
          std::swap(a[static_cast<size_t>(piv) * n + c],
                    a[static_cast<size_t>(k) * n + c]);
        std::swap(perm[static_cast<size_t>(piv)], perm[static_cast<size_t>(k)]);
      }
      const double d = a[static_cast<size_t>(k) * n + k];
      for (int i = k + 1; i < n; ++i) {
        const double f = a[static_cast<size_t>(i) * n + k] / d;
        a[static_cast<size_t>(i) * n + k] = f;
        if (f != 0.0)
          for (int c = k + 1; c < n; ++c)
            a[static_cast<size_t>(i) * n + c] -= f * a[static_cast<size_t>(k) * n + c];
      }
    }
    return true;
  }

  void solve(const std::vector<double>& b, std::vector<double>& x) const {
    x.resize(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i)
      x[static_cast<size_t>(i)] = b[static_cast<size_t>(perm[static_cast<size_t>(i)])];
    for (int i = 1; i < n; ++i) {
      double acc = x[static_cast<size_t>(i)];
      for (int k = 0; k < i; ++k)
        acc -= a[static_cast<size_t>(i) * n + k] * x[static_cast<size_t>(k)];
      x[static_cast<size_t>(i)] = acc;
    }
    for (int i = n - 1; i >= 0; --i) {
      double acc = x[static_cast<size_t>(i)];
      for (int k = i + 1; k < n; ++k)
        acc -= a[static_cast<size_t>(i) * n + k] * x[static_cast<size_t>(k)];
      x[static_cast<size_t>(i)] = acc / a[static_cast<size_t>(i) * n + i];
    }
  }
};

}  // namespace detail

inline Result solve_by_enumeration(const bmsim::LpProblem& problem) {
  using namespace detail;
  problem.validate();
  StandardForm sf = to_standard(problem);
  const int m = sf.rows;
  const int n_all = static_cast<int>(sf.col.size());

  for (int j = 0; j < n_all; ++j)
    if (!std::isfinite(sf.lo[static_cast<size_t>(j)]) &&
        !std::isfinite(sf.up[static_cast<size_t>(j)]))
      throw std::invalid_argument(
          "oracle requires a finite bound on every variable");

  // Presolve variables pinned by equal bounds into the rhs.
  std::vector<int> live;
  std::vector<double> base_rhs = sf.rhs;
  std::vector<double> fixed_value(static_cast<size_t>(n_all), 0.0);
  double fixed_cost = 0.0;
  for (int j = 0; j < n_all; ++j) {
    const size_t k = static_cast<size_t>(j);
    if (std::isfinite(sf.lo[k]) && std::isfinite(sf.up[k]) &&
        sf.up[k] - sf.lo[k] <= 1e-12) {
      fixed_value[k] = sf.lo[k];
      fixed_cost += sf.cost[k] * sf.lo[k];
      if (sf.lo[k] != 0.0)
        for (int i = 0; i < m; ++i)
          base_rhs[static_cast<size_t>(i)] -= sf.col[k][static_cast<size_t>(i)] * sf.lo[k];
    } else {
      live.push_back(j);
    }
  }
  const int n = static_cast<int>(live.size());

  Result result;
  result.status = bmsim::LpStatus::Infeasible;

  auto finish = [&](double best, const std::vector<double>& x_all) {
    result.status = bmsim::LpStatus::Optimal;
    result.objective = best;
    result.values.assign(static_cast<size_t>(sf.n_struct), 0.0);
    for (int j = 0; j < sf.n_struct; ++j)
      result.values[static_cast<size_t>(j)] = x_all[static_cast<size_t>(j)];
  };

  if (m == 0 || n == 0) {
    // Everything pinned: feasible iff the residual vanishes.
    for (int i = 0; i < m; ++i)
      if (std::abs(base_rhs[static_cast<size_t>(i)]) > bmsim::kFeasTol)
        return result;
    finish(fixed_cost, fixed_value);
    return result;
  }

  // Row-reduce the live system so redundant rows disappear and the rank
  // never exceeds the live column count; dependent-but-inconsistent rows
  // prove infeasibility. Row operations preserve the solution set.
  {
    std::vector<std::vector<double>> dense(static_cast<size_t>(m));
    for (int i = 0; i < m; ++i) {
      auto& row = dense[static_cast<size_t>(i)];
      row.resize(static_cast<size_t>(n) + 1, 0.0);
      for (int jj = 0; jj < n; ++jj)
        row[static_cast<size_t>(jj)] =
            sf.col[static_cast<size_t>(live[static_cast<size_t>(jj)])][static_cast<size_t>(i)];
      row[static_cast<size_t>(n)] = base_rhs[static_cast<size_t>(i)];
    }
    int next_pivot = 0;
    for (int col = 0; col < n && next_pivot < m; ++col) {
      int piv = -1;
      double best = 1e-9;
      for (int i = next_pivot; i < m; ++i) {
        const double v = std::abs(dense[static_cast<size_t>(i)][static_cast<size_t>(col)]);
        if (v > best) {
          best = v;
          piv = i;
        }
      }
      if (piv < 0) continue;
      std::swap(dense[static_cast<size_t>(piv)], dense[static_cast<size_t>(next_pivot)]);
      const auto& prow = dense[static_cast<size_t>(next_pivot)];
      for (int i = next_pivot + 1; i < m; ++i) {
        auto& row = dense[static_cast<size_t>(i)];
        const double f = row[static_cast<size_t>(col)] / prow[static_cast<size_t>(col)];
        if (f == 0.0) continue;
        for (int c = col; c <= n; ++c)
          row[static_cast<size_t>(c)] -= f * prow[static_cast<size_t>(c)];
      }
      ++next_pivot;
    }
    for (int i = next_pivot; i < m; ++i)
      if (std::abs(dense[static_cast<size_t>(i)][static_cast<size_t>(n)]) > bmsim::kFeasTol)
        return result;

    if (next_pivot < m) {
      std::vector<std::vector<double>> rcol(static_cast<size_t>(n));
      for (int jj = 0; jj < n; ++jj) {
        rcol[static_cast<size_t>(jj)].resize(static_cast<size_t>(next_pivot));
        for (int i = 0; i < next_pivot; ++i)
          rcol[static_cast<size_t>(jj)][static_cast<size_t>(i)] =
              dense[static_cast<size_t>(i)][static_cast<size_t>(jj)];
      }
      base_rhs.resize(static_cast<size_t>(next_pivot));
      for (int i = 0; i < next_pivot; ++i)
        base_rhs[static_cast<size_t>(i)] = dense[static_cast<size_t>(i)][static_cast<size_t>(n)];
      // Swap the reduced columns in; untouched structural values still come
      // from sf.col via fixed_value for presolved variables.
      for (int jj = 0; jj < n; ++jj)
        sf.col[static_cast<size_t>(live[static_cast<size_t>(jj)])]
            .assign(rcol[static_cast<size_t>(jj)].begin(), rcol[static_cast<size_t>(jj)].end());
      sf.rows = next_pivot;
    }
  }
  const int mr = sf.rows;

  if (mr == 0) {
    // Pure box problem: minimize each live variable independently.
    double obj = fixed_cost;
    std::vector<double> x = fixed_value;
    for (int jj = 0; jj < n; ++jj) {
      const size_t k = static_cast<size_t>(live[static_cast<size_t>(jj)]);
      const double c = sf.cost[k];
      double v;
      if (std::isfinite(sf.lo[k]) && std::isfinite(sf.up[k]))
        v = c >= 0.0 ? sf.lo[k] : sf.up[k];
      else if (std::isfinite(sf.lo[k]))
        v = sf.lo[k];
      else
        v = sf.up[k];
      obj += c * v;
      x[k] = v;
    }
    finish(obj, x);
    return result;
  }

  double best_obj = bmsim::kInf;
  std::vector<double> best_x;

  // Lexicographic combinations of mr live columns as the basis.
  std::vector<int> pick(static_cast<size_t>(mr));
  for (int i = 0; i < mr; ++i) pick[static_cast<size_t>(i)] = i;

  std::vector<double> bmat, r0, xb, tmp;
  std::vector<char> in_basis(static_cast<size_t>(n), 0);
  Lu lu;

  while (true) {
    std::fill(in_basis.begin(), in_basis.end(), 0);
    for (int i = 0; i < mr; ++i) in_basis[static_cast<size_t>(pick[static_cast<size_t>(i)])] = 1;

    bmat.assign(static_cast<size_t>(mr) * static_cast<size_t>(mr), 0.0);
    for (int k = 0; k < mr; ++k) {
      const auto& col = sf.col[static_cast<size_t>(live[static_cast<size_t>(pick[static_cast<size_t>(k)])])];
      for (int i = 0; i < mr; ++i)
        bmat[static_cast<size_t>(i) * static_cast<size_t>(mr) + static_cast<size_t>(k)] =
            col[static_cast<size_t>(i)];
    }

    if (lu.factor(std::move(bmat), mr)) {
      // Nonbasic columns; two-sided ones toggle during the Gray walk.
      std::vector<int> nonbasic;
      std::vector<int> toggly;
      r0 = base_rhs;
      for (int jj = 0; jj < n; ++jj) {
        if (in_basis[static_cast<size_t>(jj)]) continue;
        nonbasic.push_back(jj);
        const int j = live[static_cast<size_t>(jj)];
        const size_t k = static_cast<size_t>(j);
        const double v = std::isfinite(sf.lo[k]) ? sf.lo[k] : sf.up[k];
        if (v != 0.0)
          for (int i = 0; i < mr; ++i)
            r0[static_cast<size_t>(i)] -= sf.col[k][static_cast<size_t>(i)] * v;
        if (std::isfinite(sf.lo[k]) && std::isfinite(sf.up[k])) toggly.push_back(jj);
      }

      lu.solve(r0, xb);

      // Flip deltas: moving column j from lower to upper shifts x_B by
      // -(up - lo) * B^{-1} A_j.
      std::vector<std::vector<double>> flip(toggly.size());
      std::vector<double> span(toggly.size());
      for (size_t t = 0; t < toggly.size(); ++t) {
        const int j = live[static_cast<size_t>(toggly[t])];
        const size_t k = static_cast<size_t>(j);
        span[t] = sf.up[k] - sf.lo[k];
        lu.solve(sf.col[k], tmp);
        flip[t].resize(static_cast<size_t>(mr));
        for (int i = 0; i < mr; ++i)
          flip[t][static_cast<size_t>(i)] = -span[t] * tmp[static_cast<size_t>(i)];
      }

      std::vector<char> at_up(toggly.size(), 0);
      const size_t assignments = static_cast<size_t>(1) << toggly.size();
      if (toggly.size() > 24)
        throw std::invalid_argument("oracle: too many two-sided nonbasics");

      for (size_t code = 0;; ++code) {
        // Feasibility of the basic part.
        double viol = 0.0;
        for (int i = 0; i < mr; ++i) {
          const int j = live[static_cast<size_t>(pick[static_cast<size_t>(i)])];
          const size_t k = static_cast<size_t>(j);
          const double v = xb[static_cast<size_t>(i)];
          if (std::isfinite(sf.lo[k])) viol = std::max(viol, sf.lo[k] - v);
          if (std::isfinite(sf.up[k])) viol = std::max(viol, v - sf.up[k]);
        }
        if (viol <= bmsim::kFeasTol) {
          double obj = fixed_cost;
          for (int i = 0; i < mr; ++i)
            obj += sf.cost[static_cast<size_t>(live[static_cast<size_t>(pick[static_cast<size_t>(i)])])] *
                   xb[static_cast<size_t>(i)];
          for (size_t nn = 0; nn < nonbasic.size(); ++nn) {
            const int j = live[static_cast<size_t>(nonbasic[nn])];
            const size_t k = static_cast<size_t>(j);
            double v = std::isfinite(sf.lo[k]) ? sf.lo[k] : sf.up[k];
            obj += sf.cost[k] * v;
          }
          for (size_t t = 0; t < toggly.size(); ++t)
            if (at_up[t])
              obj += sf.cost[static_cast<size_t>(live[static_cast<size_t>(toggly[t])])] * span[t];
          if (obj < best_obj - 1e-12) {
            best_obj = obj;
            best_x.assign(static_cast<size_t>(n_all), 0.0);
            for (int j = 0; j < n_all; ++j) best_x[static_cast<size_t>(j)] = fixed_value[static_cast<size_t>(j)];
            for (size_t nn = 0; nn < nonbasic.size(); ++nn) {
              const int j = live[static_cast<size_t>(nonbasic[nn])];
              const size_t k = static_cast<size_t>(j);
              best_x[k] = std::isfinite(sf.lo[k]) ? sf.lo[k] : sf.up[k];
            }
            for (size_t t = 0; t < toggly.size(); ++t)
              if (at_up[t])
                best_x[static_cast<size_t>(live[static_cast<size_t>(toggly[t])])] += span[t];
            for (int i = 0; i < mr; ++i)
              best_x[static_cast<size_t>(live[static_cast<size_t>(pick[static_cast<size_t>(i)])])] =
                  xb[static_cast<size_t>(i)];
          }
        }

        if (code + 1 >= assignments) break;
        // Binary-reflected Gray code: flip the bit of the lowest set bit
        // position of code+1.
        size_t bit = 0;
        size_t v = code + 1;
        while ((v & 1) == 0) {
          v >>= 1;
          ++bit;
        }
        at_up[bit] = !at_up[bit];
        const double sign = at_up[bit] ? 1.0 : -1.0;
        for (int i = 0; i < mr; ++i)
          xb[static_cast<size_t>(i)] += sign * flip[bit][static_cast<size_t>(i)];
      }
    }

    // Next combination.
    int pos = mr - 1;
    while (pos >= 0 && pick[static_cast<size_t>(pos)] == n - mr + pos) --pos;
    if (pos < 0) break;
    ++pick[static_cast<size_t>(pos)];
    for (int i = pos + 1; i < mr; ++i)
      pick[static_cast<size_t>(i)] = pick[static_cast<size_t>(i - 1)] + 1;
  }

  if (std::isfinite(best_obj)) finish(best_obj, best_x);
  return result;
}

}  // namespace oracle
