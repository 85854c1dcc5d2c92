#include "bmsim/lp.hpp"

#include <fmt/core.h>

#include <cmath>
#include <ostream>

#include "bmsim/error.hpp"
#include "bmsim/log.hpp"

namespace bmsim {

int LpProblem::add_variable(std::string name, double lower, double upper,
                            double objective) {
  names_.push_back(std::move(name));
  lower_.push_back(lower);
  upper_.push_back(upper);
  cost_.push_back(objective);
  return num_variables() - 1;
}

void LpProblem::add_constraint(std::vector<LinearTerm> terms, Relation relation,
                               double rhs, std::string name) {
  rows_.push_back({std::move(terms), relation, rhs, std::move(name)});
}

void LpProblem::validate() const {
  if (num_variables() == 0) throw ValidationError("LP has no variables");
  for (int j = 0; j < num_variables(); ++j) {
    const size_t k = static_cast<size_t>(j);
    if (std::isnan(cost_[k]) || std::isinf(cost_[k]))
      throw ValidationError(
          fmt::format("LP objective for '{}' is not finite", names_[k]));
    if (std::isnan(lower_[k]) || std::isnan(upper_[k]))
      throw ValidationError(fmt::format("LP bounds for '{}' are NaN", names_[k]));
    if (lower_[k] > upper_[k])
      throw ValidationError(
          fmt::format("LP bounds for '{}' are crossed", names_[k]));
  }
  for (size_t i = 0; i < rows_.size(); ++i) {
    const auto& row = rows_[i];
    if (std::isnan(row.rhs) || std::isinf(row.rhs))
      throw ValidationError(fmt::format("LP row {} rhs is not finite", i));
    for (const auto& term : row.terms) {
      if (term.variable < 0 || term.variable >= num_variables())
        throw ValidationError(fmt::format(
            "LP row {} references undeclared variable {}", i, term.variable));
      if (std::isnan(term.coefficient) || std::isinf(term.coefficient))
        throw ValidationError(
            fmt::format("LP row {} has a non-finite coefficient", i));
    }
  }
}

namespace {

constexpr double kStepTol = 1e-12;
constexpr int kStallLimit = 100;
constexpr int kRefactorEvery = 64;

// Bounded-variable revised simplex over the standard form A x = b, where
// each input row gets one slack column: <= rows a slack in [0, inf),
// >= rows a slack in (-inf, 0], = rows a slack fixed at zero. Artificial
// columns are added only where the slack cannot absorb the initial
// residual. Basis inverse is kept dense with eta updates and periodic
// refactorization.
class Simplex {
 public:
  explicit Simplex(const LpProblem& problem) : p_(problem) { build(); }

  LpSolution run() {
    if (!phase1()) {
      LpSolution out;
      out.status = LpStatus::Infeasible;
      out.values.assign(static_cast<size_t>(n_struct_), 0.0);
      return out;
    }
    return phase2();
  }

 private:
  const LpProblem& p_;
  int m_ = 0;
  int n_struct_ = 0;
  int n_ = 0;
  // Sparse columns; LinearTerm::variable holds the row index here.
  std::vector<std::vector<LinearTerm>> cols_;
  std::vector<double> lo_, up_, cost_;
  std::vector<double> b_;
  std::vector<int> basis_;
  std::vector<char> is_basic_;
  std::vector<char> at_upper_;
  std::vector<double> binv_;
  std::vector<double> xb_;
  int n_artificial_ = 0;
  bool bland_ = false;
  int stall_ = 0;

  double& binv(int i, int k) {
    return binv_[static_cast<size_t>(i) * static_cast<size_t>(m_) +
                 static_cast<size_t>(k)];
  }

  double nonbasic_value(int j) const {
    const size_t k = static_cast<size_t>(j);
    if (at_upper_[k]) return up_[k];
    if (std::isfinite(lo_[k])) return lo_[k];
    if (std::isfinite(up_[k])) return up_[k];
    return 0.0;
  }

  void build() {
    m_ = p_.num_constraints();
    n_struct_ = p_.num_variables();
    n_ = n_struct_ + m_;
    cols_.assign(static_cast<size_t>(n_), {});
    lo_.assign(static_cast<size_t>(n_), 0.0);
    up_.assign(static_cast<size_t>(n_), 0.0);
    b_.assign(static_cast<size_t>(m_), 0.0);

    for (int j = 0; j < n_struct_; ++j) {
      lo_[static_cast<size_t>(j)] = p_.lower()[static_cast<size_t>(j)];
      up_[static_cast<size_t>(j)] = p_.upper()[static_cast<size_t>(j)];
    }
    for (int i = 0; i < m_; ++i) {
      const auto& row = p_.rows()[static_cast<size_t>(i)];
      for (const auto& term : row.terms)
        cols_[static_cast<size_t>(term.variable)].push_back(
            {i, term.coefficient});
      const int slack = n_struct_ + i;
      cols_[static_cast<size_t>(slack)].push_back({i, 1.0});
      switch (row.relation) {
        case Relation::LessEqual:
          lo_[static_cast<size_t>(slack)] = 0.0;
          up_[static_cast<size_t>(slack)] = kInf;
          break;
        case Relation::GreaterEqual:
          lo_[static_cast<size_t>(slack)] = -kInf;
          up_[static_cast<size_t>(slack)] = 0.0;
          break;
        case Relation::Equal:
          lo_[static_cast<size_t>(slack)] = 0.0;
          up_[static_cast<size_t>(slack)] = 0.0;
          break;
      }
      b_[static_cast<size_t>(i)] = row.rhs;
    }
  }

  // Starts every column at a finite bound (or zero when free), then covers
  // each row with its slack when the residual fits the slack's bounds and
  // with a fresh artificial column otherwise.
  bool phase1() {
    at_upper_.assign(static_cast<size_t>(n_), 0);
    std::vector<double> residual = b_;
    for (int j = 0; j < n_; ++j) {
      const double v = nonbasic_value(j);
      if (v != 0.0)
        for (const auto& term : cols_[static_cast<size_t>(j)])
          residual[static_cast<size_t>(term.variable)] -= term.coefficient * v;
    }

    basis_.assign(static_cast<size_t>(m_), -1);
    std::vector<double> art_sign;
    for (int i = 0; i < m_; ++i) {
      const int slack = n_struct_ + i;
      const double r = residual[static_cast<size_t>(i)];
      const double lo = lo_[static_cast<size_t>(slack)];
      const double up = up_[static_cast<size_t>(slack)];
      if (r >= lo - kBoundTol && r <= up + kBoundTol) {
        basis_[static_cast<size_t>(i)] = slack;
      } else {
        art_sign.push_back(r >= 0.0 ? 1.0 : -1.0);
        basis_[static_cast<size_t>(i)] = n_ + n_artificial_;
        ++n_artificial_;
      }
    }
    if (n_artificial_ > 0) {
      int k = 0;
      for (int i = 0; i < m_; ++i) {
        if (basis_[static_cast<size_t>(i)] < n_) continue;
        cols_.push_back({{i, art_sign[static_cast<size_t>(k)]}});
        lo_.push_back(0.0);
        up_.push_back(kInf);
        ++k;
      }
      n_ += n_artificial_;
      at_upper_.resize(static_cast<size_t>(n_), 0);
    }

    is_basic_.assign(static_cast<size_t>(n_), 0);
    for (int i = 0; i < m_; ++i)
      is_basic_[static_cast<size_t>(basis_[static_cast<size_t>(i)])] = 1;

    refactor();

    if (n_artificial_ == 0) return true;

    cost_.assign(static_cast<size_t>(n_), 0.0);
    for (int j = n_ - n_artificial_; j < n_; ++j)
      cost_[static_cast<size_t>(j)] = 1.0;
    if (!iterate())
      throw SolveError("internal: phase-1 objective cannot be unbounded");

    double infeasibility = 0.0;
    for (int j = n_ - n_artificial_; j < n_; ++j) {
      const size_t k = static_cast<size_t>(j);
      if (is_basic_[k]) {
        for (int i = 0; i < m_; ++i)
          if (basis_[static_cast<size_t>(i)] == j)
            infeasibility += std::abs(xb_[static_cast<size_t>(i)]);
      } else {
        infeasibility += std::abs(nonbasic_value(j));
      }
    }
    if (infeasibility > kFeasTol) return false;

    // Pin artificials at zero for phase 2; basic ones may linger at value
    // zero in redundant rows.
    for (int j = n_ - n_artificial_; j < n_; ++j) {
      lo_[static_cast<size_t>(j)] = 0.0;
      up_[static_cast<size_t>(j)] = 0.0;
      if (!is_basic_[static_cast<size_t>(j)]) at_upper_[static_cast<size_t>(j)] = 0;
    }
    return true;
  }

  LpSolution phase2() {
    cost_.assign(static_cast<size_t>(n_), 0.0);
    for (int j = 0; j < n_struct_; ++j)
      cost_[static_cast<size_t>(j)] = p_.objective()[static_cast<size_t>(j)];

    const bool bounded = iterate();
    LpSolution out;
    if (!bounded) {
      out.status = LpStatus::Unbounded;
      out.values.assign(static_cast<size_t>(n_struct_), 0.0);
      return out;
    }

    refactor();
    out.status = LpStatus::Optimal;
    out.values.assign(static_cast<size_t>(n_struct_), 0.0);
    for (int j = 0; j < n_struct_; ++j)
      if (!is_basic_[static_cast<size_t>(j)])
        out.values[static_cast<size_t>(j)] = nonbasic_value(j);
    for (int i = 0; i < m_; ++i) {
      const int j = basis_[static_cast<size_t>(i)];
      if (j < n_struct_) {
        double v = xb_[static_cast<size_t>(i)];
        const size_t k = static_cast<size_t>(j);
        if (v < lo_[k] && v > lo_[k] - 1e-6) v = lo_[k];
        if (v > up_[k] && v < up_[k] + 1e-6) v = up_[k];
        out.values[k] = v;
      }
    }
    out.objective_value = 0.0;
    for (int j = 0; j < n_struct_; ++j)
      out.objective_value +=
          p_.objective()[static_cast<size_t>(j)] * out.values[static_cast<size_t>(j)];
    return out;
  }

  void refactor() {
    // Gauss-Jordan inversion of the basis matrix, then a fresh x_B.
    std::vector<double> mat(static_cast<size_t>(m_) * static_cast<size_t>(m_),
                            0.0);
    for (int k = 0; k < m_; ++k)
      for (const auto& term : cols_[static_cast<size_t>(basis_[static_cast<size_t>(k)])])
        mat[static_cast<size_t>(term.variable) * static_cast<size_t>(m_) +
            static_cast<size_t>(k)] = term.coefficient;

    binv_.assign(static_cast<size_t>(m_) * static_cast<size_t>(m_), 0.0);
    for (int i = 0; i < m_; ++i) binv(i, i) = 1.0;

    auto mrow = [&](int i) { return mat.data() + static_cast<size_t>(i) * m_; };
    auto brow = [&](int i) { return binv_.data() + static_cast<size_t>(i) * m_; };
    for (int col = 0; col < m_; ++col) {
      int pivot_row = -1;
      double best = kPivotTol;
      for (int i = col; i < m_; ++i) {
        const double a = std::abs(mrow(i)[col]);
        if (a > best) {
          best = a;
          pivot_row = i;
        }
      }
      if (pivot_row < 0) throw SolveError("internal: singular simplex basis");
      if (pivot_row != col) {
        for (int k = 0; k < m_; ++k) {
          std::swap(mrow(pivot_row)[k], mrow(col)[k]);
          std::swap(brow(pivot_row)[k], brow(col)[k]);
        }
      }
      const double piv = mrow(col)[col];
      for (int k = 0; k < m_; ++k) {
        mrow(col)[k] /= piv;
        brow(col)[k] /= piv;
      }
      for (int i = 0; i < m_; ++i) {
        if (i == col) continue;
        const double f = mrow(i)[col];
        if (f == 0.0) continue;
        for (int k = 0; k < m_; ++k) {
          mrow(i)[k] -= f * mrow(col)[k];
          brow(i)[k] -= f * brow(col)[k];
        }
      }
    }
    recompute_xb();
  }

  void recompute_xb() {
    std::vector<double> r = b_;
    for (int j = 0; j < n_; ++j) {
      if (is_basic_[static_cast<size_t>(j)]) continue;
      const double v = nonbasic_value(j);
      if (v == 0.0) continue;
      for (const auto& term : cols_[static_cast<size_t>(j)])
        r[static_cast<size_t>(term.variable)] -= term.coefficient * v;
    }
    xb_.assign(static_cast<size_t>(m_), 0.0);
    for (int i = 0; i < m_; ++i) {
      double acc = 0.0;
      for (int k = 0; k < m_; ++k) acc += binv(i, k) * r[static_cast<size_t>(k)];
      xb_[static_cast<size_t>(i)] = acc;
    }
  }

  // Runs simplex iterations until optimal (true) or unbounded (false).
  bool iterate() {
    const int limit = 50000 + 200 * (m_ + n_);
    int since_refactor = 0;
    bland_ = false;
    stall_ = 0;

    std::vector<double> y(static_cast<size_t>(m_));
    std::vector<double> w(static_cast<size_t>(m_));

    for (int iter = 0; iter < limit; ++iter) {
      // BTRAN: y = c_B B^{-1}.
      for (int k = 0; k < m_; ++k) {
        double acc = 0.0;
        for (int i = 0; i < m_; ++i) {
          const double cb = cost_[static_cast<size_t>(basis_[static_cast<size_t>(i)])];
          if (cb != 0.0) acc += cb * binv(i, k);
        }
        y[static_cast<size_t>(k)] = acc;
      }

      int entering = -1;
      int direction = 0;
      double best_score = kDualTol;
      for (int j = 0; j < n_; ++j) {
        const size_t k = static_cast<size_t>(j);
        if (is_basic_[k]) continue;
        if (up_[k] - lo_[k] <= 0.0) continue;
        double d = cost_[k];
        for (const auto& term : cols_[k])
          d -= y[static_cast<size_t>(term.variable)] * term.coefficient;

        const bool at_up = at_upper_[k] != 0;
        const bool free_var = !std::isfinite(lo_[k]) && !std::isfinite(up_[k]);
        int dir = 0;
        if (free_var) {
          if (d < -kDualTol) dir = 1;
          else if (d > kDualTol) dir = -1;
        } else if (!at_up && std::isfinite(lo_[k])) {
          if (d < -kDualTol) dir = 1;
        } else if (at_up || !std::isfinite(lo_[k])) {
          if (d > kDualTol) dir = -1;
        }
        if (dir == 0) continue;
        if (bland_) {
          entering = j;
          direction = dir;
          break;
        }
        const double score = std::abs(d);
        if (score > best_score) {
          best_score = score;
          entering = j;
          direction = dir;
        }
      }
      if (entering < 0) return true;

      // FTRAN: w = B^{-1} A_q.
      std::fill(w.begin(), w.end(), 0.0);
      for (const auto& term : cols_[static_cast<size_t>(entering)]) {
        const double a = term.coefficient;
        for (int i = 0; i < m_; ++i)
          w[static_cast<size_t>(i)] += binv(i, term.variable) * a;
      }

      // Ratio test along the signed direction. Blocking basic variables
      // compete on step length; ties go to the largest pivot magnitude,
      // then the smallest variable index (smallest index alone under
      // Bland's rule). A shorter bound-to-bound flip of the entering
      // variable wins over any pivot.
      const size_t qk = static_cast<size_t>(entering);
      double t_flip = kInf;
      if (std::isfinite(lo_[qk]) && std::isfinite(up_[qk]))
        t_flip = up_[qk] - lo_[qk];
      int leave = -1;
      bool leave_to_upper = false;
      double t_basic = kInf;
      for (int i = 0; i < m_; ++i) {
        const double delta = direction * w[static_cast<size_t>(i)];
        const int bj = basis_[static_cast<size_t>(i)];
        const size_t bk = static_cast<size_t>(bj);
        double t;
        bool to_upper;
        if (delta > kPivotTol) {
          if (!std::isfinite(lo_[bk])) continue;
          t = (xb_[static_cast<size_t>(i)] - lo_[bk]) / delta;
          to_upper = false;
        } else if (delta < -kPivotTol) {
          if (!std::isfinite(up_[bk])) continue;
          t = (xb_[static_cast<size_t>(i)] - up_[bk]) / delta;
          to_upper = true;
        } else {
          continue;
        }
        if (t < 0.0) t = 0.0;
        bool better = false;
        if (leave < 0 || t < t_basic - 1e-10) {
          better = true;
        } else if (t <= t_basic + 1e-10) {
          if (bland_) {
            better = bj < basis_[static_cast<size_t>(leave)];
          } else {
            const double cur = std::abs(w[static_cast<size_t>(leave)]);
            const double cand = std::abs(w[static_cast<size_t>(i)]);
            better = cand > cur + 1e-12 ||
                     (std::abs(cand - cur) <= 1e-12 &&
                      bj < basis_[static_cast<size_t>(leave)]);
          }
        }
        if (better) {
          t_basic = std::min(t, t_basic);
          leave = i;
          leave_to_upper = to_upper;
        }
      }

      if (leave < 0 && !std::isfinite(t_flip)) return false;

      const bool do_flip = t_flip < t_basic;
      const double t_best = do_flip ? t_flip : t_basic;
      if (do_flip) leave = -1;

      if (t_best <= kStepTol) {
        if (++stall_ >= kStallLimit && !bland_) {
          bland_ = true;
          log::debug("simplex: stall of {} degenerate steps, Bland's rule on",
                     stall_);
        }
      } else {
        stall_ = 0;
        bland_ = false;
      }

      if (leave < 0) {
        // Bound flip: the entering variable crosses to its other bound.
        at_upper_[qk] = at_upper_[qk] ? 0 : 1;
        for (int i = 0; i < m_; ++i)
          xb_[static_cast<size_t>(i)] -=
              direction * t_best * w[static_cast<size_t>(i)];
        continue;
      }

      const int leaving = basis_[static_cast<size_t>(leave)];
      const double entering_value = nonbasic_value(entering) + direction * t_best;
      for (int i = 0; i < m_; ++i)
        xb_[static_cast<size_t>(i)] -=
            direction * t_best * w[static_cast<size_t>(i)];
      xb_[static_cast<size_t>(leave)] = entering_value;

      is_basic_[static_cast<size_t>(leaving)] = 0;
      at_upper_[static_cast<size_t>(leaving)] = leave_to_upper ? 1 : 0;
      is_basic_[qk] = 1;
      basis_[static_cast<size_t>(leave)] = entering;

      // Eta update of the dense inverse.
      const double piv = w[static_cast<size_t>(leave)];
      if (std::abs(piv) < kPivotTol)
        throw SolveError("internal: simplex pivot too small");
      double* prow = binv_.data() + static_cast<size_t>(leave) * m_;
      for (int k = 0; k < m_; ++k) prow[k] /= piv;
      for (int i = 0; i < m_; ++i) {
        if (i == leave) continue;
        const double f = w[static_cast<size_t>(i)];
        if (f == 0.0) continue;
        double* row = binv_.data() + static_cast<size_t>(i) * m_;
        for (int k = 0; k < m_; ++k) row[k] -= f * prow[k];
      }

      if (++since_refactor >= kRefactorEvery) {
        refactor();
        since_refactor = 0;
      }
    }
    throw SolveError("simplex iteration limit exceeded");
  }
};

}  // namespace

LpSolution solve_lp(const LpProblem& problem) {
  problem.validate();
  Simplex simplex(problem);
  return simplex.run();
}

double max_constraint_violation(const LpProblem& problem,
                                const std::vector<double>& values) {
  double worst = 0.0;
  for (const auto& row : problem.rows()) {
    double lhs = 0.0;
    for (const auto& term : row.terms)
      lhs += term.coefficient * values[static_cast<size_t>(term.variable)];
    double violation = 0.0;
    switch (row.relation) {
      case Relation::LessEqual: violation = lhs - row.rhs; break;
      case Relation::GreaterEqual: violation = row.rhs - lhs; break;
      case Relation::Equal: violation = std::abs(lhs - row.rhs); break;
    }
    worst = std::max(worst, violation);
  }
  return worst;
}

void dump_lp(const LpProblem& problem, std::ostream& out) {
  out << "min";
  for (int j = 0; j < problem.num_variables(); ++j) {
    const double c = problem.objective()[static_cast<size_t>(j)];
    if (c != 0.0)
      out << fmt::format(" {:+g} {}", c, problem.variable_name(j));
  }
  out << "\ns.t.\n";
  for (const auto& row : problem.rows()) {
    out << "  ";
    if (!row.name.empty()) out << row.name << ": ";
    for (const auto& term : row.terms)
      out << fmt::format("{:+g} {} ", term.coefficient,
                         problem.variable_name(term.variable));
    switch (row.relation) {
      case Relation::LessEqual: out << "<= "; break;
      case Relation::Equal: out << "= "; break;
      case Relation::GreaterEqual: out << ">= "; break;
    }
    out << fmt::format("{:g}\n", row.rhs);
  }
  out << "bounds\n";
  for (int j = 0; j < problem.num_variables(); ++j) {
    const size_t k = static_cast<size_t>(j);
    out << fmt::format("  {} in [{:g}, {:g}]\n", problem.variable_name(j),
                       problem.lower()[k], problem.upper()[k]);
  }
}

}  // namespace bmsim
