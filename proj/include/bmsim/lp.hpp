#pragma once

#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

namespace bmsim {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Shared numeric tolerances. Feasibility is checked at 1e-7, optimality
// (reduced costs) at 1e-9; downstream modules inherit these.
inline constexpr double kFeasTol = 1e-7;
inline constexpr double kDualTol = 1e-9;
inline constexpr double kBoundTol = 1e-9;
inline constexpr double kPivotTol = 1e-10;

enum class Relation { LessEqual, Equal, GreaterEqual };

struct LinearTerm {
  int variable = -1;
  double coefficient = 0.0;
};

// Minimization problem over bounded variables. Bounds may be infinite.
class LpProblem {
 public:
  int add_variable(std::string name, double lower, double upper,
                   double objective);
  void add_constraint(std::vector<LinearTerm> terms, Relation relation,
                      double rhs, std::string name = {});

  int num_variables() const { return static_cast<int>(cost_.size()); }
  int num_constraints() const { return static_cast<int>(rows_.size()); }

  // Throws ValidationError on NaN data, bad variable references, or
  // crossed bounds.
  void validate() const;

  struct Row {
    std::vector<LinearTerm> terms;
    Relation relation = Relation::LessEqual;
    double rhs = 0.0;
    std::string name;
  };

  const std::vector<double>& objective() const { return cost_; }
  const std::vector<double>& lower() const { return lower_; }
  const std::vector<double>& upper() const { return upper_; }
  const std::vector<Row>& rows() const { return rows_; }
  const std::string& variable_name(int j) const {
    return names_[static_cast<size_t>(j)];
  }

 private:
  std::vector<double> cost_;
  std::vector<double> lower_;
  std::vector<double> upper_;
  std::vector<std::string> names_;
  std::vector<Row> rows_;
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

struct LpSolution {
  LpStatus status = LpStatus::Infeasible;
  std::vector<double> values;
  double objective_value = 0.0;
};

// Two-phase revised simplex with explicit variable bounds. Deterministic:
// Dantzig pricing with smallest-index tie-breaks, switching to Bland's rule
// after a degeneracy stall to guarantee termination.
LpSolution solve_lp(const LpProblem& problem);

// Largest absolute constraint violation of a candidate point.
double max_constraint_violation(const LpProblem& problem,
                                const std::vector<double>& values);

// Plain-text listing for debugging; not a stable format.
void dump_lp(const LpProblem& problem, std::ostream& out);

}  // namespace bmsim
