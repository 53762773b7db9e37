#ifndef DUQ_LP_HPP
#define DUQ_LP_HPP

#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

namespace duq::lp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Relation { LessEqual, Equal, GreaterEqual };

struct Triplet {
  int row;
  int col;
  double value;
};

// min c'x  s.t.  A x {<=,=,>=} b,  lower <= x <= upper (bounds may be +-inf).
struct LpProblem {
  int num_rows = 0;
  int num_cols = 0;
  std::vector<double> objective;
  std::vector<Triplet> entries;
  std::vector<Relation> relations;
  std::vector<double> rhs;
  std::vector<double> lower;
  std::vector<double> upper;

  int add_column(double cost, double lo, double hi);
  int add_row(Relation rel, double rhs_value);
  void add_entry(int row, int col, double value);

  // Throws MalformedProblem on invariant violations (bad indices, NaN,
  // crossed bounds).
  void validate() const;
};

enum class LpStatus { Optimal, Infeasible, Unbounded, IterationLimit };

const char* to_string(LpStatus status);

struct LpSolution {
  LpStatus status = LpStatus::IterationLimit;
  std::vector<double> x;
  double objective = 0.0;
  long iterations = 0;
  std::string diagnostics;
};

struct SolverConfig {
  double feasibility_tol = 1e-8;
  double optimality_tol = 1e-8;
  long max_iterations = 0;  // 0 = 50 * (rows + cols)
  int refactor_interval = 60;
};

// Bounded-variable primal simplex, two phases with artificials. Deterministic:
// Dantzig pricing with lowest-index tie-break, Bland's rule after a run of
// degenerate pivots, leaving row chosen by lowest index.
LpSolution solve(const LpProblem& problem, const SolverConfig& config = {});

// One constraint per line, fixed-point text, for cross-checks against
// external solvers.
void dump(const LpProblem& problem, std::ostream& os);

}  // namespace duq::lp

#endif
