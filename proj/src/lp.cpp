#include "duq/lp.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

#include "duq/error.hpp"

namespace duq::lp {

int LpProblem::add_column(double cost, double lo, double hi) {
  objective.push_back(cost);
  lower.push_back(lo);
  upper.push_back(hi);
  return num_cols++;
}

int LpProblem::add_row(Relation rel, double rhs_value) {
  relations.push_back(rel);
  rhs.push_back(rhs_value);
  return num_rows++;
}

void LpProblem::add_entry(int row, int col, double value) {
  entries.push_back({row, col, value});
}

void LpProblem::validate() const {
  require(num_cols >= 1, ErrorKind::MalformedProblem, "problem has no columns");
  require(static_cast<int>(objective.size()) == num_cols &&
              static_cast<int>(lower.size()) == num_cols &&
              static_cast<int>(upper.size()) == num_cols,
          ErrorKind::MalformedProblem, "column array sizes disagree");
  require(static_cast<int>(relations.size()) == num_rows &&
              static_cast<int>(rhs.size()) == num_rows,
          ErrorKind::MalformedProblem, "row array sizes disagree");
  for (int j = 0; j < num_cols; ++j) {
    require(std::isfinite(objective[j]), ErrorKind::MalformedProblem,
            "objective coefficient " + std::to_string(j) + " is not finite");
    require(!std::isnan(lower[j]) && !std::isnan(upper[j]),
            ErrorKind::MalformedProblem,
            "bound of column " + std::to_string(j) + " is NaN");
    require(lower[j] <= upper[j], ErrorKind::MalformedProblem,
            "lower bound exceeds upper bound for column " + std::to_string(j));
  }
  for (int i = 0; i < num_rows; ++i) {
    require(std::isfinite(rhs[i]), ErrorKind::MalformedProblem,
            "rhs of row " + std::to_string(i) + " is not finite");
  }
  for (const Triplet& t : entries) {
    require(t.row >= 0 && t.row < num_rows && t.col >= 0 && t.col < num_cols,
            ErrorKind::MalformedProblem, "triplet references invalid row/col");
    require(std::isfinite(t.value), ErrorKind::MalformedProblem,
            "matrix entry is not finite");
  }
}

const char* to_string(LpStatus status) {
  switch (status) {
    case LpStatus::Optimal: return "optimal";
    case LpStatus::Infeasible: return "infeasible";
    case LpStatus::Unbounded: return "unbounded";
    case LpStatus::IterationLimit: return "iteration_limit";
  }
  return "unknown";
}

namespace {

enum class VarState : unsigned char { Basic, AtLower, AtUpper, FreeZero };

// Dense bounded-variable primal simplex. Columns are laid out as
// [structural | one slack per row | one artificial per row]; phase 1 starts
// from the artificial basis so every row has a basic column from the outset.
class Simplex {
 public:
  Simplex(const LpProblem& p, const SolverConfig& cfg) : cfg_(cfg), m_(p.num_rows) {
    ns_ = p.num_cols;
    n_ = ns_ + m_ + m_;
    A_ = Eigen::MatrixXd::Zero(std::max(m_, 1), n_);
    for (const Triplet& t : p.entries) A_(t.row, t.col) += t.value;
    lower_.assign(n_, 0.0);
    upper_.assign(n_, 0.0);
    cost_.assign(n_, 0.0);
    phase1_cost_.assign(n_, 0.0);
    for (int j = 0; j < ns_; ++j) {
      lower_[j] = p.lower[j];
      upper_[j] = p.upper[j];
      cost_[j] = p.objective[j];
    }
    for (int i = 0; i < m_; ++i) {
      const int s = ns_ + i;
      A_(i, s) = 1.0;
      switch (p.relations[i]) {
        case Relation::LessEqual:
          lower_[s] = 0.0;
          upper_[s] = kInf;
          break;
        case Relation::GreaterEqual:
          lower_[s] = -kInf;
          upper_[s] = 0.0;
          break;
        case Relation::Equal:
          lower_[s] = 0.0;
          upper_[s] = 0.0;
          break;
      }
    }
    b_.resize(m_);
    for (int i = 0; i < m_; ++i) b_(i) = p.rhs[i];
    max_iter_ = cfg.max_iterations > 0 ? cfg.max_iterations
                                       : 50L * static_cast<long>(m_ + n_);
  }

  LpSolution run() {
    LpSolution sol;
    if (m_ == 0) return solve_unconstrained(sol);
    init_phase1();
    const Outcome ph1 = iterate(/*phase1=*/true);
    if (ph1 == Outcome::IterationCap) {
      sol.diagnostics = "iteration cap hit in phase 1";
      return finish(sol, LpStatus::IterationLimit);
    }
    const double infeas = phase_objective();
    if (infeas > cfg_.feasibility_tol * (1.0 + b_.cwiseAbs().maxCoeff())) {
      sol.diagnostics = "phase-1 residual " + std::to_string(infeas);
      return finish(sol, LpStatus::Infeasible);
    }
    pivot_out_artificials();
    setup_phase2();
    const Outcome ph2 = iterate(/*phase1=*/false);
    switch (ph2) {
      case Outcome::Optimal: return finish(sol, LpStatus::Optimal);
      case Outcome::Unbounded:
        sol.diagnostics = unbounded_note_;
        return finish(sol, LpStatus::Unbounded);
      case Outcome::IterationCap:
        sol.diagnostics = "iteration cap hit in phase 2";
        return finish(sol, LpStatus::IterationLimit);
    }
    return finish(sol, LpStatus::IterationLimit);
  }

 private:
  enum class Outcome { Optimal, Unbounded, IterationCap };

  // Bound-only problem: each variable sits at the bound favored by its cost.
  LpSolution solve_unconstrained(LpSolution& sol) {
    sol.x.assign(ns_, 0.0);
    for (int j = 0; j < ns_; ++j) {
      if (cost_[j] > 0.0) {
        if (!std::isfinite(lower_[j])) {
          sol.status = LpStatus::Unbounded;
          sol.diagnostics = "column " + std::to_string(j) + " unbounded below";
          return sol;
        }
        sol.x[j] = lower_[j];
      } else if (cost_[j] < 0.0) {
        if (!std::isfinite(upper_[j])) {
          sol.status = LpStatus::Unbounded;
          sol.diagnostics = "column " + std::to_string(j) + " unbounded above";
          return sol;
        }
        sol.x[j] = upper_[j];
      } else {
        sol.x[j] = std::isfinite(lower_[j]) ? lower_[j]
                   : std::isfinite(upper_[j]) ? upper_[j]
                                              : 0.0;
      }
      sol.objective += cost_[j] * sol.x[j];
    }
    sol.status = LpStatus::Optimal;
    return sol;
  }

  void init_phase1() {
    state_.assign(n_, VarState::AtLower);
    value_.assign(n_, 0.0);
    for (int j = 0; j < ns_ + m_; ++j) {
      if (std::isfinite(lower_[j])) {
        state_[j] = VarState::AtLower;
        value_[j] = lower_[j];
      } else if (std::isfinite(upper_[j])) {
        state_[j] = VarState::AtUpper;
        value_[j] = upper_[j];
      } else {
        state_[j] = VarState::FreeZero;
        value_[j] = 0.0;
      }
    }
    Eigen::VectorXd residual = b_;
    for (int j = 0; j < ns_ + m_; ++j) {
      if (value_[j] != 0.0) residual -= A_.col(j) * value_[j];
    }
    basis_.resize(m_);
    binv_ = Eigen::MatrixXd::Zero(m_, m_);
    for (int i = 0; i < m_; ++i) {
      const int a = ns_ + m_ + i;
      const double sgn = residual(i) < 0.0 ? -1.0 : 1.0;
      A_(i, a) = sgn;
      lower_[a] = 0.0;
      upper_[a] = kInf;
      phase1_cost_[a] = 1.0;
      basis_[i] = a;
      state_[a] = VarState::Basic;
      binv_(i, i) = sgn;
    }
    compute_basics();
    pivots_since_refactor_ = 0;
    degenerate_run_ = 0;
  }

  void setup_phase2() {
    // Artificials are pinned at zero for phase 2; any still basic sit in
    // redundant rows at value zero.
    for (int i = 0; i < m_; ++i) {
      const int a = ns_ + m_ + i;
      upper_[a] = 0.0;
      if (state_[a] != VarState::Basic) {
        state_[a] = VarState::AtLower;
        value_[a] = 0.0;
      }
    }
    degenerate_run_ = 0;
  }

  double phase_objective() const {
    double s = 0.0;
    for (int i = 0; i < m_; ++i) {
      if (basis_[i] >= ns_ + m_) s += std::abs(beta_(i));
    }
    return s;
  }

  void compute_basics() {
    Eigen::VectorXd rhs_eff = b_;
    for (int j = 0; j < n_; ++j) {
      if (state_[j] != VarState::Basic && value_[j] != 0.0)
        rhs_eff -= A_.col(j) * value_[j];
    }
    beta_ = binv_ * rhs_eff;
    for (int i = 0; i < m_; ++i) value_[basis_[i]] = beta_(i);
  }

  void refactor() {
    Eigen::MatrixXd B(m_, m_);
    for (int i = 0; i < m_; ++i) B.col(i) = A_.col(basis_[i]);
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(B);
    binv_ = lu.inverse();
    compute_basics();
    pivots_since_refactor_ = 0;
  }

  Outcome iterate(bool phase1) {
    const std::vector<double>& c = phase1 ? phase1_cost_ : cost_;
    const int enter_limit = ns_ + m_;  // artificials never re-enter
    while (true) {
      if (iterations_ >= max_iter_) return Outcome::IterationCap;
      if (pivots_since_refactor_ >= cfg_.refactor_interval) refactor();

      Eigen::VectorXd cb(m_);
      for (int i = 0; i < m_; ++i) cb(i) = c[basis_[i]];
      const Eigen::RowVectorXd y = cb.transpose() * binv_;

      const bool bland = degenerate_run_ >= 50;
      int enter = -1;
      int direction = 0;
      double best_score = cfg_.optimality_tol;
      for (int j = 0; j < enter_limit; ++j) {
        if (state_[j] == VarState::Basic) continue;
        if (lower_[j] == upper_[j]) continue;  // fixed
        const double d = c[j] - y.dot(A_.col(j));
        int dir = 0;
        if (state_[j] == VarState::AtLower) {
          if (d < -cfg_.optimality_tol) dir = +1;
        } else if (state_[j] == VarState::AtUpper) {
          if (d > cfg_.optimality_tol) dir = -1;
        } else {  // free, parked at zero
          if (d < -cfg_.optimality_tol) dir = +1;
          else if (d > cfg_.optimality_tol) dir = -1;
        }
        if (dir == 0) continue;
        if (bland) {
          enter = j;
          direction = dir;
          break;
        }
        if (std::abs(d) > best_score) {
          best_score = std::abs(d);
          enter = j;
          direction = dir;
        }
      }
      if (enter < 0) return Outcome::Optimal;

      const Eigen::VectorXd w = binv_ * A_.col(enter);

      // Ratio test: entering moves by direction*t, basic i by -direction*t*w_i.
      // Lowest row index wins ties.
      const double kPivotTol = 1e-9;
      double t_max = kInf;
      int leave_row = -1;
      int leave_to = 0;  // -1 lower, +1 upper
      for (int i = 0; i < m_; ++i) {
        const double step = -direction * w(i);
        if (step < -kPivotTol) {
          const double lo = lower_[basis_[i]];
          if (std::isfinite(lo)) {
            const double t = (beta_(i) - lo) / (-step);
            if (t < t_max - 1e-12) {
              t_max = t;
              leave_row = i;
              leave_to = -1;
            }
          }
        } else if (step > kPivotTol) {
          const double hi = upper_[basis_[i]];
          if (std::isfinite(hi)) {
            const double t = (hi - beta_(i)) / step;
            if (t < t_max - 1e-12) {
              t_max = t;
              leave_row = i;
              leave_to = +1;
            }
          }
        }
      }
      const double range = upper_[enter] - lower_[enter];
      bool bound_flip = false;
      if (std::isfinite(range) && (leave_row < 0 || range < t_max - 1e-12)) {
        bound_flip = true;
        t_max = range;
      }
      if (!bound_flip && leave_row < 0) {
        unbounded_note_ =
            "column " + std::to_string(enter) + " improves without bound";
        return Outcome::Unbounded;
      }

      ++iterations_;
      degenerate_run_ = (t_max <= 1e-11) ? degenerate_run_ + 1 : 0;
      if (t_max < 0.0) t_max = 0.0;
      const double delta = direction * t_max;

      if (bound_flip) {
        value_[enter] += delta;
        state_[enter] = state_[enter] == VarState::AtLower ? VarState::AtUpper
                                                           : VarState::AtLower;
        for (int i = 0; i < m_; ++i) {
          beta_(i) -= delta * w(i);
          value_[basis_[i]] = beta_(i);
        }
        continue;
      }

      const int leaving = basis_[leave_row];
      const double enter_start = value_[enter];
      for (int i = 0; i < m_; ++i) {
        if (i == leave_row) continue;
        beta_(i) -= delta * w(i);
        value_[basis_[i]] = beta_(i);
      }
      state_[leaving] = leave_to < 0 ? VarState::AtLower : VarState::AtUpper;
      value_[leaving] = leave_to < 0 ? lower_[leaving] : upper_[leaving];

      const double piv = w(leave_row);
      binv_.row(leave_row) /= piv;
      for (int i = 0; i < m_; ++i) {
        if (i == leave_row) continue;
        const double f = w(i);
        if (f != 0.0) binv_.row(i) -= f * binv_.row(leave_row);
      }
      basis_[leave_row] = enter;
      state_[enter] = VarState::Basic;
      beta_(leave_row) = enter_start + delta;
      value_[enter] = beta_(leave_row);
      ++pivots_since_refactor_;
    }
  }

  // After phase 1, swap basic artificials for the lowest-index usable
  // structural/slack column; rows with none are redundant and keep a pinned
  // artificial.
  void pivot_out_artificials() {
    for (int i = 0; i < m_; ++i) {
      if (basis_[i] < ns_ + m_) continue;
      int pick = -1;
      for (int j = 0; j < ns_ + m_; ++j) {
        if (state_[j] == VarState::Basic) continue;
        if (std::abs(binv_.row(i).dot(A_.col(j))) > 1e-7) {
          pick = j;
          break;
        }
      }
      if (pick < 0) continue;
      const Eigen::VectorXd w = binv_ * A_.col(pick);
      const int leaving = basis_[i];
      state_[leaving] = VarState::AtLower;
      value_[leaving] = 0.0;
      binv_.row(i) /= w(i);
      for (int r = 0; r < m_; ++r) {
        if (r == i) continue;
        const double f = w(r);
        if (f != 0.0) binv_.row(r) -= f * binv_.row(i);
      }
      basis_[i] = pick;
      state_[pick] = VarState::Basic;
      ++pivots_since_refactor_;
      compute_basics();
    }
  }

  // Max constraint violation relative to 1 + |rhs| plus bound violations.
  double primal_violation() const {
    double worst = 0.0;
    Eigen::VectorXd x(n_);
    for (int j = 0; j < n_; ++j) x(j) = value_[j];
    const Eigen::VectorXd act = A_ * x;
    for (int i = 0; i < m_; ++i) {
      worst = std::max(worst, std::abs(act(i) - b_(i)) / (1.0 + std::abs(b_(i))));
    }
    for (int j = 0; j < n_; ++j) {
      const double scale = 1.0 + std::max(std::abs(lower_[j]) == kInf ? 0.0 : std::abs(lower_[j]),
                                          std::abs(upper_[j]) == kInf ? 0.0 : std::abs(upper_[j]));
      if (std::isfinite(lower_[j]))
        worst = std::max(worst, (lower_[j] - value_[j]) / scale);
      if (std::isfinite(upper_[j]))
        worst = std::max(worst, (value_[j] - upper_[j]) / scale);
    }
    return worst;
  }

  LpSolution finish(LpSolution& sol, LpStatus status) {
    if (status == LpStatus::Optimal) {
      refactor();
      const double viol = primal_violation();
      if (viol > cfg_.feasibility_tol) {
        status = LpStatus::IterationLimit;
        sol.diagnostics = "numerical drift, primal violation " + std::to_string(viol);
      }
    }
    sol.status = status;
    sol.iterations = iterations_;
    sol.x.assign(ns_, 0.0);
    for (int j = 0; j < ns_; ++j) sol.x[j] = value_[j];
    double obj = 0.0;
    for (int j = 0; j < ns_; ++j) obj += cost_[j] * sol.x[j];
    sol.objective = obj;
    return sol;
  }

  SolverConfig cfg_;
  int m_ = 0;
  int ns_ = 0;  // structural columns
  int n_ = 0;   // structural + slack + artificial
  Eigen::MatrixXd A_;
  Eigen::VectorXd b_;
  std::vector<double> lower_, upper_, cost_, phase1_cost_;
  std::vector<VarState> state_;
  std::vector<double> value_;
  std::vector<int> basis_;
  Eigen::MatrixXd binv_;
  Eigen::VectorXd beta_;
  long iterations_ = 0;
  long max_iter_ = 0;
  int pivots_since_refactor_ = 0;
  int degenerate_run_ = 0;
  std::string unbounded_note_;
};

}  // namespace

LpSolution solve(const LpProblem& problem, const SolverConfig& config) {
  problem.validate();
  Simplex simplex(problem, config);
  return simplex.run();
}

void dump(const LpProblem& problem, std::ostream& os) {
  os.setf(std::ios::fixed, std::ios::floatfield);
  os.precision(9);
  os << "minimize";
  for (int j = 0; j < problem.num_cols; ++j) {
    os << (j == 0 ? " " : " + ") << problem.objective[j] << " x" << j;
  }
  os << "\n";
  std::vector<std::vector<std::pair<int, double>>> rows(problem.num_rows);
  for (const Triplet& t : problem.entries) rows[t.row].push_back({t.col, t.value});
  for (int i = 0; i < problem.num_rows; ++i) {
    auto& r = rows[i];
    std::sort(r.begin(), r.end());
    os << "c" << i << ":";
    bool first = true;
    for (auto& [col, val] : r) {
      os << (first ? " " : " + ") << val << " x" << col;
      first = false;
    }
    const char* rel = problem.relations[i] == Relation::LessEqual ? "<="
                      : problem.relations[i] == Relation::Equal  ? "="
                                                                 : ">=";
    os << " " << rel << " " << problem.rhs[i] << "\n";
  }
  for (int j = 0; j < problem.num_cols; ++j) {
    os << "b" << j << ": " << problem.lower[j] << " <= x" << j << " <= "
       << problem.upper[j] << "\n";
  }
}

}  // namespace duq::lp
