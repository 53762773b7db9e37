#ifndef DUQ_SPARSE_FIT_HPP
#define DUQ_SPARSE_FIT_HPP

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "duq/orthopoly.hpp"

namespace duq::sparse_fit {

// Training pairs: rows are points, columns are basis evaluations. Column 0
// must be the constant basis. `columns` optionally carries the multi-index
// behind each column so fitted terms stay identifiable.
struct RegressionDesign {
  Eigen::MatrixXd psi;
  Eigen::VectorXd y;
  std::vector<std::vector<int>> columns;

  void validate() const;
};

struct LooResult {
  Eigen::VectorXd coeffs;    // least-squares fit on all rows
  Eigen::VectorXd leverage;  // hat-matrix diagonal
  double raw = 0.0;          // mean squared deleted residual
  double normalized = 0.0;   // raw / population variance of y
};

// Leave-one-out error of the least-squares fit of y on `active`, computed
// through the hat-matrix identity instead of N retrainings. Requires more
// rows than columns and full column rank.
LooResult loo_error(const Eigen::MatrixXd& active, const Eigen::VectorXd& y);

struct SparseExpansion {
  std::vector<int> active;                       // column ids, selection order
  std::vector<std::vector<int>> active_indices;  // multi-indices when known
  Eigen::VectorXd coeffs;                        // aligned with `active`
  double loo = 0.0;        // normalized leave-one-out error
  double rel_error = 0.0;  // training MSE / population variance
  int degree = 0;
  std::vector<double> loo_history;      // one entry per accepted term
  std::vector<double> residual_norms;   // residual 2-norm per accepted term
  std::vector<std::string> notes;       // skipped columns, early stops
};

// Orthogonal matching pursuit: repeatedly add the column most correlated
// with the residual (scored on unit-normalized columns, ties to the lowest
// index), refit all active coefficients by least squares, and return the
// iteration with the smallest leave-one-out error among those that improved
// on their predecessor by at least `improvement_tol` relative. Plain
// leave-one-out drifts down a few percent per spurious term; the margin
// keeps such terms out of the returned model, and after `patience`
// consecutive non-improving iterations the search stops. Stops early once
// the error reaches `loo_target`. Columns nearly dependent on the active set
// are skipped with a note. `max_terms` = 0 means min(N/2, 200), clipped to
// min(N-1, K).
SparseExpansion omp_fit(const RegressionDesign& design, long max_terms = 0,
                        double loo_target = 0.0,
                        double improvement_tol = 0.10, int patience = 3);

struct AdaptiveConfig {
  int min_degree = 1;
  int max_degree = 3;  // hard cap 5
  double q = 0.75;
  int max_interaction = 2;
  double loo_target = 0.0;
  long max_terms = 0;
  double improvement_tol = 0.10;
  int patience = 3;
  long candidate_cap = 200000;
  int threads = 0;  // used only for design-matrix evaluation
};

struct DegreeTrial {
  int degree = 0;
  bool ok = false;
  double loo = 0.0;
  int terms = 0;
  std::string error;  // set when this degree failed
};

// Result of the degree scan: bases and candidate set for the winning degree,
// the fitted expansion, and E[Phi^2] per active term.
struct AdaptiveFit {
  int degree = 0;
  std::vector<orthopoly::UnivariateBasis> bases;
  orthopoly::MultiIndexSet candidates;
  SparseExpansion expansion;
  Eigen::VectorXd norms;
  std::vector<DegreeTrial> trials;
};

// Fits one expansion per degree in [min_degree, max_degree] on the whitened
// inputs and keeps the degree with the smallest leave-one-out error. Degrees
// that cannot be built (too few distinct values, singular moments, candidate
// explosion) are recorded and skipped; if every degree fails the error is
// AllDegreesFailed.
AdaptiveFit adaptive_fit(const Eigen::MatrixXd& xi, const Eigen::VectorXd& y,
                         const AdaptiveConfig& config = {});

}  // namespace duq::sparse_fit

#endif
