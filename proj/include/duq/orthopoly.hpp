#ifndef DUQ_ORTHOPOLY_HPP
#define DUQ_ORTHOPOLY_HPP

#include <Eigen/Dense>
#include <vector>

namespace duq::orthopoly {

// Monic polynomials orthogonal under the empirical measure of one input
// dimension, built purely from its raw moments.
struct UnivariateBasis {
  // Row l holds the l+1 coefficients of the degree-l polynomial in
  // ascending powers; the leading entry is always 1.
  std::vector<std::vector<double>> coeffs;
  std::vector<double> moments;    // raw moments 0..2D used to build the rows
  std::vector<double> condition;  // moment-matrix condition estimate per degree

  int max_degree() const { return static_cast<int>(coeffs.size()) - 1; }
};

// Coefficients of the monic degree-l polynomial orthogonal to all lower
// degrees under the measure with the given raw moments: the l x l moment
// matrix equation with the leading coefficient pinned to 1. `moments` must
// reach order 2l-1. Throws SingularMomentMatrix when the moment matrix is
// rank-deficient within tolerance; `condition_out` receives the SVD
// condition estimate when non-null.
std::vector<double> monic_orthogonal_coeffs(const std::vector<double>& moments,
                                            int degree,
                                            double* condition_out = nullptr);

// Rows 0..max_degree; `moments` must reach order 2*max_degree.
UnivariateBasis build_univariate_basis(const std::vector<double>& moments,
                                       int max_degree);

// Multivariate tensor-product exponents, hyperbolically truncated:
// (sum_j a_j^q)^(1/q) <= max_degree with at most max_interaction nonzero
// entries, in graded order (total degree ascending, then lexicographically
// descending within a grade).
struct MultiIndexSet {
  std::vector<std::vector<int>> indices;
  std::vector<int> total_degree;
  std::vector<double> q_norm;
  std::vector<int> interactions;  // nonzero count per entry
  int dims = 0;
  int max_degree = 0;
  double q = 1.0;
  int max_interaction = 1;

  int size() const { return static_cast<int>(indices.size()); }
};

// Throws CandidateExplosion as soon as the set would exceed `cap` entries.
MultiIndexSet build_multi_index_set(int dims, int max_degree, double q,
                                    int max_interaction, long cap = 200000);

// One tensor-product basis value: prod_j phi_j^(alpha_j)(xi_j). No argument
// checking; callers validate dimensions once up front.
double eval_term(const std::vector<UnivariateBasis>& bases,
                 const std::vector<int>& alpha, const Eigen::VectorXd& xi);

// Row of basis values at one point: entry i = prod_j phi_j^(a_j)(xi_j).
Eigen::VectorXd eval_basis_row(const std::vector<UnivariateBasis>& bases,
                               const MultiIndexSet& set,
                               const Eigen::VectorXd& xi);

// N x K design matrix over whitened rows; rows evaluated independently.
Eigen::MatrixXd eval_design_matrix(const std::vector<UnivariateBasis>& bases,
                                   const MultiIndexSet& set,
                                   const Eigen::MatrixXd& xi_rows,
                                   int threads = 0);

// E[Phi_i^2] per entry, each univariate factor expanded against the raw
// moments stored in its basis. Throws NonPositiveNorm when a value is not
// strictly positive (zero-norm polynomials signal too few distinct values).
Eigen::VectorXd basis_norms(const std::vector<UnivariateBasis>& bases,
                            const MultiIndexSet& set);

}  // namespace duq::orthopoly

#endif
