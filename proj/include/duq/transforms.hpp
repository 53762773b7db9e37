#ifndef DUQ_TRANSFORMS_HPP
#define DUQ_TRANSFORMS_HPP

#include <Eigen/Dense>
#include <vector>

namespace duq::transforms {

// Affine map taking raw input rows to decorrelated, unit-variance scores:
// xi = diag(lambda)^(-1/2) V^T (x - mean), keeping the top M components.
struct Whitener {
  Eigen::VectorXd mean;
  Eigen::MatrixXd eigenvectors;   // columns ordered by descending eigenvalue
  Eigen::VectorXd eigenvalues;    // descending, >= 0
  int retained = 0;               // M
  double variance_fraction = 1.0; // eigenvalue mass covered by the M kept

  int input_dim() const { return static_cast<int>(mean.size()); }
};

// Sample covariance uses 1/(N-1). Components whose eigenvalue falls below a
// relative numeric floor are never retained; of the rest, the smallest M
// whose cumulative eigenvalue fraction reaches variance_keep survive.
// Throws DegenerateSample when every row is identical.
Whitener fit_whitener(const Eigen::MatrixXd& samples, double variance_keep = 1.0);

Eigen::VectorXd transform(const Whitener& w, const Eigen::VectorXd& x);
Eigen::MatrixXd transform_rows(const Whitener& w, const Eigen::MatrixXd& rows);
// Adjoint map plus mean; exact inverse on the retained subspace.
Eigen::VectorXd inverse_transform(const Whitener& w, const Eigen::VectorXd& xi);

// mu_k = (1/N) sum x_i^k for k = 0..max_order, compensated summation.
std::vector<double> raw_moments(const Eigen::VectorXd& samples, int max_order);

// Raw moments per dimension plus the support statistics the basis
// construction needs to certify solvability.
struct MomentTable {
  Eigen::MatrixXd moments;    // dims x (max_order + 1), column k = mu_k
  long sample_count = 0;
  std::vector<int> distinct;  // distinct values per dimension

  int dims() const { return static_cast<int>(moments.rows()); }
  int max_order() const { return static_cast<int>(moments.cols()) - 1; }
};

MomentTable tabulate_moments(const Eigen::MatrixXd& columns, int max_order);

}  // namespace duq::transforms

#endif
