#include "duq/transforms.hpp"

#include <algorithm>
#include <cmath>

#include "duq/error.hpp"

namespace duq::transforms {

Whitener fit_whitener(const Eigen::MatrixXd& samples, double variance_keep) {
  const Eigen::Index n = samples.rows();
  const Eigen::Index p = samples.cols();
  require(n >= 2, ErrorKind::DegenerateSample, "need at least two rows");
  require(p >= 1, ErrorKind::DimensionMismatch, "no input columns");
  require(samples.allFinite(), ErrorKind::InvariantViolation,
          "sample matrix contains non-finite values");
  require(variance_keep > 0.0 && variance_keep <= 1.0, ErrorKind::InvariantViolation,
          "variance fraction must lie in (0, 1]");

  Whitener w;
  w.mean = samples.colwise().mean();
  const Eigen::MatrixXd centered = samples.rowwise() - w.mean.transpose();
  const Eigen::MatrixXd cov =
      centered.transpose() * centered / static_cast<double>(n - 1);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  require(eig.info() == Eigen::Success, ErrorKind::DegenerateSample,
          "eigendecomposition failed");
  // Eigen reports ascending order; flip to descending.
  w.eigenvalues = eig.eigenvalues().reverse();
  w.eigenvectors = eig.eigenvectors().rowwise().reverse();

  const double lead = w.eigenvalues(0);
  require(lead > 0.0, ErrorKind::DegenerateSample,
          "all rows identical, covariance vanishes");
  const double floor = lead * 1e-12;
  double total = 0.0;
  int usable = 0;
  for (Eigen::Index i = 0; i < p; ++i) {
    if (w.eigenvalues(i) > floor) {
      total += w.eigenvalues(i);
      ++usable;
    }
  }
  double acc = 0.0;
  int m = 0;
  while (m < usable) {
    acc += w.eigenvalues(m);
    ++m;
    if (acc / total >= variance_keep - 1e-15) break;
  }
  w.retained = m;
  w.variance_fraction = acc / total;
  return w;
}

Eigen::VectorXd transform(const Whitener& w, const Eigen::VectorXd& x) {
  require(x.size() == w.mean.size(), ErrorKind::DimensionMismatch,
          "input row has " + std::to_string(x.size()) + " entries, expected " +
              std::to_string(w.mean.size()));
  const Eigen::VectorXd centered = x - w.mean;
  Eigen::VectorXd xi(w.retained);
  for (int i = 0; i < w.retained; ++i) {
    xi(i) = w.eigenvectors.col(i).dot(centered) / std::sqrt(w.eigenvalues(i));
  }
  return xi;
}

Eigen::MatrixXd transform_rows(const Whitener& w, const Eigen::MatrixXd& rows) {
  Eigen::MatrixXd out(rows.rows(), w.retained);
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    out.row(i) = transform(w, rows.row(i).transpose()).transpose();
  }
  return out;
}

Eigen::VectorXd inverse_transform(const Whitener& w, const Eigen::VectorXd& xi) {
  require(xi.size() == w.retained, ErrorKind::DimensionMismatch,
          "score row has " + std::to_string(xi.size()) + " entries, expected " +
              std::to_string(w.retained));
  Eigen::VectorXd x = w.mean;
  for (int i = 0; i < w.retained; ++i) {
    x += w.eigenvectors.col(i) * (std::sqrt(w.eigenvalues(i)) * xi(i));
  }
  return x;
}

std::vector<double> raw_moments(const Eigen::VectorXd& samples, int max_order) {
  require(samples.size() > 0, ErrorKind::EmptySample, "no samples given");
  require(max_order >= 1, ErrorKind::InvariantViolation,
          "moment order must be at least 1");
  std::vector<double> sum(max_order + 1, 0.0);
  std::vector<double> carry(max_order + 1, 0.0);
  for (Eigen::Index i = 0; i < samples.size(); ++i) {
    double power = 1.0;
    for (int k = 0; k <= max_order; ++k) {
      const double y = power - carry[k];
      const double t = sum[k] + y;
      carry[k] = (t - sum[k]) - y;
      sum[k] = t;
      power *= samples(i);
    }
  }
  const double n = static_cast<double>(samples.size());
  for (double& s : sum) s /= n;
  return sum;
}

MomentTable tabulate_moments(const Eigen::MatrixXd& columns, int max_order) {
  MomentTable table;
  table.sample_count = columns.rows();
  table.moments.resize(columns.cols(), max_order + 1);
  table.distinct.resize(columns.cols());
  for (Eigen::Index j = 0; j < columns.cols(); ++j) {
    const std::vector<double> mu = raw_moments(columns.col(j), max_order);
    for (int k = 0; k <= max_order; ++k) table.moments(j, k) = mu[k];
    std::vector<double> vals(columns.col(j).data(), columns.col(j).data() + columns.rows());
    std::sort(vals.begin(), vals.end());
    table.distinct[j] = static_cast<int>(
        std::unique(vals.begin(), vals.end()) - vals.begin());
  }
  return table;
}

}  // namespace duq::transforms
