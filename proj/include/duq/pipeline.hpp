#ifndef DUQ_PIPELINE_HPP
#define DUQ_PIPELINE_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "duq/orthopoly.hpp"
#include "duq/sparse_fit.hpp"
#include "duq/transforms.hpp"

namespace duq::pipeline {

struct FitConfig {
  sparse_fit::AdaptiveConfig adaptive;
  double variance_keep = 1.0;
};

// Everything a consumer needs to reproduce or audit a fitted model.
struct Provenance {
  std::uint64_t seed = 0;
  long training_size = 0;
  FitConfig config;
  // Column names of the raw input matrix, so a saved model can validate
  // scenario files on its own.
  std::vector<std::string> input_labels;
};

// Self-contained surrogate: whitening map, per-component polynomial bases
// built from the training sample's raw moments, the selected expansion, and
// E[Phi^2] per active term.
struct SurrogateModel {
  transforms::Whitener whitener;
  std::vector<orthopoly::UnivariateBasis> bases;
  sparse_fit::SparseExpansion expansion;
  Eigen::VectorXd norms;
  Provenance provenance;

  int input_dim() const { return whitener.input_dim(); }
  void validate() const;
};

struct TrainingSplit {
  std::vector<long> train_indices;    // ascending
  std::vector<long> holdout_indices;  // ascending
  Eigen::MatrixXd train;
  Eigen::MatrixXd holdout;
};

// Uniform without-replacement subsample of the scenario rows; deterministic
// in the seed. The remainder is kept as a holdout in row order.
TrainingSplit sample_training_design(const Eigen::MatrixXd& data, long n_train,
                                     std::uint64_t seed);

// Whiten raw inputs, then run the degree-adaptive sparse fit on the scores.
// The seed is recorded in provenance only; fitting itself is deterministic.
SurrogateModel fit_surrogate(const Eigen::MatrixXd& inputs,
                             const Eigen::VectorXd& outputs,
                             const FitConfig& config = {},
                             std::uint64_t seed = 0);

// y(x) = sum_i c_i Phi_i(whiten(x)); pure, parallel over rows.
Eigen::VectorXd predict(const SurrogateModel& model,
                        const Eigen::MatrixXd& raw_rows, int threads = 0);
// Single-threaded reference used for comparisons and benchmarks.
Eigen::VectorXd predict_serial(const SurrogateModel& model,
                               const Eigen::MatrixXd& raw_rows);

struct Moments {
  double mean = 0.0;
  double variance = 0.0;
};

// Closed-form statistics of the expansion under the training measure: the
// constant coefficient is the mean; every other term contributes
// c_i^2 E[Phi_i^2] to the variance.
Moments analytic_moments(const SurrogateModel& model);

struct Stats {
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation, 1/(n-1)
};
Stats empirical_stats(const Eigen::VectorXd& values);

struct Curve {
  Eigen::VectorXd grid;
  Eigen::VectorXd values;
};

// Gaussian kernel density with Silverman bandwidth
// 0.9 min(sigma, IQR/1.34) n^(-1/5) on 512 points over [min-3h, max+3h].
// All-equal samples get a floored bandwidth and a warning instead of a
// failure.
Curve kde_pdf(const Eigen::VectorXd& values, std::string* warning = nullptr);

// P(X <= g) for each grid point.
Curve empirical_cdf(const Eigen::VectorXd& values, const Eigen::VectorXd& grid);

struct UqReport {
  double mean = 0.0;
  double stddev = 0.0;
  long n = 0;
  Curve pdf;
  Curve cdf;
  double wall_seconds = 0.0;
  std::vector<std::string> warnings;
};

UqReport make_report(const Eigen::VectorXd& values, double wall_seconds = 0.0);

struct CompareMetrics {
  double mean_pct = 0.0;  // 100 |mu_c - mu_b| / |mu_b|
  double std_pct = 0.0;   // 100 |sd_c - sd_b| / sd_b
  double cdf_gap = 0.0;   // max |CDF_c - CDF_b| over both grids
};

CompareMetrics compare_reports(const UqReport& baseline,
                               const UqReport& candidate);

}  // namespace duq::pipeline

#endif
