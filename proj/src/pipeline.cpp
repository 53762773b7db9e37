#include "duq/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "duq/error.hpp"
#include "duq/threads.hpp"

namespace duq::pipeline {

using sparse_fit::SparseExpansion;

namespace {

void check_rows_finite(const Eigen::MatrixXd& rows, const char* label) {
  require(rows.allFinite(), ErrorKind::MalformedProblem,
          std::string(label) + " contains non-finite entries");
}

// Index of the constant term, or -1 if the expansion dropped it.
long constant_index(const SparseExpansion& e) {
  for (long i = 0; i < static_cast<long>(e.active_indices.size()); ++i) {
    const auto& alpha = e.active_indices[i];
    if (std::all_of(alpha.begin(), alpha.end(),
                    [](int a) { return a == 0; })) {
      return i;
    }
  }
  return -1;
}

double interpolate_cdf(const Curve& cdf, double x) {
  const long n = cdf.grid.size();
  if (x <= cdf.grid(0)) return cdf.values(0);
  if (x >= cdf.grid(n - 1)) return cdf.values(n - 1);
  long lo = 0;
  long hi = n - 1;
  while (hi - lo > 1) {
    const long mid = (lo + hi) / 2;
    if (cdf.grid(mid) <= x)
      lo = mid;
    else
      hi = mid;
  }
  const double span = cdf.grid(hi) - cdf.grid(lo);
  if (span <= 0.0) return cdf.values(lo);
  const double t = (x - cdf.grid(lo)) / span;
  return cdf.values(lo) + t * (cdf.values(hi) - cdf.values(lo));
}

}  // namespace

void SurrogateModel::validate() const {
  const long terms = static_cast<long>(expansion.active_indices.size());
  require(terms > 0, ErrorKind::MalformedProblem, "model has no active terms");
  require(expansion.coeffs.size() == terms, ErrorKind::MalformedProblem,
          "coefficient count does not match the active term count");
  require(norms.size() == terms, ErrorKind::MalformedProblem,
          "norm count does not match the active term count");
  const long dims = static_cast<long>(bases.size());
  require(dims == whitener.retained, ErrorKind::MalformedProblem,
          "basis count does not match the retained whitened dimensions");
  for (const auto& alpha : expansion.active_indices) {
    require(static_cast<long>(alpha.size()) == dims,
            ErrorKind::MalformedProblem,
            "a multi-index does not match the whitened dimension");
    for (long j = 0; j < dims; ++j) {
      require(alpha[j] >= 0 && alpha[j] <= bases[j].max_degree(),
              ErrorKind::MalformedProblem,
              "a multi-index exceeds the stored basis degree");
    }
  }
}

TrainingSplit sample_training_design(const Eigen::MatrixXd& data, long n_train,
                                     std::uint64_t seed) {
  const long n = data.rows();
  require(n >= 1, ErrorKind::InsufficientData, "no scenario rows to sample");
  require(n_train >= 1, ErrorKind::InsufficientData,
          "training size must be positive");
  require(n_train <= n, ErrorKind::InsufficientData,
          "requested " + std::to_string(n_train) +
              " training rows but only " + std::to_string(n) +
              " are available");

  std::vector<long> pool(n);
  for (long i = 0; i < n; ++i) pool[i] = i;

  // Partial Fisher-Yates with the raw generator; distribution classes are
  // implementation-defined across standard libraries.
  std::mt19937_64 rng(seed);
  for (long i = 0; i < n_train; ++i) {
    const long j = i + static_cast<long>(rng() % static_cast<std::uint64_t>(n - i));
    std::swap(pool[i], pool[j]);
  }

  TrainingSplit split;
  split.train_indices.assign(pool.begin(), pool.begin() + n_train);
  split.holdout_indices.assign(pool.begin() + n_train, pool.end());
  std::sort(split.train_indices.begin(), split.train_indices.end());
  std::sort(split.holdout_indices.begin(), split.holdout_indices.end());

  split.train.resize(n_train, data.cols());
  for (long i = 0; i < n_train; ++i)
    split.train.row(i) = data.row(split.train_indices[i]);
  split.holdout.resize(n - n_train, data.cols());
  for (long i = 0; i < n - n_train; ++i)
    split.holdout.row(i) = data.row(split.holdout_indices[i]);
  return split;
}

SurrogateModel fit_surrogate(const Eigen::MatrixXd& inputs,
                             const Eigen::VectorXd& outputs,
                             const FitConfig& config, std::uint64_t seed) {
  require(inputs.rows() == outputs.size(), ErrorKind::DimensionMismatch,
          "input rows and output length differ");
  check_rows_finite(inputs, "training inputs");
  require(outputs.allFinite(), ErrorKind::MalformedProblem,
          "training outputs contain non-finite entries");

  SurrogateModel model;
  model.whitener = transforms::fit_whitener(inputs, config.variance_keep);
  const Eigen::MatrixXd xi = transforms::transform_rows(model.whitener, inputs);

  auto fit = sparse_fit::adaptive_fit(xi, outputs, config.adaptive);
  model.bases = std::move(fit.bases);
  model.expansion = std::move(fit.expansion);
  model.norms = std::move(fit.norms);
  model.provenance.seed = seed;
  model.provenance.training_size = inputs.rows();
  model.provenance.config = config;
  model.validate();
  return model;
}

namespace {

Eigen::VectorXd predict_impl(const SurrogateModel& model,
                             const Eigen::MatrixXd& raw_rows, int threads,
                             bool parallel) {
  model.validate();
  require(raw_rows.cols() == model.input_dim(), ErrorKind::DimensionMismatch,
          "prediction rows have " + std::to_string(raw_rows.cols()) +
              " columns but the model expects " +
              std::to_string(model.input_dim()));
  check_rows_finite(raw_rows, "prediction inputs");

  const long n = raw_rows.rows();
  const long terms = model.expansion.coeffs.size();
  Eigen::VectorXd out(n);
  auto body = [&](long i) {
    const Eigen::VectorXd xi =
        transforms::transform(model.whitener, raw_rows.row(i).transpose());
    double acc = 0.0;
    for (long t = 0; t < terms; ++t) {
      acc += model.expansion.coeffs(t) *
             orthopoly::eval_term(model.bases,
                                  model.expansion.active_indices[t], xi);
    }
    out(i) = acc;
  };
  if (parallel)
    parallel_for(n, threads, body);
  else
    serial_for(n, body);
  return out;
}

}  // namespace

Eigen::VectorXd predict(const SurrogateModel& model,
                        const Eigen::MatrixXd& raw_rows, int threads) {
  return predict_impl(model, raw_rows, threads, true);
}

Eigen::VectorXd predict_serial(const SurrogateModel& model,
                               const Eigen::MatrixXd& raw_rows) {
  return predict_impl(model, raw_rows, 0, false);
}

Moments analytic_moments(const SurrogateModel& model) {
  model.validate();
  Moments m;
  const long cidx = constant_index(model.expansion);
  if (cidx >= 0) m.mean = model.expansion.coeffs(cidx);
  for (long i = 0; i < model.expansion.coeffs.size(); ++i) {
    if (i == cidx) continue;
    const double c = model.expansion.coeffs(i);
    m.variance += c * c * model.norms(i);
  }
  return m;
}

Stats empirical_stats(const Eigen::VectorXd& values) {
  const long n = values.size();
  require(n >= 2, ErrorKind::InsufficientData,
          "need at least two values for sample statistics");
  require(values.allFinite(), ErrorKind::MalformedProblem,
          "values contain non-finite entries");
  Stats s;
  s.mean = values.mean();
  const double ss = (values.array() - s.mean).square().sum();
  s.stddev = std::sqrt(ss / static_cast<double>(n - 1));
  return s;
}

Curve kde_pdf(const Eigen::VectorXd& values, std::string* warning) {
  const long n = values.size();
  require(n >= 2, ErrorKind::InsufficientData,
          "need at least two values for a density estimate");
  require(values.allFinite(), ErrorKind::MalformedProblem,
          "values contain non-finite entries");

  std::vector<double> sorted(values.data(), values.data() + n);
  std::sort(sorted.begin(), sorted.end());
  const double q1 = sorted[static_cast<long>(0.25 * (n - 1))];
  const double q3 = sorted[static_cast<long>(0.75 * (n - 1))];
  const double iqr = q3 - q1;

  const double mean = values.mean();
  const double sd =
      std::sqrt((values.array() - mean).square().sum() / double(n - 1));

  // Silverman's rule over the positive spread measures; a literal
  // min(sd, iqr/1.34) collapses whenever half the sample ties.
  double spread = 0.0;
  if (sd > 0.0 && iqr > 0.0)
    spread = std::min(sd, iqr / 1.34);
  else if (sd > 0.0)
    spread = sd;
  else if (iqr > 0.0)
    spread = iqr / 1.34;

  double h = 0.9 * spread * std::pow(static_cast<double>(n), -0.2);
  if (h <= 0.0) {
    h = std::max(1e-9, 1e-9 * std::abs(mean));
    if (warning) {
      *warning =
          "DegenerateSample: all values are identical; density bandwidth "
          "floored at " +
          std::to_string(h);
    }
  }

  constexpr long kGrid = 512;
  Curve pdf;
  pdf.grid.resize(kGrid);
  pdf.values.resize(kGrid);
  const double lo = sorted.front() - 3.0 * h;
  const double hi = sorted.back() + 3.0 * h;
  const double step = (hi - lo) / static_cast<double>(kGrid - 1);
  const double scale = 1.0 / (static_cast<double>(n) * h * std::sqrt(2.0 * M_PI));
  for (long g = 0; g < kGrid; ++g) {
    const double x = lo + step * static_cast<double>(g);
    double acc = 0.0;
    for (long i = 0; i < n; ++i) {
      const double u = (x - values(i)) / h;
      acc += std::exp(-0.5 * u * u);
    }
    pdf.grid(g) = x;
    pdf.values(g) = scale * acc;
  }
  return pdf;
}

Curve empirical_cdf(const Eigen::VectorXd& values, const Eigen::VectorXd& grid) {
  const long n = values.size();
  require(n >= 1, ErrorKind::InsufficientData,
          "need at least one value for an empirical distribution");
  require(values.allFinite(), ErrorKind::MalformedProblem,
          "values contain non-finite entries");
  std::vector<double> sorted(values.data(), values.data() + n);
  std::sort(sorted.begin(), sorted.end());

  Curve cdf;
  cdf.grid = grid;
  cdf.values.resize(grid.size());
  for (long g = 0; g < grid.size(); ++g) {
    const auto it = std::upper_bound(sorted.begin(), sorted.end(), grid(g));
    cdf.values(g) =
        static_cast<double>(it - sorted.begin()) / static_cast<double>(n);
  }
  return cdf;
}

UqReport make_report(const Eigen::VectorXd& values, double wall_seconds) {
  UqReport report;
  const Stats s = empirical_stats(values);
  report.mean = s.mean;
  report.stddev = s.stddev;
  report.n = values.size();
  std::string warning;
  report.pdf = kde_pdf(values, &warning);
  if (!warning.empty()) report.warnings.push_back(warning);
  report.cdf = empirical_cdf(values, report.pdf.grid);
  report.wall_seconds = wall_seconds;
  return report;
}

CompareMetrics compare_reports(const UqReport& baseline,
                               const UqReport& candidate) {
  require(baseline.mean != 0.0, ErrorKind::ZeroBaseline,
          "baseline mean is zero; relative error is undefined");
  require(baseline.stddev != 0.0, ErrorKind::ZeroBaseline,
          "baseline standard deviation is zero; relative error is undefined");

  CompareMetrics m;
  m.mean_pct =
      100.0 * std::abs(candidate.mean - baseline.mean) / std::abs(baseline.mean);
  m.std_pct = 100.0 * std::abs(candidate.stddev - baseline.stddev) /
              baseline.stddev;

  double gap = 0.0;
  for (long g = 0; g < baseline.cdf.grid.size(); ++g) {
    const double x = baseline.cdf.grid(g);
    gap = std::max(gap, std::abs(baseline.cdf.values(g) -
                                 interpolate_cdf(candidate.cdf, x)));
  }
  for (long g = 0; g < candidate.cdf.grid.size(); ++g) {
    const double x = candidate.cdf.grid(g);
    gap = std::max(gap, std::abs(candidate.cdf.values(g) -
                                 interpolate_cdf(baseline.cdf, x)));
  }
  m.cdf_gap = gap;
  return m;
}

}  // namespace duq::pipeline
