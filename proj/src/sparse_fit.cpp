#include "duq/sparse_fit.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "duq/error.hpp"
#include "duq/transforms.hpp"

namespace duq::sparse_fit {

void RegressionDesign::validate() const {
  require(psi.rows() >= 2, ErrorKind::MalformedProblem,
          "regression needs at least two training rows");
  require(psi.cols() >= 1, ErrorKind::MalformedProblem,
          "regression needs at least one candidate column");
  require(y.size() == psi.rows(), ErrorKind::DimensionMismatch,
          "design has " + std::to_string(psi.rows()) + " rows but " +
              std::to_string(y.size()) + " responses");
  require(psi.allFinite(), ErrorKind::MalformedProblem,
          "design matrix contains a non-finite value");
  require(y.allFinite(), ErrorKind::MalformedProblem,
          "response vector contains a non-finite value");
  for (Eigen::Index i = 0; i < psi.rows(); ++i) {
    require(std::abs(psi(i, 0) - 1.0) <= 1e-12, ErrorKind::MalformedProblem,
            "column 0 must be the constant basis");
  }
  require(columns.empty() ||
              columns.size() == static_cast<std::size_t>(psi.cols()),
          ErrorKind::DimensionMismatch,
          "column-to-index map does not cover every design column");
}

namespace {

double population_variance(const Eigen::VectorXd& y) {
  const double mean = y.mean();
  return (y.array() - mean).square().sum() / static_cast<double>(y.size());
}

}  // namespace

LooResult loo_error(const Eigen::MatrixXd& active, const Eigen::VectorXd& y) {
  const Eigen::Index n = active.rows();
  const Eigen::Index k = active.cols();
  require(y.size() == n, ErrorKind::DimensionMismatch,
          "active design and response lengths differ");
  require(n > k, ErrorKind::MalformedProblem,
          "leave-one-out needs more rows than active columns");
  require(k >= 1, ErrorKind::MalformedProblem,
          "leave-one-out needs at least one active column");

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(active);
  require(qr.rank() == k, ErrorKind::RankDeficientActiveSet,
          "active set of " + std::to_string(k) +
              " columns is rank deficient");

  LooResult out;
  out.coeffs = qr.solve(y);
  const Eigen::MatrixXd thin_q =
      qr.householderQ() * Eigen::MatrixXd::Identity(n, k);
  out.leverage = thin_q.rowwise().squaredNorm();

  const Eigen::VectorXd residual = y - active * out.coeffs;
  double acc = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double h = out.leverage(i);
    require(h < 1.0 - 1e-12, ErrorKind::LeverageOne,
            "row " + std::to_string(i) +
                " has leverage one; its deleted residual is undefined");
    const double d = residual(i) / (1.0 - h);
    acc += d * d;
  }
  out.raw = acc / static_cast<double>(n);

  const double var = population_variance(y);
  require(var > 0.0, ErrorKind::DegenerateSample,
          "responses are constant; relative errors are undefined");
  out.normalized = out.raw / var;
  return out;
}

SparseExpansion omp_fit(const RegressionDesign& design, long max_terms,
                        double loo_target, double improvement_tol,
                        int patience) {
  design.validate();
  require(improvement_tol >= 0.0 && improvement_tol < 1.0,
          ErrorKind::MalformedProblem,
          "improvement tolerance must lie in [0, 1)");
  require(patience >= 1, ErrorKind::MalformedProblem,
          "patience must be at least 1");
  const Eigen::Index n = design.psi.rows();
  const Eigen::Index k_total = design.psi.cols();
  const long hard_cap = std::min<long>(n - 1, k_total);
  if (max_terms == 0) {
    max_terms = std::clamp<long>(std::min<long>(n / 2, 200), 1, hard_cap);
  } else {
    require(max_terms >= 1, ErrorKind::MalformedProblem,
            "max_terms must be positive");
    require(max_terms <= hard_cap, ErrorKind::MalformedProblem,
            "max_terms " + std::to_string(max_terms) + " exceeds min(N-1, K) = " +
                std::to_string(hard_cap));
  }
  const double var = population_variance(design.y);
  require(var > 0.0, ErrorKind::DegenerateSample,
          "training outputs are constant; nothing to fit");

  SparseExpansion best;
  best.loo = design.y.squaredNorm() / static_cast<double>(n) / var;
  best.rel_error = best.loo;

  std::vector<char> unavailable(k_total, 0);
  std::vector<double> col_norm(k_total);
  for (Eigen::Index k = 0; k < k_total; ++k) {
    col_norm[k] = design.psi.col(k).norm();
    if (col_norm[k] <= 0.0) unavailable[k] = 1;
  }

  std::vector<int> active;
  std::vector<double> loo_history;
  std::vector<double> residual_norms;
  std::vector<std::string> notes;
  Eigen::VectorXd residual = design.y;
  Eigen::MatrixXd a(n, 0);
  int stale = 0;
  double prev_loo = best.loo;

  while (static_cast<long>(active.size()) < max_terms) {
    int pick = -1;
    double best_score = 0.0;
    for (Eigen::Index k = 0; k < k_total; ++k) {
      if (unavailable[k]) continue;
      const double score = std::abs(design.psi.col(k).dot(residual)) / col_norm[k];
      if (score > best_score) {
        best_score = score;
        pick = static_cast<int>(k);
      }
    }
    if (pick < 0) {
      notes.push_back("stopped: no remaining column improves the residual");
      break;
    }

    a.conservativeResize(Eigen::NoChange, a.cols() + 1);
    a.col(a.cols() - 1) = design.psi.col(pick);
    LooResult lr;
    try {
      lr = loo_error(a, design.y);
    } catch (const Error& e) {
      a.conservativeResize(Eigen::NoChange, a.cols() - 1);
      if (e.kind() == ErrorKind::RankDeficientActiveSet) {
        unavailable[pick] = 1;
        notes.push_back("skipped column " + std::to_string(pick) +
                        ": nearly dependent on the active set");
        continue;
      }
      if (e.kind() == ErrorKind::LeverageOne) {
        notes.push_back(
            "stopped: a training row reached leverage one; keeping the best "
            "earlier iteration");
        break;
      }
      throw;
    }

    active.push_back(pick);
    unavailable[pick] = 1;
    residual = design.y - a * lr.coeffs;
    loo_history.push_back(lr.normalized);
    residual_norms.push_back(residual.norm());

    // A term counts as progress only when it beats the previous iteration
    // by the relative margin; plain leave-one-out drifts down a few percent
    // per spurious term, and such drift must neither update the returned
    // model nor keep the search alive.
    const bool significant =
        lr.normalized < prev_loo * (1.0 - improvement_tol);
    prev_loo = lr.normalized;
    if (significant) {
      stale = 0;
      if (lr.normalized < best.loo) {
        best.active = active;
        best.coeffs = lr.coeffs;
        best.loo = lr.normalized;
        best.rel_error =
            residual.squaredNorm() / static_cast<double>(n) / var;
      }
    } else if (++stale >= patience) {
      notes.push_back(
          "stopped: " + std::to_string(patience) +
          " consecutive terms brought no real improvement; keeping the best "
          "earlier iteration");
      break;
    }
    if (lr.normalized <= loo_target) {
      notes.push_back("stopped: reached the leave-one-out target");
      break;
    }
  }

  best.loo_history = std::move(loo_history);
  best.residual_norms = std::move(residual_norms);
  best.notes = std::move(notes);
  if (!design.columns.empty()) {
    best.active_indices.reserve(best.active.size());
    for (int k : best.active) best.active_indices.push_back(design.columns[k]);
  }
  return best;
}

AdaptiveFit adaptive_fit(const Eigen::MatrixXd& xi, const Eigen::VectorXd& y,
                         const AdaptiveConfig& config) {
  require(xi.rows() >= 2, ErrorKind::MalformedProblem,
          "adaptive fit needs at least two training rows");
  require(xi.cols() >= 1, ErrorKind::MalformedProblem,
          "adaptive fit needs at least one input dimension");
  require(y.size() == xi.rows(), ErrorKind::DimensionMismatch,
          "inputs have " + std::to_string(xi.rows()) + " rows but " +
              std::to_string(y.size()) + " outputs");
  require(xi.allFinite() && y.allFinite(), ErrorKind::MalformedProblem,
          "training data contains a non-finite value");
  require(config.min_degree >= 1 && config.min_degree <= config.max_degree &&
              config.max_degree <= 5,
          ErrorKind::MalformedProblem,
          "degree range must satisfy 1 <= min <= max <= 5");

  const int dims = static_cast<int>(xi.cols());
  const auto table = transforms::tabulate_moments(xi, 2 * config.max_degree);

  std::vector<DegreeTrial> trials;
  bool have = false;
  int best_degree = 0;
  std::vector<orthopoly::UnivariateBasis> best_bases;
  orthopoly::MultiIndexSet best_set;
  SparseExpansion best_expansion;

  for (int d = config.min_degree; d <= config.max_degree; ++d) {
    DegreeTrial trial;
    trial.degree = d;
    try {
      for (int j = 0; j < dims; ++j) {
        require(table.distinct[j] >= d + 1, ErrorKind::SingularMomentMatrix,
                "dimension " + std::to_string(j) + " has only " +
                    std::to_string(table.distinct[j]) +
                    " distinct values; degree " + std::to_string(d) +
                    " needs at least " + std::to_string(d + 1));
      }
      std::vector<orthopoly::UnivariateBasis> bases;
      bases.reserve(dims);
      for (int j = 0; j < dims; ++j) {
        std::vector<double> mu(static_cast<std::size_t>(2 * d) + 1);
        for (int k = 0; k <= 2 * d; ++k) mu[k] = table.moments(j, k);
        bases.push_back(orthopoly::build_univariate_basis(mu, d));
      }
      auto set = orthopoly::build_multi_index_set(
          dims, d, config.q, config.max_interaction, config.candidate_cap);
      RegressionDesign design;
      design.psi = orthopoly::eval_design_matrix(bases, set, xi, config.threads);
      design.y = y;
      design.columns = set.indices;
      auto expansion = omp_fit(design, config.max_terms, config.loo_target,
                               config.improvement_tol, config.patience);
      expansion.degree = d;

      trial.ok = true;
      trial.loo = expansion.loo;
      trial.terms = static_cast<int>(expansion.active.size());
      if (!have || expansion.loo < best_expansion.loo) {
        have = true;
        best_degree = d;
        best_bases = std::move(bases);
        best_set = std::move(set);
        best_expansion = std::move(expansion);
      }
    } catch (const Error& e) {
      trial.error = std::string(to_string(e.kind())) + ": " + e.what();
    }
    trials.push_back(trial);
  }

  if (!have) {
    std::ostringstream msg;
    msg << "no polynomial degree could be fitted:";
    for (const auto& t : trials) {
      msg << " [degree " << t.degree << ": " << t.error << "]";
    }
    fail(ErrorKind::AllDegreesFailed, msg.str());
  }

  AdaptiveFit out;
  out.degree = best_degree;
  out.bases = std::move(best_bases);
  out.candidates = std::move(best_set);
  out.expansion = std::move(best_expansion);
  out.trials = std::move(trials);

  orthopoly::MultiIndexSet active_set;
  active_set.dims = dims;
  active_set.max_degree = out.degree;
  active_set.q = config.q;
  active_set.max_interaction = config.max_interaction;
  active_set.indices = out.expansion.active_indices;
  for (const auto& alpha : active_set.indices) {
    active_set.total_degree.push_back(
        std::accumulate(alpha.begin(), alpha.end(), 0));
    active_set.interactions.push_back(static_cast<int>(std::count_if(
        alpha.begin(), alpha.end(), [](int v) { return v > 0; })));
    active_set.q_norm.push_back(0.0);
  }
  out.norms = orthopoly::basis_norms(out.bases, active_set);
  return out;
}

}  // namespace duq::sparse_fit
