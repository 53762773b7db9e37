#include "duq/orthopoly.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <sstream>

#include "duq/error.hpp"
#include "duq/threads.hpp"

namespace duq::orthopoly {

namespace {

void check_moments(const std::vector<double>& moments, std::size_t need,
                   const char* who) {
  require(moments.size() >= need, ErrorKind::MalformedProblem,
          std::string(who) + " needs raw moments through order " +
              std::to_string(need - 1) + ", got " +
              std::to_string(moments.size()) + " values");
  for (double m : moments) {
    require(std::isfinite(m), ErrorKind::MalformedProblem,
            std::string(who) + " given a non-finite moment");
  }
  require(moments[0] > 0.0, ErrorKind::MalformedProblem,
          std::string(who) + " needs a positive zeroth moment");
}

double poly_eval(const std::vector<double>& coeffs, double x) {
  double v = coeffs.back();
  for (std::size_t i = coeffs.size() - 1; i-- > 0;) v = v * x + coeffs[i];
  return v;
}

// E[p^2] under the measure with the given raw moments.
double squared_norm(const std::vector<double>& coeffs,
                    const std::vector<double>& moments, double* gross_out) {
  double net = 0.0;
  double gross = 0.0;
  for (std::size_t i = 0; i < coeffs.size(); ++i) {
    for (std::size_t k = 0; k < coeffs.size(); ++k) {
      const double term = coeffs[i] * coeffs[k] * moments[i + k];
      net += term;
      gross += std::abs(term);
    }
  }
  if (gross_out) *gross_out = gross;
  return net;
}

}  // namespace

std::vector<double> monic_orthogonal_coeffs(const std::vector<double>& moments,
                                            int degree,
                                            double* condition_out) {
  require(degree >= 0, ErrorKind::MalformedProblem,
          "polynomial degree must be nonnegative");
  check_moments(moments, static_cast<std::size_t>(std::max(2 * degree, 1)),
                "monic_orthogonal_coeffs");
  if (condition_out) *condition_out = 1.0;
  if (degree == 0) return {1.0};

  const int l = degree;
  Eigen::MatrixXd a(l, l);
  Eigen::VectorXd b(l);
  for (int r = 0; r < l; ++r) {
    for (int k = 0; k < l; ++k) a(r, k) = moments[k + r];
    b(r) = -moments[l + r];
  }

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(
      a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const double sigma_max = svd.singularValues()(0);
  const double sigma_min = svd.singularValues()(l - 1);
  require(sigma_min > sigma_max * 1e-13, ErrorKind::SingularMomentMatrix,
          "moment matrix for degree " + std::to_string(l) +
              " is rank-deficient; the sample has too few distinct values");
  if (condition_out) *condition_out = sigma_max / sigma_min;

  const Eigen::VectorXd p = svd.solve(b);
  std::vector<double> coeffs(static_cast<std::size_t>(l) + 1);
  for (int k = 0; k < l; ++k) coeffs[k] = p(k);
  coeffs[l] = 1.0;
  return coeffs;
}

UnivariateBasis build_univariate_basis(const std::vector<double>& moments,
                                       int max_degree) {
  require(max_degree >= 0, ErrorKind::MalformedProblem,
          "basis degree must be nonnegative");
  check_moments(moments, static_cast<std::size_t>(2 * max_degree) + 1,
                "build_univariate_basis");
  UnivariateBasis basis;
  basis.moments = moments;
  basis.coeffs.reserve(static_cast<std::size_t>(max_degree) + 1);
  basis.condition.reserve(static_cast<std::size_t>(max_degree) + 1);
  for (int l = 0; l <= max_degree; ++l) {
    double cond = 1.0;
    basis.coeffs.push_back(monic_orthogonal_coeffs(moments, l, &cond));
    basis.condition.push_back(cond);
  }
  return basis;
}

MultiIndexSet build_multi_index_set(int dims, int max_degree, double q,
                                    int max_interaction, long cap) {
  require(dims >= 1, ErrorKind::MalformedProblem,
          "index set needs at least one dimension");
  require(max_degree >= 1, ErrorKind::MalformedProblem,
          "index set needs max_degree >= 1");
  require(q > 0.0 && q <= 1.0, ErrorKind::MalformedProblem,
          "hyperbolic truncation exponent must lie in (0, 1]");
  require(max_interaction >= 1, ErrorKind::MalformedProblem,
          "interaction limit must be at least 1");
  require(cap >= 1, ErrorKind::MalformedProblem,
          "index set cap must be positive");

  MultiIndexSet set;
  set.dims = dims;
  set.max_degree = max_degree;
  set.q = q;
  set.max_interaction = max_interaction;

  const double bound = static_cast<double>(max_degree) + 1e-9;
  auto q_norm = [&](const std::vector<int>& deg) {
    double s = 0.0;
    for (int d : deg) s += std::pow(static_cast<double>(d), q);
    return std::pow(s, 1.0 / q);
  };

  auto push = [&](std::vector<int> alpha) {
    set.indices.push_back(std::move(alpha));
    if (static_cast<long>(set.indices.size()) > cap) {
      fail(ErrorKind::CandidateExplosion,
           "truncated index set exceeds the cap of " + std::to_string(cap) +
               " entries; tighten max_degree, q, or the interaction limit");
    }
  };

  push(std::vector<int>(dims, 0));

  std::vector<int> support;
  std::vector<int> degrees;
  // For each support of size s, assign degrees >= 1 whose total stays
  // within max_degree, then keep those inside the hyperbolic ball.
  auto assign = [&](auto&& self, int pos, int budget) -> void {
    const int s = static_cast<int>(support.size());
    if (pos == s) {
      if (q_norm(degrees) > bound) return;
      std::vector<int> alpha(dims, 0);
      for (int i = 0; i < s; ++i) alpha[support[i]] = degrees[i];
      push(std::move(alpha));
      return;
    }
    const int reserve = s - pos - 1;  // later slots need >= 1 each
    for (int d = 1; d <= budget - reserve; ++d) {
      degrees[pos] = d;
      self(self, pos + 1, budget - d);
    }
  };

  const int max_s = std::min({max_interaction, max_degree, dims});
  for (int s = 1; s <= max_s; ++s) {
    support.assign(s, 0);
    degrees.assign(s, 0);
    std::iota(support.begin(), support.end(), 0);
    while (true) {
      assign(assign, 0, max_degree);
      int i = s - 1;
      while (i >= 0 && support[i] == dims - s + i) --i;
      if (i < 0) break;
      ++support[i];
      for (int j = i + 1; j < s; ++j) support[j] = support[j - 1] + 1;
    }
  }

  std::sort(set.indices.begin(), set.indices.end(),
            [](const std::vector<int>& a, const std::vector<int>& b) {
              const int da = std::accumulate(a.begin(), a.end(), 0);
              const int db = std::accumulate(b.begin(), b.end(), 0);
              if (da != db) return da < db;
              return a > b;
            });

  set.total_degree.reserve(set.indices.size());
  set.q_norm.reserve(set.indices.size());
  set.interactions.reserve(set.indices.size());
  for (const auto& alpha : set.indices) {
    set.total_degree.push_back(
        std::accumulate(alpha.begin(), alpha.end(), 0));
    set.q_norm.push_back(q_norm(alpha));
    set.interactions.push_back(static_cast<int>(
        std::count_if(alpha.begin(), alpha.end(), [](int d) { return d > 0; })));
  }
  return set;
}

namespace {

void check_eval_args(const std::vector<UnivariateBasis>& bases,
                     const MultiIndexSet& set) {
  require(static_cast<int>(bases.size()) == set.dims,
          ErrorKind::DimensionMismatch,
          "index set spans " + std::to_string(set.dims) +
              " dimensions but " + std::to_string(bases.size()) +
              " univariate bases were given");
  for (int j = 0; j < set.dims; ++j) {
    for (const auto& alpha : set.indices) {
      require(alpha[j] <= bases[j].max_degree(), ErrorKind::DimensionMismatch,
              "index set uses degree " + std::to_string(alpha[j]) +
                  " in dimension " + std::to_string(j) +
                  " but that basis stops at degree " +
                  std::to_string(bases[j].max_degree()));
    }
  }
}

}  // namespace

double eval_term(const std::vector<UnivariateBasis>& bases,
                 const std::vector<int>& alpha, const Eigen::VectorXd& xi) {
  double v = 1.0;
  for (std::size_t j = 0; j < alpha.size(); ++j) {
    if (alpha[j] == 0) continue;
    v *= poly_eval(bases[j].coeffs[alpha[j]], xi(static_cast<Eigen::Index>(j)));
  }
  return v;
}

Eigen::VectorXd eval_basis_row(const std::vector<UnivariateBasis>& bases,
                               const MultiIndexSet& set,
                               const Eigen::VectorXd& xi) {
  check_eval_args(bases, set);
  require(xi.size() == set.dims, ErrorKind::DimensionMismatch,
          "point has " + std::to_string(xi.size()) +
              " coordinates but the index set spans " +
              std::to_string(set.dims));
  Eigen::VectorXd row(set.size());
  for (int i = 0; i < set.size(); ++i) {
    row(i) = eval_term(bases, set.indices[i], xi);
  }
  return row;
}

Eigen::MatrixXd eval_design_matrix(const std::vector<UnivariateBasis>& bases,
                                   const MultiIndexSet& set,
                                   const Eigen::MatrixXd& xi_rows,
                                   int threads) {
  check_eval_args(bases, set);
  require(xi_rows.cols() == set.dims, ErrorKind::DimensionMismatch,
          "sample rows have " + std::to_string(xi_rows.cols()) +
              " columns but the index set spans " + std::to_string(set.dims));
  Eigen::MatrixXd design(xi_rows.rows(), set.size());
  parallel_for(xi_rows.rows(), threads, [&](std::int64_t n) {
    const Eigen::VectorXd xi = xi_rows.row(n).transpose();
    for (int i = 0; i < set.size(); ++i) {
      design(n, i) = eval_term(bases, set.indices[i], xi);
    }
  });
  return design;
}

Eigen::VectorXd basis_norms(const std::vector<UnivariateBasis>& bases,
                            const MultiIndexSet& set) {
  check_eval_args(bases, set);
  // Cache E[phi_l^2] per (dimension, degree); each expansion needs raw
  // moments through twice the degree, which the basis already stores.
  std::vector<std::vector<double>> cache(bases.size());
  std::vector<std::vector<double>> cache_gross(bases.size());
  for (std::size_t j = 0; j < bases.size(); ++j) {
    const auto& basis = bases[j];
    cache[j].resize(basis.coeffs.size());
    cache_gross[j].resize(basis.coeffs.size());
    for (std::size_t l = 0; l < basis.coeffs.size(); ++l) {
      cache[j][l] =
          squared_norm(basis.coeffs[l], basis.moments, &cache_gross[j][l]);
    }
  }
  Eigen::VectorXd norms(set.size());
  for (int i = 0; i < set.size(); ++i) {
    double value = 1.0;
    for (int j = 0; j < set.dims; ++j) {
      const int l = set.indices[i][j];
      const double norm = cache[j][l];
      if (norm <= 0.0 || norm <= cache_gross[j][l] * 1e-12) {
        std::ostringstream msg;
        msg << "degree-" << l << " polynomial in dimension " << j
            << " has non-positive squared norm " << norm
            << "; the sample needs more distinct values in that dimension";
        fail(ErrorKind::NonPositiveNorm, msg.str());
      }
      value *= norm;
    }
    norms(i) = value;
  }
  return norms;
}

}  // namespace duq::orthopoly
