#ifndef DUQ_GRID_HPP
#define DUQ_GRID_HPP

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "duq/lp.hpp"

namespace duq::grid {

struct Line {
  int id = -1;
  int from_bus = -1;
  int to_bus = -1;
  double reactance = 0.0;   // p.u.
  double limit_low = 0.0;   // MW, lower flow bound (usually negative)
  double limit_high = 0.0;  // MW
};

struct CostSegment {
  double marginal_cost = 0.0;  // $/MWh
  double length = 0.0;         // MW
};

struct Generator {
  int id = -1;
  int bus = -1;
  std::vector<CostSegment> cost;  // convex: marginal costs nondecreasing
  double p_min = 0.0;
  double p_max = 0.0;
  double ramp_up = 0.0;        // MW per period while running
  double ramp_down = 0.0;
  double ramp_startup = 0.0;   // MW allowed in the starting period
  double ramp_shutdown = 0.0;  // MW allowed into the stopping period
  std::vector<int> on;         // commitment per period, values 0/1
  int on_initial = 0;          // commitment before the horizon
  double p_initial = -1.0;     // output before the horizon; <0 means default

  double initial_output() const {
    return p_initial >= 0.0 ? p_initial : p_min * on_initial;
  }
};

struct Load {
  int id = -1;
  int bus = -1;
  std::vector<double> demand;  // MW per period
};

struct WindFarm {
  int id = -1;
  int bus = -1;
  int column = -1;  // block index into scenario vectors
};

// Transmission system with a fixed commitment schedule. Immutable once built;
// every operation below takes it by const reference.
struct PowerSystem {
  std::vector<int> buses;  // external ids; position is the internal index
  int slack_bus = -1;      // external id
  std::vector<Line> lines;
  std::vector<Generator> generators;
  std::vector<Load> loads;
  std::vector<WindFarm> wind_farms;

  int periods() const;
  int bus_index(int external_id) const;  // -1 when absent
  // Throws InvariantViolation describing the first violated structural rule.
  void validate() const;
};

// Injection-shift factors: factors(l, b) is the MW flow induced on line l by
// 1 MW injected at bus b and withdrawn at the slack.
struct PtdfMatrix {
  Eigen::MatrixXd factors;  // lines x buses
  int slack_index = -1;     // internal bus index, column is all zeros
  std::vector<int> bus_ids;
  std::vector<int> line_ids;
};

struct DispatchSolution {
  lp::LpStatus status = lp::LpStatus::IterationLimit;
  double cost = 0.0;        // $, valid only when status is Optimal
  Eigen::MatrixXd outputs;  // generators x periods, MW
  Eigen::MatrixXd flows;    // lines x periods, MW
  long iterations = 0;
};

// Column bookkeeping for LPs produced by build_sed_lp.
struct SedLayout {
  int num_generators = 0;
  int num_periods = 0;
  std::vector<int> output_column;  // g * periods + t  ->  LP column of P_g^t

  int column(int g, int t) const { return output_column[g * num_periods + t]; }
};

PtdfMatrix compute_ptdf(const PowerSystem& system);

// Assembles the dispatch LP for one wind realization: balance equality per
// period, line limits through the shift factors, capacity by bounds scaled
// with the commitment flag, and inter-period ramping. Wind is must-take.
// `wind` is ordered farm-block-major: entry farm.column * T + (t - 1).
lp::LpProblem build_sed_lp(const PowerSystem& system, const PtdfMatrix& ptdf,
                           const Eigen::VectorXd& wind,
                           SedLayout* layout = nullptr);

DispatchSolution solve_sed(const PowerSystem& system, const PtdfMatrix& ptdf,
                           const Eigen::VectorXd& wind,
                           const lp::SolverConfig& config = {});

// One scenario's minimum cost; `error` is nonempty when evaluation threw.
struct CostSample {
  lp::LpStatus status = lp::LpStatus::IterationLimit;
  double cost = std::numeric_limits<double>::quiet_NaN();
  std::string error;
};

// Row i of `scenarios` is one wind realization. Output order always matches
// row order regardless of scheduling; per-row failures are recorded, not
// rethrown, so one bad row cannot abort the batch.
std::vector<CostSample> batch_solve(const PowerSystem& system,
                                    const PtdfMatrix& ptdf,
                                    const Eigen::MatrixXd& scenarios,
                                    int threads = 0);

// Single-threaded reference with identical output, kept for A/B testing.
std::vector<CostSample> batch_solve_serial(const PowerSystem& system,
                                           const PtdfMatrix& ptdf,
                                           const Eigen::MatrixXd& scenarios);

}  // namespace duq::grid

#endif
