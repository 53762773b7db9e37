#ifndef DUQ_GAS_HPP
#define DUQ_GAS_HPP

#include <Eigen/Dense>
#include <vector>

#include "duq/grid.hpp"
#include "duq/lp.hpp"

namespace duq::gas {

struct GasWell {
  int id = -1;
  int node = -1;
  double cost = 0.0;  // $ per unit of gas
  double g_min = 0.0;
  double g_max = 0.0;
};

struct GasNode {
  int id = -1;
  double pressure_min = 0.0;
  double pressure_max = 0.0;
};

// Passive pipeline; flow runs from_node -> to_node and the pressure must
// drop along that direction.
struct Pipeline {
  int id = -1;
  int from_node = -1;
  int to_node = -1;
  double weymouth = 0.0;  // W_b
  double capacity = 0.0;  // G_b
};

struct Compressor {
  int id = -1;
  int from_node = -1;
  int to_node = -1;
  double ratio = 1.0;     // alpha_c, suction at most ratio x discharge
  double capacity = 0.0;  // G_c
};

struct GasLoad {
  int id = -1;
  int node = -1;
  std::vector<double> demand;  // per period
};

// Gas drawn by a gas-fired generator: theta units of gas per MW, taken from
// `node`.
struct GenCoupling {
  int generator = -1;  // external generator id
  int node = -1;
  double theta = 0.0;
};

struct GasSystem {
  std::vector<GasNode> nodes;
  std::vector<GasWell> wells;
  std::vector<Pipeline> pipelines;
  std::vector<Compressor> compressors;
  std::vector<GasLoad> loads;
  std::vector<GenCoupling> couplings;

  bool empty() const { return nodes.empty(); }
  int node_index(int external_id) const;
  // Structural rules; `electric` resolves coupling generator ids.
  void validate(const grid::PowerSystem& electric) const;
};

// Linearization state: current pressures per node-period and pipeline flows.
struct GasOperatingPoint {
  Eigen::MatrixXd pressures;  // nodes x periods
  Eigen::MatrixXd flows;      // pipelines x periods
};

// Tangent plane g ~ d_pe * pi_e + d_pa * pi_a + constant.
struct WeymouthTangent {
  double d_pe = 0.0;
  double d_pa = 0.0;
  double constant = 0.0;
};

// W * sqrt(pi_e^2 - pi_a^2). Throws PressureOrderViolation when the head is
// negative (pi_e < pi_a) or pressures are negative.
double weymouth_flow(double weymouth, double pi_e, double pi_a);

// First-order expansion of weymouth_flow around (pi_e, pi_a) with reference
// flow g_hat; exact in value and gradient when g_hat = weymouth_flow(...).
// Throws ZeroFlowSingularity when g_hat <= eps (the gradient blows up).
WeymouthTangent linearize_weymouth(double weymouth, double pi_e, double pi_a,
                                   double g_hat, double eps = 1e-9);

struct SlpConfig {
  int max_iterations = 30;
  double pressure_tol = 1e-6;    // convergence: max pressure move
  double residual_tol = 1e-5;    // Weymouth mismatch allowed at the end
  double trust_fraction = 0.10;  // of each node's pressure range
  double zero_flow_eps = 1e-6;   // below this a pipe is treated as closed
  lp::SolverConfig lp;
};

struct IedSolution {
  lp::LpStatus status = lp::LpStatus::IterationLimit;
  double cost = 0.0;                 // electric + gas production cost
  Eigen::MatrixXd outputs;           // generators x periods
  Eigen::MatrixXd line_flows;        // lines x periods
  Eigen::MatrixXd well_output;       // wells x periods
  Eigen::MatrixXd pressures;         // nodes x periods
  Eigen::MatrixXd pipe_flows;        // pipelines x periods
  Eigen::MatrixXd compressor_flows;  // compressors x periods
  int slp_iterations = 0;
  double weymouth_residual = 0.0;    // max |g - W sqrt(.)| at the end
  std::vector<double> accepted_costs;
};

// Dispatch with the gas network attached: successive linearization of the
// Weymouth equality with a trust region on pressures. An empty gas block
// delegates to solve_sed, so the two agree exactly in that case. Throws
// SlpNonconvergence when the iteration cap is hit with the residual still
// above tolerance.
IedSolution solve_ied(const grid::PowerSystem& electric, const GasSystem& gas,
                      const grid::PtdfMatrix& ptdf, const Eigen::VectorXd& wind,
                      const SlpConfig& config = {});

// Row-wise scenario evaluation mirroring grid::batch_solve.
std::vector<grid::CostSample> batch_solve(const grid::PowerSystem& electric,
                                          const GasSystem& gas,
                                          const grid::PtdfMatrix& ptdf,
                                          const Eigen::MatrixXd& scenarios,
                                          int threads = 0);

}  // namespace duq::gas

#endif
