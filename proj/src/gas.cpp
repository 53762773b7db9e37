#include "duq/gas.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "duq/error.hpp"
#include "duq/threads.hpp"

namespace duq::gas {

int GasSystem::node_index(int external_id) const {
  for (size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i].id == external_id) return static_cast<int>(i);
  }
  return -1;
}

void GasSystem::validate(const grid::PowerSystem& electric) const {
  if (empty()) {
    require(wells.empty() && pipelines.empty() && compressors.empty() &&
                loads.empty() && couplings.empty(),
            ErrorKind::InvariantViolation,
            "gas elements present but no gas nodes defined");
    return;
  }
  const int T = electric.periods();
  for (size_t i = 0; i < nodes.size(); ++i) {
    for (size_t j = i + 1; j < nodes.size(); ++j) {
      require(nodes[i].id != nodes[j].id, ErrorKind::InvariantViolation,
              "duplicate gas node id " + std::to_string(nodes[i].id));
    }
    require(nodes[i].pressure_min >= 0.0 &&
                nodes[i].pressure_min <= nodes[i].pressure_max,
            ErrorKind::InvariantViolation,
            "gas node " + std::to_string(nodes[i].id) + " has invalid pressure bounds");
  }
  for (const GasWell& w : wells) {
    require(node_index(w.node) >= 0, ErrorKind::InvariantViolation,
            "well " + std::to_string(w.id) + " references a missing gas node");
    require(0.0 <= w.g_min && w.g_min <= w.g_max, ErrorKind::InvariantViolation,
            "well " + std::to_string(w.id) + " has invalid output limits");
  }
  for (const Pipeline& b : pipelines) {
    const std::string tag = "pipeline " + std::to_string(b.id);
    require(node_index(b.from_node) >= 0 && node_index(b.to_node) >= 0,
            ErrorKind::InvariantViolation, tag + " references a missing gas node");
    require(b.from_node != b.to_node, ErrorKind::InvariantViolation,
            tag + " is a self-loop");
    require(b.weymouth > 0.0, ErrorKind::InvariantViolation,
            tag + " needs a positive flow constant");
    require(b.capacity >= 0.0, ErrorKind::InvariantViolation,
            tag + " has negative capacity");
  }
  for (const Compressor& c : compressors) {
    const std::string tag = "compressor " + std::to_string(c.id);
    require(node_index(c.from_node) >= 0 && node_index(c.to_node) >= 0,
            ErrorKind::InvariantViolation, tag + " references a missing gas node");
    require(c.ratio >= 1.0, ErrorKind::InvariantViolation,
            tag + " needs a boost ratio of at least one");
    require(c.capacity >= 0.0, ErrorKind::InvariantViolation,
            tag + " has negative capacity");
  }
  for (const GasLoad& d : loads) {
    require(node_index(d.node) >= 0, ErrorKind::InvariantViolation,
            "gas load " + std::to_string(d.id) + " references a missing gas node");
    require(static_cast<int>(d.demand.size()) == T, ErrorKind::InvariantViolation,
            "gas load " + std::to_string(d.id) + " profile length differs from the horizon");
    for (double v : d.demand) {
      require(v >= 0.0, ErrorKind::InvariantViolation,
              "gas load " + std::to_string(d.id) + " has negative demand");
    }
  }
  for (const GenCoupling& c : couplings) {
    require(node_index(c.node) >= 0, ErrorKind::InvariantViolation,
            "gas coupling references missing gas node " + std::to_string(c.node));
    require(c.theta >= 0.0, ErrorKind::InvariantViolation,
            "gas coupling for generator " + std::to_string(c.generator) +
                " has a negative factor");
    bool found = false;
    for (const grid::Generator& g : electric.generators) found |= g.id == c.generator;
    require(found, ErrorKind::InvariantViolation,
            "gas coupling references missing generator " + std::to_string(c.generator));
  }
}

double weymouth_flow(double weymouth, double pi_e, double pi_a) {
  require(pi_a >= 0.0 && pi_e >= 0.0, ErrorKind::PressureOrderViolation,
          "pressures must be nonnegative");
  require(pi_e >= pi_a, ErrorKind::PressureOrderViolation,
          "sending-end pressure below receiving end");
  return weymouth * std::sqrt(pi_e * pi_e - pi_a * pi_a);
}

WeymouthTangent linearize_weymouth(double weymouth, double pi_e, double pi_a,
                                   double g_hat, double eps) {
  require(pi_e > pi_a && pi_a >= 0.0, ErrorKind::PressureOrderViolation,
          "linearization needs strictly ordered nonnegative pressures");
  require(g_hat > eps, ErrorKind::ZeroFlowSingularity,
          "reference flow too close to zero for a finite gradient");
  const double w2 = weymouth * weymouth;
  WeymouthTangent t;
  t.d_pe = w2 * pi_e / g_hat;
  t.d_pa = -w2 * pi_a / g_hat;
  t.constant = g_hat - w2 * (pi_e * pi_e - pi_a * pi_a) / g_hat;
  return t;
}

namespace {

struct GasLayout {
  int periods = 0;
  std::vector<int> well_col;  // s * T + t
  std::vector<int> node_col;  // a * T + t
  std::vector<int> pipe_col;  // b * T + t
  std::vector<int> comp_col;  // c * T + t
};

GasOperatingPoint initial_point(const GasSystem& gas, int T) {
  const int na = static_cast<int>(gas.nodes.size());
  const int nb = static_cast<int>(gas.pipelines.size());
  Eigen::VectorXd pressures(na);
  for (int a = 0; a < na; ++a) {
    pressures(a) = 0.5 * (gas.nodes[a].pressure_min + gas.nodes[a].pressure_max);
  }
  // Raise sending ends above receiving ends where bounds allow; repeat so
  // chains propagate. Pipes that cannot be ordered start closed.
  for (size_t pass = 0; pass < gas.nodes.size() + 1; ++pass) {
    bool changed = false;
    for (const Pipeline& b : gas.pipelines) {
      const int e = gas.node_index(b.from_node);
      const int a = gas.node_index(b.to_node);
      if (pressures(e) > pressures(a)) continue;
      const double range =
          gas.nodes[e].pressure_max - gas.nodes[e].pressure_min;
      const double target =
          std::min(gas.nodes[e].pressure_max, pressures(a) + 0.01 * std::max(range, 1e-6));
      if (target > pressures(e)) {
        pressures(e) = target;
        changed = true;
      }
    }
    if (!changed) break;
  }
  GasOperatingPoint pt;
  pt.pressures = pressures.replicate(1, T);
  pt.flows = Eigen::MatrixXd::Zero(nb, T);
  for (int b = 0; b < nb; ++b) {
    const int e = gas.node_index(gas.pipelines[b].from_node);
    const int a = gas.node_index(gas.pipelines[b].to_node);
    if (pressures(e) > pressures(a)) {
      pt.flows.row(b).setConstant(
          weymouth_flow(gas.pipelines[b].weymouth, pressures(e), pressures(a)));
    }
  }
  return pt;
}

// Appends gas columns and rows to the electric dispatch LP around the given
// operating point, with pressure moves limited to `trust` of each node range.
GasLayout append_gas_block(lp::LpProblem& p, const grid::PowerSystem& electric,
                           const GasSystem& gas, const grid::SedLayout& elec,
                           const GasOperatingPoint& pt, double trust,
                           double zero_eps) {
  const int T = elec.num_periods;
  GasLayout lay;
  lay.periods = T;

  for (const GasWell& w : gas.wells) {
    for (int t = 0; t < T; ++t)
      lay.well_col.push_back(p.add_column(w.cost, w.g_min, w.g_max));
  }
  const int na = static_cast<int>(gas.nodes.size());
  for (int a = 0; a < na; ++a) {
    const GasNode& nd = gas.nodes[a];
    const double radius = trust * (nd.pressure_max - nd.pressure_min);
    for (int t = 0; t < T; ++t) {
      const double lo = std::max(nd.pressure_min, pt.pressures(a, t) - radius);
      const double hi = std::min(nd.pressure_max, pt.pressures(a, t) + radius);
      lay.node_col.push_back(p.add_column(0.0, lo, hi));
    }
  }
  const int nb = static_cast<int>(gas.pipelines.size());
  for (int b = 0; b < nb; ++b) {
    const Pipeline& pipe = gas.pipelines[b];
    for (int t = 0; t < T; ++t) {
      const bool closed = pt.flows(b, t) <= zero_eps;
      const double cap = closed ? std::min(pipe.capacity, zero_eps) : pipe.capacity;
      lay.pipe_col.push_back(p.add_column(0.0, 0.0, cap));
    }
  }
  for (const Compressor& c : gas.compressors) {
    for (int t = 0; t < T; ++t)
      lay.comp_col.push_back(p.add_column(0.0, 0.0, c.capacity));
  }

  // Flow-pressure relation per pipeline-period: tangent equality when open,
  // a pinched head band when closed (the tangent gradient diverges there).
  for (int b = 0; b < nb; ++b) {
    const Pipeline& pipe = gas.pipelines[b];
    const int e = gas.node_index(pipe.from_node);
    const int a = gas.node_index(pipe.to_node);
    for (int t = 0; t < T; ++t) {
      const int g_col = lay.pipe_col[b * T + t];
      const int e_col = lay.node_col[e * T + t];
      const int a_col = lay.node_col[a * T + t];
      if (pt.flows(b, t) > zero_eps) {
        const WeymouthTangent tan = linearize_weymouth(
            pipe.weymouth, pt.pressures(e, t), pt.pressures(a, t), pt.flows(b, t));
        const int row = p.add_row(lp::Relation::Equal, tan.constant);
        p.add_entry(row, g_col, 1.0);
        p.add_entry(row, e_col, -tan.d_pe);
        p.add_entry(row, a_col, -tan.d_pa);
      } else {
        const double head_scale =
            std::max(pt.pressures(e, t) + pt.pressures(a, t), 1e-9);
        const double delta =
            zero_eps * zero_eps / (pipe.weymouth * pipe.weymouth * head_scale);
        const int lo = p.add_row(lp::Relation::GreaterEqual, 0.0);
        p.add_entry(lo, e_col, 1.0);
        p.add_entry(lo, a_col, -1.0);
        const int hi = p.add_row(lp::Relation::LessEqual, delta);
        p.add_entry(hi, e_col, 1.0);
        p.add_entry(hi, a_col, -1.0);
      }
    }
  }

  for (const Compressor& c : gas.compressors) {
    const int e = gas.node_index(c.from_node);
    const int a = gas.node_index(c.to_node);
    for (int t = 0; t < T; ++t) {
      const int row = p.add_row(lp::Relation::LessEqual, 0.0);
      p.add_entry(row, lay.node_col[e * T + t], 1.0);
      p.add_entry(row, lay.node_col[a * T + t], -c.ratio);
    }
  }

  // Nodal balance: wells + inflows - outflows = demand + gas-for-power.
  for (int a = 0; a < na; ++a) {
    for (int t = 0; t < T; ++t) {
      double demand = 0.0;
      for (const GasLoad& d : gas.loads) {
        if (gas.node_index(d.node) == a) demand += d.demand[t];
      }
      const int row = p.add_row(lp::Relation::Equal, demand);
      for (size_t s = 0; s < gas.wells.size(); ++s) {
        if (gas.node_index(gas.wells[s].node) == a)
          p.add_entry(row, lay.well_col[s * T + t], 1.0);
      }
      for (int b = 0; b < nb; ++b) {
        if (gas.node_index(gas.pipelines[b].to_node) == a)
          p.add_entry(row, lay.pipe_col[b * T + t], 1.0);
        if (gas.node_index(gas.pipelines[b].from_node) == a)
          p.add_entry(row, lay.pipe_col[b * T + t], -1.0);
      }
      for (size_t c = 0; c < gas.compressors.size(); ++c) {
        if (gas.node_index(gas.compressors[c].to_node) == a)
          p.add_entry(row, lay.comp_col[c * T + t], 1.0);
        if (gas.node_index(gas.compressors[c].from_node) == a)
          p.add_entry(row, lay.comp_col[c * T + t], -1.0);
      }
      for (const GenCoupling& cp : gas.couplings) {
        if (gas.node_index(cp.node) != a) continue;
        for (size_t g = 0; g < electric.generators.size(); ++g) {
          if (electric.generators[g].id == cp.generator)
            p.add_entry(row, elec.column(static_cast<int>(g), t), -cp.theta);
        }
      }
    }
  }
  return lay;
}

IedSolution from_dispatch(const grid::DispatchSolution& d) {
  IedSolution out;
  out.status = d.status;
  out.cost = d.cost;
  out.outputs = d.outputs;
  out.line_flows = d.flows;
  if (d.status == lp::LpStatus::Optimal) out.accepted_costs = {d.cost};
  return out;
}

double true_flow_or_penalty(const Pipeline& pipe, double pe, double pa) {
  if (pe >= pa) return weymouth_flow(pipe.weymouth, pe, pa);
  // Disordered pressures: the physical flow would reverse; report the reverse
  // magnitude so the residual exposes the violation.
  return -weymouth_flow(pipe.weymouth, pa, pe);
}

}  // namespace

IedSolution solve_ied(const grid::PowerSystem& electric, const GasSystem& gas,
                      const grid::PtdfMatrix& ptdf, const Eigen::VectorXd& wind,
                      const SlpConfig& config) {
  if (gas.empty()) {
    return from_dispatch(grid::solve_sed(electric, ptdf, wind, config.lp));
  }
  gas.validate(electric);
  const int T = electric.periods();
  const int na = static_cast<int>(gas.nodes.size());
  const int nb = static_cast<int>(gas.pipelines.size());

  GasOperatingPoint pt = initial_point(gas, T);
  double trust = config.trust_fraction;
  double best_cost = std::numeric_limits<double>::infinity();
  bool have_accepted = false;
  lp::LpSolution best_sol;
  GasLayout best_lay;
  grid::SedLayout best_elec;
  std::vector<double> accepted;
  lp::LpStatus last_status = lp::LpStatus::IterationLimit;
  int iterations = 0;

  for (int it = 0; it < config.max_iterations; ++it) {
    ++iterations;
    grid::SedLayout elec;
    lp::LpProblem p = build_sed_lp(electric, ptdf, wind, &elec);
    const GasLayout lay = append_gas_block(p, electric, gas, elec, pt, trust,
                                           config.zero_flow_eps);
    const lp::LpSolution sol = lp::solve(p, config.lp);
    last_status = sol.status;

    if (sol.status != lp::LpStatus::Optimal) {
      // A tight region can exclude every feasible pressure profile; widen
      // before giving up.
      if (sol.status == lp::LpStatus::Infeasible && trust < 1.0) {
        trust = std::min(1.0, 2.0 * trust);
        continue;
      }
      break;
    }

    if (have_accepted && sol.objective > best_cost + 1e-9 * (1.0 + std::abs(best_cost))) {
      trust *= 0.5;
      if (trust < 1e-9) break;
      continue;
    }

    // Accept: move the linearization point to the LP's pressures and make the
    // reference flows Weymouth-consistent there.
    GasOperatingPoint next;
    next.pressures.resize(na, T);
    for (int a = 0; a < na; ++a)
      for (int t = 0; t < T; ++t)
        next.pressures(a, t) = sol.x[lay.node_col[a * T + t]];
    next.flows.resize(nb, T);
    for (int b = 0; b < nb; ++b) {
      const int e = gas.node_index(gas.pipelines[b].from_node);
      const int a = gas.node_index(gas.pipelines[b].to_node);
      for (int t = 0; t < T; ++t) {
        const double pe = next.pressures(e, t);
        const double pa = next.pressures(a, t);
        next.flows(b, t) =
            pe > pa ? weymouth_flow(gas.pipelines[b].weymouth, pe, pa) : 0.0;
      }
    }
    const double move = (next.pressures - pt.pressures).cwiseAbs().maxCoeff();
    best_cost = sol.objective;
    have_accepted = true;
    accepted.push_back(sol.objective);
    best_sol = sol;
    best_lay = lay;
    best_elec = elec;
    pt = next;
    if (move <= config.pressure_tol) break;
  }

  if (!have_accepted) {
    IedSolution out;
    out.status = last_status == lp::LpStatus::Optimal ? lp::LpStatus::IterationLimit
                                                      : last_status;
    out.slp_iterations = iterations;
    return out;
  }

  IedSolution out;
  out.status = lp::LpStatus::Optimal;
  out.cost = best_cost;
  out.slp_iterations = iterations;
  out.accepted_costs = accepted;
  out.outputs.resize(electric.generators.size(), T);
  for (int g = 0; g < static_cast<int>(electric.generators.size()); ++g)
    for (int t = 0; t < T; ++t) out.outputs(g, t) = best_sol.x[best_elec.column(g, t)];
  out.line_flows.resize(electric.lines.size(), T);
  for (int t = 0; t < T; ++t) {
    Eigen::VectorXd inj = Eigen::VectorXd::Zero(electric.buses.size());
    for (const grid::WindFarm& w : electric.wind_farms)
      inj(electric.bus_index(w.bus)) += wind(w.column * T + t);
    for (const grid::Load& d : electric.loads)
      inj(electric.bus_index(d.bus)) -= d.demand[t];
    for (int g = 0; g < static_cast<int>(electric.generators.size()); ++g)
      inj(electric.bus_index(electric.generators[g].bus)) += out.outputs(g, t);
    out.line_flows.col(t) = ptdf.factors * inj;
  }
  out.well_output.resize(gas.wells.size(), T);
  for (size_t s = 0; s < gas.wells.size(); ++s)
    for (int t = 0; t < T; ++t)
      out.well_output(s, t) = best_sol.x[best_lay.well_col[s * T + t]];
  out.pressures.resize(na, T);
  for (int a = 0; a < na; ++a)
    for (int t = 0; t < T; ++t)
      out.pressures(a, t) = best_sol.x[best_lay.node_col[a * T + t]];
  out.pipe_flows.resize(nb, T);
  out.compressor_flows.resize(gas.compressors.size(), T);
  for (size_t c = 0; c < gas.compressors.size(); ++c)
    for (int t = 0; t < T; ++t)
      out.compressor_flows(c, t) = best_sol.x[best_lay.comp_col[c * T + t]];

  double residual = 0.0;
  for (int b = 0; b < nb; ++b) {
    for (int t = 0; t < T; ++t) {
      out.pipe_flows(b, t) = best_sol.x[best_lay.pipe_col[b * T + t]];
      const int e = gas.node_index(gas.pipelines[b].from_node);
      const int a = gas.node_index(gas.pipelines[b].to_node);
      const double truth = true_flow_or_penalty(
          gas.pipelines[b], out.pressures(e, t), out.pressures(a, t));
      residual = std::max(residual, std::abs(out.pipe_flows(b, t) - truth));
    }
  }
  out.weymouth_residual = residual;

  require(residual <= config.residual_tol, ErrorKind::SlpNonconvergence,
          "linearization stalled with flow mismatch " + std::to_string(residual));
  return out;
}

std::vector<grid::CostSample> batch_solve(const grid::PowerSystem& electric,
                                          const GasSystem& gas,
                                          const grid::PtdfMatrix& ptdf,
                                          const Eigen::MatrixXd& scenarios,
                                          int threads) {
  const int T = electric.periods();
  const int W = static_cast<int>(electric.wind_farms.size());
  require(scenarios.cols() == static_cast<Eigen::Index>(W) * T,
          ErrorKind::DimensionMismatch,
          "scenario matrix has " + std::to_string(scenarios.cols()) +
              " columns, expected " + std::to_string(W * T));
  std::vector<grid::CostSample> out(scenarios.rows());
  parallel_for(scenarios.rows(), threads, [&](std::int64_t i) {
    grid::CostSample s;
    try {
      const IedSolution sol = solve_ied(electric, gas, ptdf, scenarios.row(i).transpose());
      s.status = sol.status;
      if (sol.status == lp::LpStatus::Optimal) s.cost = sol.cost;
    } catch (const Error& e) {
      s.error = std::string(to_string(e.kind())) + ": " + e.what();
    } catch (const std::exception& e) {
      s.error = e.what();
    }
    out[i] = s;
  });
  return out;
}

}  // namespace duq::gas
