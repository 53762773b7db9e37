#include "duq/grid.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <queue>

#include "duq/error.hpp"
#include "duq/threads.hpp"

namespace duq::grid {

int PowerSystem::periods() const {
  if (!loads.empty()) return static_cast<int>(loads.front().demand.size());
  if (!generators.empty()) return static_cast<int>(generators.front().on.size());
  return 0;
}

int PowerSystem::bus_index(int external_id) const {
  for (size_t i = 0; i < buses.size(); ++i) {
    if (buses[i] == external_id) return static_cast<int>(i);
  }
  return -1;
}

void PowerSystem::validate() const {
  require(!buses.empty(), ErrorKind::InvariantViolation, "system has no buses");
  for (size_t i = 0; i < buses.size(); ++i) {
    for (size_t j = i + 1; j < buses.size(); ++j) {
      require(buses[i] != buses[j], ErrorKind::InvariantViolation,
              "duplicate bus id " + std::to_string(buses[i]));
    }
  }
  require(bus_index(slack_bus) >= 0, ErrorKind::InvariantViolation,
          "slack bus " + std::to_string(slack_bus) + " is not in the bus list");
  const int T = periods();
  require(T >= 1, ErrorKind::InvariantViolation, "horizon is empty");

  for (const Line& l : lines) {
    require(bus_index(l.from_bus) >= 0 && bus_index(l.to_bus) >= 0,
            ErrorKind::InvariantViolation,
            "line " + std::to_string(l.id) + " references a missing bus");
    require(l.reactance > 0.0, ErrorKind::InvariantViolation,
            "line " + std::to_string(l.id) + " needs positive reactance");
    require(l.limit_low <= l.limit_high, ErrorKind::InvariantViolation,
            "line " + std::to_string(l.id) + " has crossed flow limits");
  }
  for (const Generator& g : generators) {
    const std::string tag = "generator " + std::to_string(g.id);
    require(bus_index(g.bus) >= 0, ErrorKind::InvariantViolation,
            tag + " references a missing bus");
    require(g.p_min <= g.p_max, ErrorKind::InvariantViolation,
            tag + " has p_min above p_max");
    require(g.ramp_up >= 0.0 && g.ramp_down >= 0.0 && g.ramp_startup >= 0.0 &&
                g.ramp_shutdown >= 0.0,
            ErrorKind::InvariantViolation, tag + " has a negative ramp rate");
    require(static_cast<int>(g.on.size()) == T, ErrorKind::InvariantViolation,
            tag + " commitment schedule length differs from the horizon");
    for (int v : g.on) {
      require(v == 0 || v == 1, ErrorKind::InvariantViolation,
              tag + " commitment flags must be 0 or 1");
    }
    require(g.on_initial == 0 || g.on_initial == 1,
            ErrorKind::InvariantViolation, tag + " initial flag must be 0 or 1");
    require(!g.cost.empty(), ErrorKind::InvariantViolation,
            tag + " has no cost segments");
    double total_len = 0.0;
    for (size_t k = 0; k < g.cost.size(); ++k) {
      require(g.cost[k].length > 0.0, ErrorKind::InvariantViolation,
              tag + " has a nonpositive segment length");
      total_len += g.cost[k].length;
      if (k > 0) {
        require(g.cost[k].marginal_cost >= g.cost[k - 1].marginal_cost,
                ErrorKind::InvariantViolation,
                tag + " marginal costs must be nondecreasing");
      }
    }
    require(g.cost.size() == 1 || total_len >= g.p_max,
            ErrorKind::InvariantViolation,
            tag + " cost segments do not cover the output range");
  }
  for (const Load& d : loads) {
    require(bus_index(d.bus) >= 0, ErrorKind::InvariantViolation,
            "load " + std::to_string(d.id) + " references a missing bus");
    require(static_cast<int>(d.demand.size()) == T,
            ErrorKind::InvariantViolation,
            "load " + std::to_string(d.id) + " profile length differs from the horizon");
  }
  std::vector<int> cols;
  for (const WindFarm& w : wind_farms) {
    require(bus_index(w.bus) >= 0, ErrorKind::InvariantViolation,
            "wind farm " + std::to_string(w.id) + " references a missing bus");
    require(w.column >= 0 &&
                w.column < static_cast<int>(wind_farms.size()),
            ErrorKind::InvariantViolation,
            "wind farm " + std::to_string(w.id) + " column index out of range");
    cols.push_back(w.column);
  }
  std::sort(cols.begin(), cols.end());
  for (size_t i = 0; i + 1 < cols.size(); ++i) {
    require(cols[i] != cols[i + 1], ErrorKind::InvariantViolation,
            "wind farms share scenario column " + std::to_string(cols[i]));
  }
}

PtdfMatrix compute_ptdf(const PowerSystem& system) {
  system.validate();
  const int nb = static_cast<int>(system.buses.size());
  const int nl = static_cast<int>(system.lines.size());
  const int slack = system.bus_index(system.slack_bus);

  // Connectivity sweep over the line graph.
  {
    std::vector<char> seen(nb, 0);
    std::queue<int> frontier;
    frontier.push(slack);
    seen[slack] = 1;
    int reached = 1;
    while (!frontier.empty()) {
      const int b = frontier.front();
      frontier.pop();
      for (const Line& l : system.lines) {
        const int a = system.bus_index(l.from_bus);
        const int c = system.bus_index(l.to_bus);
        const int other = a == b ? c : c == b ? a : -1;
        if (other >= 0 && !seen[other]) {
          seen[other] = 1;
          ++reached;
          frontier.push(other);
        }
      }
    }
    require(reached == nb, ErrorKind::DisconnectedNetwork,
            std::to_string(nb - reached) + " bus(es) unreachable from the slack");
  }

  // Reduced nodal susceptance matrix over non-slack buses.
  std::vector<int> red(nb, -1);  // bus index -> reduced index
  {
    int k = 0;
    for (int b = 0; b < nb; ++b)
      if (b != slack) red[b] = k++;
  }
  const int nr = nb - 1;
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(std::max(nr, 1), std::max(nr, 1));
  for (const Line& l : system.lines) {
    const double b = 1.0 / l.reactance;
    const int a = system.bus_index(l.from_bus);
    const int c = system.bus_index(l.to_bus);
    if (a != slack) B(red[a], red[a]) += b;
    if (c != slack) B(red[c], red[c]) += b;
    if (a != slack && c != slack) {
      B(red[a], red[c]) -= b;
      B(red[c], red[a]) -= b;
    }
  }

  PtdfMatrix out;
  out.factors = Eigen::MatrixXd::Zero(nl, nb);
  out.slack_index = slack;
  out.bus_ids = system.buses;
  for (const Line& l : system.lines) out.line_ids.push_back(l.id);
  if (nr > 0 && nl > 0) {
    Eigen::FullPivLU<Eigen::MatrixXd> lu(B);
    require(lu.isInvertible(), ErrorKind::SingularSusceptanceMatrix,
            "reduced susceptance matrix is numerically singular");
    // Branch-by-angle sensitivity rows, then angles by injection.
    Eigen::MatrixXd bf = Eigen::MatrixXd::Zero(nl, nr);
    for (int li = 0; li < nl; ++li) {
      const Line& l = system.lines[li];
      const double b = 1.0 / l.reactance;
      const int a = system.bus_index(l.from_bus);
      const int c = system.bus_index(l.to_bus);
      if (a != slack) bf(li, red[a]) += b;
      if (c != slack) bf(li, red[c]) -= b;
    }
    const Eigen::MatrixXd theta = lu.inverse();  // angles per unit injection
    const Eigen::MatrixXd k = bf * theta;
    for (int b = 0; b < nb; ++b) {
      if (b == slack) continue;
      out.factors.col(b) = k.col(red[b]);
    }
  }
  return out;
}

namespace {

// Net non-dispatchable injection (wind minus load) per bus for one period.
Eigen::VectorXd fixed_injection(const PowerSystem& sys,
                                const Eigen::VectorXd& wind, int t) {
  const int T = sys.periods();
  Eigen::VectorXd inj = Eigen::VectorXd::Zero(sys.buses.size());
  for (const WindFarm& w : sys.wind_farms) {
    inj(sys.bus_index(w.bus)) += wind(w.column * T + t);
  }
  for (const Load& d : sys.loads) {
    inj(sys.bus_index(d.bus)) -= d.demand[t];
  }
  return inj;
}

}  // namespace

lp::LpProblem build_sed_lp(const PowerSystem& system, const PtdfMatrix& ptdf,
                           const Eigen::VectorXd& wind, SedLayout* layout) {
  system.validate();
  const int T = system.periods();
  const int G = static_cast<int>(system.generators.size());
  const int W = static_cast<int>(system.wind_farms.size());
  require(wind.size() == static_cast<Eigen::Index>(W) * T,
          ErrorKind::DimensionMismatch,
          "wind vector has " + std::to_string(wind.size()) + " entries, expected " +
              std::to_string(W * T));
  for (Eigen::Index i = 0; i < wind.size(); ++i) {
    require(wind(i) >= 0.0, ErrorKind::NegativeWind,
            "wind entry " + std::to_string(i) + " is negative");
  }

  lp::LpProblem p;
  SedLayout lay;
  lay.num_generators = G;
  lay.num_periods = T;
  lay.output_column.assign(static_cast<size_t>(G) * T, -1);

  // Output variable per generator-period; segment splits only for piecewise
  // costs. Capacity limits are plain bounds scaled by the commitment flag.
  for (int g = 0; g < G; ++g) {
    const Generator& gen = system.generators[g];
    const bool split = gen.cost.size() > 1;
    for (int t = 0; t < T; ++t) {
      const double on = gen.on[t];
      const double obj = split ? 0.0 : gen.cost.front().marginal_cost;
      const int col = p.add_column(obj, gen.p_min * on, gen.p_max * on);
      lay.output_column[g * T + t] = col;
      if (split) {
        const int link = p.add_row(lp::Relation::Equal, 0.0);
        p.add_entry(link, col, 1.0);
        for (const CostSegment& seg : gen.cost) {
          const int s = p.add_column(seg.marginal_cost, 0.0, seg.length * on);
          p.add_entry(link, s, -1.0);
        }
      }
    }
  }

  // Power balance per period.
  for (int t = 0; t < T; ++t) {
    double net_load = 0.0;
    for (const Load& d : system.loads) net_load += d.demand[t];
    for (const WindFarm& w : system.wind_farms) net_load -= wind(w.column * T + t);
    const int row = p.add_row(lp::Relation::Equal, net_load);
    for (int g = 0; g < G; ++g) p.add_entry(row, lay.output_column[g * T + t], 1.0);
  }

  // Line limits through shift factors; fixed injections fold into the rhs.
  const int L = static_cast<int>(system.lines.size());
  for (int t = 0; t < T; ++t) {
    const Eigen::VectorXd fixed = fixed_injection(system, wind, t);
    for (int li = 0; li < L; ++li) {
      const double base = ptdf.factors.row(li).dot(fixed);
      const int hi = p.add_row(lp::Relation::LessEqual,
                               system.lines[li].limit_high - base);
      const int lo = p.add_row(lp::Relation::GreaterEqual,
                               system.lines[li].limit_low - base);
      for (int g = 0; g < G; ++g) {
        const double k = ptdf.factors(li, system.bus_index(system.generators[g].bus));
        if (std::abs(k) < 1e-12) continue;
        p.add_entry(hi, lay.output_column[g * T + t], k);
        p.add_entry(lo, lay.output_column[g * T + t], k);
      }
    }
  }

  // Ramping between consecutive periods, commitment transitions included.
  for (int g = 0; g < G; ++g) {
    const Generator& gen = system.generators[g];
    for (int t = 0; t < T; ++t) {
      const int x_now = gen.on[t];
      const int x_prev = t == 0 ? gen.on_initial : gen.on[t - 1];
      if (x_now == 0 && x_prev == 0) continue;
      const double up = gen.ramp_up * x_prev + gen.ramp_startup * (x_now - x_prev) +
                        gen.p_max * (1 - x_now);
      const double down = gen.ramp_down * x_now + gen.ramp_shutdown * (x_prev - x_now) +
                          gen.p_max * (1 - x_prev);
      const double prev_const = t == 0 ? gen.initial_output() : 0.0;
      const int col_now = lay.output_column[g * T + t];

      const int r_up = p.add_row(lp::Relation::LessEqual, up + prev_const);
      p.add_entry(r_up, col_now, 1.0);
      const int r_dn = p.add_row(lp::Relation::GreaterEqual, -down + prev_const);
      p.add_entry(r_dn, col_now, 1.0);
      if (t > 0) {
        const int col_prev = lay.output_column[g * T + t - 1];
        p.add_entry(r_up, col_prev, -1.0);
        p.add_entry(r_dn, col_prev, -1.0);
      }
    }
  }

  if (layout) *layout = lay;
  return p;
}

DispatchSolution solve_sed(const PowerSystem& system, const PtdfMatrix& ptdf,
                           const Eigen::VectorXd& wind,
                           const lp::SolverConfig& config) {
  SedLayout lay;
  const lp::LpProblem p = build_sed_lp(system, ptdf, wind, &lay);
  const lp::LpSolution sol = lp::solve(p, config);

  DispatchSolution out;
  out.status = sol.status;
  out.iterations = sol.iterations;
  const int T = lay.num_periods;
  const int G = lay.num_generators;
  out.outputs = Eigen::MatrixXd::Zero(G, T);
  out.flows = Eigen::MatrixXd::Zero(system.lines.size(), T);
  if (sol.status != lp::LpStatus::Optimal) return out;

  out.cost = sol.objective;
  for (int g = 0; g < G; ++g)
    for (int t = 0; t < T; ++t) out.outputs(g, t) = sol.x[lay.column(g, t)];
  for (int t = 0; t < T; ++t) {
    Eigen::VectorXd inj = fixed_injection(system, wind, t);
    for (int g = 0; g < G; ++g)
      inj(system.bus_index(system.generators[g].bus)) += out.outputs(g, t);
    out.flows.col(t) = ptdf.factors * inj;
  }
  return out;
}

namespace {

CostSample evaluate_row(const PowerSystem& system, const PtdfMatrix& ptdf,
                        const Eigen::VectorXd& wind) {
  CostSample s;
  try {
    const DispatchSolution d = solve_sed(system, ptdf, wind);
    s.status = d.status;
    if (d.status == lp::LpStatus::Optimal) s.cost = d.cost;
  } catch (const Error& e) {
    s.error = std::string(to_string(e.kind())) + ": " + e.what();
  } catch (const std::exception& e) {
    s.error = e.what();
  }
  return s;
}

}  // namespace

std::vector<CostSample> batch_solve(const PowerSystem& system,
                                    const PtdfMatrix& ptdf,
                                    const Eigen::MatrixXd& scenarios,
                                    int threads) {
  const int T = system.periods();
  const int W = static_cast<int>(system.wind_farms.size());
  require(scenarios.cols() == static_cast<Eigen::Index>(W) * T,
          ErrorKind::DimensionMismatch,
          "scenario matrix has " + std::to_string(scenarios.cols()) +
              " columns, expected " + std::to_string(W * T));
  std::vector<CostSample> out(scenarios.rows());
  parallel_for(scenarios.rows(), threads, [&](std::int64_t i) {
    out[i] = evaluate_row(system, ptdf, scenarios.row(i).transpose());
  });
  return out;
}

std::vector<CostSample> batch_solve_serial(const PowerSystem& system,
                                           const PtdfMatrix& ptdf,
                                           const Eigen::MatrixXd& scenarios) {
  const int T = system.periods();
  const int W = static_cast<int>(system.wind_farms.size());
  require(scenarios.cols() == static_cast<Eigen::Index>(W) * T,
          ErrorKind::DimensionMismatch,
          "scenario matrix has " + std::to_string(scenarios.cols()) +
              " columns, expected " + std::to_string(W * T));
  std::vector<CostSample> out(scenarios.rows());
  serial_for(scenarios.rows(), [&](std::int64_t i) {
    out[i] = evaluate_row(system, ptdf, scenarios.row(i).transpose());
  });
  return out;
}

}  // namespace duq::grid
