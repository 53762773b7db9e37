// Systems built in code for unit tests. five_bus() is the same network that
// ships as data/five_bus.json; test_io cross-checks the two stay in sync.
#ifndef DUQ_TESTS_FIXTURES_HPP
#define DUQ_TESTS_FIXTURES_HPP

#include <vector>

#include "duq/gas.hpp"
#include "duq/grid.hpp"

namespace fixtures {

// Two gas nodes joined by one pipeline, a single well, demand at the far
// end. With demand 8 and W = 2 the only feasible pressures are (5, 3).
inline duq::gas::GasSystem toy_gas(double demand = 8.0) {
  duq::gas::GasSystem g;
  g.nodes = {{1, 3.0, 5.0}, {2, 3.0, 5.0}};
  g.wells = {{1, 1, 1.0, 0.0, 100.0}};
  g.pipelines = {{1, 1, 2, 2.0, 50.0}};
  g.loads = {{1, 2, {demand}}};
  return g;
}

// One bus, one linear-cost generator, one load; optional wind farm.
inline duq::grid::PowerSystem single_bus(bool with_wind, double load = 100.0) {
  duq::grid::PowerSystem s;
  s.buses = {1};
  s.slack_bus = 1;
  duq::grid::Generator g;
  g.id = 1;
  g.bus = 1;
  g.cost = {{10.0, 200.0}};
  g.p_min = 0.0;
  g.p_max = 200.0;
  g.ramp_up = g.ramp_down = g.ramp_startup = g.ramp_shutdown = 200.0;
  g.on = {1};
  g.on_initial = 1;
  s.generators = {g};
  s.loads = {{1, 1, {load}}};
  if (with_wind) s.wind_farms = {{1, 1, 0}};
  return s;
}

inline duq::grid::PowerSystem ring3() {
  duq::grid::PowerSystem s;
  s.buses = {1, 2, 3};
  s.slack_bus = 1;
  s.lines = {{1, 1, 2, 1.0, -100.0, 100.0},
             {2, 2, 3, 1.0, -100.0, 100.0},
             {3, 3, 1, 1.0, -100.0, 100.0}};
  duq::grid::Generator g;
  g.id = 1;
  g.bus = 1;
  g.cost = {{10.0, 300.0}};
  g.p_max = 300.0;
  g.ramp_up = g.ramp_down = g.ramp_startup = g.ramp_shutdown = 300.0;
  g.on = {1};
  g.on_initial = 1;
  s.generators = {g};
  s.loads = {{1, 3, {50.0}}};
  return s;
}

// Five buses, six lines, three generators (one piecewise), two wind farms,
// four periods. Sized so line limits stay slack for wind in [0, 120] per
// farm-hour and total committed capacity comfortably covers peak load.
inline duq::grid::PowerSystem five_bus() {
  using namespace duq::grid;
  PowerSystem s;
  s.buses = {1, 2, 3, 4, 5};
  s.slack_bus = 1;
  s.lines = {{1, 1, 2, 0.06, -400.0, 400.0}, {2, 1, 4, 0.24, -400.0, 400.0},
             {3, 2, 3, 0.18, -400.0, 400.0}, {4, 3, 4, 0.12, -400.0, 400.0},
             {5, 4, 5, 0.24, -400.0, 400.0}, {6, 5, 1, 0.12, -400.0, 400.0}};

  Generator g1;
  g1.id = 1;
  g1.bus = 1;
  g1.cost = {{18.0, 250.0}};
  g1.p_max = 250.0;
  g1.ramp_up = g1.ramp_down = g1.ramp_startup = g1.ramp_shutdown = 250.0;
  g1.on = {1, 1, 1, 1};
  g1.on_initial = 1;

  Generator g2;
  g2.id = 2;
  g2.bus = 3;
  g2.cost = {{32.0, 180.0}};
  g2.p_max = 180.0;
  g2.ramp_up = g2.ramp_down = g2.ramp_startup = g2.ramp_shutdown = 180.0;
  g2.on = {1, 1, 1, 1};
  g2.on_initial = 1;

  Generator g3;
  g3.id = 3;
  g3.bus = 5;
  g3.cost = {{48.0, 60.0}, {70.0, 60.0}};
  g3.p_max = 120.0;
  g3.ramp_up = g3.ramp_down = g3.ramp_startup = g3.ramp_shutdown = 120.0;
  g3.on = {1, 1, 1, 1};
  g3.on_initial = 1;

  s.generators = {g1, g2, g3};
  s.loads = {{1, 2, {120.0, 135.0, 150.0, 140.0}},
             {2, 4, {95.0, 105.0, 115.0, 110.0}},
             {3, 5, {70.0, 80.0, 95.0, 85.0}}};
  s.wind_farms = {{1, 2, 0}, {2, 4, 1}};
  return s;
}

}  // namespace fixtures

#endif
