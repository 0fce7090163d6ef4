#include "support/test_support.hpp"

namespace feedopt::test {

ScenarioSpec grid_spec(std::uint64_t seed, int customers, bool peak) {
  ScenarioSpec s;
  s.name = "grid";
  s.seed = seed;
  s.customers = customers;
  s.horizon = 280;
  s.area = {AreaSpec::Kind::rect, -3.5, -3.5, 3.5, 3.5};
  s.mp_sep = 1.0;
  s.depot = {0.0, -4.5};
  s.stations = {{{-4.0, 0.0}, 20, 260, 20}, {{4.0, 0.0}, 30, 250, 20}};
  s.chargers = {{{-4.0, 0.3}, 0.83},
                {{4.0, 0.3}, 0.83},
                {{-0.2, -4.4}, 0.83},
                {{0.2, -4.4}, 0.83}};
  const int pairs = std::max(1, customers / 30);
  s.fleet = {{pairs, 10, 35.775, 0.24}, {pairs, 20, 53.70, 0.29}};
  s.e_init.kind = EInitSpec::Kind::cycle;
  s.e_init.percents = {20, 30, 40, 50, 60, 70, 80};
  if (peak) {
    s.demand.kind = DemandSpec::Kind::peak;
    s.demand.center = 140;
    s.demand.sigma = 25;
  }
  return s;
}

ScenarioSpec tight_spec(std::uint64_t seed, int customers, bool peak) {
  ScenarioSpec s = grid_spec(seed, customers, peak);
  s.name = "tight";
  const int n = std::max(1, customers / 16);
  s.fleet = {{n, 10, 35.775, 0.24}};
  s.e_init.kind = EInitSpec::Kind::cycle;
  s.e_init.percents = {20, 25, 30};
  return s;
}

ScenarioSpec micro_spec(std::uint64_t seed, int customers, int vehicles,
                        double e_init_pct) {
  ScenarioSpec s;
  s.name = "micro";
  s.seed = seed;
  s.customers = customers;
  s.horizon = 120;
  s.area = {AreaSpec::Kind::rect, -1.5, -1.5, 1.5, 1.5};
  s.mp_sep = 1.0;  // 3x3 grid, at most 9 meeting points
  s.depot = {0.0, -2.2};
  s.stations = {{{0.0, 2.2}, 30, 90, 30}};
  s.chargers = {{{0.0, -2.0}, 0.83}, {{0.2, 2.2}, 0.83}};
  s.fleet = {{vehicles, 10, 35.775, 0.24}};
  s.e_init.kind = EInitSpec::Kind::fixed;
  s.e_init.fixed = e_init_pct;
  s.w_max = 1.2;
  return s;
}

ScenarioSpec ring_spec(std::uint64_t seed, int customers, int fleet_pairs) {
  ScenarioSpec s;
  s.name = "ring";
  s.seed = seed;
  s.customers = customers;
  s.horizon = 170;
  s.area = {};
  s.area.kind = AreaSpec::Kind::ring;
  s.area.cx = 0;
  s.area.cy = 0;
  s.area.r_inner = 1.5;
  s.area.r_outer = 5.0;
  s.mp_sep = 0.8;
  s.depot = {0.5, 0.0};
  s.stations = {{{0.0, 0.0}, 30, 130, 20}};
  s.chargers = {{{0.0, 0.1}, 0.83}, {{0.1, 0.1}, 0.83}, {{1.0, 0.0}, 0.83}, {{1.1, 0.0}, 0.83}};
  s.fleet = {{fleet_pairs, 10, 35.775, 0.24}, {fleet_pairs, 20, 53.70, 0.29}};
  s.e_init.kind = EInitSpec::Kind::uniform;
  s.e_init.lo = 30;
  s.e_init.hi = 80;
  s.demand.kind = DemandSpec::Kind::peak;
  s.demand.center = 80;
  s.demand.sigma = 30;
  s.w_max = 1.0;
  s.bus_speed = 0.5;
  return s;
}

void make_world(const ScenarioSpec& spec, World& w, double rho) {
  w.inst = generate(spec);
  w.graph = build_layered_graph(w.inst);
  AssignParams ap;
  ap.rho = {rho};
  w.assignment = assign_layered(w.graph, w.inst, ap);
  w.ctx = make_context(w.inst, w.graph, w.assignment);
}

}  // namespace feedopt::test
