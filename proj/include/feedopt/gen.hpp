#pragma once

#include <optional>
#include <string>
#include <vector>

#include "feedopt/solution.hpp"

namespace feedopt {

struct AreaSpec {
  enum class Kind { rect, ring } kind = Kind::rect;
  double x0 = 0, y0 = 0, x1 = 0, y1 = 0;       // rect
  double cx = 0, cy = 0, r_inner = 0, r_outer = 0;  // ring
  bool contains(const Point& p) const;
};

struct StationSpec {
  Point pos;
  double first = 0, last = 0, headway = 20;
};

struct FleetSpec {
  int count = 0;
  int capacity = 0;
  double battery_kwh = 0;
  double beta_kwh_per_km = 0;
};

struct EInitSpec {
  enum class Kind { cycle, uniform, fixed } kind = Kind::cycle;
  std::vector<double> percents = {20, 30, 40, 50, 60, 70, 80};
  double lo = 30, hi = 80;  // uniform
  double fixed = 80;
};

struct DemandSpec {
  enum class Kind { uniform, peak } kind = Kind::uniform;
  double center = 0;  // minutes; peak only
  double sigma = 20;
};

struct ScenarioSpec {
  std::string name = "scenario";
  std::uint64_t seed = 1;
  int customers = 10;
  int passengers_per_request = 1;
  double horizon = 300;
  AreaSpec area;
  double mp_sep = 1.0;
  std::optional<AreaSpec> mp_region;  // defaults to the service area
  Point depot;
  std::vector<StationSpec> stations;
  std::vector<Charger> chargers;
  std::vector<FleetSpec> fleet;
  EInitSpec e_init;
  double e_max_share = 0.8, e_min_share = 0.1;
  DemandSpec demand;
  double w_max = 1.5;
  double walk_speed = 0.085, bus_speed = 0.83;
  double buffer = 10, detour = 1.5, service_time = 0.5;
  Weights weights;
};

struct GenerationReport {
  std::vector<int> unreachable_requests;  // no MP within w_max
  int mp_count = 0;
  std::string to_json() const;
};

// Deterministic under (spec, seed); byte-identical instance JSON on repeats.
Instance generate(const ScenarioSpec& spec, GenerationReport* report = nullptr);

// Rule-of-thumb fleet size for roughly 70 % vehicle occupancy at the peak
// timetable slot. A suggestion, never a constraint.
int suggest_fleet_size(const ScenarioSpec& spec);

std::string scenario_to_json(const ScenarioSpec& spec);
ScenarioSpec scenario_from_json(const std::string& text);
ScenarioSpec load_scenario(const std::string& path);

struct Kpis {
  int vehicles_used = 0;
  double service_rate_pct = 0;
  double mean_walk_km = 0;
  double mean_ivt_min = 0;
  double mean_station_wait_min = 0;
  double total_kmt = 0;
  double cus_per_kmt = 0;
  double cus_per_mp = 0;
  double total_charging_min = 0;
  std::string to_json() const;
};

Kpis kpis(const Solution& sol, const SolveContext& ctx);

}  // namespace feedopt
