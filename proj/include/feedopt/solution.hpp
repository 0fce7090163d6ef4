#pragma once

#include <string>
#include <vector>

#include "feedopt/evalsched.hpp"

namespace feedopt {

// Per-vehicle route plus the cached schedule of its padded node sequence.
struct Solution {
  std::vector<std::vector<Visit>> routes;  // indexed by vehicle, interior stops
  std::vector<int> group_vehicle;          // group id -> vehicle, -1 = unserved
  std::vector<int> request_mp_node;        // request -> dummy MP node, -1 = none
  std::vector<RouteEval> sched;            // cached propagate() result per vehicle
  double objective = 0;

  int vehicles_used() const;
  int unserved_requests(const SolveContext& ctx) const;
  std::vector<int> unserved_groups(const SolveContext& ctx) const;
};

// Empty solution: every group in the virtual route, objective = omega * |R|.
Solution empty_solution(const SolveContext& ctx);

// Re-propagates route v and refreshes the cached schedule.
void refresh_route(Solution& sol, int v, const SolveContext& ctx);

// Recomputes all route schedules and the objective from scratch.
// Returns the objective.
double recompute(Solution& sol, const SolveContext& ctx);

// Objective from the cached schedules (same arithmetic as recompute).
double cached_objective(const Solution& sol, const SolveContext& ctx);

// All charging events of the solution, route order within vehicles.
std::vector<ChargeEvent> charge_events(const Solution& sol, const SolveContext& ctx);

// Relabels dummy charger nodes so that, per physical charger, the earliest
// event sits on the highest-index dummy (the reverse-visit convention used
// by the exported models).
void canonicalize_charger_dummies(Solution& sol, const SolveContext& ctx);

std::string solution_to_json(const Solution& sol, const SolveContext& ctx);
Solution solution_from_json(const std::string& text, const SolveContext& ctx);
void save_solution(const Solution& sol, const SolveContext& ctx, const std::string& path);
Solution load_solution(const std::string& path, const SolveContext& ctx);

}  // namespace feedopt
