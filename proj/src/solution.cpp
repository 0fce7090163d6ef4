#include "feedopt/solution.hpp"

#include <algorithm>
#include <stdexcept>

#include <json.hpp>

namespace feedopt {

int Solution::vehicles_used() const {
  int n = 0;
  for (const auto& r : routes) n += !r.empty();
  return n;
}

int Solution::unserved_requests(const SolveContext& ctx) const {
  int n = 0;
  for (std::size_t g = 0; g < ctx.groups.size(); ++g)
    if (group_vehicle[g] < 0) n += static_cast<int>(ctx.groups[g].requests.size());
  // requests that never reached the assignment stage also count
  for (std::size_t r = 0; r < request_mp_node.size(); ++r)
    if (request_mp_node[r] < 0) ++n;
  return n;
}

std::vector<int> Solution::unserved_groups(const SolveContext& ctx) const {
  std::vector<int> out;
  for (std::size_t g = 0; g < ctx.groups.size(); ++g)
    if (group_vehicle[g] < 0) out.push_back(static_cast<int>(g));
  return out;
}

Solution empty_solution(const SolveContext& ctx) {
  Solution sol;
  sol.routes.assign(ctx.inst->vehicles.size(), {});
  sol.group_vehicle.assign(ctx.groups.size(), -1);
  sol.request_mp_node.assign(ctx.inst->requests.size(), -1);
  for (const auto& g : ctx.groups)
    for (int r : g.requests) sol.request_mp_node[r] = g.mp_node;
  recompute(sol, ctx);
  return sol;
}

void refresh_route(Solution& sol, int v, const SolveContext& ctx) {
  if (sol.sched.size() != sol.routes.size()) sol.sched.resize(sol.routes.size());
  sol.sched[v] = propagate(sol.routes[v], v, ctx);
}

static double objective_from_sched(const Solution& sol, const SolveContext& ctx) {
  const auto& w = ctx.inst->weights;
  double z = 0;
  for (std::size_t v = 0; v < sol.routes.size(); ++v) z += sol.sched[v].cost(w);
  for (std::size_t g = 0; g < ctx.groups.size(); ++g)
    if (sol.group_vehicle[g] >= 0) z += w.lambda2 * ctx.groups[g].walk_min;
  z += w.omega * sol.unserved_requests(ctx);
  return z;
}

double recompute(Solution& sol, const SolveContext& ctx) {
  sol.sched.resize(sol.routes.size());
  for (std::size_t v = 0; v < sol.routes.size(); ++v)
    refresh_route(sol, static_cast<int>(v), ctx);
  sol.objective = objective_from_sched(sol, ctx);
  return sol.objective;
}

double cached_objective(const Solution& sol, const SolveContext& ctx) {
  return objective_from_sched(sol, ctx);
}

std::vector<ChargeEvent> charge_events(const Solution& sol, const SolveContext& ctx) {
  std::vector<ChargeEvent> out;
  const auto& g = *ctx.graph;
  for (std::size_t v = 0; v < sol.routes.size(); ++v) {
    const auto& rs = sol.sched[v];
    for (std::size_t i = 1; i + 1 < rs.nodes.size(); ++i) {
      const auto& nd = g.nodes[rs.nodes[i]];
      if (nd.kind != NodeKind::charger) continue;
      const double tau = sol.routes[v][i - 1].tau;
      if (tau <= kTol) continue;
      ChargeEvent ev;
      ev.vehicle = static_cast<int>(v);
      ev.charger = nd.phys;
      ev.node = rs.nodes[i];
      ev.position = static_cast<int>(i);
      ev.start = rs.B[i];
      ev.end = rs.B[i] + tau;
      ev.energy = ctx.inst->chargers[nd.phys].alpha_kwh_per_min * tau;
      out.push_back(ev);
    }
  }
  return out;
}

void canonicalize_charger_dummies(Solution& sol, const SolveContext& ctx) {
  const auto& g = *ctx.graph;
  // collect visits per physical charger: (start, vehicle, interior index)
  struct Ref {
    double start;
    int vehicle;
    int idx;
  };
  std::vector<std::vector<Ref>> per(ctx.inst->chargers.size());
  for (std::size_t v = 0; v < sol.routes.size(); ++v) {
    const auto& rs = sol.sched[v];
    for (std::size_t i = 0; i < sol.routes[v].size(); ++i) {
      const auto& nd = g.nodes[sol.routes[v][i].node];
      if (nd.kind != NodeKind::charger) continue;
      per[nd.phys].push_back({rs.B[i + 1], static_cast<int>(v), static_cast<int>(i)});
    }
  }
  for (std::size_t c = 0; c < per.size(); ++c) {
    auto& refs = per[c];
    std::sort(refs.begin(), refs.end(), [](const Ref& a, const Ref& b) {
      if (a.start != b.start) return a.start < b.start;
      return a.vehicle < b.vehicle;
    });
    const auto& dummies = g.charger_dummies[c];
    // earliest event -> highest dummy index, later events walk downwards
    for (std::size_t k = 0; k < refs.size(); ++k) {
      const int dummy = dummies[dummies.size() - 1 - k];
      sol.routes[refs[k].vehicle][refs[k].idx].node = dummy;
    }
  }
  recompute(sol, ctx);
}

std::string solution_to_json(const Solution& sol, const SolveContext& ctx) {
  using ordered_json = nlohmann::ordered_json;
  const auto& g = *ctx.graph;
  ordered_json j;
  j["format"] = "feedopt-solution";
  j["version"] = 1;
  j["objective"] = sol.objective;
  j["routes"] = ordered_json::array();
  for (std::size_t v = 0; v < sol.routes.size(); ++v) {
    const auto& rs = sol.sched[v];
    ordered_json jr;
    jr["vehicle"] = v;
    jr["stops"] = ordered_json::array();
    for (std::size_t i = 0; i < sol.routes[v].size(); ++i) {
      const auto& vis = sol.routes[v][i];
      const auto& nd = g.nodes[vis.node];
      static const char* names[] = {"depot_start", "depot_end", "mp", "station", "charger"};
      ordered_json js{{"node", vis.node},
                      {"kind", names[static_cast<int>(nd.kind)]},
                      {"layer", nd.layer},
                      {"phys", nd.phys},
                      {"A", rs.A[i + 1]},
                      {"B", rs.B[i + 1]},
                      {"W", rs.W[i + 1]},
                      {"q", rs.q[i + 1]},
                      {"E", rs.E[i + 1]}};
      if (nd.kind == NodeKind::charger) {
        js["tau"] = vis.tau;
        js["min_start"] = vis.min_start;
      }
      jr["stops"].push_back(js);
    }
    j["routes"].push_back(jr);
  }
  j["charging_events"] = ordered_json::array();
  for (const auto& ev : charge_events(sol, ctx)) {
    j["charging_events"].push_back(ordered_json{{"vehicle", ev.vehicle},
                                                {"charger", ev.charger},
                                                {"node", ev.node},
                                                {"position", ev.position},
                                                {"start", ev.start},
                                                {"duration", ev.end - ev.start},
                                                {"energy", ev.energy}});
  }
  j["assignment"] = ordered_json::array();
  for (std::size_t r = 0; r < sol.request_mp_node.size(); ++r) {
    ordered_json ja{{"request", r}};
    const int node = sol.request_mp_node[r];
    if (node < 0) {
      ja["unserved"] = true;
    } else {
      const int gid = ctx.group_of_node[node];
      const int veh = gid >= 0 ? sol.group_vehicle[gid] : -1;
      if (veh < 0) {
        ja["unserved"] = true;
        ja["mp_node"] = node;
      } else {
        ja["mp_node"] = node;
        ja["vehicle"] = veh;
      }
    }
    j["assignment"].push_back(ja);
  }
  return j.dump(2) + "\n";
}

Solution solution_from_json(const std::string& text, const SolveContext& ctx) {
  const auto j = nlohmann::ordered_json::parse(text);
  if (j.at("format").get<std::string>() != "feedopt-solution")
    throw std::runtime_error("not a feedopt solution file");
  Solution sol;
  sol.routes.assign(ctx.inst->vehicles.size(), {});
  sol.group_vehicle.assign(ctx.groups.size(), -1);
  sol.request_mp_node.assign(ctx.inst->requests.size(), -1);
  for (const auto& jr : j.at("routes")) {
    const int v = jr.at("vehicle").get<int>();
    for (const auto& js : jr.at("stops")) {
      Visit vis;
      vis.node = js.at("node").get<int>();
      if (js.contains("tau")) vis.tau = js.at("tau").get<double>();
      if (js.contains("min_start")) vis.min_start = js.at("min_start").get<double>();
      sol.routes[v].push_back(vis);
      const int gid = ctx.group_of_node[vis.node];
      if (gid >= 0 && ctx.graph->nodes[vis.node].kind == NodeKind::meeting_point)
        sol.group_vehicle[gid] = v;
    }
  }
  for (const auto& ja : j.at("assignment")) {
    const std::size_t r = ja.at("request").get<std::size_t>();
    if (ja.contains("mp_node")) sol.request_mp_node[r] = ja.at("mp_node").get<int>();
  }
  recompute(sol, ctx);
  return sol;
}

void save_solution(const Solution& sol, const SolveContext& ctx, const std::string& path) {
  write_file_atomic(path, solution_to_json(sol, ctx));
}

Solution load_solution(const std::string& path, const SolveContext& ctx) {
  return solution_from_json(read_file(path), ctx);
}

}  // namespace feedopt
