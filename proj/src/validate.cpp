#include "feedopt/validate.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

namespace feedopt {

int ValidationReport::count(const std::string& family) const {
  int n = 0;
  for (const auto& v : violations) n += (v.family == family);
  return n;
}

std::string ValidationReport::to_json() const {
  nlohmann::ordered_json j;
  j["format"] = "feedopt-validation";
  j["feasible"] = ok();
  j["violations"] = nlohmann::ordered_json::array();
  for (const auto& v : violations)
    j["violations"].push_back({{"family", v.family}, {"detail", v.detail}});
  return j.dump(2) + "\n";
}

namespace {

struct Checker {
  const Solution& sol;
  const SolveContext& ctx;
  ValidationReport rep;

  void add(const std::string& family, const std::string& detail) {
    rep.violations.push_back({family, detail});
  }
};

}  // namespace

ValidationReport validate_solution(const Solution& sol, const SolveContext& ctx) {
  Checker ck{sol, ctx, {}};
  const auto& g = *ctx.graph;
  const auto& inst = *ctx.inst;

  // assignment uniqueness and walk limits
  std::vector<int> group_routes(ctx.groups.size(), 0);
  for (std::size_t v = 0; v < sol.routes.size(); ++v) {
    for (const auto& vis : sol.routes[v]) {
      const int gid = vis.node < static_cast<int>(ctx.group_of_node.size())
                          ? ctx.group_of_node[vis.node]
                          : -1;
      if (gid >= 0 && g.nodes[vis.node].kind == NodeKind::meeting_point) {
        ++group_routes[gid];
        if (sol.group_vehicle[gid] != static_cast<int>(v))
          ck.add("assignment_unique", "group " + std::to_string(gid) +
                                          " route/vehicle mismatch");
      }
    }
  }
  for (std::size_t gi = 0; gi < ctx.groups.size(); ++gi) {
    const bool served = sol.group_vehicle[gi] >= 0;
    if (served && group_routes[gi] != 1)
      ck.add("assignment_unique",
             "group " + std::to_string(gi) + " appears on " +
                 std::to_string(group_routes[gi]) + " routes");
    if (!served && group_routes[gi] != 0)
      ck.add("assignment_unique", "unserved group " + std::to_string(gi) + " is routed");
  }
  for (std::size_t r = 0; r < sol.request_mp_node.size(); ++r) {
    const int node = sol.request_mp_node[r];
    if (node < 0) continue;
    bool reachable = false;
    for (const auto& wa : g.walk_arcs[r])
      if (wa.node == node && wa.walk_km <= inst.w_max + kTol) reachable = true;
    if (!reachable)
      ck.add("walk_limit", "request " + std::to_string(r) + " assigned beyond w_max");
  }

  // per-route checks
  std::vector<int> dummy_visits(g.nodes.size(), 0);
  std::vector<std::vector<double>> charger_iv(inst.chargers.size());  // start,end pairs
  for (std::size_t v = 0; v < sol.routes.size(); ++v) {
    const auto& route = sol.routes[v];
    const auto& veh = inst.vehicles[v];
    const auto& rs = sol.sched[v];
    const std::string rv = "route " + std::to_string(v);
    const int n = static_cast<int>(rs.nodes.size());
    if (n != static_cast<int>(route.size()) + 2) {
      ck.add("structure", rv + " has a stale schedule");
      continue;
    }
    if (rs.nodes.front() != g.depot_start || rs.nodes.back() != g.depot_end)
      ck.add("flow", rv + " does not start/end at the depot");
    for (int i = 1; i < n; ++i)
      if (!g.arc(rs.nodes[i - 1], rs.nodes[i]))
        ck.add("flow", rv + " uses a non-existing arc " + std::to_string(rs.nodes[i - 1]) +
                           "->" + std::to_string(rs.nodes[i]));
    for (int i = 1; i + 1 < n; ++i) {
      ++dummy_visits[rs.nodes[i]];
      const auto& nd = g.nodes[rs.nodes[i]];
      if (nd.kind == NodeKind::meeting_point && ctx.group_of_node[rs.nodes[i]] < 0)
        ck.add("structure", rv + " visits an unknown meeting point node");
    }

    // pickup and drop-off on the same vehicle, pickup first
    auto pos_of = [&](int node) {
      for (int i = 0; i < n; ++i)
        if (rs.nodes[i] == node) return i;
      return -1;
    };
    for (int i = 1; i + 1 < n; ++i) {
      const int gid = ctx.group_of_node[rs.nodes[i]];
      if (gid < 0 || g.nodes[rs.nodes[i]].kind != NodeKind::meeting_point) continue;
      const int j = pos_of(ctx.groups[gid].station_node);
      if (j < 0 || j < i)
        ck.add("same_vehicle", rv + " group " + std::to_string(gid) +
                                   " has no drop-off after its pickup");
    }

    // load propagation
    int q = 0;
    bool load_bad = false;
    for (int i = 1; i < n; ++i) {
      const auto& nd = g.nodes[rs.nodes[i]];
      if (nd.kind == NodeKind::meeting_point) {
        const int gid = ctx.group_of_node[rs.nodes[i]];
        if (gid >= 0) q += ctx.groups[gid].load;
      } else if (nd.kind == NodeKind::station) {
        for (int k = 1; k < i; ++k) {
          const int gid = ctx.group_of_node[rs.nodes[k]];
          if (gid >= 0 && ctx.groups[gid].station_node == rs.nodes[i])
            q -= ctx.groups[gid].load;
        }
      }
      if (q < 0 || q > veh.capacity) load_bad = true;
    }
    if (q != 0) load_bad = true;
    if (load_bad) ck.add("load", rv + " violates the load propagation or capacity");

    // service start chain, windows, arrivals and waits
    std::vector<double> A(n, 0.0);
    for (int i = 1; i < n; ++i) {
      const auto& prev = g.nodes[rs.nodes[i - 1]];
      const double t = g.drive_min(rs.nodes[i - 1], rs.nodes[i]);
      const double tau_prev = i >= 2 ? route[i - 2].tau : 0.0;
      const double ready = prev.kind == NodeKind::charger
                               ? rs.B[i - 1] + tau_prev + t
                               : rs.B[i - 1] + prev.u + t;
      A[i] = ready;
      if (rs.B[i] < ready - kTol)
        ck.add("time", rv + " position " + std::to_string(i) + " starts before arrival");
      const auto& nd = g.nodes[rs.nodes[i]];
      if (rs.B[i] < nd.e - kTol || rs.B[i] > nd.l + kTol)
        ck.add("window", rv + " position " + std::to_string(i) + " leaves its window");
      if (nd.kind == NodeKind::station) {
        const double w = rs.B[i] - A[i];
        if (w < -kTol) ck.add("wait", rv + " has a negative station wait");
        if (std::abs(w - rs.W[i]) > 1e-6)
          ck.add("wait", rv + " stored wait differs from B - A");
      }
    }

    // ride times
    for (int i = 1; i + 1 < n; ++i) {
      const int gid = ctx.group_of_node[rs.nodes[i]];
      if (gid < 0 || g.nodes[rs.nodes[i]].kind != NodeKind::meeting_point) continue;
      const int j = pos_of(ctx.groups[gid].station_node);
      if (j < 0) continue;
      const double ride = A[j] - rs.B[i] - g.nodes[rs.nodes[i]].u;
      if (ride > ctx.groups[gid].max_ride + kTol)
        ck.add("ride", rv + " group " + std::to_string(gid) + " exceeds its max ride time");
    }

    // energy ledger
    double e = veh.e_init_kwh;
    double charged = 0;
    for (int i = 1; i < n; ++i) {
      const auto& prev = g.nodes[rs.nodes[i - 1]];
      if (prev.kind == NodeKind::charger) {
        const double tau_prev = route[i - 2].tau;
        const double add = inst.chargers[prev.phys].alpha_kwh_per_min * tau_prev;
        e += add;
        charged += add;
        if (e > veh.e_max_kwh + kTol)
          ck.add("energy", rv + " charges past E_max");
      }
      e -= veh.beta_kwh_per_km * g.dist_km(rs.nodes[i - 1], rs.nodes[i]);
      if (e < veh.e_min_kwh - kTol || e > veh.e_max_kwh + kTol)
        ck.add("energy", rv + " leaves [E_min, E_max] at position " + std::to_string(i));
    }
    double km = 0;
    for (int i = 1; i < n; ++i) km += g.dist_km(rs.nodes[i - 1], rs.nodes[i]);
    if (std::abs(e - (veh.e_init_kwh - veh.beta_kwh_per_km * km + charged)) > 1e-6)
      ck.add("energy", rv + " energy ledger mismatch");

    // collect charging intervals
    for (int i = 1; i + 1 < n; ++i) {
      const auto& nd = g.nodes[rs.nodes[i]];
      if (nd.kind != NodeKind::charger) continue;
      const double tau = route[i - 1].tau;
      if (tau <= kTol) continue;
      if (rs.B[i] < -kTol || rs.B[i] + tau > inst.horizon + kTol)
        ck.add("charger_sync", rv + " charging event outside the horizon");
      charger_iv[nd.phys].push_back(rs.B[i]);
      charger_iv[nd.phys].push_back(rs.B[i] + tau);
    }
  }

  // each dummy node visited at most once across the fleet
  for (std::size_t id = 0; id < dummy_visits.size(); ++id) {
    if (dummy_visits[id] <= 1) continue;
    const auto kind = g.nodes[id].kind;
    if (kind == NodeKind::meeting_point)
      ck.add("flow", "meeting point node " + std::to_string(id) + " visited twice");
    if (kind == NodeKind::charger)
      ck.add("charger_sync", "charger dummy " + std::to_string(id) + " visited twice");
  }

  // exact pairwise non-overlap per physical charger
  for (std::size_t c = 0; c < charger_iv.size(); ++c) {
    const auto& iv = charger_iv[c];
    for (std::size_t a = 0; a < iv.size(); a += 2)
      for (std::size_t b = a + 2; b < iv.size(); b += 2) {
        const bool overlap = iv[a] < iv[b + 1] - kTol && iv[b] < iv[a + 1] - kTol;
        if (overlap)
          ck.add("charger_sync", "charger " + std::to_string(c) + " has overlapping events");
      }
  }

  // objective re-derivation
  {
    const auto& w = inst.weights;
    double z = 0;
    for (std::size_t v = 0; v < sol.routes.size(); ++v) {
      const auto& rs = sol.sched[v];
      double travel = 0, charge = 0, wait = 0;
      for (std::size_t i = 1; i < rs.nodes.size(); ++i)
        travel += g.drive_min(rs.nodes[i - 1], rs.nodes[i]);
      for (std::size_t i = 0; i < sol.routes[v].size(); ++i)
        if (g.nodes[sol.routes[v][i].node].kind == NodeKind::charger)
          charge += sol.routes[v][i].tau;
      for (std::size_t i = 1; i + 1 < rs.nodes.size(); ++i)
        if (g.nodes[rs.nodes[i]].kind == NodeKind::station) wait += rs.W[i];
      z += w.lambda1 * (travel + charge) + w.lambda3 * wait;
    }
    for (std::size_t gi = 0; gi < ctx.groups.size(); ++gi)
      if (sol.group_vehicle[gi] >= 0) z += w.lambda2 * ctx.groups[gi].walk_min;
    z += w.omega * sol.unserved_requests(ctx);
    if (std::abs(z - sol.objective) > 1e-6)
      ck.add("objective", "stored objective differs from the recomputed value");
  }
  return ck.rep;
}

}  // namespace feedopt
