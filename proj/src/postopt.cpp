#include "feedopt/postopt.hpp"

#include <algorithm>
#include <cmath>
#include <bit>
#include <functional>
#include <map>
#include <set>

#include "feedopt/bnb.hpp"

namespace feedopt {

namespace {

struct LayerModel {
  int layer = -1;
  std::vector<int> vehicles;      // K_l
  std::vector<int> origins;       // o_l^k node per vehicle
  int station = -1;               // d_l node
  std::vector<int> requests;      // layer requests with candidates
  std::vector<int> mp_nodes;      // G'_l
  std::vector<std::vector<int>> cand;  // per request: indices into mp_nodes
  std::vector<int> var_req;       // flattened y variables
  std::vector<int> var_mp;
  // per (vehicle, mp subset) shortest feasible visit order; -1 = unknown
  std::map<std::pair<int, std::uint64_t>, std::pair<double, std::vector<int>>> path_cache;

  const SolveContext* ctx = nullptr;

  double arc(int from_node, int to_node) const { return ctx->graph->drive_min(from_node, to_node); }
};

// shortest o -> mps -> station order for one vehicle; rides are checked
// against each meeting point's max ride time on the relative clock
std::pair<double, std::vector<int>> best_path(LayerModel& m, int vi, std::uint64_t mask) {
  const auto key = std::make_pair(vi, mask);
  if (auto it = m.path_cache.find(key); it != m.path_cache.end()) return it->second;
  const auto& g = *m.ctx->graph;
  std::vector<int> mps;
  for (std::size_t i = 0; i < m.mp_nodes.size(); ++i)
    if (mask & (1ull << i)) mps.push_back(m.mp_nodes[i]);
  std::pair<double, std::vector<int>> best{kInf, {}};
  if (mps.size() > 7) {  // permutation search guard; larger sets time out anyway
    m.path_cache[key] = best;
    return best;
  }
  std::sort(mps.begin(), mps.end());
  const int origin = m.origins[vi];
  do {
    double t = 0;
    double clock = g.nodes[origin].u;  // relative departure from the origin
    std::vector<double> board(mps.size(), 0);
    int prev = origin;
    bool ok = true;
    for (std::size_t i = 0; i < mps.size() && ok; ++i) {
      if (!g.arc(prev, mps[i])) ok = false;
      const double hop = m.arc(prev, mps[i]);
      t += hop;
      clock += hop;
      board[i] = clock;
      clock += g.nodes[mps[i]].u;
      prev = mps[i];
    }
    if (ok && !g.arc(prev, m.station)) ok = false;
    if (ok) {
      const double hop = m.arc(prev, m.station);
      t += hop;
      clock += hop;  // arrival at the station
      for (std::size_t i = 0; i < mps.size() && ok; ++i) {
        const int gidx = static_cast<int>(std::find(m.mp_nodes.begin(), m.mp_nodes.end(), mps[i]) -
                                          m.mp_nodes.begin());
        (void)gidx;
        const double ride = clock - board[i] - g.nodes[mps[i]].u;
        const double limit = max_ride_time(g.drive_min(mps[i], m.station),
                                           m.ctx->inst->detour_factor);
        if (ride > limit + kTol) ok = false;
      }
      if (ok && t < best.first - 1e-12) best = {t, mps};
    }
  } while (std::next_permutation(mps.begin(), mps.end()));
  m.path_cache[key] = best;
  return best;
}

// minimum total travel partition of the activated MPs over the vehicles;
// every vehicle of the layer must keep at least one stop (flow constraints)
std::pair<double, std::vector<std::vector<int>>> best_partition(
    LayerModel& m, std::uint64_t active_mask, const std::vector<int>& load_of_mp) {
  const int K = static_cast<int>(m.vehicles.size());
  std::map<std::pair<int, std::uint64_t>, double> memo;
  std::map<std::pair<int, std::uint64_t>, std::uint64_t> choice;
  // f(vi, S): cover S with vehicles vi..K-1
  auto subset_load = [&](std::uint64_t s) {
    int load = 0;
    for (std::size_t i = 0; i < m.mp_nodes.size(); ++i)
      if (s & (1ull << i)) load += load_of_mp[i];
    return load;
  };
  std::function<double(int, std::uint64_t)> f = [&](int vi, std::uint64_t S) -> double {
    if (vi == K) return S == 0 ? 0.0 : kInf;
    const auto key = std::make_pair(vi, S);
    if (auto it = memo.find(key); it != memo.end()) return it->second;
    double best = kInf;
    std::uint64_t best_sub = 0;
    // iterate non-empty subsets of S
    for (std::uint64_t sub = S; sub; sub = (sub - 1) & S) {
      if (subset_load(sub) > m.ctx->inst->vehicles[m.vehicles[vi]].capacity) continue;
      const auto [cost, order] = best_path(m, vi, sub);
      if (cost == kInf) continue;
      const double rest = f(vi + 1, S & ~sub);
      if (rest == kInf) continue;
      if (cost + rest < best - 1e-12) {
        best = cost + rest;
        best_sub = sub;
      }
    }
    memo[key] = best;
    choice[key] = best_sub;
    return best;
  };
  const double total = f(0, active_mask);
  std::vector<std::vector<int>> orders(K);
  if (total < kInf) {
    std::uint64_t S = active_mask;
    for (int vi = 0; vi < K; ++vi) {
      const std::uint64_t sub = choice[{vi, S}];
      orders[vi] = best_path(m, vi, sub).second;
      S &= ~sub;
    }
  }
  return {total, orders};
}

}  // namespace

LayerPlan reassign_layer(const Solution& sol, const SolveContext& ctx, int layer,
                         const std::vector<int>& vehicles, double time_limit_s) {
  const auto& g = *ctx.graph;
  LayerModel m;
  m.layer = layer;
  m.ctx = &ctx;
  m.vehicles = vehicles;
  m.station = g.layers[layer].station_node;
  m.mp_nodes = g.layers[layer].mp_nodes;
  LayerPlan plan;
  if (m.mp_nodes.size() > 62 || vehicles.empty()) return plan;

  // origin per vehicle: the node right before its first layer MP
  for (int v : vehicles) {
    const auto& rs = sol.sched[v];
    int first = -1;
    for (std::size_t i = 1; i + 1 < rs.nodes.size(); ++i) {
      if (g.nodes[rs.nodes[i]].kind == NodeKind::meeting_point &&
          g.nodes[rs.nodes[i]].layer == layer) {
        first = static_cast<int>(i);
        break;
      }
    }
    if (first < 0) return plan;
    m.origins.push_back(rs.nodes[first - 1]);
  }

  for (std::size_t r = 0; r < ctx.inst->requests.size(); ++r) {
    if (g.request_layer[r] != layer || g.walk_arcs[r].empty()) continue;
    m.requests.push_back(static_cast<int>(r));
    std::vector<int> cand;
    for (const auto& wa : g.walk_arcs[r]) {
      const auto it = std::find(m.mp_nodes.begin(), m.mp_nodes.end(), wa.node);
      if (it != m.mp_nodes.end())
        cand.push_back(static_cast<int>(it - m.mp_nodes.begin()));
    }
    m.cand.push_back(std::move(cand));
  }
  if (m.requests.empty()) return plan;

  for (std::size_t ri = 0; ri < m.requests.size(); ++ri)
    for (int c : m.cand[ri]) {
      m.var_req.push_back(static_cast<int>(ri));
      m.var_mp.push_back(c);
    }
  const int nv = static_cast<int>(m.var_req.size());
  const double omega = ctx.inst->weights.omega;

  auto decode = [&](const std::vector<std::int8_t>& fix, std::vector<int>& req_mp,
                    std::vector<int>& load_of_mp, std::uint64_t& mask) {
    req_mp.assign(m.requests.size(), -1);
    load_of_mp.assign(m.mp_nodes.size(), 0);
    mask = 0;
    for (int i = 0; i < nv; ++i) {
      if (fix[i] != 1) continue;
      if (req_mp[m.var_req[i]] >= 0) return false;  // double assignment
      req_mp[m.var_req[i]] = m.var_mp[i];
    }
    for (std::size_t ri = 0; ri < m.requests.size(); ++ri) {
      if (req_mp[ri] < 0) continue;
      load_of_mp[req_mp[ri]] += ctx.inst->requests[m.requests[ri]].passengers;
      mask |= 1ull << req_mp[ri];
    }
    return true;
  };

  BnbProblem p;
  p.num_vars = nv;
  p.time_limit_s = time_limit_s;
  p.bound = [&](const std::vector<std::int8_t>& fix) {
    std::vector<int> req_mp, load_of_mp;
    std::uint64_t mask;
    if (!decode(fix, req_mp, load_of_mp, mask)) return kInf;
    double lb = 0;
    // requests with every candidate ruled out pay the penalty
    for (std::size_t ri = 0; ri < m.requests.size(); ++ri) {
      if (req_mp[ri] >= 0) continue;
      bool possible = false;
      for (int i = 0; i < nv; ++i)
        if (m.var_req[i] == static_cast<int>(ri) && fix[i] != 0) possible = true;
      if (!possible) lb += omega;
    }
    // each activated MP needs at least its cheapest incoming arc
    for (std::size_t c = 0; c < m.mp_nodes.size(); ++c) {
      if (!(mask & (1ull << c))) continue;
      double in = kInf;
      for (int o : m.origins)
        if (g.arc(o, m.mp_nodes[c])) in = std::min(in, m.arc(o, m.mp_nodes[c]));
      for (std::size_t c2 = 0; c2 < m.mp_nodes.size(); ++c2)
        if (c2 != c && g.arc(m.mp_nodes[c2], m.mp_nodes[c]))
          in = std::min(in, m.arc(m.mp_nodes[c2], m.mp_nodes[c]));
      if (in == kInf) return kInf;
      lb += in;
    }
    int total_load = 0, total_cap = 0;
    for (std::size_t c = 0; c < m.mp_nodes.size(); ++c) total_load += load_of_mp[c];
    for (int v : m.vehicles) total_cap += ctx.inst->vehicles[v].capacity;
    if (total_load > total_cap) return kInf;
    return lb;
  };
  p.evaluate = [&](const std::vector<std::int8_t>& fix) {
    std::vector<int> req_mp, load_of_mp;
    std::uint64_t mask;
    if (!decode(fix, req_mp, load_of_mp, mask)) return kInf;
    int unserved = 0;
    for (int v : req_mp) unserved += (v < 0);
    // the flow constraints force every vehicle of the layer to keep a stop
    if (std::popcount(mask) < static_cast<int>(m.vehicles.size())) return kInf;
    const auto [t, orders] = best_partition(m, mask, load_of_mp);
    if (t == kInf) return kInf;
    return t + omega * unserved;
  };
  const BnbResult res = bnb_solve(p);
  if (!res.feasible) return plan;

  std::vector<int> req_mp, load_of_mp;
  std::uint64_t mask;
  decode(res.solution, req_mp, load_of_mp, mask);
  const auto [t, orders] = best_partition(m, mask, load_of_mp);
  plan.found = true;
  plan.routing_time = t;
  plan.unserved = 0;
  plan.request_mp.assign(m.requests.size(), -1);
  for (std::size_t ri = 0; ri < m.requests.size(); ++ri) {
    if (req_mp[ri] >= 0)
      plan.request_mp[ri] = m.mp_nodes[req_mp[ri]];
    else
      ++plan.unserved;
  }
  plan.vehicle_mps = orders;
  return plan;
}

namespace {

// rebuilds groups/context/solution after the request->MP map changed;
// group-vehicle links are re-derived from the route sequences
struct Rebuilt {
  Assignment assignment;
  SolveContext ctx;
  Solution sol;
};

Rebuilt rebuild(const Instance& inst, const LayeredGraph& graph, const Assignment& a,
                const std::vector<std::vector<Visit>>& routes) {
  Rebuilt out{a, make_context(inst, graph, a), {}};
  out.sol.routes = routes;
  out.sol.group_vehicle.assign(out.ctx.groups.size(), -1);
  out.sol.request_mp_node = a.request_mp_node;
  for (std::size_t v = 0; v < routes.size(); ++v)
    for (const auto& vis : routes[v]) {
      const int gid = out.ctx.group_of_node[vis.node];
      if (gid >= 0 && graph.nodes[vis.node].kind == NodeKind::meeting_point)
        out.sol.group_vehicle[gid] = static_cast<int>(v);
    }
  recompute(out.sol, out.ctx);
  return out;
}

double layer_routing_time(const Solution& sol, const SolveContext& ctx, int layer,
                          const std::vector<int>& vehicles) {
  const auto& g = *ctx.graph;
  double total = 0;
  for (int v : vehicles) {
    const auto& rs = sol.sched[v];
    for (std::size_t i = 1; i + 1 < rs.nodes.size(); ++i) {
      const auto& nd = g.nodes[rs.nodes[i]];
      const bool on_layer = nd.layer == layer &&
                            (nd.kind == NodeKind::meeting_point || nd.kind == NodeKind::station);
      if (on_layer) total += g.drive_min(rs.nodes[i - 1], rs.nodes[i]);
    }
  }
  return total;
}

int layer_unserved(const Solution& sol, const SolveContext& ctx, int layer) {
  int n = 0;
  for (std::size_t g = 0; g < ctx.groups.size(); ++g)
    if (sol.group_vehicle[g] < 0 && ctx.groups[g].layer == layer)
      n += static_cast<int>(ctx.groups[g].requests.size());
  for (std::size_t r = 0; r < sol.request_mp_node.size(); ++r)
    if (sol.request_mp_node[r] < 0 && ctx.graph->request_layer[r] == layer &&
        !ctx.graph->walk_arcs[r].empty())
      ++n;
  return n;
}

}  // namespace

PostoptOutcome post_optimize(const Solution& best, const Assignment& a,
                             const SolveContext& ctx, const PostoptParams& params) {
  PostoptOutcome out{false, a, ctx, best};
  const auto& g = *ctx.graph;
  const auto& inst = *ctx.inst;

  std::set<int> layers;
  for (int gid : best.unserved_groups(ctx)) layers.insert(ctx.groups[gid].layer);
  for (std::size_t r = 0; r < best.request_mp_node.size(); ++r)
    if (best.request_mp_node[r] < 0 && !g.walk_arcs[r].empty())
      layers.insert(g.request_layer[r]);
  if (layers.empty()) return out;

  Assignment cur_a = a;
  SolveContext cur_ctx = ctx;
  Solution cur = best;

  for (int layer : layers) {
    if (layer_unserved(cur, cur_ctx, layer) == 0) continue;
    std::vector<int> vehicles;
    for (std::size_t v = 0; v < cur.routes.size(); ++v) {
      bool on_layer = false;
      for (const auto& vis : cur.routes[v])
        if (g.nodes[vis.node].kind == NodeKind::meeting_point &&
            g.nodes[vis.node].layer == layer)
          on_layer = true;
      if (on_layer) vehicles.push_back(static_cast<int>(v));
    }
    if (vehicles.empty()) continue;

    const LayerPlan plan =
        reassign_layer(cur, cur_ctx, layer, vehicles, params.layer_time_limit_s);
    if (!plan.found) continue;
    const int old_unserved = layer_unserved(cur, cur_ctx, layer);
    const double old_time = layer_routing_time(cur, cur_ctx, layer, vehicles);
    const bool better = plan.unserved < old_unserved ||
                        (plan.unserved == old_unserved &&
                         plan.routing_time < old_time - 1e-9);
    if (!better) continue;

    // stitch: replace each vehicle's layer block with the planned order
    Assignment next_a = cur_a;
    {
      std::size_t ri = 0;
      for (std::size_t r = 0; r < inst.requests.size(); ++r) {
        if (g.request_layer[r] != static_cast<int>(layer) || g.walk_arcs[r].empty()) continue;
        next_a.request_mp_node[r] = plan.request_mp[ri++];
      }
    }
    std::vector<std::vector<Visit>> routes = cur.routes;
    bool stitched = true;
    for (std::size_t vi = 0; vi < vehicles.size(); ++vi) {
      const int v = vehicles[vi];
      auto& seq = routes[v];
      // drop the old layer pickups, keep the station
      std::erase_if(seq, [&](const Visit& vis) {
        const auto& nd = g.nodes[vis.node];
        return nd.kind == NodeKind::meeting_point && nd.layer == layer;
      });
      int st_pos = -1;
      for (std::size_t i = 0; i < seq.size(); ++i)
        if (seq[i].node == g.layers[layer].station_node) st_pos = static_cast<int>(i);
      if (st_pos < 0) {
        stitched = false;
        break;
      }
      std::vector<Visit> block;
      for (int node : plan.vehicle_mps[vi]) block.push_back(Visit{node, 0, 0});
      seq.insert(seq.begin() + st_pos, block.begin(), block.end());
    }
    if (!stitched) continue;

    Rebuilt rb = rebuild(inst, g, next_a, routes);
    // the stitched schedule must satisfy the windows (charging comes later)
    bool ok = true;
    for (int v : vehicles) {
      if (!rb.sol.sched[v].time_feasible()) ok = false;
    }
    if (!ok) continue;
    cur_a = rb.assignment;
    cur_ctx = rb.ctx;
    cur = rb.sol;
  }

  // energy repair: modified vehicles reschedule greedily around the
  // untouched vehicles' occupancy
  std::vector<int> modified;
  for (std::size_t v = 0; v < cur.routes.size(); ++v)
    if (cur.routes[v] != best.routes[v]) modified.push_back(static_cast<int>(v));
  if (modified.empty()) return out;

  OccupancyGrid grid(static_cast<int>(inst.chargers.size()), inst.horizon);
  grid.clear();
  for (const auto& ev : charge_events(cur, cur_ctx)) {
    const bool frozen =
        std::find(modified.begin(), modified.end(), ev.vehicle) == modified.end();
    if (frozen) grid.mark(ev.charger, ev.start, ev.end);
  }
  bool success = true;
  for (int v : modified) {
    RouteEval rs = propagate(cur.routes[v], v, cur_ctx);
    bool fits = rs.feasible();
    if (fits) {
      // existing plan may have drifted onto another vehicle's slot
      for (std::size_t i = 0; i + 1 < rs.nodes.size(); ++i) {
        const auto& nd = g.nodes[rs.nodes[i]];
        if (i >= 1 && nd.kind == NodeKind::charger && cur.routes[v][i - 1].tau > kTol)
          if (!grid.free(nd.phys, rs.B[i], rs.B[i] + cur.routes[v][i - 1].tau)) fits = false;
      }
    }
    if (!fits) {
      strip_chargers(cur.routes[v], cur_ctx);
      RouteEval bare = propagate(cur.routes[v], v, cur_ctx);
      if (!bare.time_feasible()) {
        success = false;
        break;
      }
      if (!bare.energy_ok()) {
        ChargingOutcome oc = schedule_charging(cur.routes[v], v, cur_ctx, nullptr, &grid);
        if (!oc.success) {
          success = false;
          break;
        }
        cur.routes[v] = std::move(oc.seq);
      }
    }
    refresh_route(cur, v, cur_ctx);
    for (std::size_t i = 1; i + 1 < cur.sched[v].nodes.size(); ++i) {
      const auto& nd = g.nodes[cur.sched[v].nodes[i]];
      if (nd.kind == NodeKind::charger && cur.routes[v][i - 1].tau > kTol)
        grid.mark(nd.phys, cur.sched[v].B[i], cur.sched[v].B[i] + cur.routes[v][i - 1].tau);
    }
  }
  if (!success) return out;

  cur.objective = cached_objective(cur, cur_ctx);
  OccupancyGrid check_grid(static_cast<int>(inst.chargers.size()), inst.horizon);
  bool all_feasible = conflict_check(charge_events(cur, cur_ctx), check_grid);
  for (std::size_t v = 0; v < cur.routes.size(); ++v)
    if (!cur.sched[v].feasible()) all_feasible = false;
  if (!all_feasible || cur.objective >= best.objective - 1e-9) return out;

  out.improved = true;
  out.assignment = cur_a;
  out.ctx = cur_ctx;
  out.solution = cur;
  return out;
}

}  // namespace feedopt
