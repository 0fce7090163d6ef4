#include "feedopt/dameta.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <set>

namespace feedopt {

namespace {

// Removes a group's pickup from its route; the station visit goes too when
// no other group of that layer stays on the route.
void remove_group(Solution& sol, int gid, const SolveContext& ctx) {
  const int v = sol.group_vehicle[gid];
  if (v < 0) return;
  auto& seq = sol.routes[v];
  const auto& grp = ctx.groups[gid];
  std::erase_if(seq, [&](const Visit& vis) { return vis.node == grp.mp_node; });
  bool station_needed = false;
  for (const auto& vis : seq) {
    const int og = ctx.group_of_node[vis.node];
    if (og >= 0 && og != gid && ctx.groups[og].station_node == grp.station_node)
      station_needed = true;
  }
  if (!station_needed)
    std::erase_if(seq, [&](const Visit& vis) { return vis.node == grp.station_node; });
  sol.group_vehicle[gid] = -1;
}

struct InsertPlan {
  bool found = false;
  int vehicle = -1;
  double delta = kInf;  // time-based route cost change
  std::vector<Visit> seq;
};

// Best time-feasible slot for a group in one route. Arc lookups filter the
// slot grid before any propagation runs.
InsertPlan best_slot_in_route(const Solution& sol, int gid, int v, const SolveContext& ctx) {
  const auto& g = *ctx.graph;
  const auto& grp = ctx.groups[gid];
  InsertPlan best;
  best.vehicle = v;
  const auto& seq = sol.routes[v];
  const double old_cost =
      sol.sched[v].time_feasible() ? sol.sched[v].cost(ctx.inst->weights) : 0.0;
  const int n = static_cast<int>(seq.size());
  auto node_at = [&](int i) {
    if (i < 0) return g.depot_start;
    if (i >= n) return g.depot_end;
    return seq[i].node;
  };
  int station_pos = -1;
  for (int i = 0; i < n; ++i)
    if (seq[i].node == grp.station_node) station_pos = i;

  auto try_candidate = [&](std::vector<Visit>&& cand) {
    RouteEval rs = propagate(cand, v, ctx);
    if (!rs.time_feasible()) return;
    const double delta = rs.cost(ctx.inst->weights) - old_cost;
    if (delta < best.delta - 1e-9) {
      best.found = true;
      best.delta = delta;
      best.seq = std::move(cand);
    }
  };

  if (station_pos >= 0) {
    // pickup anywhere before the existing station visit
    for (int p = 0; p <= station_pos; ++p) {
      if (!g.arc(node_at(p - 1), grp.mp_node)) continue;
      if (!g.arc(grp.mp_node, node_at(p))) continue;
      std::vector<Visit> cand = seq;
      cand.insert(cand.begin() + p, Visit{grp.mp_node, 0, 0});
      try_candidate(std::move(cand));
    }
  } else {
    for (int p = 0; p <= n; ++p) {
      if (!g.arc(node_at(p - 1), grp.mp_node)) continue;
      // station directly after the pickup or later
      for (int q = p; q <= n; ++q) {
        const int after_mp = q == p ? grp.station_node : node_at(p);
        if (q == p) {
          if (!g.arc(grp.mp_node, after_mp)) continue;
        } else {
          if (!g.arc(grp.mp_node, node_at(p))) break;
          if (!g.arc(node_at(q - 1), grp.station_node)) continue;
        }
        if (!g.arc(grp.station_node, node_at(q))) continue;
        std::vector<Visit> cand = seq;
        cand.insert(cand.begin() + q, Visit{grp.station_node, 0, 0});
        cand.insert(cand.begin() + p, Visit{grp.mp_node, 0, 0});
        try_candidate(std::move(cand));
      }
    }
  }
  return best;
}

InsertPlan best_slot(const Solution& sol, int gid, const SolveContext& ctx) {
  InsertPlan best;
  for (std::size_t v = 0; v < sol.routes.size(); ++v) {
    InsertPlan p = best_slot_in_route(sol, gid, static_cast<int>(v), ctx);
    if (p.found && p.delta < best.delta - 1e-9) best = std::move(p);
  }
  return best;
}

// Re-runs charging on every dirty route. Returns false (and leaves the
// caller to discard the candidate) when any route cannot be made feasible.
bool finalize_routes(Solution& sol, const std::set<int>& dirty, const SolveContext& ctx,
                     Rng* rng, const OccupancyGrid* avoid = nullptr) {
  for (int v : dirty) {
    strip_chargers(sol.routes[v], ctx);
    RouteEval rs = propagate(sol.routes[v], v, ctx);
    if (!rs.time_feasible()) return false;
    if (!rs.energy_ok()) {
      ChargingOutcome oc = schedule_charging(sol.routes[v], v, ctx, rng, avoid);
      if (!oc.success) return false;
      sol.routes[v] = std::move(oc.seq);
    }
    refresh_route(sol, v, ctx);
    if (!sol.sched[v].feasible()) return false;
  }
  sol.objective = cached_objective(sol, ctx);
  return true;
}

bool apply_insert(Solution& sol, int gid, const InsertPlan& plan) {
  if (!plan.found) return false;
  sol.routes[plan.vehicle] = plan.seq;
  sol.group_vehicle[gid] = plan.vehicle;
  return true;
}

std::vector<int> served_groups(const Solution& sol) {
  std::vector<int> out;
  for (std::size_t g = 0; g < sol.group_vehicle.size(); ++g)
    if (sol.group_vehicle[g] >= 0) out.push_back(static_cast<int>(g));
  return out;
}

// marginal objective cost of a served group: route cost delta plus its
// walking term (the group is dropped from the problem, not left unserved)
double group_cost(const Solution& sol, int gid, const SolveContext& ctx) {
  Solution tmp = sol;
  const int v = tmp.group_vehicle[gid];
  remove_group(tmp, gid, ctx);
  RouteEval rs = propagate(tmp.routes[v], v, ctx);
  const double newc = rs.time_feasible() ? rs.cost(ctx.inst->weights) : 0.0;
  return sol.sched[v].cost(ctx.inst->weights) - newc +
         ctx.inst->weights.lambda2 * ctx.groups[gid].walk_min;
}

int ranked_pick(std::vector<std::pair<double, int>>& scored, bool descending, double power,
                int n_remove, bool full_list, Rng& rng) {
  if (descending)
    std::sort(scored.begin(), scored.end(), [](auto& a, auto& b) {
      if (a.first != b.first) return a.first > b.first;
      return a.second < b.second;
    });
  else
    std::sort(scored.begin(), scored.end(), [](auto& a, auto& b) {
      if (a.first != b.first) return a.first < b.first;
      return a.second < b.second;
    });
  const int L = full_list ? static_cast<int>(scored.size()) : n_remove;
  int j = std::max(1, static_cast<int>(std::floor(std::pow(rng.uniform(), power) * L)));
  j = std::min(j, static_cast<int>(scored.size()));
  return scored[j - 1].second;
}

// ---- destroy operators ----------------------------------------------------

void removal_random(Solution& sol, int n_remove, const SolveContext& ctx, Rng& rng,
                    std::set<int>& dirty) {
  for (int k = 0; k < n_remove; ++k) {
    std::vector<int> cands = served_groups(sol);
    if (cands.empty()) return;
    const int gid = cands[rng.uniform_int(0, static_cast<int>(cands.size()) - 1)];
    dirty.insert(sol.group_vehicle[gid]);
    remove_group(sol, gid, ctx);
  }
}

void removal_worst(Solution& sol, int n_remove, const SolveContext& ctx, const DaParams& p,
                   Rng& rng, std::set<int>& dirty) {
  for (int k = 0; k < n_remove; ++k) {
    std::vector<int> cands = served_groups(sol);
    if (cands.empty()) return;
    std::vector<std::pair<double, int>> scored;
    for (int gid : cands) scored.push_back({group_cost(sol, gid, ctx), gid});
    const int gid =
        ranked_pick(scored, true, p.p_worst, n_remove, p.rank_over_full_list, rng);
    dirty.insert(sol.group_vehicle[gid]);
    remove_group(sol, gid, ctx);
  }
}

void removal_related(Solution& sol, int n_remove, const SolveContext& ctx, const DaParams& p,
                     Rng& rng, std::set<int>& dirty, int which) {
  std::vector<int> removed;
  {
    std::vector<int> cands = served_groups(sol);
    if (cands.empty()) return;
    const int gid = cands[rng.uniform_int(0, static_cast<int>(cands.size()) - 1)];
    dirty.insert(sol.group_vehicle[gid]);
    remove_group(sol, gid, ctx);
    removed.push_back(gid);
  }
  while (static_cast<int>(removed.size()) < n_remove) {
    std::vector<int> cands = served_groups(sol);
    if (cands.empty()) return;
    const int seed = removed[rng.uniform_int(0, static_cast<int>(removed.size()) - 1)];
    std::vector<std::pair<double, int>> scored;
    for (int gid : cands) {
      const Relatedness r = relatedness(ctx, seed, gid, p);
      const double key = which == 0 ? r.r_dist : which == 1 ? r.r_tw : r.r_shaw;
      scored.push_back({key, gid});
    }
    const double power = which == 0 ? p.p_dist : which == 1 ? p.p_tw : p.p_shaw;
    const int gid = ranked_pick(scored, false, power, n_remove, p.rank_over_full_list, rng);
    dirty.insert(sol.group_vehicle[gid]);
    remove_group(sol, gid, ctx);
    removed.push_back(gid);
  }
}

// ---- repair operators ------------------------------------------------------

void repair_greedy(Solution& sol, const SolveContext& ctx, std::set<int>& dirty) {
  while (true) {
    double best_delta = kInf;
    int best_gid = -1;
    InsertPlan best_plan;
    for (int gid : sol.unserved_groups(ctx)) {
      InsertPlan plan = best_slot(sol, gid, ctx);
      if (plan.found && plan.delta < best_delta - 1e-9) {
        best_delta = plan.delta;
        best_gid = gid;
        best_plan = std::move(plan);
      }
    }
    if (best_gid < 0) return;
    apply_insert(sol, best_gid, best_plan);
    dirty.insert(best_plan.vehicle);
    refresh_route(sol, best_plan.vehicle, ctx);
  }
}

void repair_regret(Solution& sol, const SolveContext& ctx, Rng& rng, std::set<int>& dirty) {
  const int k = rng.uniform_int(2, 3);  // Regret-2 or Regret-3
  while (true) {
    double best_score = -kInf;
    double best_cost = kInf;
    int best_gid = -1;
    InsertPlan best_plan;
    for (int gid : sol.unserved_groups(ctx)) {
      // best slot per route, sorted
      std::vector<double> deltas;
      InsertPlan top;
      for (std::size_t v = 0; v < sol.routes.size(); ++v) {
        InsertPlan plan = best_slot_in_route(sol, gid, static_cast<int>(v), ctx);
        if (!plan.found) continue;
        deltas.push_back(plan.delta);
        if (plan.delta < top.delta - 1e-9 || !top.found) top = std::move(plan);
      }
      if (!top.found) continue;
      std::sort(deltas.begin(), deltas.end());
      double regret = 0;
      for (int i = 1; i < k && i < static_cast<int>(deltas.size()); ++i)
        regret += deltas[i] - deltas[0];
      if (regret > best_score + 1e-9 ||
          (regret > best_score - 1e-9 && top.delta < best_cost - 1e-9)) {
        best_score = regret;
        best_cost = top.delta;
        best_gid = gid;
        best_plan = std::move(top);
      }
    }
    if (best_gid < 0) return;
    apply_insert(sol, best_gid, best_plan);
    dirty.insert(best_plan.vehicle);
    refresh_route(sol, best_plan.vehicle, ctx);
  }
}

// ---- local search operators -------------------------------------------------

Solution op_relocate(const Solution& s, const SolveContext& ctx, const DaParams& p, Rng& rng) {
  std::vector<int> cands = served_groups(s);
  if (cands.empty()) return s;
  Solution cand = s;
  std::set<int> dirty;
  int gid = -1;
  if (rng.uniform_int(0, 1) == 0) {
    gid = cands[rng.uniform_int(0, static_cast<int>(cands.size()) - 1)];
  } else {
    // worst customer of a random non-empty route
    std::vector<int> routes;
    for (std::size_t v = 0; v < s.routes.size(); ++v)
      if (!s.routes[v].empty()) routes.push_back(static_cast<int>(v));
    if (routes.empty()) return s;
    const int v = routes[rng.uniform_int(0, static_cast<int>(routes.size()) - 1)];
    double worst = -kInf;
    for (int c : cands) {
      if (s.group_vehicle[c] != v) continue;
      const double cost = group_cost(s, c, ctx);
      if (cost > worst) {
        worst = cost;
        gid = c;
      }
    }
    if (gid < 0) return s;
  }
  (void)p;
  dirty.insert(cand.group_vehicle[gid]);
  remove_group(cand, gid, ctx);
  refresh_route(cand, *dirty.begin(), ctx);
  InsertPlan plan = best_slot(cand, gid, ctx);
  if (plan.found) {
    apply_insert(cand, gid, plan);
    dirty.insert(plan.vehicle);
  }
  // an unservable customer falls back to the virtual route
  if (!finalize_routes(cand, dirty, ctx, &rng)) return s;
  return cand;
}

Solution op_destroy_repair(const Solution& s, const SolveContext& ctx, const DaParams& p,
                           Rng& rng) {
  const int total_requests = static_cast<int>(ctx.inst->requests.size());
  const int cap =
      std::min(p.n_remove_max,
               static_cast<int>(std::floor(p.remove_share * total_requests)));
  if (cap < 1) return s;
  int n_remove = rng.uniform_int(1, cap);
  Solution cand = s;
  std::set<int> dirty;
  const int removal = rng.uniform_int(0, 4);
  switch (removal) {
    case 0: removal_random(cand, n_remove, ctx, rng, dirty); break;
    case 1: removal_worst(cand, n_remove, ctx, p, rng, dirty); break;
    case 2: removal_related(cand, n_remove, ctx, p, rng, dirty, 0); break;
    case 3: removal_related(cand, n_remove, ctx, p, rng, dirty, 1); break;
    default: removal_related(cand, n_remove, ctx, p, rng, dirty, 2); break;
  }
  for (int v : dirty) refresh_route(cand, v, ctx);
  if (rng.uniform_int(0, 1) == 0)
    repair_greedy(cand, ctx, dirty);
  else
    repair_regret(cand, ctx, rng, dirty);
  if (!finalize_routes(cand, dirty, ctx, &rng)) return s;
  return cand;
}

std::vector<int> zero_load_cuts(const RouteEval& rs) {
  // padded arc (i, i+1) with empty vehicle; excludes the final depot arc
  std::vector<int> cuts;
  for (int i = 0; i + 1 < static_cast<int>(rs.nodes.size()); ++i)
    if (rs.q[i] == 0) cuts.push_back(i);
  return cuts;
}

void reassign_groups_to(Solution& sol, int v, const SolveContext& ctx) {
  for (const auto& vis : sol.routes[v]) {
    const int gid = ctx.group_of_node[vis.node];
    if (gid >= 0 && ctx.graph->nodes[vis.node].kind == NodeKind::meeting_point)
      sol.group_vehicle[gid] = v;
  }
}

Solution op_two_opt_star(const Solution& s, const SolveContext& ctx, const DaParams&,
                         Rng& rng) {
  std::vector<int> routes;
  for (std::size_t v = 0; v < s.routes.size(); ++v)
    if (!s.routes[v].empty()) routes.push_back(static_cast<int>(v));
  if (routes.size() < 2) return s;
  const int a = routes[rng.uniform_int(0, static_cast<int>(routes.size()) - 1)];
  int b = a;
  while (b == a) b = routes[rng.uniform_int(0, static_cast<int>(routes.size()) - 1)];
  const auto cuts_a = zero_load_cuts(s.sched[a]);
  const auto cuts_b = zero_load_cuts(s.sched[b]);
  const double base = s.sched[a].cost(ctx.inst->weights) + s.sched[b].cost(ctx.inst->weights);
  double best_gain = 1e-9;
  std::vector<Visit> best_a, best_b;
  for (int ca : cuts_a) {
    for (int cb : cuts_b) {
      // padded cut i keeps interior visits [0, i-1]; tail starts at interior i
      std::vector<Visit> na(s.routes[a].begin(), s.routes[a].begin() + std::min<std::size_t>(ca, s.routes[a].size()));
      na.insert(na.end(), s.routes[b].begin() + std::min<std::size_t>(cb, s.routes[b].size()), s.routes[b].end());
      std::vector<Visit> nb(s.routes[b].begin(), s.routes[b].begin() + std::min<std::size_t>(cb, s.routes[b].size()));
      nb.insert(nb.end(), s.routes[a].begin() + std::min<std::size_t>(ca, s.routes[a].size()), s.routes[a].end());
      strip_chargers(na, ctx);
      strip_chargers(nb, ctx);
      RouteEval ra = propagate(na, a, ctx);
      if (!ra.time_feasible()) continue;
      RouteEval rb = propagate(nb, b, ctx);
      if (!rb.time_feasible()) continue;
      const double gain = base - ra.cost(ctx.inst->weights) - rb.cost(ctx.inst->weights);
      if (gain > best_gain) {
        best_gain = gain;
        best_a = std::move(na);
        best_b = std::move(nb);
      }
    }
  }
  if (best_a.empty() && best_b.empty()) return s;
  Solution cand = s;
  cand.routes[a] = std::move(best_a);
  cand.routes[b] = std::move(best_b);
  reassign_groups_to(cand, a, ctx);
  reassign_groups_to(cand, b, ctx);
  if (!finalize_routes(cand, {a, b}, ctx, &rng)) return s;
  return cand;
}

Solution op_two_opt(const Solution& s, const SolveContext& ctx, const DaParams&, Rng& rng) {
  std::vector<int> routes;
  for (std::size_t v = 0; v < s.routes.size(); ++v)
    if (s.routes[v].size() >= 2) routes.push_back(static_cast<int>(v));
  if (routes.empty()) return s;
  const int v = routes[rng.uniform_int(0, static_cast<int>(routes.size()) - 1)];
  const int len = rng.uniform_int(2, 4);
  const auto& seq = s.routes[v];
  const int n = static_cast<int>(seq.size());
  if (n < len) return s;
  const double base = s.sched[v].cost(ctx.inst->weights);
  double best_gain = 1e-9;
  std::vector<Visit> best;
  for (int i = 0; i + len <= n; ++i) {
    std::vector<Visit> cand = seq;
    std::reverse(cand.begin() + i, cand.begin() + i + len);
    RouteEval rs = propagate(cand, v, ctx);
    if (!rs.time_feasible()) continue;
    const double gain = base - rs.cost(ctx.inst->weights);
    if (gain > best_gain) {
      best_gain = gain;
      best = std::move(cand);
    }
  }
  if (best.empty()) return s;
  Solution cand = s;
  cand.routes[v] = std::move(best);
  if (!finalize_routes(cand, {v}, ctx, &rng)) return s;
  return cand;
}

Solution op_exchange_segment(const Solution& s, const SolveContext& ctx, const DaParams&,
                             Rng& rng) {
  std::vector<int> routes;
  for (std::size_t v = 0; v < s.routes.size(); ++v)
    if (!s.routes[v].empty()) routes.push_back(static_cast<int>(v));
  if (routes.size() < 2) return s;
  const int a = routes[rng.uniform_int(0, static_cast<int>(routes.size()) - 1)];
  int b = a;
  while (b == a) b = routes[rng.uniform_int(0, static_cast<int>(routes.size()) - 1)];
  auto segments = [&](int v) {
    // interior index ranges between consecutive zero-load cuts
    std::vector<std::pair<int, int>> segs;
    const auto cuts = zero_load_cuts(s.sched[v]);
    for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
      const int lo = cuts[c];          // interior start
      const int hi = cuts[c + 1];      // one past interior end
      if (hi > lo) segs.push_back({lo, hi});
    }
    return segs;
  };
  const auto segs_a = segments(a);
  const auto segs_b = segments(b);
  const double base = s.sched[a].cost(ctx.inst->weights) + s.sched[b].cost(ctx.inst->weights);
  for (const auto& [la, ha] : segs_a) {
    for (const auto& [lb, hb] : segs_b) {
      std::vector<Visit> na(s.routes[a].begin(), s.routes[a].begin() + la);
      na.insert(na.end(), s.routes[b].begin() + lb, s.routes[b].begin() + hb);
      na.insert(na.end(), s.routes[a].begin() + ha, s.routes[a].end());
      std::vector<Visit> nb(s.routes[b].begin(), s.routes[b].begin() + lb);
      nb.insert(nb.end(), s.routes[a].begin() + la, s.routes[a].begin() + ha);
      nb.insert(nb.end(), s.routes[b].begin() + hb, s.routes[b].end());
      strip_chargers(na, ctx);
      strip_chargers(nb, ctx);
      RouteEval ra = propagate(na, a, ctx);
      if (!ra.time_feasible()) continue;
      RouteEval rb = propagate(nb, b, ctx);
      if (!rb.time_feasible()) continue;
      const double gain = base - ra.cost(ctx.inst->weights) - rb.cost(ctx.inst->weights);
      if (gain <= 1e-9) continue;
      Solution cand = s;
      cand.routes[a] = std::move(na);
      cand.routes[b] = std::move(nb);
      reassign_groups_to(cand, a, ctx);
      reassign_groups_to(cand, b, ctx);
      if (finalize_routes(cand, {a, b}, ctx, &rng)) return cand;
    }
  }
  return s;
}

Solution op_exchange_customer(const Solution& s, const SolveContext& ctx, const DaParams&,
                              Rng& rng) {
  std::vector<int> routes;
  for (std::size_t v = 0; v < s.routes.size(); ++v)
    if (!s.routes[v].empty()) routes.push_back(static_cast<int>(v));
  if (routes.size() < 2) return s;
  const int a = routes[rng.uniform_int(0, static_cast<int>(routes.size()) - 1)];
  int b = a;
  while (b == a) b = routes[rng.uniform_int(0, static_cast<int>(routes.size()) - 1)];
  std::vector<int> ga, gb;
  for (std::size_t g = 0; g < s.group_vehicle.size(); ++g) {
    if (s.group_vehicle[g] == a) ga.push_back(static_cast<int>(g));
    if (s.group_vehicle[g] == b) gb.push_back(static_cast<int>(g));
  }
  if (ga.empty() || gb.empty()) return s;
  rng.shuffle(ga);
  rng.shuffle(gb);
  for (int g1 : ga) {
    for (int g2 : gb) {
      Solution cand = s;
      std::set<int> dirty{a, b};
      remove_group(cand, g1, ctx);
      remove_group(cand, g2, ctx);
      refresh_route(cand, a, ctx);
      refresh_route(cand, b, ctx);
      InsertPlan p2 = best_slot_in_route(cand, g2, a, ctx);
      if (!p2.found) continue;
      apply_insert(cand, g2, p2);
      refresh_route(cand, a, ctx);
      InsertPlan p1 = best_slot_in_route(cand, g1, b, ctx);
      if (!p1.found) {
        // fall back to any other route, at most |K| random tries
        std::vector<int> order(cand.routes.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
        rng.shuffle(order);
        for (int v : order) {
          if (v == a) continue;
          InsertPlan alt = best_slot_in_route(cand, g1, v, ctx);
          if (alt.found) {
            p1 = std::move(alt);
            break;
          }
        }
        if (!p1.found) continue;
      }
      apply_insert(cand, g1, p1);
      dirty.insert(p1.vehicle);
      refresh_route(cand, p1.vehicle, ctx);
      if (!finalize_routes(cand, dirty, ctx, &rng)) continue;
      if (cand.objective < s.objective - 1e-9) return cand;
    }
  }
  return s;
}

Solution op_four_opt(const Solution& s, const SolveContext& ctx, const DaParams&, Rng& rng) {
  std::vector<int> routes;
  for (std::size_t v = 0; v < s.routes.size(); ++v)
    if (s.routes[v].size() >= 3) routes.push_back(static_cast<int>(v));
  if (routes.empty()) return s;
  const int v = routes[rng.uniform_int(0, static_cast<int>(routes.size()) - 1)];
  const auto& seq = s.routes[v];
  const int n = static_cast<int>(seq.size());
  const double base = s.sched[v].cost(ctx.inst->weights);
  double best_gain = 1e-9;
  std::vector<Visit> best;
  int perm[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
  for (int i = 0; i + 3 <= n; ++i) {
    for (const auto& pm : perm) {
      if (pm[0] == 0 && pm[1] == 1 && pm[2] == 2) continue;
      std::vector<Visit> cand = seq;
      for (int k = 0; k < 3; ++k) cand[i + k] = seq[i + pm[k]];
      RouteEval rs = propagate(cand, v, ctx);
      if (!rs.time_feasible()) continue;
      const double gain = base - rs.cost(ctx.inst->weights);
      if (gain > best_gain) {
        best_gain = gain;
        best = std::move(cand);
      }
    }
  }
  if (best.empty()) return s;
  Solution cand = s;
  cand.routes[v] = std::move(best);
  if (!finalize_routes(cand, {v}, ctx, &rng)) return s;
  return cand;
}

Solution op_create(const Solution& s, const SolveContext& ctx, const DaParams&, Rng& rng) {
  std::vector<int> pool = s.unserved_groups(ctx);
  if (pool.empty()) return s;
  std::vector<int> unused;
  for (std::size_t v = 0; v < s.routes.size(); ++v)
    if (s.routes[v].empty()) unused.push_back(static_cast<int>(v));
  if (unused.empty()) return s;
  const int gid = pool[rng.uniform_int(0, static_cast<int>(pool.size()) - 1)];
  const int v = unused[rng.uniform_int(0, static_cast<int>(unused.size()) - 1)];
  const auto& grp = ctx.groups[gid];
  if (grp.load > ctx.inst->vehicles[v].capacity) return s;
  Solution cand = s;
  cand.routes[v] = {Visit{grp.mp_node, 0, 0}, Visit{grp.station_node, 0, 0}};
  cand.group_vehicle[gid] = v;
  if (!finalize_routes(cand, {v}, ctx, &rng)) return s;
  return cand;
}

}  // namespace

Relatedness relatedness(const SolveContext& ctx, int gi, int gj, const DaParams& p) {
  const auto& g = *ctx.graph;
  const auto& a = ctx.groups[gi];
  const auto& b = ctx.groups[gj];
  Relatedness r;
  const double norm = ctx.max_pair_time;
  r.r_dist = g.drive_min(a.mp_node, b.mp_node) / norm +
             g.drive_min(a.station_node, b.station_node) / norm;
  const double T = ctx.inst->horizon;
  r.r_tw = std::abs(g.nodes[a.mp_node].l - g.nodes[b.mp_node].l) / T +
           std::abs(g.nodes[a.station_node].l - g.nodes[b.station_node].l) / T;
  int max_load = 1;
  for (const auto& grp : ctx.groups) max_load = std::max(max_load, grp.load);
  const double gdiff =
      std::abs(a.load - b.load) / static_cast<double>(max_load);
  r.r_shaw = p.shaw_phi * r.r_dist + p.shaw_chi * r.r_tw + p.shaw_psi * gdiff;
  return r;
}

Solution initial_solution(const SolveContext& ctx, const DaParams& p, Rng& rng) {
  OccupancyGrid grid(static_cast<int>(ctx.inst->chargers.size()), ctx.inst->horizon);
  Solution best = empty_solution(ctx);
  bool any_full = false;

  auto build_one = [&]() {
    Solution cand = empty_solution(ctx);
    std::vector<int> order(ctx.groups.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    rng.shuffle(order);
    for (int gid : order) {
      // collect slots over all routes, cheapest first, then make the first
      // one work whose charging stays conflict-free
      std::vector<InsertPlan> plans;
      for (std::size_t v = 0; v < cand.routes.size(); ++v) {
        InsertPlan plan = best_slot_in_route(cand, gid, static_cast<int>(v), ctx);
        if (plan.found) plans.push_back(std::move(plan));
      }
      std::sort(plans.begin(), plans.end(),
                [](const InsertPlan& x, const InsertPlan& y) { return x.delta < y.delta; });
      for (auto& plan : plans) {
        Solution trial = cand;
        apply_insert(trial, gid, plan);
        if (!finalize_routes(trial, {plan.vehicle}, ctx, &rng)) continue;
        if (!conflict_check(charge_events(trial, ctx), grid)) continue;
        cand = std::move(trial);
        break;
      }
    }
    return cand;
  };

  for (int pass = 0; pass < 2; ++pass) {
    const int tries = pass == 0 ? p.init_tries : p.init_tries_retry;
    for (int t = 0; t < tries; ++t) {
      Solution cand = build_one();
      if (cand.unserved_requests(ctx) == 0) any_full = true;
      if (cand.objective < best.objective - 1e-9) best = std::move(cand);
    }
    if (any_full) break;
  }
  return best;
}

Solution apply_operator(LsOp op, const Solution& s, const SolveContext& ctx,
                        const DaParams& p, Rng& rng) {
  switch (op) {
    case LsOp::relocate_ensemble: return op_relocate(s, ctx, p, rng);
    case LsOp::destroy_repair: return op_destroy_repair(s, ctx, p, rng);
    case LsOp::two_opt_star: return op_two_opt_star(s, ctx, p, rng);
    case LsOp::two_opt: return op_two_opt(s, ctx, p, rng);
    case LsOp::exchange_segment: return op_exchange_segment(s, ctx, p, rng);
    case LsOp::exchange_customer: return op_exchange_customer(s, ctx, p, rng);
    case LsOp::four_opt: return op_four_opt(s, ctx, p, rng);
    case LsOp::create: return op_create(s, ctx, p, rng);
  }
  return s;
}

Solution vehicle_exchange(const Solution& s, const SolveContext& ctx, Rng& rng,
                          OccupancyGrid& grid) {
  // charging time including the detour needed to reach the chargers
  auto charge_and_access = [&](const Solution& sol, int v) {
    const auto& rs = sol.sched[v];
    double total = 0;
    for (std::size_t i = 1; i + 1 < rs.nodes.size(); ++i) {
      if (ctx.graph->nodes[rs.nodes[i]].kind != NodeKind::charger) continue;
      total += sol.routes[v][i - 1].tau;
      total += ctx.graph->drive_min(rs.nodes[i - 1], rs.nodes[i]) +
               ctx.graph->drive_min(rs.nodes[i], rs.nodes[i + 1]) -
               ctx.graph->drive_min(rs.nodes[i - 1], rs.nodes[i + 1]);
    }
    return total;
  };
  std::vector<std::pair<double, int>> order;
  for (std::size_t v = 0; v < s.routes.size(); ++v)
    order.push_back({charge_and_access(s, static_cast<int>(v)), static_cast<int>(v)});
  std::sort(order.begin(), order.end(), [](auto& x, auto& y) {
    if (x.first != y.first) return x.first > y.first;
    return x.second < y.second;
  });
  if (order.empty() || order[0].first <= kTol) return s;  // nothing to gain

  Solution cur = s;
  for (std::size_t i = 0; i < order.size(); ++i) {
    const int v1 = order[i].second;
    for (std::size_t j = order.size(); j-- > i + 1;) {
      const int v2 = order[j].second;
      if (cur.routes[v1].empty() && cur.routes[v2].empty()) continue;
      Solution cand = cur;
      std::swap(cand.routes[v1], cand.routes[v2]);
      reassign_groups_to(cand, v1, ctx);
      reassign_groups_to(cand, v2, ctx);
      if (!finalize_routes(cand, {v1, v2}, ctx, &rng)) continue;
      if (cand.objective >= cur.objective - 1e-9) continue;
      if (!conflict_check(charge_events(cand, ctx), grid)) continue;
      cur = std::move(cand);
      break;
    }
  }
  return cur;
}

Solution da_run(const SolveContext& ctx, const DaParams& p, Rng& rng,
                std::ostream* progress_log) {
  Solution s = initial_solution(ctx, p, rng);
  Solution s_best = s;
  OccupancyGrid grid(static_cast<int>(ctx.inst->chargers.size()), ctx.inst->horizon);

  const double t_max_value = p.t_max * ctx.t_allbus;
  double T = t_max_value;
  long i_imp = 0;
  int stagnant = 0;
  double last_best = s_best.objective;
  const int fleet = static_cast<int>(ctx.inst->vehicles.size());

  auto log_line = [&](long iter) {
    if (!progress_log) return;
    *progress_log << "{\"iter\":" << iter << ",\"best\":" << s_best.objective
                  << ",\"T\":" << T << ",\"unserved\":" << s_best.unserved_requests(ctx)
                  << "}\n";
  };

  for (long iter = 1; iter <= p.iter_max; ++iter) {
    ++i_imp;
    if (iter % 100 == 0) {
      if (std::abs(s_best.objective - last_best) < 1e-9) {
        if (++stagnant >= p.n_stagnant) break;
      } else {
        stagnant = 0;
        last_best = s_best.objective;
      }
      if (iter % 1000 == 0) log_line(iter);
    }
    const LsOp op = static_cast<LsOp>(rng.uniform_int(0, kNumOps - 1));
    Solution cand = apply_operator(op, s, ctx, p, rng);
    if (cand.objective < s.objective + T &&
        conflict_check(charge_events(cand, ctx), grid)) {
      s = vehicle_exchange(cand, ctx, rng, grid);
      if (s.objective < s_best.objective - 1e-9 && s.vehicles_used() <= fleet) {
        s_best = s;
        i_imp = 0;
        log_line(iter);
      }
    }
    if (i_imp > 0) {
      T -= t_max_value / p.t_red;
      if (T < 0) {
        T = rng.uniform() * t_max_value;
        if (i_imp > static_cast<long>(p.n_imp) * std::max(1, s_best.vehicles_used())) {
          s = s_best;
          i_imp = 0;
        }
      }
    }
  }
  log_line(p.iter_max);
  return s_best;
}

}  // namespace feedopt
