#include "feedopt/evalsched.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace feedopt {

std::vector<PickupGroup> build_groups(const Assignment& a, const LayeredGraph& g,
                                      const Instance& inst) {
  std::map<int, PickupGroup> by_node;
  for (std::size_t r = 0; r < a.request_mp_node.size(); ++r) {
    const int node = a.request_mp_node[r];
    if (node < 0) continue;
    auto& grp = by_node[node];
    if (grp.mp_node < 0) {
      grp.mp_node = node;
      grp.layer = g.nodes[node].layer;
      grp.station_node = g.layers[grp.layer].station_node;
      grp.max_ride = max_ride_time(g.drive_min(node, grp.station_node), inst.detour_factor);
    }
    grp.requests.push_back(static_cast<int>(r));
    grp.load += inst.requests[r].passengers;
    for (const auto& wa : g.walk_arcs[r])
      if (wa.node == node) grp.walk_min += wa.walk_min;
  }
  std::vector<PickupGroup> groups;
  groups.reserve(by_node.size());
  for (auto& [node, grp] : by_node) {
    grp.id = static_cast<int>(groups.size());
    groups.push_back(std::move(grp));
  }
  return groups;
}

void SolveContext::index_groups() {
  group_of_node.assign(graph->nodes.size(), -1);
  for (const auto& g : groups) group_of_node[g.mp_node] = g.id;
}

SolveContext make_context(const Instance& inst, const LayeredGraph& graph,
                          const Assignment& a) {
  SolveContext ctx;
  ctx.inst = &inst;
  ctx.graph = &graph;
  ctx.groups = build_groups(a, graph, inst);
  ctx.index_groups();
  // scale statistics over the pickup/drop-off nodes of the trimmed instance
  std::vector<int> pd;
  for (const auto& g : ctx.groups) pd.push_back(g.mp_node);
  for (int li : graph.active_layers) pd.push_back(graph.layers[li].station_node);
  double sum = 0, mx = 0;
  std::size_t n = 0;
  for (int i : pd)
    for (int j : pd) {
      if (i == j) continue;
      const double t = graph.drive_min(i, j);
      sum += t;
      mx = std::max(mx, t);
      ++n;
    }
  ctx.t_allbus = n ? sum / static_cast<double>(n) : 0.0;
  ctx.max_pair_time = mx > 0 ? mx : 1.0;
  return ctx;
}

namespace {

struct Padded {
  std::vector<int> nodes;
  std::vector<double> tau;
  std::vector<double> min_start;
};

Padded pad(const std::vector<Visit>& seq, const SolveContext& ctx) {
  Padded p;
  const int n = static_cast<int>(seq.size());
  p.nodes.resize(n + 2);
  p.tau.assign(n + 2, 0.0);
  p.min_start.assign(n + 2, 0.0);
  p.nodes[0] = ctx.graph->depot_start;
  for (int i = 0; i < n; ++i) {
    p.nodes[i + 1] = seq[i].node;
    p.tau[i + 1] = seq[i].tau;
    p.min_start[i + 1] = seq[i].min_start;
  }
  p.nodes[n + 1] = ctx.graph->depot_end;
  return p;
}

int find_pos(const std::vector<int>& nodes, int node) {
  for (int i = 0; i < static_cast<int>(nodes.size()); ++i)
    if (nodes[i] == node) return i;
  return -1;
}

// single forward pass; extra[i] delays the service start at position i
void forward_pass(RouteEval& rs, const Padded& p, int vehicle, const SolveContext& ctx,
                  const std::vector<double>& extra) {
  const auto& g = *ctx.graph;
  const auto& inst = *ctx.inst;
  const int n = static_cast<int>(p.nodes.size());
  rs.A.assign(n, 0);
  rs.B.assign(n, 0);
  rs.W.assign(n, 0);
  rs.D.assign(n, 0);
  rs.window_ok = true;
  rs.travel = 0;
  rs.charge = 0;
  rs.wait = 0;
  rs.B[0] = extra[0];
  rs.D[0] = rs.B[0];
  for (int i = 1; i < n; ++i) {
    const double t = g.drive_min(p.nodes[i - 1], p.nodes[i]);
    rs.travel += t;
    const auto& nd = g.nodes[p.nodes[i]];
    rs.A[i] = rs.D[i - 1] + t;
    rs.B[i] = std::max({rs.A[i], nd.e, p.min_start[i]}) + extra[i];
    rs.W[i] = rs.B[i] - rs.A[i];
    if (rs.B[i] > nd.l + kTol) rs.window_ok = false;
    rs.D[i] = rs.B[i] + nd.u + p.tau[i];
    if (nd.kind == NodeKind::charger) rs.charge += p.tau[i];
    if (nd.kind == NodeKind::station) rs.wait += rs.W[i];
  }
  // energy ledger
  const auto& veh = inst.vehicles[vehicle];
  rs.E.assign(n, 0);
  rs.E[0] = veh.e_init_kwh;
  rs.energy_min_ok = true;
  rs.charge_cap_ok = true;
  rs.first_energy_violation = -1;
  for (int i = 1; i < n; ++i) {
    const auto& prev = g.nodes[p.nodes[i - 1]];
    double leave = rs.E[i - 1];
    if (prev.kind == NodeKind::charger) {
      leave += inst.chargers[prev.phys].alpha_kwh_per_min * p.tau[i - 1];
      if (leave > veh.e_max_kwh + kTol) rs.charge_cap_ok = false;
    }
    rs.E[i] = leave - veh.beta_kwh_per_km * g.dist_km(p.nodes[i - 1], p.nodes[i]);
    if (rs.E[i] < veh.e_min_kwh - kTol) {
      rs.energy_min_ok = false;
      if (rs.first_energy_violation < 0) rs.first_energy_violation = i;
    }
  }
}

void compute_rides(RouteEval& rs, const SolveContext& ctx) {
  const auto& g = *ctx.graph;
  const int n = static_cast<int>(rs.nodes.size());
  rs.ride.assign(n, 0.0);
  rs.ride_ok = true;
  for (int i = 1; i < n - 1; ++i) {
    const int gid = ctx.group_of_node[rs.nodes[i]];
    if (gid < 0 || g.nodes[rs.nodes[i]].kind != NodeKind::meeting_point) continue;
    const auto& grp = ctx.groups[gid];
    const int j = find_pos(rs.nodes, grp.station_node);
    if (j < 0) continue;  // structure error reported elsewhere
    rs.ride[i] = rs.A[j] - rs.B[i] - g.nodes[rs.nodes[i]].u;
    if (rs.ride[i] > grp.max_ride + kTol) rs.ride_ok = false;
  }
}

}  // namespace

double forward_slack(const RouteEval& rs, int i, const SolveContext& ctx) {
  const auto& g = *ctx.graph;
  const int n = static_cast<int>(rs.nodes.size());
  double slack = kInf;
  double cum_w = 0;
  for (int j = i; j < n; ++j) {
    if (j > i) cum_w += rs.W[j];
    double sj = g.nodes[rs.nodes[j]].l - rs.B[j];
    if (g.nodes[rs.nodes[j]].kind == NodeKind::station) {
      // delaying position i stretches the ride of groups picked up before i
      // and dropped off here
      for (int p = 1; p < i; ++p) {
        const int gid = ctx.group_of_node[rs.nodes[p]];
        if (gid < 0) continue;
        const auto& grp = ctx.groups[gid];
        if (grp.station_node == rs.nodes[j])
          sj = std::min(sj, grp.max_ride - rs.ride[p]);
      }
    }
    slack = std::min(slack, cum_w + std::max(0.0, sj));
    if (slack <= 0) return 0;
  }
  return slack;
}

double delay_budget(const RouteEval& rs, int i, const SolveContext& ctx) {
  double w = 0;
  for (int p = i + 1; p + 1 < static_cast<int>(rs.nodes.size()); ++p) w += rs.W[p];
  return std::min(forward_slack(rs, i, ctx), w);
}

RouteEval propagate(const std::vector<Visit>& seq, int vehicle, const SolveContext& ctx) {
  const auto& g = *ctx.graph;
  RouteEval rs;
  Padded p = pad(seq, ctx);
  rs.nodes = p.nodes;
  const int n = static_cast<int>(p.nodes.size());

  // structure: arcs exist, no repeats, MPs carry groups, drops after pickups
  rs.structure_ok = true;
  for (int i = 0; i < n && rs.structure_ok; ++i) {
    const int id = p.nodes[i];
    if (id < 0 || id >= static_cast<int>(g.nodes.size())) {
      rs.structure_ok = false;
      break;
    }
    for (int j = i + 1; j < n; ++j)
      if (p.nodes[j] == id) rs.structure_ok = false;
    const auto& nd = g.nodes[id];
    if (i > 0 && i < n - 1 &&
        (nd.kind == NodeKind::depot_start || nd.kind == NodeKind::depot_end))
      rs.structure_ok = false;
    if (nd.kind == NodeKind::meeting_point && ctx.group_of_node[id] < 0)
      rs.structure_ok = false;
    if (i > 0 && !g.arc(p.nodes[i - 1], p.nodes[i])) rs.structure_ok = false;
  }
  if (rs.structure_ok) {
    for (int i = 1; i < n - 1; ++i) {
      const int gid = ctx.group_of_node[p.nodes[i]];
      if (gid < 0 || g.nodes[p.nodes[i]].kind != NodeKind::meeting_point) continue;
      const int j = find_pos(p.nodes, ctx.groups[gid].station_node);
      if (j < 0 || j < i) rs.structure_ok = false;
    }
  }
  if (!rs.structure_ok) {
    rs.window_ok = rs.ride_ok = rs.load_ok = false;
    rs.energy_min_ok = false;
    return rs;
  }

  // loads
  const auto& veh = ctx.inst->vehicles[vehicle];
  rs.q.assign(n, 0);
  rs.load_ok = true;
  for (int i = 1; i < n; ++i) {
    const auto& nd = g.nodes[p.nodes[i]];
    int q = rs.q[i - 1];
    if (nd.kind == NodeKind::meeting_point) {
      q += ctx.groups[ctx.group_of_node[p.nodes[i]]].load;
    } else if (nd.kind == NodeKind::station) {
      for (int k = 1; k < i; ++k) {
        const int gid = ctx.group_of_node[p.nodes[k]];
        if (gid >= 0 && ctx.groups[gid].station_node == p.nodes[i])
          q -= ctx.groups[gid].load;
      }
    }
    rs.q[i] = q;
    if (q < 0 || q > veh.capacity) rs.load_ok = false;
  }
  if (rs.q[n - 1] != 0) rs.load_ok = false;

  std::vector<double> extra(n, 0.0);
  forward_pass(rs, p, vehicle, ctx, extra);
  compute_rides(rs, ctx);
  if (!rs.window_ok) return rs;

  // delay the depot departure into the downstream waits
  {
    const double d0 = delay_budget(rs, 0, ctx);
    if (d0 > kTol) {
      extra[0] = d0;
      forward_pass(rs, p, vehicle, ctx, extra);
      if (!rs.window_ok) {
        extra[0] = 0;
        forward_pass(rs, p, vehicle, ctx, extra);
      }
      compute_rides(rs, ctx);
    }
  }
  // delay each pickup within its slack to shorten rides and waits
  for (int i = 1; i < n - 1; ++i) {
    if (g.nodes[p.nodes[i]].kind != NodeKind::meeting_point) continue;
    const double di = delay_budget(rs, i, ctx);
    if (di <= kTol) continue;
    extra[i] = di;
    forward_pass(rs, p, vehicle, ctx, extra);
    if (!rs.window_ok) {
      extra[i] = 0;
      forward_pass(rs, p, vehicle, ctx, extra);
    }
    compute_rides(rs, ctx);
  }
  return rs;
}

OccupancyGrid::OccupancyGrid(int n_chargers, double horizon_min) {
  horizon_ = horizon_min;
  bins_ = static_cast<int>(std::ceil(horizon_min * 6.0)) + 1;  // 10 s bins
  bits_.assign(n_chargers, std::vector<std::uint8_t>(bins_, 0));
}

void OccupancyGrid::clear() {
  for (auto& row : bits_) std::fill(row.begin(), row.end(), 0);
}

void OccupancyGrid::bin_range(double start, double end, int& lo, int& hi) const {
  if (start < -kTol || end > horizon_ + kTol)
    throw std::out_of_range("charging event outside the planning horizon");
  lo = std::max(0, static_cast<int>(std::floor(start * 6.0 + 1e-9)));
  hi = std::min(bins_, static_cast<int>(std::ceil(end * 6.0 - 1e-9)));
}

bool OccupancyGrid::mark(int charger, double start_min, double end_min) {
  if (end_min - start_min <= kTol) return true;
  int lo, hi;
  bin_range(start_min, end_min, lo, hi);
  bool ok = true;
  for (int b = lo; b < hi; ++b) {
    if (bits_[charger][b]) ok = false;
    bits_[charger][b] = 1;
  }
  return ok;
}

bool OccupancyGrid::free(int charger, double start_min, double end_min) const {
  if (end_min - start_min <= kTol) return true;
  int lo, hi;
  bin_range(start_min, end_min, lo, hi);
  for (int b = lo; b < hi; ++b)
    if (bits_[charger][b]) return false;
  return true;
}

double OccupancyGrid::earliest_free(int charger, double earliest, double latest,
                                    double dur) const {
  if (free(charger, earliest, earliest + dur)) return earliest;
  // remaining candidates are 10 s bin boundaries
  double t = std::ceil(earliest * 6.0) / 6.0;
  for (; t <= latest + kTol; t += 1.0 / 6.0) {
    if (t + dur > horizon_ + kTol) break;
    if (free(charger, t, t + dur)) return t;
  }
  return -1.0;
}

void strip_chargers(std::vector<Visit>& seq, const SolveContext& ctx) {
  std::erase_if(seq, [&](const Visit& v) {
    return ctx.graph->nodes[v.node].kind == NodeKind::charger;
  });
}

bool conflict_check(const std::vector<ChargeEvent>& events, OccupancyGrid& grid) {
  grid.clear();
  bool ok = true;
  for (const auto& ev : events)
    if (!grid.mark(ev.charger, ev.start, ev.end)) ok = false;
  return ok;
}

namespace {

struct ChargerOption {
  int phys = -1;
  int node = -1;
  double op_time = 0;   // access + egress + full charge duration
  double access = 0;    // extra drive time of the detour
  double tau_full = 0;  // duration covering the whole remaining deficit
  double tau_cap = 0;   // duration bounded by E_max at this charger
  double arrive = 0;    // earliest possible charge start
};

}  // namespace

ChargingOutcome schedule_charging(const std::vector<Visit>& seq, int vehicle,
                                  const SolveContext& ctx, Rng* rng,
                                  const OccupancyGrid* avoid) {
  const auto& g = *ctx.graph;
  const auto& inst = *ctx.inst;
  const auto& veh = inst.vehicles[vehicle];
  ChargingOutcome out;
  out.seq = seq;

  RouteEval base = propagate(seq, vehicle, ctx);
  if (!base.time_feasible()) return out;
  if (base.energy_ok()) {
    out.success = true;
    return out;
  }

  auto attempt = [&](bool repair) -> std::pair<bool, std::vector<Visit>> {
    std::vector<Visit> cur = seq;
    int last_charger_node = -1;
    bool first_pick = true;
    for (int guard = 0; guard < 64; ++guard) {
      RouteEval rs = propagate(cur, vehicle, ctx);
      if (!rs.time_feasible() || !rs.charge_cap_ok) return {false, cur};
      if (rs.energy_min_ok) return {true, cur};
      Padded p = pad(cur, ctx);
      const int f = rs.first_energy_violation;
      const int after = last_charger_node < 0 ? 0 : find_pos(p.nodes, last_charger_node);
      std::vector<int> cands;
      for (int pos = 1; pos <= f && pos < static_cast<int>(p.nodes.size()); ++pos) {
        if (pos <= after) continue;
        const auto& prev = g.nodes[p.nodes[pos - 1]];
        if (prev.kind == NodeKind::charger) continue;
        if (rs.q[pos - 1] != 0) continue;
        cands.push_back(pos);
      }
      if (cands.empty()) return {false, cur};
      std::size_t start_idx = 0;
      if (first_pick && !repair && rng)
        start_idx = static_cast<std::size_t>(
            rng->uniform_int(0, static_cast<int>(cands.size()) - 1));
      first_pick = false;

      bool inserted = false;
      for (std::size_t ci = start_idx; ci < cands.size() && !inserted; ++ci) {
        const int pos = cands[ci];
        const int prev_node = p.nodes[pos - 1];
        const int next_node = p.nodes[pos];
        const double t_direct = g.drive_min(prev_node, next_node);
        const double budget = delay_budget(rs, pos - 1, ctx);

        // rank chargers by total operation time for the remaining deficit
        std::vector<ChargerOption> opts;
        for (int c = 0; c < static_cast<int>(inst.chargers.size()); ++c) {
          int dummy = -1;
          for (int cand : g.charger_dummies[c]) {
            if (find_pos(p.nodes, cand) < 0) {
              dummy = cand;
              break;
            }
          }
          if (dummy < 0) continue;
          if (!g.arc(prev_node, dummy) || !g.arc(dummy, next_node)) continue;
          ChargerOption o;
          o.phys = c;
          o.node = dummy;
          const double t_in = g.drive_min(prev_node, dummy);
          const double t_out = g.drive_min(dummy, next_node);
          o.access = t_in + t_out - t_direct;
          const double e_arr =
              rs.E[pos - 1] - veh.beta_kwh_per_km * g.dist_km(prev_node, dummy);
          if (e_arr < veh.e_min_kwh - kTol) continue;
          // deficit over the remaining route with tau = 0 at the new charger
          double need = 0;
          {
            double cur_e = e_arr - veh.beta_kwh_per_km * g.dist_km(dummy, next_node);
            need = std::max(0.0, veh.e_min_kwh - cur_e);
            for (int i = pos; i + 1 < static_cast<int>(p.nodes.size()); ++i) {
              const auto& nd = g.nodes[p.nodes[i]];
              if (nd.kind == NodeKind::charger)
                cur_e += inst.chargers[nd.phys].alpha_kwh_per_min * p.tau[i];
              cur_e -= veh.beta_kwh_per_km * g.dist_km(p.nodes[i], p.nodes[i + 1]);
              need = std::max(need, veh.e_min_kwh - cur_e);
            }
          }
          if (need <= kTol) continue;
          const double alpha = inst.chargers[c].alpha_kwh_per_min;
          o.tau_full = need / alpha;
          o.tau_cap = std::max(0.0, veh.e_max_kwh - e_arr) / alpha;
          o.arrive = rs.D[pos - 1] + t_in;
          o.op_time = o.access + o.tau_full;
          opts.push_back(o);
        }
        std::sort(opts.begin(), opts.end(), [](const ChargerOption& a, const ChargerOption& b) {
          if (a.op_time != b.op_time) return a.op_time < b.op_time;
          return a.phys < b.phys;
        });

        for (const auto& o : opts) {
          double tau = std::min(o.tau_full, o.tau_cap);
          if (tau <= kTol) continue;
          double start = o.arrive;
          if (tau + o.access <= budget + kTol) {
            const double spare = std::max(0.0, budget - tau - o.access);
            if (rng) {
              start = o.arrive + rng->uniform(spare);
            } else if (avoid) {
              const double s = avoid->earliest_free(o.phys, o.arrive, o.arrive + spare, tau);
              if (s < 0) continue;
              start = s;
            }
          } else {
            const double avail = budget - o.access;
            if (avail <= kTol) continue;
            tau = std::min(tau, avail);
            if (avoid && !avoid->free(o.phys, start, start + tau)) continue;
          }
          Visit v;
          v.node = o.node;
          v.tau = tau;
          v.min_start = start;
          std::vector<Visit> trial = cur;
          trial.insert(trial.begin() + (pos - 1), v);
          RouteEval check = propagate(trial, vehicle, ctx);
          if (!check.time_feasible() || !check.charge_cap_ok) continue;
          cur = std::move(trial);
          last_charger_node = o.node;
          inserted = true;
        }
      }
      if (!inserted) return {false, cur};
    }
    return {false, cur};
  };

  auto [ok, s1] = attempt(false);
  if (ok) {
    out.success = true;
    out.seq = std::move(s1);
    return out;
  }
  auto [ok2, s2] = attempt(true);
  out.used_repair = true;
  if (ok2) {
    out.success = true;
    out.seq = std::move(s2);
  }
  return out;
}

}  // namespace feedopt
