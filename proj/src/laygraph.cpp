#include "feedopt/laygraph.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <json.hpp>

namespace feedopt {

bool layers_compatible(const Layer& a, const Layer& b, const Instance& inst) {
  const double t = inst.drive_min(inst.stations[a.station].pos, inst.stations[b.station].pos);
  return a.e + t <= b.l + kTol;
}

double LayeredGraph::drive_min(int i, int j) const {
  return inst_->drive_min(nodes[i].pos, nodes[j].pos);
}

double LayeredGraph::dist_km(int i, int j) const {
  return euclid_km(nodes[i].pos, nodes[j].pos);
}

const GraphNode& LayeredGraph::node(int i) const {
  if (i < 0 || i >= static_cast<int>(nodes.size()))
    throw std::out_of_range("unknown graph node id " + std::to_string(i));
  return nodes[i];
}

double LayeredGraph::mean_pickup_dropoff_time() const {
  std::vector<int> pd;
  for (int i = 0; i < static_cast<int>(nodes.size()); ++i) {
    const auto k = nodes[i].kind;
    if (k == NodeKind::meeting_point || k == NodeKind::station) pd.push_back(i);
  }
  if (pd.size() < 2) return 0.0;
  double sum = 0.0;
  std::size_t n = 0;
  for (int i : pd)
    for (int j : pd) {
      if (i == j) continue;
      sum += drive_min(i, j);
      ++n;
    }
  return sum / static_cast<double>(n);
}

LayeredGraph build_layered_graph(const Instance& inst) {
  LayeredGraph g;
  g.inst_ = &inst;

  // one layer per (station, timetabled departure), sorted by latest arrival
  for (int s = 0; s < static_cast<int>(inst.stations.size()); ++s) {
    for (double dep : inst.stations[s].departures) {
      Layer ly;
      ly.station = s;
      ly.departure = dep;
      ly.e = std::max(0.0, dep - inst.buffer);
      ly.l = dep;
      g.layers.push_back(ly);
    }
  }
  if (g.layers.empty()) throw std::runtime_error("no timetabled departures: empty graph");
  std::sort(g.layers.begin(), g.layers.end(), [](const Layer& a, const Layer& b) {
    if (a.l != b.l) return a.l < b.l;
    return a.station < b.station;
  });

  // map requests to layers, mark active layers
  g.request_layer.assign(inst.requests.size(), -1);
  for (std::size_t r = 0; r < inst.requests.size(); ++r) {
    const auto& rq = inst.requests[r];
    for (int li = 0; li < static_cast<int>(g.layers.size()); ++li) {
      const auto& ly = g.layers[li];
      if (ly.station == rq.station && std::abs(ly.departure - rq.departure) <= kTol) {
        g.request_layer[r] = li;
        break;
      }
    }
    if (g.request_layer[r] < 0)
      throw std::runtime_error("request " + std::to_string(r) + " matches no layer");
    g.layers[g.request_layer[r]].active = true;
  }
  for (int li = 0; li < static_cast<int>(g.layers.size()); ++li)
    if (g.layers[li].active) g.active_layers.push_back(li);

  // nodes: depot start, per active layer its reachable MPs and its station,
  // charger dummies (active layer count + 1 per physical charger), depot end
  auto add_node = [&](GraphNode n) {
    g.nodes.push_back(n);
    return static_cast<int>(g.nodes.size()) - 1;
  };
  g.depot_start = add_node({NodeKind::depot_start, -1, -1, -1, inst.depot, 0.0,
                            inst.horizon, 0.0});

  for (int li : g.active_layers) {
    auto& ly = g.layers[li];
    // active MPs on this layer: within w_max of at least one of its requests
    std::vector<char> used(inst.meeting_points.size(), 0);
    for (std::size_t r = 0; r < inst.requests.size(); ++r) {
      if (g.request_layer[r] != li) continue;
      for (const auto& rm : inst.requests[r].reachable) used[rm.mp] = 1;
    }
    const Point st_pos = inst.stations[ly.station].pos;
    for (int m = 0; m < static_cast<int>(inst.meeting_points.size()); ++m) {
      if (!used[m]) continue;
      const Point mp = inst.meeting_points[m];
      // latest pickup still allowing an on-time station arrival
      const double latest = ly.l - inst.drive_min(mp, st_pos) - inst.service_time;
      if (latest < -kTol) continue;
      ly.mp_nodes.push_back(add_node({NodeKind::meeting_point, li, m, -1, mp, 0.0,
                                      std::max(0.0, latest), inst.service_time}));
    }
    ly.station_node = add_node({NodeKind::station, li, ly.station, -1, st_pos, ly.e,
                                ly.l, inst.service_time});
  }

  const int dummies_per_charger = static_cast<int>(g.active_layers.size()) + 1;
  g.charger_dummies.resize(inst.chargers.size());
  for (int c = 0; c < static_cast<int>(inst.chargers.size()); ++c) {
    for (int d = 0; d < dummies_per_charger; ++d) {
      g.charger_dummies[c].push_back(add_node({NodeKind::charger, -1, c, d,
                                               inst.chargers[c].pos, 0.0,
                                               inst.horizon, 0.0}));
    }
  }
  g.depot_end = add_node({NodeKind::depot_end, -1, -1, -1, inst.depot, 0.0,
                          inst.horizon, 0.0});

  // layer compatibility table (i < j in sorted order)
  const int L = static_cast<int>(g.layers.size());
  g.compat_.assign(static_cast<std::size_t>(L) * L, 0);
  for (int i = 0; i < L; ++i)
    for (int j = i + 1; j < L; ++j)
      if (layers_compatible(g.layers[i], g.layers[j], inst))
        g.compat_[static_cast<std::size_t>(i) * L + j] = 1;

  // walking arcs on the request's own layer
  g.walk_arcs.assign(inst.requests.size(), {});
  for (std::size_t r = 0; r < inst.requests.size(); ++r) {
    const int li = g.request_layer[r];
    for (const auto& rm : inst.requests[r].reachable) {
      for (int nid : g.layers[li].mp_nodes) {
        if (g.nodes[nid].phys == rm.mp) {
          g.walk_arcs[r].push_back({nid, rm.walk_km, rm.walk_min});
          break;
        }
      }
    }
  }

  // bus arcs: the six permitted classes, then the time window prune
  const int n = static_cast<int>(g.nodes.size());
  g.adj_.assign(static_cast<std::size_t>(n) * n, 0);
  auto window_ok = [&](int i, int j) {
    return g.nodes[i].e + g.nodes[i].u + g.drive_min(i, j) <= g.nodes[j].l + kTol;
  };
  auto link = [&](int i, int j) {
    if (i == j) return;
    if (window_ok(i, j)) g.adj_[static_cast<std::size_t>(i) * n + j] = 1;
  };

  for (int j = 0; j < n; ++j) {
    const auto& nd = g.nodes[j];
    if (nd.kind == NodeKind::meeting_point || nd.kind == NodeKind::charger ||
        nd.kind == NodeKind::depot_end)
      link(g.depot_start, j);
  }
  for (int li : g.active_layers) {
    const auto& ly = g.layers[li];
    for (int a : ly.mp_nodes) {
      for (int b : ly.mp_nodes)
        if (a != b) link(a, b);
      link(a, ly.station_node);
    }
    // stations reach chargers, the end depot, and MPs on strictly higher layers
    for (const auto& cl : g.charger_dummies)
      for (int s : cl) link(ly.station_node, s);
    link(ly.station_node, g.depot_end);
    for (int lj : g.active_layers) {
      if (lj <= li) continue;
      for (int b : g.layers[lj].mp_nodes) link(ly.station_node, b);
    }
  }
  // vertical arcs between dummies of the same physical location on
  // compatible layers; the descending direction needs the swapped test
  for (std::size_t ai = 0; ai < g.active_layers.size(); ++ai) {
    for (std::size_t aj = ai + 1; aj < g.active_layers.size(); ++aj) {
      const int li = g.active_layers[ai];
      const int lj = g.active_layers[aj];
      const Layer& A = g.layers[li];
      const Layer& B = g.layers[lj];
      const bool asc = g.compatible(li, lj);
      const double t_back = inst.drive_min(inst.stations[B.station].pos,
                                           inst.stations[A.station].pos);
      const bool desc = B.e + t_back <= A.l + kTol;
      auto vertical = [&](int a, int b) {
        if (asc) link(a, b);
        if (desc) link(b, a);
      };
      for (int a : A.mp_nodes)
        for (int b : B.mp_nodes)
          if (g.nodes[a].phys == g.nodes[b].phys) vertical(a, b);
      if (A.station == B.station) vertical(A.station_node, B.station_node);
    }
  }
  for (const auto& cl : g.charger_dummies) {
    for (int s : cl) {
      for (int li : g.active_layers)
        for (int b : g.layers[li].mp_nodes) link(s, b);
      link(s, g.depot_end);
    }
  }
  return g;
}

std::string LayeredGraph::dump_json() const {
  nlohmann::ordered_json j;
  j["nodes"] = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const auto& nd = nodes[i];
    static const char* names[] = {"depot_start", "depot_end", "mp", "station", "charger"};
    j["nodes"].push_back({{"id", i},
                          {"kind", names[static_cast<int>(nd.kind)]},
                          {"layer", nd.layer},
                          {"phys", nd.phys},
                          {"x", nd.pos.x},
                          {"y", nd.pos.y},
                          {"e", nd.e},
                          {"l", nd.l}});
  }
  j["layers"] = nlohmann::ordered_json::array();
  for (const auto& ly : layers)
    j["layers"].push_back({{"station", ly.station},
                           {"departure", ly.departure},
                           {"active", ly.active},
                           {"mp_nodes", ly.mp_nodes},
                           {"station_node", ly.station_node}});
  std::size_t arcs = 0;
  for (auto b : adj_) arcs += b;
  j["arc_count"] = arcs;
  return j.dump(2) + "\n";
}

}  // namespace feedopt
