#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "feedopt/instance.hpp"

namespace feedopt {

enum class NodeKind : std::uint8_t {
  depot_start,
  depot_end,
  meeting_point,
  station,
  charger,
};

struct GraphNode {
  NodeKind kind = NodeKind::depot_start;
  int layer = -1;       // station layers only; -1 for the ground layer
  int phys = -1;        // physical MP / station / charger index
  int dummy_rank = -1;  // position within a charger's dummy list
  Point pos;
  double e = 0;  // earliest service start
  double l = 0;  // latest service start
  double u = 0;  // service duration
};

// One layer per (station, timetabled departure), sorted by non-decreasing
// latest arrival l. A layer is active iff at least one request targets it.
struct Layer {
  int station = -1;
  double departure = 0;
  double e = 0;  // departure - buffer
  double l = 0;  // departure
  bool active = false;
  std::vector<int> mp_nodes;  // dummy MP node ids (active layers only)
  int station_node = -1;      // dummy station node id (active layers only)
};

struct LayeredGraph {
  std::vector<GraphNode> nodes;
  std::vector<Layer> layers;           // all (station, departure) pairs
  std::vector<int> active_layers;      // indices into layers
  std::vector<std::vector<int>> charger_dummies;  // per physical charger
  int depot_start = -1;
  int depot_end = -1;

  // request -> layer index, and request -> walking arcs (dummy MP node ids)
  std::vector<int> request_layer;
  struct WalkArc {
    int node = -1;  // dummy MP node on the request's layer
    double walk_km = 0;
    double walk_min = 0;
  };
  std::vector<std::vector<WalkArc>> walk_arcs;

  // layer count as reported externally: station layers plus the ground layer
  int layer_count_with_ground() const { return static_cast<int>(layers.size()) + 1; }

  bool arc(int i, int j) const { return adj_[static_cast<std::size_t>(i) * nodes.size() + j] != 0; }
  bool compatible(int li, int lj) const {
    return compat_[static_cast<std::size_t>(li) * layers.size() + lj] != 0;
  }
  double drive_min(int i, int j) const;
  double dist_km(int i, int j) const;
  double node_layer_l(int i) const { return nodes[i].l; }

  const GraphNode& node(int i) const;

  // mean bus travel time over all ordered pairs of pickup/drop-off nodes,
  // used to scale the acceptance threshold
  double mean_pickup_dropoff_time() const;

  std::string dump_json() const;  // debug dump, no stability guarantee

  // build() fills these; kept public for the builder only
  std::vector<std::uint8_t> adj_;
  std::vector<std::uint8_t> compat_;
  const Instance* inst_ = nullptr;
};

// Constructs the pruned layered graph for an instance.
// Throws std::runtime_error when no station has a timetabled departure.
LayeredGraph build_layered_graph(const Instance& inst);

// Compatibility test between two layers (li < lj in sorted order):
// e_i + t_ij <= l_j with t_ij the drive time between the layers' stations.
bool layers_compatible(const Layer& a, const Layer& b, const Instance& inst);

}  // namespace feedopt
