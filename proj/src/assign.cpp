#include "feedopt/assign.hpp"

#include <algorithm>
#include <stdexcept>

#include <json.hpp>

#include "feedopt/bnb.hpp"

namespace feedopt {

int Assignment::assigned_count() const {
  int n = 0;
  for (int v : request_mp_node) n += (v >= 0);
  return n;
}

MatchResult min_cost_assign(const std::vector<std::vector<double>>& cost,
                            const std::vector<int>& bin_capacity) {
  const int n_items = static_cast<int>(cost.size());
  const int n_bins = static_cast<int>(bin_capacity.size());
  MatchResult out;
  out.item_bin.assign(n_items, -1);
  if (n_items == 0) return out;

  // successive shortest augmenting paths on the bipartite graph;
  // sizes here are tiny (items per layer x candidate MPs)
  std::vector<int> load(n_bins, 0);
  for (int it = 0; it < n_items; ++it) {
    // Bellman-Ford over: source -> unassigned item -> bin -> (assigned item) -> ...
    const double INF = kInf;
    std::vector<double> dist_item(n_items, INF), dist_bin(n_bins, INF);
    std::vector<int> par_item(n_items, -2), par_bin(n_bins, -2);
    for (int i = 0; i < n_items; ++i)
      if (out.item_bin[i] < 0) {
        dist_item[i] = 0;
        par_item[i] = -1;
      }
    bool moved = true;
    while (moved) {
      moved = false;
      for (int i = 0; i < n_items; ++i) {
        if (dist_item[i] == INF) continue;
        for (int b = 0; b < n_bins; ++b) {
          if (cost[i][b] == INF || out.item_bin[i] == b) continue;
          const double nd = dist_item[i] + cost[i][b];
          if (nd < dist_bin[b] - 1e-12) {
            dist_bin[b] = nd;
            par_bin[b] = i;
            moved = true;
          }
        }
      }
      for (int b = 0; b < n_bins; ++b) {
        if (dist_bin[b] == INF) continue;
        for (int i = 0; i < n_items; ++i) {
          if (out.item_bin[i] != b) continue;
          const double nd = dist_bin[b] - cost[i][b];
          if (nd < dist_item[i] - 1e-12) {
            dist_item[i] = nd;
            par_item[i] = b;
            moved = true;
          }
        }
      }
    }
    // cheapest bin with spare capacity
    int best_bin = -1;
    for (int b = 0; b < n_bins; ++b) {
      if (load[b] >= bin_capacity[b] || dist_bin[b] == INF) continue;
      if (best_bin < 0 || dist_bin[b] < dist_bin[best_bin] - 1e-12) best_bin = b;
    }
    if (best_bin < 0) break;  // no augmenting path left
    // trace back, alternating bin -> item -> bin
    int b = best_bin;
    while (true) {
      const int i = par_bin[b];
      const int prev_bin = par_item[i];
      out.item_bin[i] = b;
      if (prev_bin < 0) break;
      b = prev_bin;
    }
    ++load[best_bin];
    ++out.assigned;
  }
  out.cost = 0;
  for (int i = 0; i < n_items; ++i)
    if (out.item_bin[i] >= 0) out.cost += cost[i][out.item_bin[i]];
  return out;
}

namespace {

// One activation subproblem: a set of candidate MP nodes and the requests
// that must be matched to them.
struct LayerBlock {
  int layer = -1;
  std::vector<int> mp_nodes;                 // candidate dummy MP node ids
  std::vector<int> requests;                 // request indices
  std::vector<std::vector<double>> walk;     // lambda2-weighted walk cost, kInf = out of reach
  std::vector<std::vector<double>> pair_t;   // drive minutes between MPs
  double pair_weight = 0;                    // lambda1 * rho_l
  int servable = 0;                          // max matchable with all MPs active
  int q_max = 0;
};

LayerBlock make_block(const LayeredGraph& g, const Instance& inst, int layer,
                      const AssignParams& params, std::vector<std::string>& warnings) {
  LayerBlock blk;
  blk.layer = layer;
  blk.mp_nodes = g.layers[layer].mp_nodes;
  blk.q_max = inst.max_capacity();
  for (std::size_t r = 0; r < inst.requests.size(); ++r) {
    if (g.request_layer[r] != layer) continue;
    if (g.walk_arcs[r].empty()) {
      warnings.push_back("request " + std::to_string(r) + " has no meeting point within reach");
      continue;
    }
    if (inst.requests[r].passengers > blk.q_max) {
      warnings.push_back("request " + std::to_string(r) + " exceeds the largest vehicle capacity");
      continue;
    }
    blk.requests.push_back(static_cast<int>(r));
  }
  const int m = static_cast<int>(blk.mp_nodes.size());
  blk.walk.assign(blk.requests.size(), std::vector<double>(m, kInf));
  for (std::size_t ri = 0; ri < blk.requests.size(); ++ri) {
    for (const auto& wa : g.walk_arcs[blk.requests[ri]]) {
      for (int c = 0; c < m; ++c)
        if (blk.mp_nodes[c] == wa.node)
          blk.walk[ri][c] = inst.weights.lambda2 * wa.walk_min;
    }
  }
  blk.pair_t.assign(m, std::vector<double>(m, 0));
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      if (i != j) blk.pair_t[i][j] = g.drive_min(blk.mp_nodes[i], blk.mp_nodes[j]);
  blk.pair_weight = inst.weights.lambda1 * params.rho_for(layer);
  std::vector<int> caps(m, blk.q_max);
  blk.servable = min_cost_assign(blk.walk, caps).assigned;
  return blk;
}

double block_pair_cost(const LayerBlock& blk, const std::vector<std::int8_t>& fix, int off) {
  double c = 0;
  const int m = static_cast<int>(blk.mp_nodes.size());
  for (int i = 0; i < m; ++i) {
    if (fix[off + i] != 1) continue;
    for (int j = 0; j < m; ++j)
      if (j != i && fix[off + j] == 1) c += blk.pair_t[i][j];
  }
  return blk.pair_weight * c;
}

// admissible bound: cheapest still-allowed walk per request plus the pair
// cost of the MPs already activated
double block_bound(const LayerBlock& blk, const std::vector<std::int8_t>& fix, int off) {
  const int m = static_cast<int>(blk.mp_nodes.size());
  int open_caps = 0;
  for (int i = 0; i < m; ++i)
    if (fix[off + i] != 0) open_caps += blk.q_max;
  if (open_caps < blk.servable) return kInf;
  double total = 0;
  int matchable = 0;
  for (std::size_t r = 0; r < blk.requests.size(); ++r) {
    double best = kInf;
    for (int i = 0; i < m; ++i)
      if (fix[off + i] != 0 && blk.walk[r][i] < best) best = blk.walk[r][i];
    if (best < kInf) {
      ++matchable;
      total += best;
    }
  }
  if (matchable < blk.servable) return kInf;
  return total + block_pair_cost(blk, fix, off);
}

double block_evaluate(const LayerBlock& blk, const std::vector<std::int8_t>& fix, int off,
                      std::vector<int>* item_bin = nullptr) {
  const int m = static_cast<int>(blk.mp_nodes.size());
  std::vector<int> caps(m, 0);
  for (int i = 0; i < m; ++i)
    if (fix[off + i] == 1) caps[i] = blk.q_max;
  MatchResult mr = min_cost_assign(blk.walk, caps);
  if (mr.assigned < blk.servable) return kInf;
  if (item_bin) *item_bin = std::move(mr.item_bin);
  return mr.cost + block_pair_cost(blk, fix, off);
}

int block_pick_var(const LayerBlock& blk, const std::vector<std::int8_t>& fix, int off) {
  const int m = static_cast<int>(blk.mp_nodes.size());
  int best = -1, best_score = -1;
  for (int i = 0; i < m; ++i) {
    if (fix[off + i] >= 0) continue;
    int score = 0;
    for (std::size_t r = 0; r < blk.requests.size(); ++r) {
      double cheapest = kInf;
      int arg = -1;
      for (int j = 0; j < m; ++j)
        if (fix[off + j] != 0 && blk.walk[r][j] < cheapest) {
          cheapest = blk.walk[r][j];
          arg = j;
        }
      if (arg == i) ++score;
    }
    if (score > best_score) {
      best_score = score;
      best = i;
    }
  }
  return best;
}

void apply_block_solution(const LayerBlock& blk, const std::vector<std::int8_t>& fix, int off,
                          Assignment& out) {
  std::vector<int> item_bin;
  block_evaluate(blk, fix, off, &item_bin);
  for (std::size_t r = 0; r < blk.requests.size(); ++r) {
    if (item_bin[r] >= 0) out.request_mp_node[blk.requests[r]] = blk.mp_nodes[item_bin[r]];
  }
  const int m = static_cast<int>(blk.mp_nodes.size());
  for (int i = 0; i < m; ++i)
    if (fix[off + i] == 1) {
      // only activations that actually host a request are reported
      bool used = false;
      for (std::size_t r = 0; r < blk.requests.size(); ++r)
        if (item_bin[r] == i) used = true;
      if (used) out.activated.push_back(blk.mp_nodes[i]);
    }
}

}  // namespace

Assignment assign_layered(const LayeredGraph& graph, const Instance& inst,
                          const AssignParams& params) {
  Assignment out;
  out.request_mp_node.assign(inst.requests.size(), -1);
  for (int layer : graph.active_layers) {
    LayerBlock blk = make_block(graph, inst, layer, params, out.warnings);
    const int m = static_cast<int>(blk.mp_nodes.size());
    BnbProblem p;
    p.num_vars = m;
    p.time_limit_s = params.time_limit_s;
    p.bound = [&](const std::vector<std::int8_t>& fix) { return block_bound(blk, fix, 0); };
    p.evaluate = [&](const std::vector<std::int8_t>& fix) { return block_evaluate(blk, fix, 0); };
    p.pick_var = [&](const std::vector<std::int8_t>& fix) { return block_pick_var(blk, fix, 0); };
    const BnbResult res = bnb_solve(p);
    if (!res.feasible) {
      out.warnings.push_back("layer " + std::to_string(layer) + " has no feasible assignment");
      continue;
    }
    if (!res.proven) out.proven = false;
    out.objective += res.objective;
    apply_block_solution(blk, res.solution, 0, out);
  }
  std::sort(out.activated.begin(), out.activated.end());
  return out;
}

Assignment assign_flat(const LayeredGraph& graph, const Instance& inst,
                       const AssignParams& params) {
  Assignment out;
  out.request_mp_node.assign(inst.requests.size(), -1);
  std::vector<LayerBlock> blocks;
  std::vector<int> offset;
  int nv = 0;
  for (int layer : graph.active_layers) {
    blocks.push_back(make_block(graph, inst, layer, params, out.warnings));
    offset.push_back(nv);
    nv += static_cast<int>(blocks.back().mp_nodes.size());
  }
  BnbProblem p;
  p.num_vars = nv;
  p.time_limit_s = params.time_limit_s;
  p.bound = [&](const std::vector<std::int8_t>& fix) {
    double total = 0;
    for (std::size_t b = 0; b < blocks.size(); ++b) {
      const double v = block_bound(blocks[b], fix, offset[b]);
      if (v == kInf) return kInf;
      total += v;
    }
    return total;
  };
  p.evaluate = [&](const std::vector<std::int8_t>& fix) {
    double total = 0;
    for (std::size_t b = 0; b < blocks.size(); ++b) {
      const double v = block_evaluate(blocks[b], fix, offset[b]);
      if (v == kInf) return kInf;
      total += v;
    }
    return total;
  };
  p.pick_var = [&](const std::vector<std::int8_t>& fix) {
    for (std::size_t b = 0; b < blocks.size(); ++b) {
      bool open = false;
      const int m = static_cast<int>(blocks[b].mp_nodes.size());
      for (int i = 0; i < m; ++i)
        if (fix[offset[b] + i] < 0) open = true;
      if (!open) continue;
      const int pick = block_pick_var(blocks[b], fix, offset[b]);
      if (pick >= 0) return offset[b] + pick;
    }
    return -1;
  };
  const BnbResult res = bnb_solve(p);
  if (res.feasible) {
    if (!res.proven) out.proven = false;
    out.objective = res.objective;
    for (std::size_t b = 0; b < blocks.size(); ++b)
      apply_block_solution(blocks[b], res.solution, offset[b], out);
  } else {
    out.warnings.push_back("no feasible flat assignment");
  }
  std::sort(out.activated.begin(), out.activated.end());
  return out;
}

LayeredGraph trim_unused(const LayeredGraph& graph, const Assignment& a) {
  LayeredGraph g = graph;
  std::vector<char> used(g.nodes.size(), 0);
  for (int node : a.request_mp_node)
    if (node >= 0) used[node] = 1;
  const int n = static_cast<int>(g.nodes.size());
  for (int i = 0; i < n; ++i) {
    if (g.nodes[i].kind != NodeKind::meeting_point || used[i]) continue;
    for (int j = 0; j < n; ++j) {
      g.adj_[static_cast<std::size_t>(i) * n + j] = 0;
      g.adj_[static_cast<std::size_t>(j) * n + i] = 0;
    }
  }
  for (auto& ly : g.layers) {
    std::erase_if(ly.mp_nodes, [&](int id) { return !used[id]; });
  }
  return g;
}

std::string assignment_to_json(const Assignment& a) {
  nlohmann::ordered_json j;
  j["format"] = "feedopt-assignment";
  j["version"] = 1;
  j["objective"] = a.objective;
  j["proven"] = a.proven;
  j["request_mp_node"] = a.request_mp_node;
  j["activated"] = a.activated;
  j["warnings"] = a.warnings;
  return j.dump(2) + "\n";
}

Assignment assignment_from_json(const std::string& text, std::size_t n_requests) {
  const auto j = nlohmann::ordered_json::parse(text);
  if (j.at("format").get<std::string>() != "feedopt-assignment")
    throw std::runtime_error("not a feedopt assignment file");
  Assignment a;
  a.objective = j.at("objective").get<double>();
  a.proven = j.at("proven").get<bool>();
  a.request_mp_node = j.at("request_mp_node").get<std::vector<int>>();
  a.activated = j.at("activated").get<std::vector<int>>();
  a.warnings = j.at("warnings").get<std::vector<std::string>>();
  if (a.request_mp_node.size() != n_requests)
    throw std::runtime_error("assignment does not match the instance request count");
  return a;
}

}  // namespace feedopt
