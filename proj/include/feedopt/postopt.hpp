#pragma once

#include "feedopt/solution.hpp"

namespace feedopt {

struct PostoptParams {
  double layer_time_limit_s = 30.0;  // per-layer reassignment solve budget
};

struct LayerPlan {
  bool found = false;
  double routing_time = kInf;                  // sum of arc times of the subroutes
  int unserved = 0;                            // requests of the layer left out
  std::vector<int> request_mp;                 // per layer request: node or -1
  std::vector<std::vector<int>> vehicle_mps;   // per vehicle of the layer, visit order
};

// Exact (or time-limited) reassignment of one layer's customers over the
// vehicles already traversing it: minimizes subroute travel time plus the
// rejection penalty; walking time is deliberately not part of this model.
LayerPlan reassign_layer(const Solution& sol, const SolveContext& ctx, int layer,
                         const std::vector<int>& vehicles, double time_limit_s);

struct PostoptOutcome {
  bool improved = false;
  Assignment assignment;  // request -> MP map after reassignment
  SolveContext ctx;       // context rebuilt for the new grouping
  Solution solution;
};

// Runs the per-layer reassignment over every layer that holds unserved
// customers, then re-schedules charging of the modified vehicles greedily
// against the untouched vehicles' occupancy. Falls back to the input when
// the result is not strictly better.
PostoptOutcome post_optimize(const Solution& best, const Assignment& a,
                             const SolveContext& ctx, const PostoptParams& params);

}  // namespace feedopt
