#pragma once

#include <string>
#include <vector>

#include "feedopt/bnb.hpp"
#include "feedopt/instance.hpp"
#include "feedopt/laygraph.hpp"

namespace feedopt {

struct AssignParams {
  std::vector<double> rho;  // per-layer; broadcast when a single value is given
  double time_limit_s = kInf;

  double rho_for(int layer) const {
    if (rho.empty()) return 1.0;
    if (rho.size() == 1) return rho[0];
    return rho[static_cast<std::size_t>(layer)];
  }
};

struct Assignment {
  std::vector<int> request_mp_node;  // request -> dummy MP node id, -1 = unassigned
  std::vector<int> activated;       // activated dummy MP node ids
  double objective = 0.0;           // assignment model value
  bool proven = true;
  std::vector<std::string> warnings;

  int assigned_count() const;
};

// Per-layer exact optimum of the customer-to-meeting-point model: walking
// cost plus rho-weighted pairwise travel time between activated MPs,
// subject to walk limit, single assignment and per-MP capacity.
Assignment assign_layered(const LayeredGraph& graph, const Instance& inst,
                          const AssignParams& params);

// Monolithic variant over the whole dummy MP set with pair costs restricted
// to same-layer pairs. Its optimum equals the summed layered optima; kept as
// the comparison baseline.
Assignment assign_flat(const LayeredGraph& graph, const Instance& inst,
                       const AssignParams& params);

// Marks MP nodes without assigned requests as unusable in a copied graph
// (their arcs are dropped); node ids stay stable.
LayeredGraph trim_unused(const LayeredGraph& graph, const Assignment& a);

std::string assignment_to_json(const Assignment& a);
Assignment assignment_from_json(const std::string& text, std::size_t n_requests);

// Exact minimum-cost assignment of items to capacitated bins, used by the
// activation search and exposed for oracle tests. cost[i][b] = kInf marks a
// forbidden pair. Returns per-item bin index (-1 when left unassigned) and
// assigns as many items as possible at minimum total cost.
struct MatchResult {
  std::vector<int> item_bin;
  double cost = 0.0;
  int assigned = 0;
};
MatchResult min_cost_assign(const std::vector<std::vector<double>>& cost,
                            const std::vector<int>& bin_capacity);

}  // namespace feedopt
