#pragma once

#include "feedopt/dameta.hpp"
#include "feedopt/gen.hpp"
#include "feedopt/postopt.hpp"

namespace feedopt {

struct SolveConfig {
  std::uint64_t seed = 1;
  AssignParams assign;
  DaParams da;
  PostoptParams postopt;
  bool layered = true;      // first-stage model choice
  bool run_postopt = true;
  std::ostream* progress = nullptr;
};

struct SolveResult {
  Assignment assignment;
  SolveContext ctx;  // holds pointers to the caller's instance and graph
  Solution solution;
  double wall_s = 0;
};

// Full pipeline: customer-to-MP assignment, threshold-accepting search,
// post-optimization of layers with unserved customers.
SolveResult solve_instance(const Instance& inst, const LayeredGraph& graph,
                           const SolveConfig& cfg);

// Two-step rho search: coarse grid (narrowed for larger instances), +-0.1
// refinement, then per-layer escalation by 1.5 on layers that still hold
// unserved customers. `budget` caps the number of pipeline runs.
std::vector<double> tune_rho(const Instance& inst, const LayeredGraph& graph, int budget,
                             const SolveConfig& base);

}  // namespace feedopt
