#include "feedopt/pipeline.hpp"

#include <chrono>
#include <cmath>

namespace feedopt {

SolveResult solve_instance(const Instance& inst, const LayeredGraph& graph,
                           const SolveConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  SolveResult res;
  res.assignment = cfg.layered ? assign_layered(graph, inst, cfg.assign)
                               : assign_flat(graph, inst, cfg.assign);
  res.ctx = make_context(inst, graph, res.assignment);
  Rng rng(cfg.seed);
  res.solution = da_run(res.ctx, cfg.da, rng, cfg.progress);
  if (cfg.run_postopt) {
    PostoptOutcome po = post_optimize(res.solution, res.assignment, res.ctx, cfg.postopt);
    if (po.improved) {
      res.assignment = std::move(po.assignment);
      res.ctx = std::move(po.ctx);
      res.solution = std::move(po.solution);
    }
  }
  res.wall_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return res;
}

std::vector<double> tune_rho(const Instance& inst, const LayeredGraph& graph, int budget,
                             const SolveConfig& base) {
  const int L = static_cast<int>(graph.layers.size());
  int runs = 0;
  double best_obj = kInf;
  std::vector<double> best_rho(L, 1.0);
  std::vector<int> best_unserved_layers;

  auto evaluate = [&](const std::vector<double>& rho) {
    if (runs >= budget) return;
    ++runs;
    SolveConfig cfg = base;
    cfg.assign.rho = rho;
    const SolveResult r = solve_instance(inst, graph, cfg);
    if (r.solution.objective < best_obj - 1e-9) {
      best_obj = r.solution.objective;
      best_rho = rho.size() == 1 ? std::vector<double>(L, rho[0]) : rho;
      best_unserved_layers.clear();
      for (int gid : r.solution.unserved_groups(r.ctx))
        best_unserved_layers.push_back(r.ctx.groups[gid].layer);
    }
  };

  // step 1: coarse grid, narrowed for larger instances, then refine +-0.1
  std::vector<double> grid;
  if (static_cast<int>(inst.requests.size()) > 50)
    grid = {0.2, 0.4, 0.6};
  else
    for (double v = 0.2; v <= 2.0 + kTol; v += 0.2) grid.push_back(v);
  for (double rho : grid) evaluate({rho});
  const double center = best_rho[0];
  for (double rho : {center - 0.1, center + 0.1})
    if (rho > 0) evaluate({rho});

  // step 2: escalate the layers that keep unserved customers
  std::vector<double> rho_vec = best_rho;
  for (int extra = 0; extra < 5 && runs < budget; ++extra) {
    if (best_unserved_layers.empty()) break;
    for (int layer : best_unserved_layers) rho_vec[layer] *= 1.5;
    evaluate(rho_vec);
  }
  return best_rho;
}

}  // namespace feedopt
