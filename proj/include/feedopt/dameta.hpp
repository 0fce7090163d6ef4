#pragma once

#include <iosfwd>

#include "feedopt/solution.hpp"

namespace feedopt {

struct DaParams {
  double t_max = 2.1;        // threshold coefficient, T_max = t_max * T_allbus
  int t_red = 200;           // threshold reduction divisor
  int n_imp = 100;           // restart multiplier
  long iter_max = 100000;
  int n_stagnant = 200;      // consecutive 100-iteration checks without progress

  int n_remove_max = 60;     // destroy-repair
  double remove_share = 0.275;
  double p_worst = 3, p_dist = 6, p_tw = 6, p_shaw = 6;
  double shaw_phi = 9, shaw_chi = 3, shaw_psi = 2;

  int init_tries = 100;
  int init_tries_retry = 1000;

  // removal rank j = max(1, floor(y^p * L)); L is the candidate list length
  // when true (the cited convention), n_remove when false (as printed)
  bool rank_over_full_list = true;
};

enum class LsOp {
  relocate_ensemble,
  destroy_repair,
  two_opt_star,
  two_opt,
  exchange_segment,
  exchange_customer,
  four_opt,
  create,
};
inline constexpr int kNumOps = 8;

struct Relatedness {
  double r_dist = 0;
  double r_tw = 0;
  double r_shaw = 0;
};
Relatedness relatedness(const SolveContext& ctx, int gi, int gj, const DaParams& p);

// Greedy-insertion construction: best of n randomized orders, all built
// conflict-free. Falls back to a larger try budget when no attempt serves
// every customer.
Solution initial_solution(const SolveContext& ctx, const DaParams& p, Rng& rng);

// One local search move. Returns the input unchanged when the operator
// cannot produce a feasible candidate (null move).
Solution apply_operator(LsOp op, const Solution& s, const SolveContext& ctx,
                        const DaParams& p, Rng& rng);

// Swaps which vehicle serves which sequence when that reduces cost, keeping
// all rescheduled charging conflict-free. Never returns a worse solution.
Solution vehicle_exchange(const Solution& s, const SolveContext& ctx, Rng& rng,
                          OccupancyGrid& grid);

// The threshold-accepting search loop. Returns the best solution found;
// post-optimization is applied separately by the pipeline.
Solution da_run(const SolveContext& ctx, const DaParams& p, Rng& rng,
                std::ostream* progress_log = nullptr);

}  // namespace feedopt
