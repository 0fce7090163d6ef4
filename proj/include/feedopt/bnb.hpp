#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

namespace feedopt {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Depth-first branch and bound over binary variables.
//
// `fix` entries are -1 (free), 0, or 1. The bound callback must be
// admissible: it never exceeds the objective of any completion of the
// partial fix, and returns +inf when no feasible completion exists.
// The evaluate callback scores a complete fix (+inf when infeasible).
struct BnbProblem {
  int num_vars = 0;
  std::function<double(const std::vector<std::int8_t>&)> bound;
  std::function<double(const std::vector<std::int8_t>&)> evaluate;
  // optional: next variable to branch on; -1 falls back to first free
  std::function<int(const std::vector<std::int8_t>&)> pick_var;
  double time_limit_s = kInf;
  long node_limit = std::numeric_limits<long>::max();
};

struct BnbResult {
  bool feasible = false;
  bool proven = false;
  double objective = kInf;
  double best_bound = -kInf;
  std::vector<std::int8_t> solution;
  long nodes = 0;
};

BnbResult bnb_solve(const BnbProblem& problem);

}  // namespace feedopt
