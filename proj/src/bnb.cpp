#include "feedopt/bnb.hpp"

#include <chrono>

namespace feedopt {

namespace {

struct Search {
  const BnbProblem* p;
  BnbResult res;
  std::vector<std::int8_t> fix;
  std::chrono::steady_clock::time_point t0;
  bool stopped = false;

  bool out_of_budget() {
    if (res.nodes >= p->node_limit) return true;
    if (p->time_limit_s == kInf) return false;
    // only sample the clock occasionally
    if ((res.nodes & 0x3f) != 0) return false;
    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return dt >= p->time_limit_s;
  }

  void dive() {
    ++res.nodes;
    if (stopped || out_of_budget()) {
      stopped = true;
      return;
    }
    int var = p->pick_var ? p->pick_var(fix) : -1;
    if (var < 0) {
      for (int i = 0; i < p->num_vars; ++i)
        if (fix[i] < 0) {
          var = i;
          break;
        }
    }
    if (var < 0) {
      const double val = p->evaluate(fix);
      if (val < res.objective - 1e-9) {
        res.objective = val;
        res.solution = fix;
        res.feasible = true;
      }
      return;
    }
    double child_bound[2];
    for (int v = 0; v < 2; ++v) {
      fix[var] = static_cast<std::int8_t>(v);
      child_bound[v] = p->bound(fix);
    }
    fix[var] = -1;
    int order[2] = {0, 1};
    if (child_bound[1] < child_bound[0]) {
      order[0] = 1;
      order[1] = 0;
    }
    for (int v : order) {
      if (child_bound[v] >= res.objective - 1e-9) continue;  // cannot improve
      fix[var] = static_cast<std::int8_t>(v);
      dive();
      fix[var] = -1;
      if (stopped) return;
    }
  }
};

}  // namespace

BnbResult bnb_solve(const BnbProblem& problem) {
  Search s;
  s.p = &problem;
  s.fix.assign(problem.num_vars, -1);
  s.t0 = std::chrono::steady_clock::now();
  const double root = problem.bound(s.fix);
  s.res.best_bound = root;
  if (problem.time_limit_s <= 0 || problem.node_limit <= 0) {
    s.stopped = true;
  } else if (root < kInf) {
    s.dive();
  }
  s.res.proven = !s.stopped;
  if (s.res.feasible && s.res.proven) s.res.best_bound = s.res.objective;
  return s.res;
}

}  // namespace feedopt
