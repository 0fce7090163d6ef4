#pragma once

#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "feedopt/solution.hpp"

namespace feedopt {

struct LpVar {
  std::string name;
  bool binary = false;
  double lb = 0;
  double ub = kInf;
};

struct LpTerm {
  int var = -1;
  double coef = 0;
};

struct LpConstraint {
  std::string name;
  std::vector<LpTerm> terms;
  char sense = 'L';  // 'L' <=, 'G' >=, 'E' =
  double rhs = 0;
};

struct LpModel {
  std::vector<LpVar> vars;
  std::vector<LpConstraint> cons;
  std::vector<LpTerm> objective;
  std::unordered_map<std::string, int> index;

  int add_var(const std::string& name, bool binary, double lb, double ub);
  int var(const std::string& name) const;  // -1 when unknown
  void add_con(LpConstraint con);
};

// CPLEX-style LP text (the repo's interchange dialect, docs/formats.md)
std::string write_lp(const LpModel& model);
void write_lp_file(const LpModel& model, const std::string& path);
LpModel parse_lp(const std::string& text);
LpModel parse_lp_file(const std::string& path);

// The complete model: assignment, routing, energy and charger
// synchronization constraints with big-M linearized conditionals.
LpModel build_full_model(const Instance& inst, const LayeredGraph& graph);

// Routing-only second stage for a fixed customer-to-MP assignment; load
// deltas are folded into the visited stops and the rejection penalty is
// weighted by the passengers of each dropped stop.
LpModel build_second_stage_model(const Instance& inst, const LayeredGraph& graph,
                                 const Assignment& a);

// Variable values encoding a solution of the corresponding model.
std::map<std::string, double> solution_to_variables(const Solution& sol,
                                                    const SolveContext& ctx);
std::map<std::string, double> solution_to_second_stage_variables(const Solution& sol,
                                                                 const SolveContext& ctx);

struct LpViolation {
  std::string con;
  double lhs = 0;
  char sense = 'L';
  double rhs = 0;
};

struct CheckResult {
  std::vector<LpViolation> violations;
  double objective = 0;
  bool ok() const { return violations.empty(); }
  std::string to_json() const;
};

// Evaluates every constraint at tolerance 1e-6; out-of-bound variables and
// fractional binaries are violations too. Missing names count as zero.
CheckResult check_solution(const LpModel& model, const std::map<std::string, double>& values);

// "name value" per line
void write_variables_file(const std::map<std::string, double>& values, const std::string& path);
std::map<std::string, double> read_variables_file(const std::string& path);

}  // namespace feedopt
