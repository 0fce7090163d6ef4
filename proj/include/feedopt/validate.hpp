#pragma once

#include <string>
#include <vector>

#include "feedopt/solution.hpp"

namespace feedopt {

struct Violation {
  std::string family;  // constraint family name
  std::string detail;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
  int count(const std::string& family) const;
  std::string to_json() const;
};

// Independent constraint checker. Treats the route node sequences, the
// charging durations and the service-start times of the stored schedules as
// the decision variables and re-derives arrivals, loads and energy itself.
ValidationReport validate_solution(const Solution& sol, const SolveContext& ctx);

}  // namespace feedopt
