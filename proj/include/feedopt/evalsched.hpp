#pragma once

#include <cstdint>
#include <vector>

#include "feedopt/assign.hpp"
#include "feedopt/instance.hpp"
#include "feedopt/laygraph.hpp"
#include "feedopt/rng.hpp"

namespace feedopt {

// All requests assigned to one dummy meeting point node travel as one
// routing customer: picked up together, dropped at the layer's station.
struct PickupGroup {
  int id = -1;
  int mp_node = -1;
  int layer = -1;
  int station_node = -1;
  std::vector<int> requests;
  int load = 0;              // total passengers
  double walk_min = 0;       // summed walking minutes of the members
  double max_ride = 0;       // L_i = direct ride time x detour factor
};

std::vector<PickupGroup> build_groups(const Assignment& a, const LayeredGraph& g,
                                      const Instance& inst);

// Shared immutable context of one solve session.
struct SolveContext {
  const Instance* inst = nullptr;
  const LayeredGraph* graph = nullptr;
  std::vector<PickupGroup> groups;
  std::vector<int> group_of_node;  // node id -> group id or -1
  double t_allbus = 0;             // mean pickup/drop-off drive time
  double max_pair_time = 0;        // normalization for relatedness

  void index_groups();
};

SolveContext make_context(const Instance& inst, const LayeredGraph& graph,
                          const Assignment& a);

// One stop of a route. tau is the charging duration at charger nodes;
// min_start pins an earliest service-begin time, used at charger visits to
// place the charge start inside the allowed slack.
struct Visit {
  int node = -1;
  double tau = 0;
  double min_start = 0;

  bool operator==(const Visit&) const = default;
};

// Propagated schedule over the depot-padded node sequence.
struct RouteEval {
  bool structure_ok = true;
  bool window_ok = true;
  bool ride_ok = true;
  bool load_ok = true;
  bool energy_min_ok = true;   // E >= E_min everywhere
  bool charge_cap_ok = true;   // no charge pushes past E_max
  std::vector<int> nodes;  // padded: depot, visits..., depot
  std::vector<double> A, B, W, D, E;
  std::vector<int> q;                 // load when leaving each node
  std::vector<double> ride;           // per position: ride time of its group (MP nodes)
  double travel = 0;                  // sum of arc drive times
  double charge = 0;                  // sum of tau
  double wait = 0;                    // sum of W at station nodes
  int first_energy_violation = -1;    // padded index, -1 when none

  bool time_feasible() const { return structure_ok && window_ok && ride_ok && load_ok; }
  bool energy_ok() const { return energy_min_ok && charge_cap_ok; }
  bool feasible() const { return time_feasible() && energy_ok(); }
  double cost(const Weights& w) const {
    return w.lambda1 * (travel + charge) + w.lambda3 * wait;
  }
};

// Eight-step schedule evaluation: earliest propagation, then depot and
// pickup delays within the forward slack to absorb waits and shorten rides.
RouteEval propagate(const std::vector<Visit>& seq, int vehicle, const SolveContext& ctx);

// Classical forward time slack at padded position i of an evaluated route.
double forward_slack(const RouteEval& rs, int i, const SolveContext& ctx);

// min(F_i, sum of downstream waits): the delay budget used by the charging
// scheduler when inserting after padded position i.
double delay_budget(const RouteEval& rs, int i, const SolveContext& ctx);

struct ChargeEvent {
  int vehicle = -1;
  int charger = -1;     // physical charger
  int node = -1;        // dummy charger node id
  int position = -1;    // padded route position
  double start = 0;     // B at the charger
  double end = 0;       // start + tau
  double energy = 0;    // alpha * tau
};

// Per-charger occupancy bitmap at 10-second resolution.
class OccupancyGrid {
 public:
  OccupancyGrid(int n_chargers, double horizon_min);

  void clear();
  // marks [start, end) minutes; returns false if any covered bin was already set
  bool mark(int charger, double start_min, double end_min);
  // true iff [start, end) covers no set bin
  bool free(int charger, double start_min, double end_min) const;
  // earliest start in [earliest, latest] whose [start, start+dur) is free;
  // candidates beyond `earliest` itself snap to bin boundaries. -1 when none.
  double earliest_free(int charger, double earliest, double latest, double dur) const;

 private:
  int bins_ = 0;
  double horizon_ = 0;
  std::vector<std::vector<std::uint8_t>> bits_;
  void bin_range(double start, double end, int& lo, int& hi) const;
};

// Rebuilds a grid from the events and reports true when no two events on
// the same physical charger overlap. Throws when an event leaves [0, T].
bool conflict_check(const std::vector<ChargeEvent>& events, OccupancyGrid& grid);

// Drops every charger visit from the sequence.
void strip_chargers(std::vector<Visit>& seq, const SolveContext& ctx);

struct ChargingOutcome {
  bool success = false;
  bool used_repair = false;
  std::vector<Visit> seq;  // interior sequence including inserted charger visits
};

// Charging scheduling: inserts charger visits on zero-load arcs of a
// time-feasible route until the energy profile stays above E_min. rng == null
// switches to the deterministic greedy variant that also avoids the occupied
// intervals in `avoid`.
ChargingOutcome schedule_charging(const std::vector<Visit>& seq, int vehicle,
                                  const SolveContext& ctx, Rng* rng,
                                  const OccupancyGrid* avoid = nullptr);

}  // namespace feedopt
