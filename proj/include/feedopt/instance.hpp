#pragma once

#include <string>
#include <vector>

#include "feedopt/geometry.hpp"

namespace feedopt {

// Feasibility tolerance used for every <=/>= comparison on minutes and kWh.
inline constexpr double kTol = 1e-6;

struct Vehicle {
  int capacity = 0;            // Q^k, passengers
  double battery_kwh = 0.0;    // installed battery size
  double e_init_kwh = 0.0;     // state of charge when leaving the depot
  double e_min_kwh = 0.0;      // reserve level that may never be undercut
  double e_max_kwh = 0.0;      // usable upper charge level
  double beta_kwh_per_km = 0;  // consumption rate
};

struct Station {
  Point pos;
  std::vector<double> departures;  // timetabled transit departures, minutes
};

struct Charger {
  Point pos;
  double alpha_kwh_per_min = 0.0;  // charging rate
};

struct ReachableMp {
  int mp = -1;          // physical meeting point index
  double walk_km = 0;   // w_ri
  double walk_min = 0;  // t_ri
};

struct Request {
  Point origin;
  int passengers = 1;       // g_r
  int station = -1;         // target transit station index
  double departure = 0.0;   // desired timetabled departure, minutes
  std::vector<ReachableMp> reachable;  // meeting points with w_ri <= w_max
};

struct Weights {
  double lambda1 = 1.0;  // vehicle travel + charging time
  double lambda2 = 1.0;  // customer walking time
  double lambda3 = 1.0;  // excess wait at transit stations
  double omega = 40.0;   // penalty per unserved request
};

struct Instance {
  double horizon = 0.0;  // T, minutes
  Point depot;
  std::vector<Point> meeting_points;
  std::vector<Station> stations;
  std::vector<Charger> chargers;
  std::vector<Vehicle> vehicles;
  std::vector<Request> requests;
  Weights weights;
  double walk_speed = 0.085;   // km/min
  double bus_speed = 0.83;     // km/min
  double buffer = 10.0;        // station time window width, minutes
  double detour_factor = 1.5;  // max ride = direct ride x this
  double w_max = 1.5;          // km
  double service_time = 0.5;   // u, minutes

  double drive_min(const Point& a, const Point& b) const {
    return euclid_km(a, b) / bus_speed;
  }
  double walk_min(const Point& a, const Point& b) const {
    return euclid_km(a, b) / walk_speed;
  }
  int max_capacity() const;

  // Recomputes every request's reachable meeting point list from w_max.
  void rebuild_reachability();

  // Throws std::invalid_argument on a violated structural invariant.
  void check() const;
};

enum class TravelMode { walk, drive };

double travel_time(const Point& a, const Point& b, TravelMode mode,
                   const Instance& inst);

inline double max_ride_time(double direct_min, double detour_factor) {
  return direct_min * detour_factor;
}

// JSON round trip (documented schema, docs/formats.md)
std::string instance_to_json(const Instance& inst);
Instance instance_from_json(const std::string& text);
Instance load_instance(const std::string& path);
void save_instance(const Instance& inst, const std::string& path);

// Atomic file write helper (temp + rename) shared by all writers.
void write_file_atomic(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

}  // namespace feedopt
