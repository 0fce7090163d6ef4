#include "feedopt/instance.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace feedopt {

using ordered_json = nlohmann::ordered_json;

int Instance::max_capacity() const {
  int q = 0;
  for (const auto& v : vehicles) q = std::max(q, v.capacity);
  return q;
}

void Instance::rebuild_reachability() {
  for (auto& r : requests) {
    r.reachable.clear();
    for (int m = 0; m < static_cast<int>(meeting_points.size()); ++m) {
      const double d = euclid_km(r.origin, meeting_points[m]);
      if (d <= w_max + kTol) {
        r.reachable.push_back({m, d, d / walk_speed});
      }
    }
  }
}

void Instance::check() const {
  auto fail = [](const std::string& msg) { throw std::invalid_argument(msg); };
  if (horizon <= 0) fail("horizon must be positive");
  if (walk_speed <= 0 || bus_speed <= 0) fail("speeds must be positive");
  if (detour_factor < 1.0) fail("detour factor must be >= 1");
  if (w_max < 0) fail("max walk must be >= 0");
  if (weights.lambda1 < 0 || weights.lambda2 < 0 || weights.lambda3 < 0 ||
      weights.omega < 0)
    fail("objective weights must be >= 0");
  if (stations.empty()) fail("at least one station required");
  for (const auto& st : stations) {
    if (st.departures.empty()) fail("every station needs a timetabled departure");
    for (double d : st.departures)
      if (d < 0 || d > horizon) fail("timetabled departure outside [0, T]");
  }
  for (const auto& ch : chargers)
    if (ch.alpha_kwh_per_min <= 0) fail("charging rate must be positive");
  for (const auto& v : vehicles) {
    if (v.capacity < 1) fail("vehicle capacity must be >= 1");
    if (v.beta_kwh_per_km <= 0) fail("consumption rate must be positive");
    if (!(v.e_min_kwh <= v.e_init_kwh + kTol &&
          v.e_init_kwh <= v.e_max_kwh + kTol &&
          v.e_max_kwh <= v.battery_kwh + kTol))
      fail("vehicle energy levels must satisfy E_min <= E_init <= E_max <= B");
  }
  for (const auto& r : requests) {
    if (r.passengers < 1) fail("request must carry at least one passenger");
    if (r.station < 0 || r.station >= static_cast<int>(stations.size()))
      fail("request targets unknown station");
    const auto& deps = stations[r.station].departures;
    const bool listed = std::any_of(deps.begin(), deps.end(), [&](double d) {
      return std::abs(d - r.departure) <= kTol;
    });
    if (!listed) fail("request departure is not in the station timetable");
  }
}

double travel_time(const Point& a, const Point& b, TravelMode mode,
                   const Instance& inst) {
  const double d = euclid_km(a, b);
  return mode == TravelMode::walk ? d / inst.walk_speed : d / inst.bus_speed;
}

static ordered_json point_json(const Point& p) {
  return ordered_json{{"x", p.x}, {"y", p.y}};
}

static Point point_from(const ordered_json& j) {
  return Point{j.at("x").get<double>(), j.at("y").get<double>()};
}

std::string instance_to_json(const Instance& inst) {
  ordered_json j;
  j["format"] = "feedopt-instance";
  j["version"] = 1;
  j["T"] = inst.horizon;
  j["depot"] = point_json(inst.depot);
  j["meeting_points"] = ordered_json::array();
  for (const auto& p : inst.meeting_points) j["meeting_points"].push_back(point_json(p));
  j["stations"] = ordered_json::array();
  for (const auto& s : inst.stations) {
    ordered_json js = point_json(s.pos);
    js["departures"] = s.departures;
    j["stations"].push_back(js);
  }
  j["chargers"] = ordered_json::array();
  for (const auto& c : inst.chargers) {
    ordered_json jc = point_json(c.pos);
    jc["alpha"] = c.alpha_kwh_per_min;
    j["chargers"].push_back(jc);
  }
  j["vehicles"] = ordered_json::array();
  for (const auto& v : inst.vehicles) {
    j["vehicles"].push_back(ordered_json{{"Q", v.capacity},
                                         {"B_cap", v.battery_kwh},
                                         {"E_init", v.e_init_kwh},
                                         {"E_min", v.e_min_kwh},
                                         {"E_max", v.e_max_kwh},
                                         {"beta", v.beta_kwh_per_km}});
  }
  j["requests"] = ordered_json::array();
  for (const auto& r : inst.requests) {
    j["requests"].push_back(ordered_json{{"origin", point_json(r.origin)},
                                         {"g", r.passengers},
                                         {"station", r.station},
                                         {"departure", r.departure}});
  }
  j["weights"] = ordered_json{{"lambda1", inst.weights.lambda1},
                              {"lambda2", inst.weights.lambda2},
                              {"lambda3", inst.weights.lambda3},
                              {"omega", inst.weights.omega}};
  j["walk_speed"] = inst.walk_speed;
  j["bus_speed"] = inst.bus_speed;
  j["buffer"] = inst.buffer;
  j["detour_factor"] = inst.detour_factor;
  j["w_max"] = inst.w_max;
  j["service_time"] = inst.service_time;
  return j.dump(2) + "\n";
}

Instance instance_from_json(const std::string& text) {
  const ordered_json j = ordered_json::parse(text);
  if (j.at("format").get<std::string>() != "feedopt-instance")
    throw std::runtime_error("not a feedopt instance file");
  Instance inst;
  inst.horizon = j.at("T").get<double>();
  inst.depot = point_from(j.at("depot"));
  for (const auto& p : j.at("meeting_points")) inst.meeting_points.push_back(point_from(p));
  for (const auto& s : j.at("stations")) {
    Station st;
    st.pos = point_from(s);
    st.departures = s.at("departures").get<std::vector<double>>();
    inst.stations.push_back(std::move(st));
  }
  for (const auto& c : j.at("chargers")) {
    inst.chargers.push_back({point_from(c), c.at("alpha").get<double>()});
  }
  for (const auto& v : j.at("vehicles")) {
    inst.vehicles.push_back({v.at("Q").get<int>(), v.at("B_cap").get<double>(),
                             v.at("E_init").get<double>(), v.at("E_min").get<double>(),
                             v.at("E_max").get<double>(), v.at("beta").get<double>()});
  }
  for (const auto& r : j.at("requests")) {
    Request rq;
    rq.origin = point_from(r.at("origin"));
    rq.passengers = r.at("g").get<int>();
    rq.station = r.at("station").get<int>();
    rq.departure = r.at("departure").get<double>();
    inst.requests.push_back(std::move(rq));
  }
  const auto& w = j.at("weights");
  inst.weights = {w.at("lambda1").get<double>(), w.at("lambda2").get<double>(),
                  w.at("lambda3").get<double>(), w.at("omega").get<double>()};
  inst.walk_speed = j.at("walk_speed").get<double>();
  inst.bus_speed = j.at("bus_speed").get<double>();
  inst.buffer = j.at("buffer").get<double>();
  inst.detour_factor = j.at("detour_factor").get<double>();
  inst.w_max = j.at("w_max").get<double>();
  inst.service_time = j.at("service_time").get<double>();
  inst.rebuild_reachability();
  inst.check();
  return inst;
}

Instance load_instance(const std::string& path) {
  return instance_from_json(read_file(path));
}

void save_instance(const Instance& inst, const std::string& path) {
  write_file_atomic(path, instance_to_json(inst));
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp);
    out << content;
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace feedopt
