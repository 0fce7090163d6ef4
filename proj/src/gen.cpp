#include "feedopt/gen.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <json.hpp>

#include "feedopt/rng.hpp"

namespace feedopt {

using ordered_json = nlohmann::ordered_json;

bool AreaSpec::contains(const Point& p) const {
  if (kind == Kind::rect)
    return p.x >= x0 - kTol && p.x <= x1 + kTol && p.y >= y0 - kTol && p.y <= y1 + kTol;
  const double r = std::hypot(p.x - cx, p.y - cy);
  return r >= r_inner - kTol && r <= r_outer + kTol;
}

namespace {

std::vector<Point> grid_points(const AreaSpec& region, double sep) {
  std::vector<Point> pts;
  double cx = 0, cy = 0, reach = 0;
  if (region.kind == AreaSpec::Kind::rect) {
    cx = (region.x0 + region.x1) / 2;
    cy = (region.y0 + region.y1) / 2;
    reach = std::max(region.x1 - region.x0, region.y1 - region.y0);
  } else {
    cx = region.cx;
    cy = region.cy;
    reach = 2 * region.r_outer;
  }
  const int span = static_cast<int>(std::ceil(reach / sep)) + 1;
  for (int j = -span; j <= span; ++j)
    for (int i = -span; i <= span; ++i) {
      const Point p{cx + i * sep, cy + j * sep};
      if (region.contains(p)) pts.push_back(p);
    }
  return pts;
}

Point sample_point(const AreaSpec& area, Rng& rng) {
  if (area.kind == AreaSpec::Kind::rect) {
    return {area.x0 + rng.uniform() * (area.x1 - area.x0),
            area.y0 + rng.uniform() * (area.y1 - area.y0)};
  }
  for (int tries = 0; tries < 10000; ++tries) {
    const double x = area.cx - area.r_outer + rng.uniform() * 2 * area.r_outer;
    const double y = area.cy - area.r_outer + rng.uniform() * 2 * area.r_outer;
    if (area.contains({x, y})) return {x, y};
  }
  throw std::runtime_error("degenerate service area");
}

double gauss(Rng& rng) {
  // Box-Muller with draws from the session stream
  const double u1 = std::max(rng.uniform(), 1e-12);
  const double u2 = rng.uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

}  // namespace

Instance generate(const ScenarioSpec& spec, GenerationReport* report) {
  Rng rng(spec.seed);
  Instance inst;
  inst.horizon = spec.horizon;
  inst.depot = spec.depot;
  inst.walk_speed = spec.walk_speed;
  inst.bus_speed = spec.bus_speed;
  inst.buffer = spec.buffer;
  inst.detour_factor = spec.detour;
  inst.w_max = spec.w_max;
  inst.service_time = spec.service_time;
  inst.weights = spec.weights;
  inst.chargers = spec.chargers;

  const AreaSpec mp_region = spec.mp_region.value_or(spec.area);
  inst.meeting_points = grid_points(mp_region, spec.mp_sep);

  for (const auto& st : spec.stations) {
    Station s;
    s.pos = st.pos;
    for (double t = st.first; t <= st.last + kTol; t += st.headway) s.departures.push_back(t);
    inst.stations.push_back(std::move(s));
  }

  for (const auto& f : spec.fleet) {
    for (int i = 0; i < f.count; ++i) {
      Vehicle v;
      v.capacity = f.capacity;
      v.battery_kwh = f.battery_kwh;
      v.beta_kwh_per_km = f.beta_kwh_per_km;
      v.e_min_kwh = spec.e_min_share * f.battery_kwh;
      v.e_max_kwh = spec.e_max_share * f.battery_kwh;
      inst.vehicles.push_back(v);
    }
  }
  for (std::size_t i = 0; i < inst.vehicles.size(); ++i) {
    auto& v = inst.vehicles[i];
    double pct = 0;
    switch (spec.e_init.kind) {
      case EInitSpec::Kind::cycle:
        pct = spec.e_init.percents[i % spec.e_init.percents.size()];
        break;
      case EInitSpec::Kind::uniform:
        pct = spec.e_init.lo + rng.uniform() * (spec.e_init.hi - spec.e_init.lo);
        break;
      case EInitSpec::Kind::fixed:
        pct = spec.e_init.fixed;
        break;
    }
    v.e_init_kwh = std::clamp(pct / 100.0 * v.battery_kwh, v.e_min_kwh, v.e_max_kwh);
  }

  for (int c = 0; c < spec.customers; ++c) {
    Request r;
    r.origin = sample_point(spec.area, rng);
    r.passengers = spec.passengers_per_request;
    r.station = rng.uniform_int(0, static_cast<int>(inst.stations.size()) - 1);
    const auto& deps = inst.stations[r.station].departures;
    if (spec.demand.kind == DemandSpec::Kind::uniform) {
      r.departure = deps[rng.uniform_int(0, static_cast<int>(deps.size()) - 1)];
    } else {
      const double t = spec.demand.center + spec.demand.sigma * gauss(rng);
      double best = deps[0];
      for (double d : deps)
        if (std::abs(d - t) < std::abs(best - t)) best = d;
      r.departure = best;
    }
    inst.requests.push_back(std::move(r));
  }
  inst.rebuild_reachability();
  inst.check();
  if (report) {
    report->mp_count = static_cast<int>(inst.meeting_points.size());
    for (std::size_t r = 0; r < inst.requests.size(); ++r)
      if (inst.requests[r].reachable.empty())
        report->unreachable_requests.push_back(static_cast<int>(r));
  }
  return inst;
}

int suggest_fleet_size(const ScenarioSpec& spec) {
  // peak-slot passenger demand divided by 70 % of the mean capacity
  double avg_cap = 0;
  int n = 0;
  for (const auto& f : spec.fleet) {
    avg_cap += f.capacity * f.count;
    n += f.count;
  }
  if (n == 0) return 1;
  avg_cap /= n;
  const double pax = static_cast<double>(spec.customers) * spec.passengers_per_request;
  double slots = 0;
  for (const auto& st : spec.stations)
    slots += std::floor((st.last - st.first) / st.headway) + 1;
  const double peak_share = spec.demand.kind == DemandSpec::Kind::uniform
                                ? 1.0 / std::max(1.0, slots)
                                : 0.25;  // concentrated profiles load one slot band
  return std::max(1, static_cast<int>(std::ceil(pax * peak_share / (0.7 * avg_cap))));
}

std::string GenerationReport::to_json() const {
  ordered_json j;
  j["format"] = "feedopt-generation-report";
  j["mp_count"] = mp_count;
  j["unreachable_requests"] = unreachable_requests;
  return j.dump(2) + "\n";
}

namespace {

ordered_json area_json(const AreaSpec& a) {
  if (a.kind == AreaSpec::Kind::rect)
    return {{"kind", "rect"}, {"x0", a.x0}, {"y0", a.y0}, {"x1", a.x1}, {"y1", a.y1}};
  return {{"kind", "ring"}, {"cx", a.cx}, {"cy", a.cy}, {"r_inner", a.r_inner},
          {"r_outer", a.r_outer}};
}

AreaSpec area_from(const ordered_json& j) {
  AreaSpec a;
  if (j.at("kind") == "rect") {
    a.kind = AreaSpec::Kind::rect;
    a.x0 = j.at("x0");
    a.y0 = j.at("y0");
    a.x1 = j.at("x1");
    a.y1 = j.at("y1");
  } else {
    a.kind = AreaSpec::Kind::ring;
    a.cx = j.at("cx");
    a.cy = j.at("cy");
    a.r_inner = j.at("r_inner");
    a.r_outer = j.at("r_outer");
  }
  return a;
}

}  // namespace

std::string scenario_to_json(const ScenarioSpec& s) {
  ordered_json j;
  j["format"] = "feedopt-scenario";
  j["version"] = 1;
  j["name"] = s.name;
  j["seed"] = s.seed;
  j["customers"] = s.customers;
  j["passengers_per_request"] = s.passengers_per_request;
  j["horizon"] = s.horizon;
  j["area"] = area_json(s.area);
  j["mp_sep"] = s.mp_sep;
  if (s.mp_region) j["mp_region"] = area_json(*s.mp_region);
  j["depot"] = {{"x", s.depot.x}, {"y", s.depot.y}};
  j["stations"] = ordered_json::array();
  for (const auto& st : s.stations)
    j["stations"].push_back({{"x", st.pos.x},
                             {"y", st.pos.y},
                             {"first", st.first},
                             {"last", st.last},
                             {"headway", st.headway}});
  j["chargers"] = ordered_json::array();
  for (const auto& c : s.chargers)
    j["chargers"].push_back({{"x", c.pos.x}, {"y", c.pos.y}, {"alpha", c.alpha_kwh_per_min}});
  j["fleet"] = ordered_json::array();
  for (const auto& f : s.fleet)
    j["fleet"].push_back({{"count", f.count},
                          {"Q", f.capacity},
                          {"B_cap", f.battery_kwh},
                          {"beta", f.beta_kwh_per_km}});
  switch (s.e_init.kind) {
    case EInitSpec::Kind::cycle:
      j["e_init"] = {{"kind", "cycle"}, {"percents", s.e_init.percents}};
      break;
    case EInitSpec::Kind::uniform:
      j["e_init"] = {{"kind", "uniform"}, {"lo", s.e_init.lo}, {"hi", s.e_init.hi}};
      break;
    case EInitSpec::Kind::fixed:
      j["e_init"] = {{"kind", "fixed"}, {"percent", s.e_init.fixed}};
      break;
  }
  j["e_max_share"] = s.e_max_share;
  j["e_min_share"] = s.e_min_share;
  j["demand"] = s.demand.kind == DemandSpec::Kind::uniform
                    ? ordered_json{{"kind", "uniform"}}
                    : ordered_json{{"kind", "peak"},
                                   {"center", s.demand.center},
                                   {"sigma", s.demand.sigma}};
  j["w_max"] = s.w_max;
  j["walk_speed"] = s.walk_speed;
  j["bus_speed"] = s.bus_speed;
  j["buffer"] = s.buffer;
  j["detour"] = s.detour;
  j["service_time"] = s.service_time;
  j["weights"] = {{"lambda1", s.weights.lambda1},
                  {"lambda2", s.weights.lambda2},
                  {"lambda3", s.weights.lambda3},
                  {"omega", s.weights.omega}};
  return j.dump(2) + "\n";
}

ScenarioSpec scenario_from_json(const std::string& text) {
  const auto j = ordered_json::parse(text);
  if (j.at("format") != "feedopt-scenario")
    throw std::runtime_error("not a feedopt scenario file");
  ScenarioSpec s;
  s.name = j.at("name");
  s.seed = j.at("seed");
  s.customers = j.at("customers");
  s.passengers_per_request = j.value("passengers_per_request", 1);
  s.horizon = j.at("horizon");
  s.area = area_from(j.at("area"));
  s.mp_sep = j.at("mp_sep");
  if (j.contains("mp_region")) s.mp_region = area_from(j.at("mp_region"));
  s.depot = {j.at("depot").at("x"), j.at("depot").at("y")};
  for (const auto& st : j.at("stations"))
    s.stations.push_back({{st.at("x"), st.at("y")}, st.at("first"), st.at("last"),
                          st.at("headway")});
  for (const auto& c : j.at("chargers"))
    s.chargers.push_back({{c.at("x"), c.at("y")}, c.at("alpha")});
  for (const auto& f : j.at("fleet"))
    s.fleet.push_back({f.at("count"), f.at("Q"), f.at("B_cap"), f.at("beta")});
  const auto& e = j.at("e_init");
  if (e.at("kind") == "cycle") {
    s.e_init.kind = EInitSpec::Kind::cycle;
    s.e_init.percents = e.at("percents").get<std::vector<double>>();
  } else if (e.at("kind") == "uniform") {
    s.e_init.kind = EInitSpec::Kind::uniform;
    s.e_init.lo = e.at("lo");
    s.e_init.hi = e.at("hi");
  } else {
    s.e_init.kind = EInitSpec::Kind::fixed;
    s.e_init.fixed = e.at("percent");
  }
  s.e_max_share = j.at("e_max_share");
  s.e_min_share = j.at("e_min_share");
  const auto& d = j.at("demand");
  if (d.at("kind") == "peak") {
    s.demand.kind = DemandSpec::Kind::peak;
    s.demand.center = d.at("center");
    s.demand.sigma = d.at("sigma");
  }
  s.w_max = j.at("w_max");
  s.walk_speed = j.at("walk_speed");
  s.bus_speed = j.at("bus_speed");
  s.buffer = j.at("buffer");
  s.detour = j.at("detour");
  s.service_time = j.at("service_time");
  const auto& w = j.at("weights");
  s.weights = {w.at("lambda1"), w.at("lambda2"), w.at("lambda3"), w.at("omega")};
  return s;
}

ScenarioSpec load_scenario(const std::string& path) {
  return scenario_from_json(read_file(path));
}

std::string Kpis::to_json() const {
  ordered_json j;
  j["format"] = "feedopt-kpis";
  j["vehicles_used"] = vehicles_used;
  j["service_rate_pct"] = service_rate_pct;
  j["mean_walk_km"] = mean_walk_km;
  j["mean_ivt_min"] = mean_ivt_min;
  j["mean_station_wait_min"] = mean_station_wait_min;
  j["total_kmt"] = total_kmt;
  j["cus_per_kmt"] = cus_per_kmt;
  j["cus_per_mp"] = cus_per_mp;
  j["total_charging_min"] = total_charging_min;
  return j.dump(2) + "\n";
}

Kpis kpis(const Solution& sol, const SolveContext& ctx) {
  const auto& g = *ctx.graph;
  Kpis k;
  k.vehicles_used = sol.vehicles_used();
  const int total = static_cast<int>(ctx.inst->requests.size());
  const int served = total - sol.unserved_requests(ctx);
  k.service_rate_pct = total ? 100.0 * served / total : 0.0;

  double walk = 0, ivt = 0;
  int station_visits = 0;
  double wait = 0;
  std::vector<char> mp_used(g.nodes.size(), 0);
  for (std::size_t gi = 0; gi < ctx.groups.size(); ++gi) {
    if (sol.group_vehicle[gi] < 0) continue;
    const auto& grp = ctx.groups[gi];
    mp_used[grp.mp_node] = 1;
    for (int r : grp.requests) {
      for (const auto& wa : g.walk_arcs[r])
        if (wa.node == grp.mp_node) walk += wa.walk_km;
    }
    // ride time of the group, from the cached schedule
    const auto& rs = sol.sched[sol.group_vehicle[gi]];
    for (std::size_t i = 1; i + 1 < rs.nodes.size(); ++i)
      if (rs.nodes[i] == grp.mp_node)
        ivt += rs.ride[i] * static_cast<double>(grp.requests.size());
  }
  for (std::size_t v = 0; v < sol.routes.size(); ++v) {
    const auto& rs = sol.sched[v];
    for (std::size_t i = 1; i + 1 < rs.nodes.size(); ++i)
      if (g.nodes[rs.nodes[i]].kind == NodeKind::station) {
        ++station_visits;
        wait += rs.W[i];
      }
    for (std::size_t i = 1; i < rs.nodes.size(); ++i)
      k.total_kmt += g.dist_km(rs.nodes[i - 1], rs.nodes[i]);
    for (std::size_t i = 0; i < sol.routes[v].size(); ++i)
      if (g.nodes[sol.routes[v][i].node].kind == NodeKind::charger)
        k.total_charging_min += sol.routes[v][i].tau;
  }
  int mps_active = 0;
  for (char u : mp_used) mps_active += u;
  k.mean_walk_km = served ? walk / served : 0;
  k.mean_ivt_min = served ? ivt / served : 0;
  k.mean_station_wait_min = station_visits ? wait / station_visits : 0;
  k.cus_per_kmt = k.total_kmt > 0 ? served / k.total_kmt : 0;
  k.cus_per_mp = mps_active ? static_cast<double>(served) / mps_active : 0;
  return k;
}

}  // namespace feedopt
