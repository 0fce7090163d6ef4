#pragma once

#include "feedopt/pipeline.hpp"

namespace feedopt::test {

// Two-station grid world matching the benchmark family used across the
// tests: 7x7 meeting point grid at 1 km spacing, punctuated services every
// 20 minutes, two vehicle types, four chargers.
ScenarioSpec grid_spec(std::uint64_t seed, int customers, bool peak);

// Variant with a tight fleet and low batteries, used to force unserved
// customers and charging activity.
ScenarioSpec tight_spec(std::uint64_t seed, int customers, bool peak);

// Small world for exact-oracle comparisons: one or two stations with few
// services, 3x3 meeting point grid, up to two vehicles.
ScenarioSpec micro_spec(std::uint64_t seed, int customers, int vehicles, double e_init_pct);

// Ring-area case-study family (central station, 0.8 km grid in the ring).
ScenarioSpec ring_spec(std::uint64_t seed, int customers, int fleet_pairs);

// generate + build graph + assign + context in one go; fills a caller-owned
// World so the context's pointers stay valid
struct World {
  Instance inst;
  LayeredGraph graph;
  Assignment assignment;
  SolveContext ctx;
};
void make_world(const ScenarioSpec& spec, World& w, double rho = 1.0);

}  // namespace feedopt::test
