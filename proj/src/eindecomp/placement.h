#pragma once

#include "execgraph.h"

// Assignment of exec vertices to machines, built greedily one einsum at
// a time. Scored by the most expensive site: per machine, alpha times
// its scalar-op count plus every chunk crossing its boundary in either
// direction (unplaced neighbors count nothing).
struct placement_t {
  int64_t n_machines;
  double alpha;
  vector<int> machine_of;   // per exec vertex id; -1 while unplaced

  bool placed(int vid) const { return machine_of[vid] >= 0; }
};

double placement_cost(placement_t const& p, exec_graph_t const& exec);

// The round-robin assignment vectors considered for a join group: one
// block of L machines, then aligned blocks of L/2, L/4, ... down to 1,
// skipping widths larger than num_joins. At most 2L - 1 vectors.
vector<vector<int>> enumerate_placements(int64_t n_machines, int64_t num_joins);

// Tries every enumerated assignment of the join vertices g1; under
// each, greedily places every refinement in g2 at the machine
// minimizing the cost (ties to the lowest machine id); keeps the first
// assignment achieving the minimum.
placement_t do_assign(
  placement_t p, exec_graph_t const& exec,
  vector<int> const& g1, vector<int> const& g2);

// Partitions one einsum's join vertices v1 and refinements v2 into join
// groups and runs do_assign per group.
placement_t handle_new_einsum(
  placement_t p, exec_graph_t const& exec,
  vector<int> const& v1, vector<int> const& v2);

// Inputs round-robin in lexicographic key order, then each einsum in
// topological order via handle_new_einsum.
placement_t place_all(exec_graph_t const& exec, int64_t n_machines, double alpha);
