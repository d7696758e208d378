#pragma once

#include "placement.h"
#include "reference.h"

// Executes a placed exec graph over real chunks across simulated
// machines. Any machine may progress whenever one of its vertices has
// all dependencies resident; a remote dependency is transferred once
// per machine and cached. Results are interleaving-independent because
// every refinement combines its inputs in its fixed dependency order.

enum class sched_mode_t { round_robin, threaded };

struct machine_counters_t {
  int64_t fp = 0;
  int64_t sent = 0;
  int64_t received = 0;
};

// Measured transfers, attributed to the cost model's three steps.
struct transfer_audit_t {
  map<int, int64_t> join_in;   // einsum vertex -> floats into its joins
  map<int, int64_t> agg_in;    // einsum vertex -> sibling floats into refinements
  map<tuple<int,int,int>, int64_t> repart_in;  // (producer, consumer, slot)
};

struct run_report_t {
  vector<machine_counters_t> machines;
  int64_t total_transferred = 0;
  int64_t wall_steps = 0;
  double max_site_cost = 0.0;    // realized: alpha*fp + sent + received
  map<int, tensor_t> outputs;    // eingraph output vertex -> assembled tensor
  transfer_audit_t audit;
  bool checked = false;
  bool verified = false;
  double max_rel_error = 0.0;
};

struct exec_options_t {
  sched_mode_t mode = sched_mode_t::round_robin;
  bool f32 = false;
  bool corrupt = false;  // test hook: perturb one kernel output
};

run_report_t execute(
  exec_graph_t const& exec,
  placement_t const& placement,
  map<int, tensor_relation_t> const& inputs,
  exec_options_t const& options = {});

// Bound checks of the measured transfers against cost_join/cost_agg
// per einsum and cost_repart per edge. Returns human-readable
// violations; empty means the upper-bound property held.
vector<string> audit_violations(run_report_t const& report, exec_graph_t const& exec);

// parse-optimize-explode-place in one step
struct pipeline_t {
  eingraph_t graph;
  task_graph_t tg;
  exec_graph_t exec;
  placement_t placement;
};

pipeline_t build_pipeline(eingraph_t const& graph, int64_t p, int64_t n_machines, double alpha);

struct run_options_t {
  int64_t p = 4;
  int64_t n_machines = 2;
  double alpha = 0.01;
  bool check = false;
  double tolerance = 1e-10;
  exec_options_t exec;
};

// Chunks the inputs per the task graph, executes, assembles outputs,
// and (optionally) verifies against eval_reference.
run_report_t run_end_to_end(
  eingraph_t const& graph,
  map<int, tensor_t> const& inputs,
  run_options_t const& options,
  pipeline_t* out_pipeline = nullptr);

// Deterministic test inputs: integer-valued in [-4, 4] when every op in
// the graph is sum/mul (keeping results exactly representable),
// uniform [-1, 1) otherwise.
map<int, tensor_t> generate_inputs(eingraph_t const& graph, uint64_t seed);
