#pragma once

#include "decomp.h"
#include "tra.h"

// A task graph exploded into the fine-grained dataflow graph that
// actually runs: one join-kernel vertex per kernel call, plus
// refinement vertices that fuse the aggregation of join tuples with the
// formation of each consumer chunk (the producer's aggregation and the
// repartition to the consumer happen at one vertex).

enum class exec_kind_t { input_chunk, join_kernel, refinement };

struct exec_vertex_t {
  int id;
  exec_kind_t kind;

  // eingraph bookkeeping:
  //   owner    - the vertex whose placement step places this one
  //   producer - whose data it carries (itself for joins/input chunks)
  //   consumer - for refinements, the expression being fed; -1 for the
  //              final layer that materializes a graph output or sink
  //   slot     - consumer input position; -1 when not applicable
  int owner;
  int producer;
  int consumer;
  int slot;

  shape_t key;          // chunk key this vertex produces
  shape_t chunk_bound;  // bound of the produced chunk
  int64_t fp;           // scalar op count
  int64_t sz;           // produced element count
  vector<int> deps;     // fixed order; refinements combine in this order
};

struct exec_graph_t {
  task_graph_t tg;
  vector<exec_vertex_t> vertices;

  vector<vector<int>> outs;                  // adjacency, from deps

  map<int, vector<int>> input_chunks_of;     // input vertex -> ids, lex key order
  map<int, vector<int>> joins_of;            // expr vertex -> ids, lex key order
  map<int, vector<int>> refinements_of;      // owner expr -> owned refinement ids
  map<int, vector<int>> input_refines_of;    // consumer expr -> input-side refinement ids
  map<int, vector<int>> output_refines_of;   // output/sink expr -> final-layer ids

  bool edge(int u, int v) const;
};

exec_graph_t explode(task_graph_t const& tg);

// The unique partition of producer join tuples and consumer-side
// refinements into join groups: each tuple in exactly one group,
// grouped together exactly when lineage connects them (connected
// components of the bipartite lineage graph).
struct join_groups_t {
  // (join vertex ids, refinement vertex ids), both ascending; groups
  // ordered by their smallest join id
  vector<pair<vector<int>, vector<int>>> groups;
};

join_groups_t compute_join_groups(
  exec_graph_t const& exec, vector<int> const& t1, vector<int> const& t2);

// Per-edge variant: groups between producer's joins and the refinements
// feeding one consumer.
join_groups_t compute_join_groups(exec_graph_t const& exec, int producer, int consumer);
