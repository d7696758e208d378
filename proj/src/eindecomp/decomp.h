#pragma once

#include "cost.h"

// Dynamic programming over (vertex, output partitioning) states. Each
// entry holds the best cost of computing the subgraph up to the vertex
// with that output partitioning, the d achieving it, and the input
// partitionings it assumed.
struct dp_entry_t {
  cost_t cost;
  shape_t d;                    // over ℓ_XY of the vertex's expression
  vector<shape_t> input_parts;  // per input slot
};

struct dp_table_t {
  map<int, map<shape_t, dp_entry_t>> m;
};

// An eingraph with a chosen partition vector per expression vertex and
// a storage partition per input vertex.
struct task_graph_t {
  eingraph_t graph;
  vector<shape_t> d;        // exprs: over ℓ_XY; inputs: storage partition
  vector<int64_t> p_used;   // per expr vertex, after fallback
  cost_t objective;         // the optimizer's (path-local) total

  shape_t out_partition(int vid) const;
  // The partition the expression at vid wants its slot'th input in.
  shape_t required_input_partition(int vid, int slot) const;
};

// Vertex-disjoint chains covering every non-input vertex, longest
// first; ties by smallest starting id, then lexicographic vertex ids.
using path_cover_t = vector<vector<int>>;
path_cover_t linearize(eingraph_t const& graph);

// Exact optimization for graphs where no expression vertex has more
// than one consumer. Inputs come for free in any storage partitioning
// with total chunk count at most input_divisor_cap (default p).
// Throws plan_error_t telling the caller to use optimize_dag when a
// vertex has several consumers.
pair<task_graph_t, dp_table_t> optimize_tree(
  eingraph_t const& graph, int64_t p, optional<int64_t> input_divisor_cap = std::nullopt);

// Path-by-path approximation for general DAGs: per path, the chain DP
// counts only edges along the path; inputs arriving from off the path
// contribute neither compute nor repartition cost. Earlier paths' labels
// are left untouched by later ones.
task_graph_t optimize_dag(eingraph_t const& graph, int64_t p);

// Every power-of-two divisor vector of bound with chunk count <= cap,
// in lexicographic order. The storage partitionings considered for
// graph inputs.
vector<shape_t> divisor_partitions(shape_t const& bound, int64_t cap);

// Per-edge repartition costs of a labeled task graph, including the
// cross-path edges the optimizer ignored: (producer, consumer, slot,
// cost). Inputs count only where their stored partition disagrees.
struct repart_edge_t {
  int src;
  int dst;
  int slot;
  cost_t cost;
};
vector<repart_edge_t> repart_edges(task_graph_t const& tg);
