#pragma once

#include "ops.h"
#include "indexing.h"

// One declarative operation: a join (or unary map) of labeled inputs
// followed by an optional aggregation over the labels absent from the
// output. No broadcasts: every output label must occur in some input.
struct einsum_expr_t {
  labels_t out_labels;          // ℓ_Z
  vector<labels_t> in_labels;   // ℓ_X [, ℓ_Y]
  optional<join_op_t> join;     // set iff binary
  optional<unary_op_t> map;     // set iff unary
  optional<agg_op_t> agg;       // present iff agg labels nonempty

  static einsum_expr_t binary(
    labels_t out, labels_t lx, labels_t ly,
    join_op_t join, optional<agg_op_t> agg);
  static einsum_expr_t unary(
    labels_t out, labels_t lx,
    unary_op_t map, optional<agg_op_t> agg);

  bool is_binary() const { return in_labels.size() == 2; }

  // ℓ_XY: input label lists concatenated, repeats kept.
  labels_t xy_labels() const;
  // ℓ_X ⊙ ℓ_Y (or just ℓ_X when unary).
  labels_t distinct_labels() const;
  // Labels in inputs but not in the output, in distinct order.
  labels_t agg_labels() const;

  // Checks label structure (and that agg presence matches agg labels).
  void validate() const;
  // Checks bound consistency over ℓ_XY and returns b_Z.
  shape_t infer_out_bound(shape_t const& b_xy) const;

  string str() const;
};

bool operator==(einsum_expr_t const& lhs, einsum_expr_t const& rhs);

// Graph vertex: (bound, EinSum, inputs). Inputs are ordered; expr is
// absent exactly when the vertex is an input to the computation.
struct ein_vertex_t {
  string name;
  shape_t bound;
  optional<einsum_expr_t> expr;
  vector<int> inputs;
};

struct eingraph_t {
  vector<ein_vertex_t> vertices;
  vector<int> outputs;

  bool is_input(int vid) const { return !vertices[vid].expr.has_value(); }

  // Concatenated input bounds for the expression at vid.
  shape_t bxy(int vid) const;

  int find(string const& name) const;            // -1 when absent
  vector<vector<int>> consumers() const;         // per vertex, with multiplicity

  // Checks acyclicity, arity, label/bound consistency and that every
  // non-input bound equals the inferred one.
  void validate() const;
};

// Deterministic topological order: every vertex after all its inputs,
// ties broken by ascending vertex id. Throws plan_error_t naming a
// cycle if there is one.
vector<int> topo_order(eingraph_t const& graph);

// Incremental construction with bound inference.
struct graph_builder_t {
  int add_input(string const& name, shape_t const& bound);
  int add_einsum(string const& name, einsum_expr_t const& expr, vector<int> const& inputs);

  // Numerically-stable softmax over the last dimension, batched across
  // the rest: max-reduce, subtract, exponentiate, sum-reduce, divide.
  // Returns the final (divide) vertex. Requires rank >= 1.
  int add_softmax(string const& name, int inn);

  eingraph_t finish(vector<string> const& output_names) const;
  eingraph_t finish(vector<int> const& output_ids) const;

  eingraph_t graph;
};
