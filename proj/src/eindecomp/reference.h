#pragma once

#include "einsum.h"
#include "tensor.h"

// Dense brute-force evaluation of the whole graph: every expression is
// computed by direct nested loops over its full index space, in
// topological order. This is the correctness oracle for the
// tensor-relational path.
//
// inputs: one tensor per input vertex, matching bounds.
// Returns a tensor for every vertex. Division by zero raises
// eval_error_t naming the vertex.
map<int, tensor_t> eval_reference(eingraph_t const& graph, map<int, tensor_t> const& inputs);

// Evaluate one expression given its input tensors.
tensor_t eval_expr(
  einsum_expr_t const& expr,
  tensor_t const& x,
  tensor_t const* y,
  string const& vertex_name);
