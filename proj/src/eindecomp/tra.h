#pragma once

#include "kernel.h"
#include "relation.h"

// The three-operator algebra executed in memory. run_einsum_tr is the
// join-then-aggregate composition that realizes one einsum over
// partitioned inputs; it is the semantic ground truth the optimizer and
// the dataflow executor are checked against.

// Joins rx and ry on shared labels; one output tuple per matching key
// pair, keyed by the natural-join key (left occurrence kept), holding
// kernel_eval of the pair. Inputs must be co-partitioned on shared
// labels.
tensor_relation_t tra_join(
  tensor_relation_t const& rx,
  tensor_relation_t const& ry,
  kernel_spec_t const& spec,
  labels_t const& lx,
  labels_t const& ly);

// Groups tuples on the positions of the kept labels and reduces each
// group's chunks elementwise, combining in lexicographic key order.
// Output keys are projected onto l_keep, in l_keep order. When
// l == l_keep this is the identity.
tensor_relation_t tra_aggregate(
  tensor_relation_t const& r,
  agg_op_t op,
  labels_t const& l,
  labels_t const& l_keep);

// Runs expr under partition vector d (over ℓ_XY). Requires
// rx.part = d[ℓ_X; ℓ_XY] and (when binary) ry.part = d[ℓ_Y; ℓ_XY];
// the result has part d[ℓ_Z; ℓ_XY]. ry is null for unary expressions.
tensor_relation_t run_einsum_tr(
  einsum_expr_t const& expr,
  shape_t const& b_xy,
  shape_t const& d,
  tensor_relation_t const& rx,
  tensor_relation_t const* ry);
