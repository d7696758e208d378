#pragma once

#include "partition.h"

// Transfer upper bounds, counted in floating point numbers moved. These
// are the currency the optimizer minimizes; the simulator audits its
// measured transfers against them.
using cost_t = int64_t;

// N * (n_X + n_Y): every kernel call receives one sub-tensor copy from
// the left and one from the right. For a unary expression (ly empty)
// this is N * n_X.
cost_t cost_join(
  shape_t const& d, labels_t const& lx, labels_t const& ly, shape_t const& b_xy);

// (N / n_agg) * (n_agg - 1) * n_Z: each group of n_agg sub-tensors is
// gathered at one site that already holds one of them. Zero when
// nothing is aggregated.
cost_t cost_agg(
  shape_t const& d, labels_t const& l_agg, labels_t const& lz,
  labels_t const& lxy, shape_t const& b_xy);

// Producer partitioned by d_prod feeding a consumer that wants d_cons,
// over a tensor with bound b. Zero when the partitions match.
cost_t cost_repart(shape_t const& d_cons, shape_t const& d_prod, shape_t const& b);

// cost_join + cost_agg for one expression under d.
cost_t einsum_cost(einsum_expr_t const& expr, shape_t const& d, shape_t const& b_xy);
