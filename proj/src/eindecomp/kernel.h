#pragma once

#include "einsum.h"
#include "tensor.h"

// The inner einsum of the partitioned rewrite: the same expression, but
// with every bound divided by the partition vector. A kernel call takes
// one chunk per input and performs the intra-chunk join plus the
// intra-chunk part of the aggregation.
struct kernel_spec_t {
  einsum_expr_t expr;
  shape_t local_xy;   // b_XY / d, over ℓ_XY

  shape_t out_bound() const;        // (b_XY / d)[ℓ_Z; ℓ_XY]
  shape_t in_bound(int which) const;

  // Number of scalar join/map applications in one call: the product of
  // the chunk-local extents over the distinct labels.
  int64_t fp() const;
};

// f32 computes each scalar op in float precision (storage stays f64).
tensor_t kernel_eval(
  kernel_spec_t const& spec,
  tensor_t const& cx,
  tensor_t const* cy,
  bool f32 = false);
