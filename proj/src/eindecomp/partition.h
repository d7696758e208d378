#pragma once

#include "einsum.h"

// Number of kernel calls induced by d: the product of d over the
// distinct labels (repeated labels carry a join predicate and do not
// multiply). d is indexed by ℓ_XY; for a unary expression ly is empty
// and every label counts. Throws plan_error_t if entries sharing a
// label differ.
int64_t join_cardinality(labels_t const& lx, labels_t const& ly, shape_t const& d);

// Ways to drop n_balls doubling-steps into n_buckets dimensions:
// binomial(N + D - 1, D - 1), exact.
uint64_t count_partitionings(int64_t n_balls, int64_t n_buckets);

// d_Z = d[ℓ_Z; ℓ_XY].
shape_t output_partition(shape_t const& d, labels_t const& lz, labels_t const& lxy);

// All partition vectors over ℓ_XY with power-of-two entries,
// co-partitioned shared labels, entries dividing the bounds, and join
// cardinality exactly p. Lexicographic order, no duplicates. May be
// empty when the bounds are too small; see fallback_p.
struct viable_set_t {
  int64_t p;
  vector<shape_t> vectors;  // each over ℓ_XY
};

viable_set_t viable(einsum_expr_t const& expr, int64_t p, shape_t const& b_xy);

// Largest power of two p' <= p with a nonempty viable set; at least 1.
int64_t fallback_p(einsum_expr_t const& expr, int64_t p, shape_t const& b_xy);

bool is_power_of_two(int64_t x);
