#pragma once

#include "tensor.h"

// A tensor relation: a set of (key, chunk) pairs. Keys enumerate I(part)
// lexicographically. For a relation storing a tensor, every chunk has
// bound = bound / part (elementwise) and the chunk at key k holds the
// elements with global index k * (bound / part) + local.
//
// The output of a join is also carried in this shape, with keys over the
// distinct join labels; its chunks then span only the output labels, so
// chunk rank and key rank may differ until the aggregation re-keys it.
struct tensor_relation_t {
  shape_t bound;
  shape_t part;
  map<shape_t, tensor_t> chunks;

  shape_t chunk_bound() const;  // bound / part
};

bool operator==(tensor_relation_t const& lhs, tensor_relation_t const& rhs);

// Requires every part entry to divide its bound entry; uneven chunking
// is rejected, not padded.
void check_divides(shape_t const& part, shape_t const& bound);

tensor_relation_t chunk(tensor_t const& t, shape_t const& d);

// Inverse of chunk; throws on a missing chunk.
tensor_t assemble(tensor_relation_t const& r);

// True iff t[j] = r^{j / d}_{j mod d} at every global index j.
bool equivalent(tensor_t const& t, tensor_relation_t const& r);

tensor_relation_t tra_repartition(tensor_relation_t const& r, shape_t const& d_new);
