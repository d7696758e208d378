#pragma once

#include "setup.h"

// Index algebra over bound vectors and label lists.
//
// A bound vector b of rank r spans the index set
//   I(b) = {0..b[0]-1} x ... x {0..b[r-1]-1}
// enumerated lexicographically throughout.

// Row-major strides for a bound.
shape_t strides(shape_t const& bound);

// Row-major offset of idx within bound.
int64_t flatten(shape_t const& idx, shape_t const& bound);

// Lexicographic odometer; idx must start all-zero. Returns false once
// idx has wrapped past the last index. A rank-0 bound has the single
// index [] and yields false immediately.
bool next_index(shape_t& idx, shape_t const& bound);

// b[l1; l2]: for each label of l1, the entry of b at that label's first
// occurrence in l2. Throws plan_error_t on an unknown label.
shape_t project(shape_t const& b, labels_t const& l1, labels_t const& l2);

// Positions used by project: first occurrence of each l1 label in l2.
vector<int> label_positions(labels_t const& l1, labels_t const& l2);

// l1 ⊙ l2: concatenation with duplicates removed, keeping the left
// (first) occurrence's position.
labels_t concat_distinct(labels_t const& l1, labels_t const& l2);

bool contains_label(labels_t const& ls, string const& l);
