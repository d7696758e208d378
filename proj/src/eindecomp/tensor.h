#pragma once

#include "indexing.h"

// Dense row-major tensor of doubles. A rank-0 tensor holds one value.
struct tensor_t {
  shape_t bound;
  vector<double> values;

  static tensor_t zeros(shape_t const& bound) {
    return tensor_t { bound, vector<double>(size_t(product(bound)), 0.0) };
  }

  double& at(shape_t const& idx) {
    return values[size_t(flatten(idx, bound))];
  }
  double const& at(shape_t const& idx) const {
    return values[size_t(flatten(idx, bound))];
  }

  int64_t nelem() const { return int64_t(values.size()); }
};

bool operator==(tensor_t const& lhs, tensor_t const& rhs);

// max over elements of |x - y| / max(1, |y|); bounds must match.
double max_rel_err(tensor_t const& got, tensor_t const& expect);
