#include "tensor.h"

#include <cmath>

bool operator==(tensor_t const& lhs, tensor_t const& rhs) {
  return lhs.bound == rhs.bound && lhs.values == rhs.values;
}

double max_rel_err(tensor_t const& got, tensor_t const& expect) {
  if(got.bound != expect.bound) {
    throw plan_error_t("max_rel_err: bounds differ");
  }
  double ret = 0.0;
  for(size_t i = 0; i != got.values.size(); ++i) {
    double denom = std::max(1.0, std::abs(expect.values[i]));
    ret = std::max(ret, std::abs(got.values[i] - expect.values[i]) / denom);
  }
  return ret;
}
