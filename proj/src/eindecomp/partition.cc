#include "partition.h"

bool is_power_of_two(int64_t x) {
  return x > 0 && (x & (x - 1)) == 0;
}

int64_t join_cardinality(labels_t const& lx, labels_t const& ly, shape_t const& d) {
  labels_t lxy = lx;
  lxy.insert(lxy.end(), ly.begin(), ly.end());
  if(d.size() != lxy.size()) {
    throw plan_error_t("join_cardinality: d must be indexed by the joint label list");
  }
  labels_t dls = concat_distinct(lx, ly);
  int64_t ret = 1;
  for(auto const& l: dls) {
    optional<int64_t> dl;
    for(size_t i = 0; i != lxy.size(); ++i) {
      if(lxy[i] == l) {
        if(dl && *dl != d[i]) {
          throw plan_error_t(
            "join_cardinality: label '" + l + "' is not co-partitioned");
        }
        dl = d[i];
      }
    }
    ret *= *dl;
  }
  return ret;
}

uint64_t count_partitionings(int64_t n_balls, int64_t n_buckets) {
  if(n_balls < 0 || n_buckets < 1) {
    throw plan_error_t("count_partitionings: need n >= 0 and d >= 1");
  }
  // binomial(n_balls + n_buckets - 1, n_buckets - 1)
  uint64_t n = uint64_t(n_balls + n_buckets - 1);
  uint64_t k = uint64_t(n_buckets - 1);
  k = std::min(k, n - k);
  uint64_t ret = 1;
  for(uint64_t i = 1; i <= k; ++i) {
    // exact at each step: ret is binomial(n - k + i - 1, i - 1) * (n - k + i)
    ret = ret * (n - k + i) / i;
  }
  return ret;
}

shape_t output_partition(shape_t const& d, labels_t const& lz, labels_t const& lxy) {
  return project(d, lz, lxy);
}

viable_set_t viable(einsum_expr_t const& expr, int64_t p, shape_t const& b_xy) {
  if(!is_power_of_two(p)) {
    throw plan_error_t("viable: p must be a power of two");
  }
  labels_t lxy = expr.xy_labels();
  labels_t dls = expr.distinct_labels();
  shape_t dls_bound = project(b_xy, dls, lxy);

  int n_balls = 0;
  while((int64_t(1) << n_balls) < p) { n_balls++; }

  viable_set_t ret { p, {} };

  // Exponent per distinct label, recursing in ascending order so the
  // expanded vectors come out lexicographically sorted.
  vector<int> exps(dls.size(), 0);
  auto emit = [&] {
    shape_t d(lxy.size());
    for(size_t i = 0; i != lxy.size(); ++i) {
      for(size_t j = 0; j != dls.size(); ++j) {
        if(dls[j] == lxy[i]) {
          d[i] = int64_t(1) << exps[j];
        }
      }
    }
    ret.vectors.push_back(std::move(d));
  };
  auto rec = [&](auto&& self, size_t at, int remaining) -> void {
    if(at + 1 == dls.size()) {
      int64_t val = int64_t(1) << remaining;
      if(dls_bound[at] % val == 0) {
        exps[at] = remaining;
        emit();
      }
      return;
    }
    for(int e = 0; e <= remaining; ++e) {
      int64_t val = int64_t(1) << e;
      if(dls_bound[at] % val != 0) {
        break;
      }
      exps[at] = e;
      self(self, at + 1, remaining - e);
    }
  };
  if(dls.empty()) {
    if(p == 1) {
      ret.vectors.push_back(shape_t {});
    }
  } else {
    rec(rec, 0, n_balls);
  }
  return ret;
}

int64_t fallback_p(einsum_expr_t const& expr, int64_t p, shape_t const& b_xy) {
  if(!is_power_of_two(p)) {
    throw plan_error_t("fallback_p: p must be a power of two");
  }
  for(int64_t q = p; q > 1; q /= 2) {
    if(!viable(expr, q, b_xy).vectors.empty()) {
      return q;
    }
  }
  return 1;
}
