#include "cost.h"

static shape_t local_xy(shape_t const& b_xy, shape_t const& d) {
  if(b_xy.size() != d.size()) {
    throw plan_error_t("cost: d and b must both be indexed by the joint label list");
  }
  shape_t ret(d.size());
  for(size_t i = 0; i != d.size(); ++i) {
    ret[i] = b_xy[i] / d[i];
  }
  return ret;
}

cost_t cost_join(
  shape_t const& d, labels_t const& lx, labels_t const& ly, shape_t const& b_xy)
{
  labels_t lxy = lx;
  lxy.insert(lxy.end(), ly.begin(), ly.end());
  shape_t local = local_xy(b_xy, d);
  int64_t n = join_cardinality(lx, ly, d);
  int64_t n_x = product(project(local, lx, lxy));
  int64_t n_y = ly.empty() ? 0 : product(project(local, ly, lxy));
  return n * (n_x + n_y);
}

cost_t cost_agg(
  shape_t const& d, labels_t const& l_agg, labels_t const& lz,
  labels_t const& lxy, shape_t const& b_xy)
{
  shape_t local = local_xy(b_xy, d);
  int64_t n_agg = product(project(d, l_agg, lxy));
  if(n_agg == 1) {
    return 0;
  }
  // distinct-label product of d, via de-duplicated positions
  labels_t dls;
  for(auto const& l: lxy) {
    if(!contains_label(dls, l)) {
      dls.push_back(l);
    }
  }
  int64_t n = product(project(d, dls, lxy));
  int64_t n_z = product(project(local, lz, lxy));
  return (n / n_agg) * (n_agg - 1) * n_z;
}

cost_t cost_repart(shape_t const& d_cons, shape_t const& d_prod, shape_t const& b) {
  if(d_cons.size() != b.size() || d_prod.size() != b.size()) {
    throw plan_error_t("cost_repart: rank mismatch");
  }
  if(d_cons == d_prod) {
    return 0;
  }
  int64_t n_p = 1, n_c = 1, n_int = 1, n = 1;
  for(size_t i = 0; i != b.size(); ++i) {
    int64_t p_i = b[i] / d_prod[i];
    int64_t c_i = b[i] / d_cons[i];
    n_p *= p_i;
    n_c *= c_i;
    n_int *= std::min(p_i, c_i);
    n *= b[i];
  }
  if(n_c % n_int != 0 || n % n_c != 0) {
    throw plan_error_t("cost_repart: partitions are not nested by powers of two");
  }
  cost_t ret = (n_c / n_int - 1) * (n / n_c) * (n_c + n_p);
  if(n_p != n_int) {
    ret += n_p * (n / n_c);
  }
  return ret;
}

cost_t einsum_cost(einsum_expr_t const& expr, shape_t const& d, shape_t const& b_xy) {
  labels_t ly = expr.is_binary() ? expr.in_labels[1] : labels_t {};
  return cost_join(d, expr.in_labels[0], ly, b_xy) +
         cost_agg(d, expr.agg_labels(), expr.out_labels, expr.xy_labels(), b_xy);
}
