#include "tra.h"

tensor_relation_t tra_join(
  tensor_relation_t const& rx,
  tensor_relation_t const& ry,
  kernel_spec_t const& spec,
  labels_t const& lx,
  labels_t const& ly)
{
  if(rx.part.size() != lx.size() || ry.part.size() != ly.size()) {
    throw plan_error_t("tra_join: key ranks do not match label lists");
  }

  // shared labels: (position in x, position in y)
  vector<pair<int,int>> shared;
  for(size_t i = 0; i != lx.size(); ++i) {
    for(size_t j = 0; j != ly.size(); ++j) {
      if(lx[i] == ly[j]) {
        shared.emplace_back(int(i), int(j));
        if(rx.part[i] != ry.part[j]) {
          throw plan_error_t(
            "tra_join: inputs are not co-partitioned on label '" + lx[i] + "'");
        }
      }
    }
  }

  labels_t dls = concat_distinct(lx, ly);
  vector<int> x_pos = label_positions(lx, dls);
  vector<int> y_pos = label_positions(ly, dls);

  tensor_relation_t ret;
  ret.part = project(
    [&] {
      // partition over the natural-join key
      shape_t dxy = rx.part;
      dxy.insert(dxy.end(), ry.part.begin(), ry.part.end());
      return dxy;
    }(),
    dls,
    [&] {
      labels_t lxy = lx;
      lxy.insert(lxy.end(), ly.begin(), ly.end());
      return lxy;
    }());

  // The logical bound per key position: full extent for output labels,
  // partition-granular for labels the kernel aggregated away.
  shape_t out_chunk = spec.out_bound();
  ret.bound = ret.part;
  for(size_t i = 0; i != dls.size(); ++i) {
    for(size_t o = 0; o != spec.expr.out_labels.size(); ++o) {
      if(spec.expr.out_labels[o] == dls[i]) {
        ret.bound[i] = ret.part[i] * out_chunk[o];
      }
    }
  }

  shape_t key(dls.size(), 0);
  shape_t kx(lx.size()), ky(ly.size());
  do {
    for(size_t i = 0; i != x_pos.size(); ++i) { kx[i] = key[x_pos[i]]; }
    for(size_t i = 0; i != y_pos.size(); ++i) { ky[i] = key[y_pos[i]]; }
    tensor_t const& cx = rx.chunks.at(kx);
    tensor_t const& cy = ry.chunks.at(ky);
    ret.chunks.insert({ key, kernel_eval(spec, cx, &cy) });
  } while(next_index(key, ret.part));

  return ret;
}

tensor_relation_t tra_aggregate(
  tensor_relation_t const& r,
  agg_op_t op,
  labels_t const& l,
  labels_t const& l_keep)
{
  if(l.size() != r.part.size()) {
    throw plan_error_t("tra_aggregate: label list does not match key rank");
  }
  for(auto const& kl: l_keep) {
    if(!contains_label(l, kl)) {
      throw plan_error_t("tra_aggregate: kept label '" + kl + "' not present");
    }
  }

  vector<int> keep_pos = label_positions(l_keep, l);

  tensor_relation_t ret;
  ret.part = project(r.part, l_keep, l);
  ret.bound = project(r.bound, l_keep, l);

  // Combine in lexicographic input key order: std::map iteration.
  shape_t out_key(keep_pos.size());
  for(auto const& [key, c]: r.chunks) {
    for(size_t i = 0; i != keep_pos.size(); ++i) {
      out_key[i] = key[keep_pos[i]];
    }
    auto iter = ret.chunks.find(out_key);
    if(iter == ret.chunks.end()) {
      ret.chunks.insert({ out_key, c });
    } else {
      tensor_t& acc = iter->second;
      if(acc.bound != c.bound) {
        throw plan_error_t("tra_aggregate: chunks in one group have different bounds");
      }
      for(size_t i = 0; i != acc.values.size(); ++i) {
        acc.values[i] = apply_agg(op, acc.values[i], c.values[i]);
      }
    }
  }
  return ret;
}

tensor_relation_t run_einsum_tr(
  einsum_expr_t const& expr,
  shape_t const& b_xy,
  shape_t const& d,
  tensor_relation_t const& rx,
  tensor_relation_t const* ry)
{
  labels_t lxy = expr.xy_labels();
  if(d.size() != lxy.size() || b_xy.size() != lxy.size()) {
    throw plan_error_t("run_einsum_tr: d and b must be indexed by the joint label list");
  }
  check_divides(d, b_xy);

  shape_t local_xy(d.size());
  for(size_t i = 0; i != d.size(); ++i) {
    local_xy[i] = b_xy[i] / d[i];
  }
  kernel_spec_t spec { expr, local_xy };

  if(rx.part != project(d, expr.in_labels[0], lxy)) {
    throw plan_error_t("run_einsum_tr: left input partition does not match the plan");
  }

  tensor_relation_t joined;
  if(expr.is_binary()) {
    if(ry == nullptr) {
      throw plan_error_t("run_einsum_tr: missing right input");
    }
    if(ry->part != project(d, expr.in_labels[1], lxy)) {
      throw plan_error_t("run_einsum_tr: right input partition does not match the plan");
    }
    joined = tra_join(rx, *ry, spec, expr.in_labels[0], expr.in_labels[1]);
  } else {
    // degenerate join: one kernel call per tuple of the single input
    joined.part = rx.part;
    shape_t out_chunk = spec.out_bound();
    joined.bound = joined.part;
    labels_t const& lx = expr.in_labels[0];
    for(size_t i = 0; i != lx.size(); ++i) {
      for(size_t o = 0; o != expr.out_labels.size(); ++o) {
        if(expr.out_labels[o] == lx[i]) {
          joined.bound[i] = joined.part[i] * out_chunk[o];
        }
      }
    }
    for(auto const& [key, c]: rx.chunks) {
      joined.chunks.insert({ key, kernel_eval(spec, c, nullptr) });
    }
  }

  tensor_relation_t ret =
    expr.agg
      ? tra_aggregate(joined, *expr.agg, expr.distinct_labels(), expr.out_labels)
      : tra_aggregate(joined, agg_op_t::sum, expr.distinct_labels(), expr.out_labels);

  // fix up the logical bound to the assembled output extents
  ret.bound = expr.infer_out_bound(b_xy);
  return ret;
}
