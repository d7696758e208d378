#include "kernel.h"

shape_t kernel_spec_t::out_bound() const {
  return project(local_xy, expr.out_labels, expr.xy_labels());
}

shape_t kernel_spec_t::in_bound(int which) const {
  return project(local_xy, expr.in_labels[which], expr.xy_labels());
}

int64_t kernel_spec_t::fp() const {
  return product(project(local_xy, expr.distinct_labels(), expr.xy_labels()));
}

tensor_t kernel_eval(
  kernel_spec_t const& spec,
  tensor_t const& cx,
  tensor_t const* cy,
  bool f32)
{
  auto const& expr = spec.expr;
  if(cx.bound != spec.in_bound(0)) {
    throw plan_error_t("kernel_eval: left chunk bound mismatch");
  }
  if(expr.is_binary()) {
    if(cy == nullptr || cy->bound != spec.in_bound(1)) {
      throw plan_error_t("kernel_eval: right chunk bound mismatch");
    }
  }

  labels_t dls = expr.distinct_labels();
  shape_t dbound = project(spec.local_xy, dls, expr.xy_labels());
  vector<int> x_pos = label_positions(expr.in_labels[0], dls);
  vector<int> y_pos;
  if(expr.is_binary()) {
    y_pos = label_positions(expr.in_labels[1], dls);
  }
  vector<int> z_pos = label_positions(expr.out_labels, dls);

  tensor_t out = tensor_t::zeros(spec.out_bound());
  vector<char> touched(out.values.size(), 0);

  // in f32 mode every operand and result is rounded through float
  auto r32 = [f32](double v) { return f32 ? double(float(v)) : v; };

  shape_t idx(dbound.size(), 0);
  shape_t xi(x_pos.size()), yi(y_pos.size()), zi(z_pos.size());
  do {
    for(size_t i = 0; i != x_pos.size(); ++i) { xi[i] = idx[x_pos[i]]; }
    double val;
    if(expr.is_binary()) {
      for(size_t i = 0; i != y_pos.size(); ++i) { yi[i] = idx[y_pos[i]]; }
      val = r32(apply_join(*expr.join, r32(cx.at(xi)), r32(cy->at(yi))));
    } else {
      val = r32(apply_unary(*expr.map, r32(cx.at(xi))));
    }
    for(size_t i = 0; i != z_pos.size(); ++i) { zi[i] = idx[z_pos[i]]; }
    int64_t off = flatten(zi, out.bound);
    if(!touched[size_t(off)]) {
      out.values[size_t(off)] = val;
      touched[size_t(off)] = 1;
    } else {
      out.values[size_t(off)] = r32(apply_agg(*expr.agg, out.values[size_t(off)], val));
    }
  } while(next_index(idx, dbound));

  return out;
}
