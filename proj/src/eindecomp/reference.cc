#include "reference.h"

tensor_t eval_expr(
  einsum_expr_t const& expr,
  tensor_t const& x,
  tensor_t const* y,
  string const& vertex_name)
{
  shape_t b_xy = x.bound;
  if(expr.is_binary()) {
    if(y == nullptr) {
      throw plan_error_t("eval_expr: missing right input for '" + vertex_name + "'");
    }
    b_xy.insert(b_xy.end(), y->bound.begin(), y->bound.end());
  }

  labels_t lxy = expr.xy_labels();
  labels_t dls = expr.distinct_labels();
  shape_t dbound = project(b_xy, dls, lxy);

  vector<int> x_pos = label_positions(expr.in_labels[0], dls);
  vector<int> y_pos;
  if(expr.is_binary()) {
    y_pos = label_positions(expr.in_labels[1], dls);
  }
  vector<int> z_pos = label_positions(expr.out_labels, dls);

  tensor_t out = tensor_t::zeros(expr.infer_out_bound(b_xy));
  vector<char> touched(out.values.size(), 0);

  shape_t idx(dbound.size(), 0);
  shape_t xi(x_pos.size()), zi(z_pos.size());
  shape_t yi(y_pos.size());
  if(product(dbound) > 0) {
    do {
      for(size_t i = 0; i != x_pos.size(); ++i) { xi[i] = idx[x_pos[i]]; }
      double val;
      try {
        if(expr.is_binary()) {
          for(size_t i = 0; i != y_pos.size(); ++i) { yi[i] = idx[y_pos[i]]; }
          val = apply_join(*expr.join, x.at(xi), y->at(yi));
        } else {
          val = apply_unary(*expr.map, x.at(xi));
        }
      } catch(eval_error_t const& e) {
        throw eval_error_t(string(e.what()) + " while evaluating vertex '" + vertex_name + "'");
      }
      for(size_t i = 0; i != z_pos.size(); ++i) { zi[i] = idx[z_pos[i]]; }
      int64_t off = flatten(zi, out.bound);
      if(!touched[size_t(off)]) {
        out.values[size_t(off)] = val;
        touched[size_t(off)] = 1;
      } else {
        out.values[size_t(off)] = apply_agg(*expr.agg, out.values[size_t(off)], val);
      }
    } while(next_index(idx, dbound));
  }

  return out;
}

map<int, tensor_t> eval_reference(eingraph_t const& graph, map<int, tensor_t> const& inputs) {
  map<int, tensor_t> ret;
  for(int vid: topo_order(graph)) {
    auto const& v = graph.vertices[vid];
    if(graph.is_input(vid)) {
      auto iter = inputs.find(vid);
      if(iter == inputs.end()) {
        throw plan_error_t("eval_reference: no tensor supplied for input '" + v.name + "'");
      }
      if(iter->second.bound != v.bound) {
        throw plan_error_t("eval_reference: tensor for '" + v.name + "' has the wrong bound");
      }
      ret.insert({ vid, iter->second });
    } else {
      tensor_t const& x = ret.at(v.inputs[0]);
      tensor_t const* y = v.inputs.size() == 2 ? &ret.at(v.inputs[1]) : nullptr;
      ret.insert({ vid, eval_expr(*v.expr, x, y, v.name) });
    }
  }
  return ret;
}
