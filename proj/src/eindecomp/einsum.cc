#include "einsum.h"

einsum_expr_t einsum_expr_t::binary(
  labels_t out, labels_t lx, labels_t ly,
  join_op_t join, optional<agg_op_t> agg)
{
  einsum_expr_t ret;
  ret.out_labels = std::move(out);
  ret.in_labels = { std::move(lx), std::move(ly) };
  ret.join = join;
  ret.agg = agg;
  ret.validate();
  return ret;
}

einsum_expr_t einsum_expr_t::unary(
  labels_t out, labels_t lx,
  unary_op_t map, optional<agg_op_t> agg)
{
  einsum_expr_t ret;
  ret.out_labels = std::move(out);
  ret.in_labels = { std::move(lx) };
  ret.map = map;
  ret.agg = agg;
  ret.validate();
  return ret;
}

labels_t einsum_expr_t::xy_labels() const {
  labels_t ret = in_labels[0];
  if(is_binary()) {
    ret.insert(ret.end(), in_labels[1].begin(), in_labels[1].end());
  }
  return ret;
}

labels_t einsum_expr_t::distinct_labels() const {
  if(is_binary()) {
    return concat_distinct(in_labels[0], in_labels[1]);
  }
  return in_labels[0];
}

labels_t einsum_expr_t::agg_labels() const {
  labels_t ret;
  for(auto const& l: distinct_labels()) {
    if(!contains_label(out_labels, l)) {
      ret.push_back(l);
    }
  }
  return ret;
}

void einsum_expr_t::validate() const {
  if(in_labels.size() != 1 && in_labels.size() != 2) {
    throw plan_error_t("einsum: must have one or two inputs");
  }
  if(is_binary() != join.has_value() || is_binary() == map.has_value()) {
    throw plan_error_t("einsum: op kind does not match arity");
  }
  for(auto const& ls: in_labels) {
    set<string> seen;
    for(auto const& l: ls) {
      if(!seen.insert(l).second) {
        throw plan_error_t("einsum: repeated label '" + l + "' within one input");
      }
    }
  }
  {
    set<string> seen;
    for(auto const& l: out_labels) {
      if(!seen.insert(l).second) {
        throw plan_error_t("einsum: repeated label '" + l + "' in output");
      }
    }
  }
  labels_t dls = distinct_labels();
  for(auto const& l: out_labels) {
    if(!contains_label(dls, l)) {
      throw plan_error_t(
        "einsum: output label '" + l + "' not in any input (broadcasts are not supported)");
    }
  }
  if(agg.has_value() != !agg_labels().empty()) {
    throw plan_error_t("einsum: aggregation op must be present exactly when labels are aggregated");
  }
}

shape_t einsum_expr_t::infer_out_bound(shape_t const& b_xy) const {
  labels_t lxy = xy_labels();
  if(b_xy.size() != lxy.size()) {
    throw plan_error_t("einsum: input bounds do not match label lists");
  }
  // Dimensions sharing a label must agree.
  for(auto const& l: distinct_labels()) {
    optional<int64_t> b;
    for(size_t i = 0; i != lxy.size(); ++i) {
      if(lxy[i] == l) {
        if(b && *b != b_xy[i]) {
          throw plan_error_t(
            "einsum: bound mismatch on shared label '" + l + "': " +
            std::to_string(*b) + " vs " + std::to_string(b_xy[i]));
        }
        b = b_xy[i];
      }
    }
  }
  return project(b_xy, out_labels, lxy);
}

static string labels_str(labels_t const& ls) {
  string ret = "[";
  for(size_t i = 0; i != ls.size(); ++i) {
    if(i > 0) { ret += ","; }
    ret += ls[i];
  }
  return ret + "]";
}

string einsum_expr_t::str() const {
  std::ostringstream ss;
  if(agg) {
    ss << agg_op_name(*agg) << labels_str(agg_labels()) << " ";
  }
  if(is_binary()) {
    ss << join_op_name(*join)
       << "(X" << labels_str(in_labels[0]) << ", Y" << labels_str(in_labels[1]) << ")";
  } else {
    ss << "map " << unary_op_name(*map) << "(X" << labels_str(in_labels[0]) << ")";
  }
  ss << " -> Z" << labels_str(out_labels);
  return ss.str();
}

bool operator==(einsum_expr_t const& lhs, einsum_expr_t const& rhs) {
  return lhs.out_labels == rhs.out_labels &&
         lhs.in_labels == rhs.in_labels &&
         lhs.join == rhs.join &&
         lhs.map == rhs.map &&
         lhs.agg == rhs.agg;
}

shape_t eingraph_t::bxy(int vid) const {
  auto const& v = vertices[vid];
  shape_t ret;
  for(int inn: v.inputs) {
    auto const& b = vertices[inn].bound;
    ret.insert(ret.end(), b.begin(), b.end());
  }
  return ret;
}

int eingraph_t::find(string const& name) const {
  for(size_t i = 0; i != vertices.size(); ++i) {
    if(vertices[i].name == name) {
      return int(i);
    }
  }
  return -1;
}

vector<vector<int>> eingraph_t::consumers() const {
  vector<vector<int>> ret(vertices.size());
  for(size_t v = 0; v != vertices.size(); ++v) {
    for(int inn: vertices[v].inputs) {
      ret[inn].push_back(int(v));
    }
  }
  return ret;
}

void eingraph_t::validate() const {
  for(size_t vid = 0; vid != vertices.size(); ++vid) {
    auto const& v = vertices[vid];
    if(v.expr.has_value() != !v.inputs.empty()) {
      throw plan_error_t(
        "graph: vertex '" + v.name + "' must have inputs exactly when it has an expression");
    }
    for(int64_t b: v.bound) {
      if(b < 1) {
        throw plan_error_t("graph: vertex '" + v.name + "' has a non-positive bound entry");
      }
    }
    if(v.expr) {
      v.expr->validate();
      if(v.inputs.size() != v.expr->in_labels.size()) {
        throw plan_error_t("graph: vertex '" + v.name + "' input count does not match labels");
      }
      for(size_t i = 0; i != v.inputs.size(); ++i) {
        if(v.inputs[i] < 0 || v.inputs[i] >= int(vertices.size())) {
          throw plan_error_t("graph: vertex '" + v.name + "' has an out-of-range input");
        }
        if(vertices[v.inputs[i]].bound.size() != v.expr->in_labels[i].size()) {
          throw plan_error_t(
            "graph: vertex '" + v.name + "' ranks disagree with input '" +
            vertices[v.inputs[i]].name + "'");
        }
      }
      shape_t inferred = v.expr->infer_out_bound(bxy(int(vid)));
      if(inferred != v.bound) {
        throw plan_error_t(
          "graph: vertex '" + v.name + "' declares bound " + write_with_ss(v.bound) +
          " but labels imply " + write_with_ss(inferred));
      }
    }
  }
  for(int out: outputs) {
    if(out < 0 || out >= int(vertices.size())) {
      throw plan_error_t("graph: output vertex out of range");
    }
  }
  topo_order(*this);
}

vector<int> topo_order(eingraph_t const& graph) {
  int n = int(graph.vertices.size());
  vector<int> n_pending(n, 0);
  vector<vector<int>> outs(n);
  for(int v = 0; v != n; ++v) {
    set<int> distinct_inns(
      graph.vertices[v].inputs.begin(), graph.vertices[v].inputs.end());
    n_pending[v] = int(distinct_inns.size());
    for(int inn: distinct_inns) {
      outs[inn].push_back(v);
    }
  }

  // Ascending-id tie-break: take the smallest ready vertex each step.
  set<int> ready;
  for(int v = 0; v != n; ++v) {
    if(n_pending[v] == 0) {
      ready.insert(v);
    }
  }

  vector<int> ret;
  ret.reserve(n);
  while(!ready.empty()) {
    int v = *ready.begin();
    ready.erase(ready.begin());
    ret.push_back(v);
    for(int out: outs[v]) {
      if(--n_pending[out] == 0) {
        ready.insert(out);
      }
    }
  }

  if(int(ret.size()) != n) {
    // Walk input edges from a stuck vertex to recover one cycle.
    vector<bool> placed(n, false);
    for(int v: ret) { placed[v] = true; }
    int start = 0;
    while(placed[start]) { start++; }
    vector<int> walk = { start };
    set<int> seen = { start };
    int cur = start;
    while(true) {
      int nxt = -1;
      for(int inn: graph.vertices[cur].inputs) {
        if(!placed[inn]) { nxt = inn; break; }
      }
      if(seen.count(nxt)) {
        walk.push_back(nxt);
        break;
      }
      walk.push_back(nxt);
      seen.insert(nxt);
      cur = nxt;
    }
    string msg = "graph contains a cycle through:";
    for(int v: walk) {
      msg += " " + graph.vertices[v].name;
    }
    throw plan_error_t(msg);
  }
  return ret;
}

int graph_builder_t::add_input(string const& name, shape_t const& bound) {
  if(graph.find(name) != -1) {
    throw plan_error_t("builder: duplicate vertex name '" + name + "'");
  }
  graph.vertices.push_back(ein_vertex_t { name, bound, std::nullopt, {} });
  return int(graph.vertices.size()) - 1;
}

int graph_builder_t::add_einsum(
  string const& name, einsum_expr_t const& expr, vector<int> const& inputs)
{
  if(graph.find(name) != -1) {
    throw plan_error_t("builder: duplicate vertex name '" + name + "'");
  }
  expr.validate();
  if(inputs.size() != expr.in_labels.size()) {
    throw plan_error_t("builder: wrong number of inputs for '" + name + "'");
  }
  shape_t b_xy;
  for(int inn: inputs) {
    auto const& b = graph.vertices.at(inn).bound;
    b_xy.insert(b_xy.end(), b.begin(), b.end());
  }
  shape_t bound = expr.infer_out_bound(b_xy);
  graph.vertices.push_back(ein_vertex_t { name, bound, expr, inputs });
  return int(graph.vertices.size()) - 1;
}

int graph_builder_t::add_softmax(string const& name, int inn) {
  shape_t const& bound = graph.vertices.at(inn).bound;
  int rank = int(bound.size());
  if(rank < 1) {
    throw plan_error_t("softmax: input must have rank >= 1");
  }

  // Batch labels b0..b{r-2} plus the softmaxed last dimension.
  labels_t full, batch;
  for(int i = 0; i + 1 < rank; ++i) {
    full.push_back("b" + std::to_string(i));
    batch.push_back("b" + std::to_string(i));
  }
  full.push_back("j");

  int vmax = add_einsum(
    name + ".max",
    einsum_expr_t::unary(batch, full, unary_op_t::identity(), agg_op_t::max),
    { inn });
  int vsub = add_einsum(
    name + ".sub",
    einsum_expr_t::binary(full, full, batch, join_op_t::sub, std::nullopt),
    { inn, vmax });
  int vexp = add_einsum(
    name + ".exp",
    einsum_expr_t::unary(full, full, unary_op_t::exp(), std::nullopt),
    { vsub });
  int vsum = add_einsum(
    name + ".sum",
    einsum_expr_t::unary(batch, full, unary_op_t::identity(), agg_op_t::sum),
    { vexp });
  return add_einsum(
    name,
    einsum_expr_t::binary(full, full, batch, join_op_t::div, std::nullopt),
    { vexp, vsum });
}

eingraph_t graph_builder_t::finish(vector<string> const& output_names) const {
  vector<int> ids;
  for(auto const& name: output_names) {
    int vid = graph.find(name);
    if(vid == -1) {
      throw plan_error_t("builder: unknown output '" + name + "'");
    }
    ids.push_back(vid);
  }
  return finish(ids);
}

eingraph_t graph_builder_t::finish(vector<int> const& output_ids) const {
  eingraph_t ret = graph;
  ret.outputs = output_ids;
  ret.validate();
  return ret;
}
