#include "json_io.h"

namespace {

ordered_json shape_json(shape_t const& s) {
  return ordered_json(s);
}

shape_t shape_from(ordered_json const& j) {
  return j.get<shape_t>();
}

labels_t labels_from(ordered_json const& j) {
  return j.get<labels_t>();
}

} // namespace

ordered_json einsum_to_json(einsum_expr_t const& e) {
  ordered_json j;
  j["out"] = e.out_labels;
  ordered_json inns = ordered_json::array();
  for(auto const& l: e.in_labels) {
    inns.push_back(l);
  }
  j["inns"] = inns;
  if(e.join) {
    j["join"] = join_op_name(*e.join);
  }
  if(e.map) {
    j["map"] = unary_op_name(*e.map);
  }
  if(e.agg) {
    j["agg"] = agg_op_name(*e.agg);
  }
  return j;
}

einsum_expr_t einsum_from_json(ordered_json const& j) {
  labels_t out = labels_from(j.at("out"));
  vector<labels_t> inns;
  for(auto const& l: j.at("inns")) {
    inns.push_back(labels_from(l));
  }
  optional<agg_op_t> agg;
  if(j.contains("agg")) {
    agg = agg_op_from_name(j.at("agg").get<string>());
  }
  if(j.contains("join")) {
    auto join = join_op_from_name(j.at("join").get<string>());
    if(!join || inns.size() != 2) {
      throw plan_error_t("einsum json: bad join");
    }
    return einsum_expr_t::binary(out, inns[0], inns[1], *join, agg);
  }
  auto map_op = unary_op_from_name(j.at("map").get<string>());
  if(!map_op || inns.size() != 1) {
    throw plan_error_t("einsum json: bad map");
  }
  return einsum_expr_t::unary(out, inns[0], *map_op, agg);
}

ordered_json taskgraph_to_json(task_graph_t const& tg) {
  auto const& graph = tg.graph;
  ordered_json j;
  j["schema"] = "taskgraph/1";
  ordered_json verts = ordered_json::array();
  for(size_t vid = 0; vid != graph.vertices.size(); ++vid) {
    auto const& v = graph.vertices[vid];
    ordered_json jv;
    jv["id"] = v.name;
    if(v.expr) {
      jv["einsum"] = einsum_to_json(*v.expr);
      ordered_json inns = ordered_json::array();
      for(int inn: v.inputs) {
        inns.push_back(graph.vertices[inn].name);
      }
      jv["inputs"] = inns;
    } else {
      jv["einsum"] = nullptr;
      jv["inputs"] = ordered_json::array();
    }
    jv["bound"] = shape_json(v.bound);
    jv["d"] = shape_json(tg.d[vid]);
    jv["out_partition"] = shape_json(tg.out_partition(int(vid)));
    verts.push_back(std::move(jv));
  }
  j["vertices"] = std::move(verts);
  ordered_json outs = ordered_json::array();
  for(int out: graph.outputs) {
    outs.push_back(graph.vertices[out].name);
  }
  j["outputs"] = std::move(outs);
  j["predicted_cost"] = tg.objective;
  return j;
}

task_graph_t taskgraph_from_json(ordered_json const& j) {
  if(j.at("schema").get<string>() != "taskgraph/1") {
    throw plan_error_t("taskgraph json: unknown schema");
  }
  graph_builder_t b;
  vector<shape_t> ds;
  for(auto const& jv: j.at("vertices")) {
    string name = jv.at("id").get<string>();
    if(jv.at("einsum").is_null()) {
      b.add_input(name, shape_from(jv.at("bound")));
    } else {
      einsum_expr_t e = einsum_from_json(jv.at("einsum"));
      vector<int> inns;
      for(auto const& jn: jv.at("inputs")) {
        int vid = b.graph.find(jn.get<string>());
        if(vid == -1) {
          throw plan_error_t("taskgraph json: unknown input " + jn.get<string>());
        }
        inns.push_back(vid);
      }
      b.add_einsum(name, e, inns);
    }
    ds.push_back(shape_from(jv.at("d")));
  }
  vector<string> outs;
  for(auto const& jo: j.at("outputs")) {
    outs.push_back(jo.get<string>());
  }
  task_graph_t tg { b.finish(outs), ds, {}, j.at("predicted_cost").get<cost_t>() };
  tg.p_used.assign(tg.graph.vertices.size(), 0);
  return tg;
}

ordered_json execgraph_to_json(exec_graph_t const& exec, placement_t const* placement) {
  ordered_json j;
  j["schema"] = "execgraph/1";
  ordered_json verts = ordered_json::array();
  for(auto const& v: exec.vertices) {
    ordered_json jv;
    jv["id"] = v.id;
    switch(v.kind) {
      case exec_kind_t::input_chunk: jv["kind"] = "input-chunk"; break;
      case exec_kind_t::join_kernel: jv["kind"] = "join-kernel"; break;
      case exec_kind_t::refinement:  jv["kind"] = "refinement";  break;
    }
    jv["vertex"] = exec.tg.graph.vertices[v.producer].name;
    jv["key"] = shape_json(v.key);
    jv["fp"] = v.fp;
    jv["sz"] = v.sz;
    jv["deps"] = v.deps;
    if(placement != nullptr) {
      jv["machine"] = placement->machine_of[v.id];
    }
    verts.push_back(std::move(jv));
  }
  j["vertices"] = std::move(verts);
  return j;
}

ordered_json report_to_json(run_report_t const& report, double alpha) {
  ordered_json j;
  j["schema"] = "runreport/1";
  j["alpha"] = alpha;
  ordered_json machines = ordered_json::array();
  for(size_t m = 0; m != report.machines.size(); ++m) {
    auto const& c = report.machines[m];
    ordered_json jm;
    jm["id"] = m;
    jm["fp"] = c.fp;
    jm["sent"] = c.sent;
    jm["received"] = c.received;
    machines.push_back(std::move(jm));
  }
  j["per_machine"] = std::move(machines);
  ordered_json totals;
  totals["floats_transferred"] = report.total_transferred;
  totals["bytes_transferred"] = report.total_transferred * 8;
  totals["wall_steps"] = report.wall_steps;
  j["totals"] = std::move(totals);
  j["max_site_cost"] = report.max_site_cost;
  if(report.checked) {
    j["verified"] = report.verified;
    j["max_rel_error"] = report.max_rel_error;
  } else {
    j["verified"] = nullptr;
  }
  return j;
}
