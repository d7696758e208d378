#include "decomp.h"

shape_t task_graph_t::out_partition(int vid) const {
  if(graph.is_input(vid)) {
    return d[vid];
  }
  auto const& expr = *graph.vertices[vid].expr;
  return output_partition(d[vid], expr.out_labels, expr.xy_labels());
}

shape_t task_graph_t::required_input_partition(int vid, int slot) const {
  auto const& expr = *graph.vertices[vid].expr;
  return project(d[vid], expr.in_labels[slot], expr.xy_labels());
}

vector<shape_t> divisor_partitions(shape_t const& bound, int64_t cap) {
  vector<shape_t> ret;
  shape_t cur(bound.size(), 1);
  auto rec = [&](auto&& self, size_t at, int64_t left) -> void {
    if(at == bound.size()) {
      ret.push_back(cur);
      return;
    }
    for(int64_t v = 1; v <= left && bound[at] % v == 0; v *= 2) {
      cur[at] = v;
      self(self, at + 1, left / v);
    }
  };
  rec(rec, 0, cap);
  std::sort(ret.begin(), ret.end());
  return ret;
}

namespace {

// join + agg cost of one expression under d
cost_t self_cost(einsum_expr_t const& expr, shape_t const& d, shape_t const& b_xy) {
  return einsum_cost(expr, d, b_xy);
}

void check_single_consumer(eingraph_t const& graph) {
  vector<int> uses(graph.vertices.size(), 0);
  for(auto const& v: graph.vertices) {
    for(int inn: v.inputs) {
      if(!graph.is_input(inn)) {
        uses[inn] += 1;
      }
    }
  }
  for(size_t vid = 0; vid != uses.size(); ++vid) {
    if(uses[vid] > 1) {
      throw plan_error_t(
        "optimize_tree: vertex '" + graph.vertices[vid].name +
        "' has several consumers; use optimize_dag");
    }
  }
}

} // namespace

pair<task_graph_t, dp_table_t> optimize_tree(
  eingraph_t const& graph, int64_t p, optional<int64_t> input_divisor_cap)
{
  if(!is_power_of_two(p)) {
    throw plan_error_t("optimize_tree: p must be a power of two");
  }
  check_single_consumer(graph);
  int64_t cap = input_divisor_cap.value_or(p);

  int n = int(graph.vertices.size());
  dp_table_t table;
  vector<int64_t> p_used(n, 0);

  for(int vid: topo_order(graph)) {
    auto const& v = graph.vertices[vid];
    auto& mv = table.m[vid];

    if(graph.is_input(vid)) {
      // pre-partitioned offline, no cost in any storage partitioning
      for(auto const& dv: divisor_partitions(v.bound, cap)) {
        mv.insert({ dv, dp_entry_t { 0, dv, {} } });
      }
      continue;
    }

    auto const& expr = *v.expr;
    shape_t b_xy = graph.bxy(vid);
    labels_t lxy = expr.xy_labels();
    int64_t pv = fallback_p(expr, p, b_xy);
    p_used[vid] = pv;

    int n_slots = int(v.inputs.size());
    for(auto const& d: viable(expr, pv, b_xy).vectors) {
      shape_t dz = output_partition(d, expr.out_labels, lxy);
      cost_t base = self_cost(expr, d, b_xy);

      vector<shape_t> required(n_slots);
      for(int s = 0; s != n_slots; ++s) {
        required[s] = project(d, expr.in_labels[s], lxy);
      }

      // Every combination of recorded producer partitionings, slots
      // enumerated in ascending order so ties resolve to the smallest.
      vector<map<shape_t, dp_entry_t>::const_iterator> iters, begins, ends;
      for(int s = 0; s != n_slots; ++s) {
        auto const& mi = table.m.at(v.inputs[s]);
        if(mi.empty()) {
          throw plan_error_t(
            "optimize_tree: no feasible partitionings for '" +
            graph.vertices[v.inputs[s]].name + "'");
        }
        iters.push_back(mi.begin());
        begins.push_back(mi.begin());
        ends.push_back(mi.end());
      }

      while(true) {
        cost_t c = base;
        for(int s = 0; s != n_slots; ++s) {
          c += iters[s]->second.cost;
          c += cost_repart(
            required[s], iters[s]->first, graph.vertices[v.inputs[s]].bound);
        }
        auto found = mv.find(dz);
        if(found == mv.end() || c < found->second.cost) {
          vector<shape_t> input_parts;
          for(int s = 0; s != n_slots; ++s) {
            input_parts.push_back(iters[s]->first);
          }
          mv.insert_or_assign(dz, dp_entry_t { c, d, std::move(input_parts) });
        }

        int s = n_slots - 1;
        while(s >= 0 && ++iters[s] == ends[s]) {
          iters[s] = begins[s];
          s--;
        }
        if(s < 0) {
          break;
        }
      }
    }

    if(mv.empty()) {
      throw plan_error_t(
        "optimize_tree: no viable partitionings for '" + v.name + "'");
    }
  }

  // Backtrack from every sink (the single-consumer constraint makes the
  // expression vertices a forest).
  task_graph_t tg { graph, vector<shape_t>(n), p_used, 0 };
  vector<bool> labeled(n, false);

  auto consumers = graph.consumers();
  auto backtrack = [&](auto&& self, int vid, shape_t const& dz) -> void {
    auto const& e = table.m.at(vid).at(dz);
    if(graph.is_input(vid)) {
      if(!labeled[vid]) {
        tg.d[vid] = dz;
        labeled[vid] = true;
      }
      return;
    }
    tg.d[vid] = e.d;
    labeled[vid] = true;
    for(size_t s = 0; s != e.input_parts.size(); ++s) {
      self(self, graph.vertices[vid].inputs[s], e.input_parts[s]);
    }
  };

  for(int vid = 0; vid != n; ++vid) {
    if(graph.is_input(vid) || !consumers[vid].empty()) {
      continue;
    }
    // sink: take the cheapest output partitioning
    auto const& mv = table.m.at(vid);
    auto best = mv.begin();
    for(auto iter = mv.begin(); iter != mv.end(); ++iter) {
      if(iter->second.cost < best->second.cost) {
        best = iter;
      }
    }
    tg.objective += best->second.cost;
    backtrack(backtrack, vid, best->first);
  }

  // unused inputs default to a single chunk
  for(int vid = 0; vid != n; ++vid) {
    if(!labeled[vid] && graph.is_input(vid)) {
      tg.d[vid] = shape_t(graph.vertices[vid].bound.size(), 1);
    }
  }

  return { std::move(tg), std::move(table) };
}

path_cover_t linearize(eingraph_t const& graph) {
  int n = int(graph.vertices.size());
  auto consumers = graph.consumers();

  vector<bool> covered(n, false);
  for(int v = 0; v != n; ++v) {
    if(graph.is_input(v)) {
      covered[v] = true;
    }
  }

  vector<int> order = topo_order(graph);

  path_cover_t ret;
  while(true) {
    // longest chain among uncovered vertices; next[] takes the smallest
    // consumer id among those achieving it
    vector<int64_t> len(n, 0);
    vector<int> next(n, -1);
    for(auto iter = order.rbegin(); iter != order.rend(); ++iter) {
      int v = *iter;
      if(covered[v]) {
        continue;
      }
      len[v] = 1;
      set<int> outs(consumers[v].begin(), consumers[v].end());
      for(int c: outs) {
        if(!covered[c] && len[c] + 1 > len[v]) {
          len[v] = len[c] + 1;
          next[v] = c;
        }
      }
    }

    int start = -1;
    for(int v = 0; v != n; ++v) {
      if(!covered[v] && (start == -1 || len[v] > len[start])) {
        start = v;
      }
    }
    if(start == -1) {
      break;
    }

    vector<int> path;
    for(int v = start; v != -1; v = next[v]) {
      path.push_back(v);
      covered[v] = true;
    }
    ret.push_back(std::move(path));
  }
  return ret;
}

task_graph_t optimize_dag(eingraph_t const& graph, int64_t p) {
  if(!is_power_of_two(p)) {
    throw plan_error_t("optimize_dag: p must be a power of two");
  }
  int n = int(graph.vertices.size());
  task_graph_t tg { graph, vector<shape_t>(n), vector<int64_t>(n, 0), 0 };
  vector<bool> labeled(n, false);

  for(auto const& path: linearize(graph)) {
    // chain DP: state is the predecessor's output partitioning
    struct chain_entry_t {
      cost_t cost;
      shape_t d;
      shape_t prev_dz;  // empty-unused for the first vertex
    };
    vector<map<shape_t, chain_entry_t>> m(path.size());

    for(size_t i = 0; i != path.size(); ++i) {
      int vid = path[i];
      auto const& v = graph.vertices[vid];
      auto const& expr = *v.expr;
      shape_t b_xy = graph.bxy(vid);
      labels_t lxy = expr.xy_labels();
      int64_t pv = fallback_p(expr, p, b_xy);
      tg.p_used[vid] = pv;

      for(auto const& d: viable(expr, pv, b_xy).vectors) {
        shape_t dz = output_partition(d, expr.out_labels, lxy);
        cost_t base = self_cost(expr, d, b_xy);

        if(i == 0) {
          auto found = m[0].find(dz);
          if(found == m[0].end() || base < found->second.cost) {
            m[0].insert_or_assign(dz, chain_entry_t { base, d, {} });
          }
          continue;
        }

        // only the chain edge contributes repartition and subgraph cost
        int prev = path[i - 1];
        vector<int> chain_slots;
        for(size_t s = 0; s != v.inputs.size(); ++s) {
          if(v.inputs[s] == prev) {
            chain_slots.push_back(int(s));
          }
        }
        for(auto const& [dprev, eprev]: m[i - 1]) {
          cost_t c = eprev.cost + base;
          for(int s: chain_slots) {
            c += cost_repart(
              project(d, expr.in_labels[s], lxy), dprev, graph.vertices[prev].bound);
          }
          auto found = m[i].find(dz);
          if(found == m[i].end() || c < found->second.cost) {
            m[i].insert_or_assign(dz, chain_entry_t { c, d, dprev });
          }
        }
      }

      if(m[i].empty()) {
        throw plan_error_t("optimize_dag: no viable partitionings for '" + v.name + "'");
      }
    }

    // choose the cheapest terminal entry and backtrack along the path
    auto best = m.back().begin();
    for(auto iter = m.back().begin(); iter != m.back().end(); ++iter) {
      if(iter->second.cost < best->second.cost) {
        best = iter;
      }
    }
    tg.objective += best->second.cost;

    shape_t dz = best->first;
    for(int i = int(path.size()) - 1; i >= 0; --i) {
      auto const& e = m[i].at(dz);
      tg.d[path[i]] = e.d;
      labeled[path[i]] = true;
      dz = e.prev_dz;
    }
  }

  // storage partitions for inputs: the first labeled consumer's need,
  // in vertex order
  for(int vid = 0; vid != n; ++vid) {
    if(graph.is_input(vid)) {
      continue;
    }
    auto const& v = graph.vertices[vid];
    for(size_t s = 0; s != v.inputs.size(); ++s) {
      int inn = v.inputs[s];
      if(graph.is_input(inn) && !labeled[inn]) {
        tg.d[inn] = tg.required_input_partition(vid, int(s));
        labeled[inn] = true;
      }
    }
  }
  for(int vid = 0; vid != n; ++vid) {
    if(!labeled[vid] && graph.is_input(vid)) {
      tg.d[vid] = shape_t(graph.vertices[vid].bound.size(), 1);
    }
  }

  return tg;
}

vector<repart_edge_t> repart_edges(task_graph_t const& tg) {
  auto const& graph = tg.graph;
  vector<repart_edge_t> ret;
  for(size_t vid = 0; vid != graph.vertices.size(); ++vid) {
    if(graph.is_input(int(vid))) {
      continue;
    }
    auto const& v = graph.vertices[vid];
    for(size_t s = 0; s != v.inputs.size(); ++s) {
      int src = v.inputs[s];
      shape_t need = tg.required_input_partition(int(vid), int(s));
      shape_t have = tg.out_partition(src);
      if(need != have) {
        ret.push_back(repart_edge_t {
          src, int(vid), int(s),
          cost_repart(need, have, graph.vertices[src].bound) });
      }
    }
  }
  return ret;
}
