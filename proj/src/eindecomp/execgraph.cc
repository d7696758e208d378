#include "execgraph.h"

bool exec_graph_t::edge(int u, int v) const {
  auto const& deps = vertices[v].deps;
  return std::find(deps.begin(), deps.end(), u) != deps.end();
}

namespace {

// Does block r of partition dr intersect block c of partition dc, both
// over bound b?
bool blocks_overlap(
  shape_t const& r, shape_t const& dr,
  shape_t const& c, shape_t const& dc,
  shape_t const& b)
{
  for(size_t i = 0; i != b.size(); ++i) {
    int64_t rs = r[i] * (b[i] / dr[i]);
    int64_t re = rs + b[i] / dr[i];
    int64_t cs = c[i] * (b[i] / dc[i]);
    int64_t ce = cs + b[i] / dc[i];
    if(std::max(rs, cs) >= std::min(re, ce)) {
      return false;
    }
  }
  return true;
}

struct builder_t {
  exec_graph_t g;

  // (consumer vid, slot) -> required chunk key -> exec vertex id
  map<pair<int,int>, map<shape_t,int>> provider;

  int add(exec_vertex_t v) {
    v.id = int(g.vertices.size());
    g.vertices.push_back(std::move(v));
    return g.vertices.back().id;
  }
};

} // namespace

exec_graph_t explode(task_graph_t const& tg) {
  auto const& graph = tg.graph;
  int n = int(graph.vertices.size());
  for(int vid = 0; vid != n; ++vid) {
    if(tg.d[vid].empty() && !graph.vertices[vid].bound.empty()) {
      throw plan_error_t(
        "explode: vertex '" + graph.vertices[vid].name + "' is not labeled");
    }
  }

  builder_t b;
  b.g.tg = tg;
  auto consumers_of = graph.consumers();

  // consumer edges (consumer, slot) of a vertex, ascending
  auto edges_of = [&](int vid) {
    vector<pair<int,int>> ret;
    for(int u = 0; u != n; ++u) {
      if(graph.is_input(u)) {
        continue;
      }
      auto const& inns = graph.vertices[u].inputs;
      for(size_t s = 0; s != inns.size(); ++s) {
        if(inns[s] == vid) {
          ret.emplace_back(u, int(s));
        }
      }
    }
    return ret;
  };

  // Build a refinement layer: consumer chunks over partition dc of the
  // producer's output tensor, each depending on the producer-side
  // vertices whose regions intersect it (in lexicographic key order).
  //
  // producer_ids are keyed by region keys over partition dr; for
  // expression producers several ids share a region (the aggregation
  // siblings).
  auto add_refinement_layer =
    [&](int owner, int producer, int consumer, int slot,
        shape_t const& bound, shape_t const& dc,
        vector<int> const& producer_ids,
        auto&& region_key_of, shape_t const& dr) -> vector<int>
  {
    vector<int> layer;
    shape_t cb(bound.size());
    for(size_t i = 0; i != bound.size(); ++i) {
      cb[i] = bound[i] / dc[i];
    }
    shape_t key(dc.size(), 0);
    do {
      vector<int> deps;
      for(int pid: producer_ids) {
        if(blocks_overlap(region_key_of(pid), dr, key, dc, bound)) {
          deps.push_back(pid);
        }
      }
      int64_t sz = product(cb);
      int64_t n_deps = int64_t(deps.size());
      exec_vertex_t v;
      v.kind = exec_kind_t::refinement;
      v.owner = owner;
      v.producer = producer;
      v.consumer = consumer;
      v.slot = slot;
      v.key = key;
      v.chunk_bound = cb;
      v.sz = sz;
      v.fp = n_deps > 1 ? (n_deps - 1) * sz : sz;
      v.deps = std::move(deps);
      layer.push_back(b.add(std::move(v)));
    } while(next_index(key, dc));
    return layer;
  };

  for(int vid: topo_order(graph)) {
    auto const& vert = graph.vertices[vid];

    if(graph.is_input(vid)) {
      shape_t const& stored = tg.d[vid];
      check_divides(stored, vert.bound);
      shape_t cb(vert.bound.size());
      for(size_t i = 0; i != vert.bound.size(); ++i) {
        cb[i] = vert.bound[i] / stored[i];
      }
      auto& chunk_ids = b.g.input_chunks_of[vid];
      shape_t key(stored.size(), 0);
      do {
        exec_vertex_t v;
        v.kind = exec_kind_t::input_chunk;
        v.owner = vid;
        v.producer = vid;
        v.consumer = -1;
        v.slot = -1;
        v.key = key;
        v.chunk_bound = cb;
        v.fp = 0;
        v.sz = product(cb);
        chunk_ids.push_back(b.add(std::move(v)));
      } while(next_index(key, stored));

      // consumers wanting a different partitioning get a repartition
      // layer; matching ones read the chunks directly
      for(auto const& [u, s]: edges_of(vid)) {
        shape_t need = tg.required_input_partition(u, s);
        if(need == stored) {
          auto& prov = b.provider[{u, s}];
          for(int cid: chunk_ids) {
            prov[b.g.vertices[cid].key] = cid;
          }
        } else {
          auto layer = add_refinement_layer(
            u, vid, u, s, vert.bound, need, chunk_ids,
            [&](int pid) { return b.g.vertices[pid].key; }, stored);
          auto& prov = b.provider[{u, s}];
          for(int rid: layer) {
            prov[b.g.vertices[rid].key] = rid;
          }
          auto& pre = b.g.input_refines_of[u];
          pre.insert(pre.end(), layer.begin(), layer.end());
        }
      }
      continue;
    }

    // join layer: one kernel call per tuple of the embedded join
    auto const& expr = *vert.expr;
    shape_t const& d = tg.d[vid];
    labels_t lxy = expr.xy_labels();
    labels_t dls = expr.distinct_labels();
    shape_t b_xy = graph.bxy(vid);

    shape_t local(lxy.size());
    for(size_t i = 0; i != lxy.size(); ++i) {
      local[i] = b_xy[i] / d[i];
    }
    kernel_spec_t spec { expr, local };

    shape_t d_tuple = project(d, dls, lxy);
    shape_t out_chunk = spec.out_bound();
    int64_t join_fp = spec.fp();
    int64_t join_sz = product(out_chunk);

    vector<shape_t> slot_keys;  // per slot, positions into the tuple key
    vector<vector<int>> slot_pos;
    for(size_t s = 0; s != expr.in_labels.size(); ++s) {
      slot_pos.push_back(label_positions(expr.in_labels[s], dls));
    }
    vector<int> z_pos = label_positions(expr.out_labels, dls);

    auto& join_ids = b.g.joins_of[vid];
    shape_t key(dls.size(), 0);
    do {
      exec_vertex_t v;
      v.kind = exec_kind_t::join_kernel;
      v.owner = vid;
      v.producer = vid;
      v.consumer = -1;
      v.slot = -1;
      v.key = key;
      v.chunk_bound = out_chunk;
      v.fp = join_fp;
      v.sz = join_sz;
      for(size_t s = 0; s != expr.in_labels.size(); ++s) {
        shape_t in_key(slot_pos[s].size());
        for(size_t i = 0; i != slot_pos[s].size(); ++i) {
          in_key[i] = key[slot_pos[s][i]];
        }
        v.deps.push_back(b.provider.at({vid, int(s)}).at(in_key));
      }
      join_ids.push_back(b.add(std::move(v)));
    } while(next_index(key, d_tuple));

    // the Z-projected region key of a join tuple
    shape_t dz = tg.out_partition(vid);
    auto region_of = [&, z_pos](int pid) {
      shape_t const& k = b.g.vertices[pid].key;
      shape_t ret(z_pos.size());
      for(size_t i = 0; i != z_pos.size(); ++i) {
        ret[i] = k[z_pos[i]];
      }
      return ret;
    };

    // refinement layers toward each consumer
    for(auto const& [u, s]: edges_of(vid)) {
      shape_t need = tg.required_input_partition(u, s);
      auto layer = add_refinement_layer(
        vid, vid, u, s, vert.bound, need, join_ids, region_of, dz);
      auto& prov = b.provider[{u, s}];
      for(int rid: layer) {
        prov[b.g.vertices[rid].key] = rid;
      }
      auto& owned = b.g.refinements_of[vid];
      owned.insert(owned.end(), layer.begin(), layer.end());
    }

    // graph outputs and sinks materialize their own partitioning
    bool is_output =
      std::find(graph.outputs.begin(), graph.outputs.end(), vid) != graph.outputs.end();
    if(is_output || consumers_of[vid].empty()) {
      auto layer = add_refinement_layer(
        vid, vid, -1, -1, vert.bound, dz, join_ids, region_of, dz);
      b.g.output_refines_of[vid] = layer;
      auto& owned = b.g.refinements_of[vid];
      owned.insert(owned.end(), layer.begin(), layer.end());
    }
  }

  // adjacency
  b.g.outs.assign(b.g.vertices.size(), {});
  for(auto const& v: b.g.vertices) {
    for(int dep: v.deps) {
      b.g.outs[dep].push_back(v.id);
    }
  }
  return std::move(b.g);
}

join_groups_t compute_join_groups(
  exec_graph_t const& exec, vector<int> const& t1, vector<int> const& t2)
{
  // connected components of the bipartite lineage graph
  map<int,int> comp;
  for(int id: t1) { comp[id] = id; }
  for(int id: t2) { comp[id] = id; }

  auto find = [&](int x) {
    while(comp.at(x) != x) {
      x = comp.at(x);
    }
    return x;
  };
  auto unite = [&](int a, int b) {
    a = find(a);
    b = find(b);
    if(a != b) {
      comp[std::max(a, b)] = std::min(a, b);
    }
  };

  set<int> t1_set(t1.begin(), t1.end());
  for(int rid: t2) {
    for(int dep: exec.vertices[rid].deps) {
      if(t1_set.count(dep)) {
        unite(rid, dep);
      }
    }
  }

  map<int, pair<vector<int>, vector<int>>> grouped;
  for(int id: t1) { grouped[find(id)].first.push_back(id); }
  for(int id: t2) { grouped[find(id)].second.push_back(id); }

  join_groups_t ret;
  for(auto& [root, g]: grouped) {
    std::sort(g.first.begin(), g.first.end());
    std::sort(g.second.begin(), g.second.end());
    ret.groups.push_back(std::move(g));
  }
  std::sort(ret.groups.begin(), ret.groups.end());
  return ret;
}

join_groups_t compute_join_groups(exec_graph_t const& exec, int producer, int consumer) {
  auto iter = exec.joins_of.find(producer);
  if(iter == exec.joins_of.end()) {
    throw plan_error_t("compute_join_groups: producer has no join layer");
  }
  vector<int> t2;
  for(auto const& v: exec.vertices) {
    if(v.kind == exec_kind_t::refinement &&
       v.producer == producer &&
       v.consumer == consumer)
    {
      t2.push_back(v.id);
    }
  }
  return compute_join_groups(exec, iter->second, t2);
}
