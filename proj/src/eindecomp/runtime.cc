#include "runtime.h"

#include <condition_variable>
#include <mutex>
#include <random>
#include <thread>

namespace {

struct engine_t {
  exec_graph_t const& exec;
  placement_t const& placement;
  exec_options_t const& options;

  int n_vertices;
  int64_t n_machines;

  vector<optional<tensor_t>> produced;
  vector<set<int>> resident;       // per machine: exec ids with a local copy
  vector<vector<int>> mine;        // per machine: its vertices, ascending
  vector<char> executed;
  int n_executed = 0;

  vector<machine_counters_t> counters;
  transfer_audit_t audit;

  // per expression vertex: kernel spec and agg op
  map<int, kernel_spec_t> specs;
  // (edge key, region key) -> refinement that first gathered the region;
  // its sibling pulls are aggregation traffic, duplicates repartition
  map<pair<tuple<int,int,int>, shape_t>, int> region_gatherer;

  bool corrupted_one = false;

  engine_t(
    exec_graph_t const& exec,
    placement_t const& placement,
    map<int, tensor_relation_t> const& inputs,
    exec_options_t const& options)
    : exec(exec), placement(placement), options(options)
  {
    n_vertices = int(exec.vertices.size());
    n_machines = placement.n_machines;
    produced.resize(n_vertices);
    resident.resize(n_machines);
    mine.resize(n_machines);
    executed.assign(n_vertices, 0);
    counters.resize(n_machines);

    auto const& graph = exec.tg.graph;
    for(size_t vid = 0; vid != graph.vertices.size(); ++vid) {
      if(graph.is_input(int(vid))) {
        continue;
      }
      auto const& expr = *graph.vertices[vid].expr;
      shape_t b_xy = graph.bxy(int(vid));
      shape_t const& d = exec.tg.d[vid];
      shape_t local(d.size());
      for(size_t i = 0; i != d.size(); ++i) {
        local[i] = b_xy[i] / d[i];
      }
      specs.insert({ int(vid), kernel_spec_t { expr, local } });
    }

    // seed input chunks: produced immediately, resident at their machine
    for(auto const& [vid, chunk_ids]: exec.input_chunks_of) {
      auto iter = inputs.find(vid);
      if(iter == inputs.end()) {
        throw plan_error_t(
          "execute: no relation supplied for input '" + graph.vertices[vid].name + "'");
      }
      tensor_relation_t const& r = iter->second;
      if(r.part != exec.tg.d[vid] || r.bound != graph.vertices[vid].bound) {
        throw plan_error_t(
          "execute: relation for '" + graph.vertices[vid].name +
          "' is not chunked as planned");
      }
      for(int cid: chunk_ids) {
        produced[cid] = r.chunks.at(exec.vertices[cid].key);
        executed[cid] = 1;
        n_executed++;
        resident[placement.machine_of[cid]].insert(cid);
      }
    }

    for(auto const& v: exec.vertices) {
      if(v.kind != exec_kind_t::input_chunk) {
        mine[placement.machine_of[v.id]].push_back(v.id);
      }
    }
  }

  // region key of a producer-side vertex, in the producer's output
  // partitioning (input chunks and refinements already carry it; join
  // tuples project onto the output labels)
  shape_t region_key(exec_vertex_t const& u) const {
    if(u.kind != exec_kind_t::join_kernel) {
      return u.key;
    }
    auto const& expr = *exec.tg.graph.vertices[u.producer].expr;
    return project(u.key, expr.out_labels, expr.distinct_labels());
  }

  shape_t region_partition(exec_vertex_t const& u) const {
    if(u.kind == exec_kind_t::input_chunk) {
      return exec.tg.d[u.producer];
    }
    if(u.kind == exec_kind_t::join_kernel) {
      return exec.tg.out_partition(u.producer);
    }
    // refinement: keyed by the partition it produced
    if(u.consumer >= 0) {
      return exec.tg.required_input_partition(u.consumer, u.slot);
    }
    return exec.tg.out_partition(u.producer);
  }

  // one transfer of u's chunk to machine m, triggered by consumer v
  void pull(int uid, int m, int vid) {
    auto const& u = exec.vertices[uid];
    int src = placement.machine_of[uid];
    counters[src].sent += u.sz;
    counters[m].received += u.sz;
    resident[m].insert(uid);

    auto const& v = exec.vertices[vid];
    if(v.kind == exec_kind_t::join_kernel) {
      audit.join_in[v.owner] += u.sz;
      return;
    }
    // refinement
    int w = v.producer;
    if(exec.tg.graph.is_input(w)) {
      audit.repart_in[{w, v.consumer, v.slot}] += u.sz;
      return;
    }
    shape_t dz = exec.tg.out_partition(w);
    shape_t dc = v.consumer >= 0
      ? exec.tg.required_input_partition(v.consumer, v.slot)
      : dz;
    if(dc == dz) {
      // no repartition on this edge: everything is aggregation traffic
      audit.agg_in[w] += u.sz;
      return;
    }
    tuple<int,int,int> edge { w, v.consumer, v.slot };
    auto [iter, fresh] = region_gatherer.insert({ { edge, region_key(u) }, vid });
    if(fresh || iter->second != vid) {
      // region arrival, or a re-gather forced by the chunk boundary
      audit.repart_in[edge] += u.sz;
    } else {
      audit.agg_in[w] += u.sz;
    }
  }

  // move any available remote dependencies of m's waiting vertices
  void pull_available(int m) {
    for(int vid: mine[m]) {
      if(executed[vid]) {
        continue;
      }
      for(int dep: exec.vertices[vid].deps) {
        if(produced[dep] && !resident[m].count(dep)) {
          if(placement.machine_of[dep] == m) {
            resident[m].insert(dep);  // local, no transfer
          } else {
            pull(dep, m, vid);
          }
        }
      }
    }
  }

  bool ready(int vid, int m) const {
    for(int dep: exec.vertices[vid].deps) {
      if(!resident[m].count(dep)) {
        return false;
      }
    }
    return true;
  }

  tensor_t compute(int vid) {
    auto const& v = exec.vertices[vid];
    if(v.kind == exec_kind_t::join_kernel) {
      auto const& spec = specs.at(v.producer);
      tensor_t const& cx = *produced[v.deps[0]];
      tensor_t out = spec.expr.is_binary()
        ? kernel_eval(spec, cx, &*produced[v.deps[1]], options.f32)
        : kernel_eval(spec, cx, nullptr, options.f32);
      if(options.corrupt && !corrupted_one && !out.values.empty()) {
        out.values[0] += 1.0;
        corrupted_one = true;
      }
      return out;
    }

    // refinement: paste each dependency's overlap into the chunk,
    // folding aggregation siblings in dependency order
    int w = v.producer;
    auto const& graph = exec.tg.graph;
    shape_t const& bound = graph.vertices[w].bound;
    shape_t dc = region_partition(v);
    optional<agg_op_t> agg =
      graph.is_input(w) ? std::nullopt : graph.vertices[w].expr->agg;

    tensor_t out = tensor_t::zeros(v.chunk_bound);
    vector<char> touched(out.values.size(), 0);

    shape_t c_start(bound.size());
    for(size_t i = 0; i != bound.size(); ++i) {
      c_start[i] = v.key[i] * (bound[i] / dc[i]);
    }

    for(int depid: v.deps) {
      auto const& u = exec.vertices[depid];
      tensor_t const& uc = *produced[depid];
      shape_t rkey = region_key(u);
      shape_t dr = region_partition(u);

      // intersection rectangle in global coordinates
      shape_t lo(bound.size()), hi(bound.size()), r_start(bound.size());
      bool empty = false;
      for(size_t i = 0; i != bound.size(); ++i) {
        r_start[i] = rkey[i] * (bound[i] / dr[i]);
        lo[i] = std::max(r_start[i], c_start[i]);
        hi[i] = std::min(r_start[i] + bound[i] / dr[i], c_start[i] + out.bound[i]);
        if(lo[i] >= hi[i]) {
          empty = true;
        }
      }
      if(empty) {
        continue;
      }

      shape_t span(bound.size());
      for(size_t i = 0; i != bound.size(); ++i) {
        span[i] = hi[i] - lo[i];
      }
      shape_t rel(span.size(), 0);
      shape_t ui(span.size()), ci(span.size());
      do {
        for(size_t i = 0; i != span.size(); ++i) {
          ui[i] = lo[i] + rel[i] - r_start[i];
          ci[i] = lo[i] + rel[i] - c_start[i];
        }
        double val = uc.at(ui);
        int64_t off = flatten(ci, out.bound);
        if(!touched[size_t(off)]) {
          out.values[size_t(off)] = val;
          touched[size_t(off)] = 1;
        } else {
          if(!agg) {
            throw plan_error_t("execute: overlapping contributions without an aggregation op");
          }
          double acc = out.values[size_t(off)];
          out.values[size_t(off)] = options.f32
            ? double(float(apply_agg(*agg, acc, val)))
            : apply_agg(*agg, acc, val);
        }
      } while(next_index(rel, span));
    }

    for(char t: touched) {
      if(!t) {
        throw plan_error_t("execute: refinement chunk left partially unwritten");
      }
    }
    return out;
  }

  void commit(int vid, tensor_t out) {
    int m = placement.machine_of[vid];
    produced[vid] = std::move(out);
    executed[vid] = 1;
    n_executed++;
    resident[m].insert(vid);
    counters[m].fp += exec.vertices[vid].fp;
  }

  void run_round_robin(run_report_t& report) {
    while(n_executed < n_vertices) {
      bool progressed = false;
      for(int m = 0; m != int(n_machines); ++m) {
        pull_available(m);
        for(int vid: mine[m]) {
          if(!executed[vid] && ready(vid, m)) {
            commit(vid, compute(vid));
            progressed = true;
            break;  // one vertex per machine per round
          }
        }
      }
      report.wall_steps++;
      if(!progressed) {
        throw plan_error_t("execute: no runnable vertex; graph is inconsistent");
      }
    }
  }

  void run_threaded(run_report_t& report) {
    std::mutex mtx;
    std::condition_variable cv;
    std::exception_ptr failure;

    auto loop = [&](int m) {
      std::unique_lock lk(mtx);
      while(true) {
        if(failure || n_executed == n_vertices) {
          cv.notify_all();
          return;
        }
        pull_available(m);
        int pick = -1;
        for(int vid: mine[m]) {
          if(!executed[vid] && ready(vid, m)) {
            pick = vid;
            break;
          }
        }
        if(pick == -1) {
          cv.wait(lk);
          continue;
        }
        // mark executed before unlocking so no one re-picks it
        executed[pick] = 1;
        lk.unlock();
        tensor_t out;
        try {
          out = compute(pick);
        } catch(...) {
          lk.lock();
          failure = std::current_exception();
          cv.notify_all();
          return;
        }
        lk.lock();
        executed[pick] = 0;  // commit() re-marks and counts
        commit(pick, std::move(out));
        cv.notify_all();
      }
    };

    vector<std::thread> threads;
    for(int m = 0; m != int(n_machines); ++m) {
      threads.emplace_back(loop, m);
    }
    for(auto& t: threads) {
      t.join();
    }
    if(failure) {
      std::rethrow_exception(failure);
    }
    report.wall_steps = n_vertices;
  }
};

bool uses_only_sum_mul(eingraph_t const& graph) {
  for(auto const& v: graph.vertices) {
    if(!v.expr) {
      continue;
    }
    auto const& e = *v.expr;
    if(e.join && *e.join != join_op_t::mul && *e.join != join_op_t::add) {
      return false;
    }
    if(e.map && e.map->kind != unary_op_t::kind_t::identity &&
       e.map->kind != unary_op_t::kind_t::relu &&
       e.map->kind != unary_op_t::kind_t::neg)
    {
      return false;
    }
    if(e.agg && *e.agg != agg_op_t::sum && *e.agg != agg_op_t::max) {
      return false;
    }
  }
  return true;
}

} // namespace

run_report_t execute(
  exec_graph_t const& exec,
  placement_t const& placement,
  map<int, tensor_relation_t> const& inputs,
  exec_options_t const& options)
{
  if(placement.machine_of.size() != exec.vertices.size()) {
    throw plan_error_t("execute: placement does not cover the exec graph");
  }
  for(auto const& v: exec.vertices) {
    if(placement.machine_of[v.id] < 0) {
      throw plan_error_t("execute: incomplete placement");
    }
  }

  engine_t engine(exec, placement, inputs, options);
  run_report_t report;
  report.machines.resize(placement.n_machines);

  if(options.mode == sched_mode_t::round_robin) {
    engine.run_round_robin(report);
  } else {
    engine.run_threaded(report);
  }

  for(int vid = 0; vid != engine.n_vertices; ++vid) {
    if(!engine.executed[vid] || !engine.produced[vid]) {
      throw plan_error_t("execute: a vertex did not run exactly once");
    }
  }

  report.machines = engine.counters;
  report.audit = std::move(engine.audit);

  int64_t sent = 0, received = 0;
  for(auto const& c: report.machines) {
    sent += c.sent;
    received += c.received;
  }
  if(sent != received) {
    throw plan_error_t("execute: transfer accounting is inconsistent");
  }
  report.total_transferred = sent;
  for(int64_t m = 0; m != placement.n_machines; ++m) {
    auto const& c = report.machines[m];
    report.max_site_cost = std::max(
      report.max_site_cost,
      placement.alpha * double(c.fp) + double(c.sent) + double(c.received));
  }

  // assemble graph outputs from their final refinement layers
  for(int out_vid: exec.tg.graph.outputs) {
    tensor_relation_t r;
    r.bound = exec.tg.graph.vertices[out_vid].bound;
    if(exec.tg.graph.is_input(out_vid)) {
      r.part = exec.tg.d[out_vid];
      for(int cid: exec.input_chunks_of.at(out_vid)) {
        r.chunks.insert({ exec.vertices[cid].key, *engine.produced[cid] });
      }
    } else {
      r.part = exec.tg.out_partition(out_vid);
      for(int rid: exec.output_refines_of.at(out_vid)) {
        r.chunks.insert({ exec.vertices[rid].key, *engine.produced[rid] });
      }
    }
    report.outputs.insert({ out_vid, assemble(r) });
  }

  return report;
}

vector<string> audit_violations(run_report_t const& report, exec_graph_t const& exec) {
  vector<string> ret;
  auto const& tg = exec.tg;
  auto const& graph = tg.graph;

  for(size_t vid = 0; vid != graph.vertices.size(); ++vid) {
    if(graph.is_input(int(vid))) {
      continue;
    }
    auto const& e = *graph.vertices[vid].expr;
    shape_t b_xy = graph.bxy(int(vid));
    labels_t ly = e.is_binary() ? e.in_labels[1] : labels_t {};
    cost_t bound_join = cost_join(tg.d[vid], e.in_labels[0], ly, b_xy);
    cost_t bound_agg = cost_agg(
      tg.d[vid], e.agg_labels(), e.out_labels, e.xy_labels(), b_xy);

    int64_t got_join = 0, got_agg = 0;
    if(auto iter = report.audit.join_in.find(int(vid)); iter != report.audit.join_in.end()) {
      got_join = iter->second;
    }
    if(auto iter = report.audit.agg_in.find(int(vid)); iter != report.audit.agg_in.end()) {
      got_agg = iter->second;
    }
    if(got_join > bound_join) {
      ret.push_back(
        "join transfers of '" + graph.vertices[vid].name + "': measured " +
        std::to_string(got_join) + " > bound " + std::to_string(bound_join));
    }
    if(got_agg > bound_agg) {
      ret.push_back(
        "aggregation transfers of '" + graph.vertices[vid].name + "': measured " +
        std::to_string(got_agg) + " > bound " + std::to_string(bound_agg));
    }
    if(got_join + got_agg > bound_join + bound_agg) {
      ret.push_back(
        "transfers of '" + graph.vertices[vid].name + "': measured " +
        std::to_string(got_join + got_agg) + " > bound " +
        std::to_string(bound_join + bound_agg));
    }
  }

  for(auto const& [edge, got]: report.audit.repart_in) {
    auto const& [src, dst, slot] = edge;
    shape_t have = tg.out_partition(src);
    shape_t need = dst >= 0
      ? tg.required_input_partition(dst, slot)
      : tg.out_partition(src);
    cost_t bound = cost_repart(need, have, graph.vertices[src].bound);
    if(got > bound) {
      string dst_name = dst >= 0 ? graph.vertices[dst].name : "<output>";
      ret.push_back(
        "repartition transfers " + graph.vertices[src].name + " -> " + dst_name +
        ": measured " + std::to_string(got) + " > bound " + std::to_string(bound));
    }
  }
  return ret;
}

pipeline_t build_pipeline(eingraph_t const& graph, int64_t p, int64_t n_machines, double alpha) {
  pipeline_t ret { graph, optimize_dag(graph, p), {}, {} };
  ret.exec = explode(ret.tg);
  ret.placement = place_all(ret.exec, n_machines, alpha);
  return ret;
}

run_report_t run_end_to_end(
  eingraph_t const& graph,
  map<int, tensor_t> const& inputs,
  run_options_t const& options,
  pipeline_t* out_pipeline)
{
  pipeline_t pipe = build_pipeline(graph, options.p, options.n_machines, options.alpha);

  map<int, tensor_relation_t> chunked;
  for(auto const& [vid, t]: inputs) {
    chunked.insert({ vid, chunk(t, pipe.tg.d[vid]) });
  }

  run_report_t report = execute(pipe.exec, pipe.placement, chunked, options.exec);

  if(options.check) {
    report.checked = true;
    auto expect = eval_reference(graph, inputs);
    report.verified = true;
    for(auto const& [vid, got]: report.outputs) {
      double err = max_rel_err(got, expect.at(vid));
      report.max_rel_error = std::max(report.max_rel_error, err);
      if(err > options.tolerance) {
        report.verified = false;
      }
    }
  }

  if(out_pipeline != nullptr) {
    *out_pipeline = std::move(pipe);
  }
  return report;
}

map<int, tensor_t> generate_inputs(eingraph_t const& graph, uint64_t seed) {
  bool integer_valued = uses_only_sum_mul(graph);
  map<int, tensor_t> ret;
  for(size_t vid = 0; vid != graph.vertices.size(); ++vid) {
    if(!graph.is_input(int(vid))) {
      continue;
    }
    std::mt19937_64 gen(seed * 7919 + vid);
    tensor_t t = tensor_t::zeros(graph.vertices[vid].bound);
    if(integer_valued) {
      std::uniform_int_distribution<int> dist(-4, 4);
      for(auto& v: t.values) { v = dist(gen); }
    } else {
      std::uniform_real_distribution<double> dist(-1.0, 1.0);
      for(auto& v: t.values) { v = dist(gen); }
    }
    ret.insert({ int(vid), std::move(t) });
  }
  return ret;
}
