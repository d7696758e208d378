#include "placement.h"

namespace {

// floats newly crossing machine boundaries if vid sits at l
int64_t transfer_delta(placement_t const& p, exec_graph_t const& exec, int vid, int l) {
  int64_t ret = 0;
  for(int dep: exec.vertices[vid].deps) {
    if(p.placed(dep) && p.machine_of[dep] != l) {
      ret += exec.vertices[dep].sz;
    }
  }
  for(int out: exec.outs[vid]) {
    if(p.placed(out) && p.machine_of[out] != l) {
      ret += exec.vertices[vid].sz;
    }
  }
  return ret;
}

// The cheapest machine for one refinement: minimize Cost, break ties by
// the transfer volume the choice introduces, then by machine id. The
// transfer tie-break keeps pass-through refinements next to their data
// when the mini-max objective cannot tell the sites apart.
int best_site(placement_t& p, exec_graph_t const& exec, int vid) {
  int best_l = 0;
  double best_cost = 0.0;
  int64_t best_delta = 0;
  for(int l = 0; l != int(p.n_machines); ++l) {
    p.machine_of[vid] = l;
    double c = placement_cost(p, exec);
    int64_t delta = transfer_delta(p, exec, vid, l);
    if(l == 0 || c < best_cost || (c == best_cost && delta < best_delta)) {
      best_l = l;
      best_cost = c;
      best_delta = delta;
    }
  }
  return best_l;
}

} // namespace

double placement_cost(placement_t const& p, exec_graph_t const& exec) {
  vector<double> site(p.n_machines, 0.0);
  for(auto const& v: exec.vertices) {
    int l = p.machine_of[v.id];
    if(l < 0) {
      continue;
    }
    site[l] += p.alpha * double(v.fp);
    for(int out: exec.outs[v.id]) {
      int lo = p.machine_of[out];
      if(lo >= 0 && lo != l) {
        site[l] += double(v.sz);
      }
    }
    for(int dep: exec.vertices[v.id].deps) {
      int ld = p.machine_of[dep];
      if(ld >= 0 && ld != l) {
        site[l] += double(exec.vertices[dep].sz);
      }
    }
  }
  double ret = 0.0;
  for(double s: site) {
    ret = std::max(ret, s);
  }
  return ret;
}

vector<vector<int>> enumerate_placements(int64_t n_machines, int64_t num_joins) {
  vector<vector<int>> ret;
  for(int64_t width = 1; width <= n_machines; width *= 2) {
    if(width > num_joins) {
      break;
    }
    for(int64_t i = 0; i + width <= n_machines; i += width) {
      vector<int> t(size_t(num_joins), 0);
      int64_t cur = i;
      for(int64_t j = 0; j != num_joins; ++j) {
        t[size_t(j)] = int(cur++);
        if(cur == i + width) {
          cur = i;
        }
      }
      ret.push_back(std::move(t));
    }
  }
  return ret;
}

placement_t do_assign(
  placement_t p, exec_graph_t const& exec,
  vector<int> const& g1, vector<int> const& g2)
{
  optional<placement_t> best;
  double best_cost = 0.0;

  for(auto const& assignment: enumerate_placements(p.n_machines, int64_t(g1.size()))) {
    placement_t cand = p;
    for(size_t j = 0; j != g1.size(); ++j) {
      cand.machine_of[g1[j]] = assignment[j];
    }
    for(int rid: g2) {
      cand.machine_of[rid] = best_site(cand, exec, rid);
    }
    double c = placement_cost(cand, exec);
    if(!best || c < best_cost) {
      best = std::move(cand);
      best_cost = c;
    }
  }

  if(!best) {
    return p;  // nothing to place
  }
  return *best;
}

placement_t handle_new_einsum(
  placement_t p, exec_graph_t const& exec,
  vector<int> const& v1, vector<int> const& v2)
{
  auto groups = compute_join_groups(exec, v1, v2);
  for(auto const& [g1, g2]: groups.groups) {
    p = do_assign(std::move(p), exec, g1, g2);
  }
  return p;
}

placement_t place_all(exec_graph_t const& exec, int64_t n_machines, double alpha) {
  if(n_machines < 1) {
    throw plan_error_t("place_all: need at least one machine");
  }
  placement_t p { n_machines, alpha, vector<int>(exec.vertices.size(), -1) };

  // input chunks round-robin, lexicographic key order per relation
  for(auto const& [vid, chunk_ids]: exec.input_chunks_of) {
    int64_t at = 0;
    for(int cid: chunk_ids) {
      p.machine_of[cid] = int(at % n_machines);
      at++;
    }
  }

  for(int vid: topo_order(exec.tg.graph)) {
    if(exec.tg.graph.is_input(vid)) {
      continue;
    }

    // repartition layers over stored inputs come first; each vertex
    // lands where the cost grows least, ties to the lowest machine
    auto pre = exec.input_refines_of.find(vid);
    if(pre != exec.input_refines_of.end()) {
      for(int rid: pre->second) {
        p.machine_of[rid] = best_site(p, exec, rid);
      }
    }

    vector<int> v1;
    if(auto iter = exec.joins_of.find(vid); iter != exec.joins_of.end()) {
      v1 = iter->second;
    }
    vector<int> v2;
    if(auto iter = exec.refinements_of.find(vid); iter != exec.refinements_of.end()) {
      v2 = iter->second;
    }
    p = handle_new_einsum(std::move(p), exec, v1, v2);
  }

  for(auto const& v: exec.vertices) {
    if(!p.placed(v.id)) {
      throw plan_error_t("place_all: vertex left unplaced");
    }
  }
  return p;
}
