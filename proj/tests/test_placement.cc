#include <doctest.h>

#include <random>

#include "eindecomp/parse.h"
#include "eindecomp/placement.h"

namespace {

eingraph_t matmul_graph() {
  return parse_eingraph(
    "input X:[8,8]\ninput Y:[8,8]\n"
    "Z[i,k] = sum[j] mul(X[i,j], Y[j,k])\n"
    "output Z\n");
}

exec_graph_t matmul_exec(shape_t const& d) {
  auto g = matmul_graph();
  task_graph_t tg { g, vector<shape_t>(g.vertices.size()), {}, 0 };
  tg.p_used.assign(g.vertices.size(), 0);
  int z = g.find("Z");
  tg.d[z] = d;
  tg.d[g.find("X")] = tg.required_input_partition(z, 0);
  tg.d[g.find("Y")] = tg.required_input_partition(z, 1);
  return explode(tg);
}

// independent re-evaluation of the site-cost formula, summing in a
// shuffled vertex order
double placement_cost_alt(placement_t const& p, exec_graph_t const& exec, uint64_t seed) {
  vector<int> order;
  for(auto const& v: exec.vertices) {
    order.push_back(v.id);
  }
  std::shuffle(order.begin(), order.end(), std::mt19937_64(seed));

  double worst = 0.0;
  for(int l = 0; l != int(p.n_machines); ++l) {
    double site = 0.0;
    for(int vid: order) {
      if(p.machine_of[vid] != l) {
        continue;
      }
      auto const& v = exec.vertices[vid];
      site += p.alpha * double(v.fp);
      for(int other: order) {
        if(exec.edge(vid, other) && p.placed(other) && p.machine_of[other] != l) {
          site += double(v.sz);
        }
        if(exec.edge(other, vid) && p.placed(other) && p.machine_of[other] != l) {
          site += double(exec.vertices[other].sz);
        }
      }
    }
    worst = std::max(worst, site);
  }
  return worst;
}

} // namespace

TEST_CASE("placement_cost") {
  auto exec = matmul_exec({2,2,2,4});

  SUBCASE("everything on one machine costs alpha times total fp") {
    placement_t p { 4, 0.5, vector<int>(exec.vertices.size(), 0) };
    int64_t total_fp = 0;
    for(auto const& v: exec.vertices) {
      total_fp += v.fp;
    }
    CHECK(placement_cost(p, exec) == doctest::Approx(0.5 * double(total_fp)));
  }

  SUBCASE("one crossing edge charges both sites at alpha zero") {
    // two vertices u -> v on different machines
    exec_graph_t tiny;
    tiny.tg = exec.tg;
    exec_vertex_t u { 0, exec_kind_t::input_chunk, 0, 0, -1, -1, {0}, {4}, 0, 4, {} };
    exec_vertex_t v { 1, exec_kind_t::refinement, 2, 2, -1, -1, {0}, {4}, 4, 4, {0} };
    tiny.vertices = { u, v };
    tiny.outs = { {1}, {} };
    placement_t p { 2, 0.0, { 0, 1 } };
    CHECK(placement_cost(p, tiny) == doctest::Approx(4.0));
  }

  SUBCASE("unplaced neighbors contribute nothing") {
    placement_t p { 4, 0.0, vector<int>(exec.vertices.size(), -1) };
    p.machine_of[exec.joins_of.at(2)[0]] = 1;
    CHECK(placement_cost(p, exec) == doctest::Approx(0.0));
  }

  SUBCASE("independent re-evaluation agrees after round-robin") {
    placement_t p { 4, 0.01, {} };
    p.machine_of.resize(exec.vertices.size());
    for(auto const& v: exec.vertices) {
      p.machine_of[v.id] = int(v.id % 4);
    }
    double a = placement_cost(p, exec);
    CHECK(a == doctest::Approx(placement_cost_alt(p, exec, 1)));
    CHECK(a == doctest::Approx(placement_cost_alt(p, exec, 2)));
  }
}

TEST_CASE("enumerate_placements") {
  SUBCASE("the L=4, 8-join table") {
    auto got = enumerate_placements(4, 8);
    vector<vector<int>> expect = {
      {0,0,0,0,0,0,0,0},
      {1,1,1,1,1,1,1,1},
      {2,2,2,2,2,2,2,2},
      {3,3,3,3,3,3,3,3},
      {0,1,0,1,0,1,0,1},
      {2,3,2,3,2,3,2,3},
      {0,1,2,3,0,1,2,3},
    };
    CHECK(got == expect);
  }

  SUBCASE("L=1 places everything on machine zero") {
    CHECK(enumerate_placements(1, 5) == vector<vector<int>>{ {0,0,0,0,0} });
  }

  SUBCASE("widths beyond the join count are skipped") {
    CHECK(enumerate_placements(2, 1) == vector<vector<int>>{ {0}, {1} });
  }

  SUBCASE("at most 2L-1 vectors") {
    for(int64_t l: {1, 2, 4, 8, 16}) {
      CHECK(int64_t(enumerate_placements(l, 64).size()) <= 2 * l - 1);
    }
  }
}

TEST_CASE("do_assign") {
  auto exec = matmul_exec({2,2,2,4});
  int z = exec.tg.graph.find("Z");

  SUBCASE("with no refinements the first minimal vector wins") {
    // all-symmetric empty placement: every single-machine vector ties,
    // width-2 round robins tie lower; determinism means a fixed result
    placement_t p { 2, 0.0, vector<int>(exec.vertices.size(), -1) };
    auto joins = exec.joins_of.at(z);
    placement_t q = do_assign(p, exec, joins, {});
    placement_t q2 = do_assign(p, exec, joins, {});
    for(int jid: joins) {
      CHECK(q.machine_of[jid] == q2.machine_of[jid]);
      CHECK(q.machine_of[jid] >= 0);
    }
  }

  SUBCASE("a chained-matmul join group beats forcing it onto one machine") {
    // producer [2,2,2,4] feeding a consumer wanting [4,1]: the classic
    // two-group wiring
    auto g2g = parse_eingraph(
      "input X:[8,8]\ninput Y:[8,8]\ninput W:[8,8]\n"
      "Z[i,k] = sum[j] mul(X[i,j], Y[j,k])\n"
      "Z2[i,k] = sum[j] mul(Z[i,j], W[j,k])\n"
      "output Z2\n");
    task_graph_t tg { g2g, vector<shape_t>(g2g.vertices.size()), {}, 0 };
    tg.p_used.assign(g2g.vertices.size(), 0);
    int zv = g2g.find("Z"), z2v = g2g.find("Z2");
    tg.d[zv] = {2,2,2,4};
    tg.d[z2v] = {4,1,1,4};
    tg.d[g2g.find("X")] = tg.required_input_partition(zv, 0);
    tg.d[g2g.find("Y")] = tg.required_input_partition(zv, 1);
    tg.d[g2g.find("W")] = tg.required_input_partition(z2v, 1);
    auto chained = explode(tg);

    // inputs round-robin, then the producer einsum
    placement_t p { 2, 0.01, vector<int>(chained.vertices.size(), -1) };
    for(auto const& [vid, chunk_ids]: chained.input_chunks_of) {
      int64_t at = 0;
      for(int cid: chunk_ids) {
        p.machine_of[cid] = int(at++ % 2);
      }
    }
    p = handle_new_einsum(p, chained, chained.joins_of.at(zv),
                          chained.refinements_of.at(zv));

    // the consumer's first join group, greedy vs all-on-machine-zero
    auto groups = compute_join_groups(
      chained, chained.joins_of.at(z2v), chained.refinements_of.at(z2v));
    auto const& [g1, g2] = groups.groups[0];
    placement_t greedy = do_assign(p, chained, g1, g2);
    placement_t forced = p;
    for(int id: g1) { forced.machine_of[id] = 0; }
    for(int id: g2) { forced.machine_of[id] = 0; }
    CHECK(placement_cost(greedy, chained)
          <= placement_cost(forced, chained) + 1e-9);
  }

  SUBCASE("uniform joins spread round-robin under alpha > 0") {
    // 8 joins, L=4, no refinements: the width-4 vector balances fp
    auto exec8 = matmul_exec({2,1,1,4});
    auto joins = exec8.joins_of.at(exec8.tg.graph.find("Z"));
    REQUIRE(joins.size() == 8);
    placement_t p { 4, 1.0, vector<int>(exec8.vertices.size(), -1) };
    placement_t q = do_assign(p, exec8, joins, {});
    set<int> used;
    for(int jid: joins) {
      used.insert(q.machine_of[jid]);
    }
    CHECK(used.size() == 4);
  }
}

TEST_CASE("place_all") {
  SUBCASE("a four-chunk input goes round-robin over four machines") {
    auto exec = matmul_exec({4,1,1,1});  // X stored [4,1]: 4 chunks
    placement_t p = place_all(exec, 4, 0.01);
    auto const& chunks = exec.input_chunks_of.at(exec.tg.graph.find("X"));
    REQUIRE(chunks.size() == 4);
    for(size_t i = 0; i != chunks.size(); ++i) {
      CHECK(p.machine_of[chunks[i]] == int(i));
    }
  }

  SUBCASE("L=1 puts everything on machine zero") {
    auto exec = matmul_exec({2,2,2,4});
    placement_t p = place_all(exec, 1, 0.01);
    for(auto const& v: exec.vertices) {
      CHECK(p.machine_of[v.id] == 0);
    }
    int64_t total_fp = 0;
    for(auto const& v: exec.vertices) {
      total_fp += v.fp;
    }
    CHECK(placement_cost(p, exec) == doctest::Approx(0.01 * double(total_fp)));
  }

  SUBCASE("every vertex is placed exactly once") {
    auto exec = matmul_exec({2,2,2,4});
    placement_t p = place_all(exec, 3, 0.01);  // non-power-of-two machines
    for(auto const& v: exec.vertices) {
      CHECK(p.machine_of[v.id] >= 0);
      CHECK(p.machine_of[v.id] < 3);
    }
  }
}
