#include <doctest.h>

#include "eindecomp/partition.h"

namespace {

einsum_expr_t matmul_expr() {
  return einsum_expr_t::binary(
    {"i","k"}, {"i","j"}, {"j","k"}, join_op_t::mul, agg_op_t::sum);
}

// Brute-force reference: every power-of-two vector up to p entrywise,
// filtered on co-partitioning, divisibility and cardinality.
vector<shape_t> viable_brute(einsum_expr_t const& e, int64_t p, shape_t const& b_xy) {
  labels_t lxy = e.xy_labels();
  vector<shape_t> ret;
  shape_t d(lxy.size(), 1);
  auto rec = [&](auto&& self, size_t at) -> void {
    if(at == lxy.size()) {
      for(size_t i = 0; i != lxy.size(); ++i) {
        for(size_t j = i + 1; j != lxy.size(); ++j) {
          if(lxy[i] == lxy[j] && d[i] != d[j]) {
            return;
          }
        }
        if(b_xy[i] % d[i] != 0) {
          return;
        }
      }
      if(join_cardinality(
           e.in_labels[0],
           e.is_binary() ? e.in_labels[1] : labels_t{},
           d) == p)
      {
        ret.push_back(d);
      }
      return;
    }
    for(int64_t v = 1; v <= p; v *= 2) {
      d[at] = v;
      self(self, at + 1);
    }
  };
  rec(rec, 0);
  std::sort(ret.begin(), ret.end());
  ret.erase(std::unique(ret.begin(), ret.end()), ret.end());
  return ret;
}

} // namespace

TEST_CASE("join_cardinality") {
  einsum_expr_t e = matmul_expr();
  CHECK(join_cardinality(e.in_labels[0], e.in_labels[1], {16,2,2,4}) == 128);

  for(shape_t const& d: vector<shape_t>{
        {4,1,1,4}, {2,1,1,8}, {2,4,4,2}, {2,2,2,4} })
  {
    CHECK(join_cardinality(e.in_labels[0], e.in_labels[1], d) == 16);
  }

  CHECK(join_cardinality(e.in_labels[0], e.in_labels[1], {1,1,1,1}) == 1);

  // violating co-partitioning throws
  CHECK_THROWS_AS(
    join_cardinality(e.in_labels[0], e.in_labels[1], {4,2,1,4}), plan_error_t);
}

TEST_CASE("count_partitionings") {
  CHECK(count_partitionings(10, 6) == 3003);
  CHECK(count_partitionings(0, 1) == 1);
  CHECK(count_partitionings(0, 7) == 1);
  CHECK(count_partitionings(3, 3) == 10);
  CHECK(count_partitionings(1, 2) == 2);
}

TEST_CASE("viable for the 8x8 matmul at p=8") {
  einsum_expr_t e = matmul_expr();
  shape_t b_xy = {8,8,8,8};
  auto vs = viable(e, 8, b_xy);
  CHECK(vs.vectors.size() == 10);
  CHECK(vs.vectors.size() == count_partitionings(3, 3));

  // d = [a,b,b,c] for every (a,b,c) splitting three doublings
  vector<shape_t> expect;
  for(auto [a,b,c]: vector<tuple<int,int,int>>{
        {8,1,1},{1,8,1},{1,1,8},{4,2,1},{4,1,2},
        {2,4,1},{1,4,2},{2,1,4},{1,2,4},{2,2,2} })
  {
    expect.push_back({a,b,b,c});
  }
  std::sort(expect.begin(), expect.end());
  CHECK(vs.vectors == expect);

  // the output projections cover all eight listed partitionings
  set<shape_t> outs;
  for(auto const& d: vs.vectors) {
    outs.insert(output_partition(d, e.out_labels, e.xy_labels()));
  }
  for(shape_t const& dz: vector<shape_t>{
        {2,4},{4,2},{8,1},{1,8},{2,2},{4,1},{1,4},{1,1} })
  {
    CHECK(outs.count(dz) == 1);
  }

  // every member hits the target cardinality
  for(auto const& d: vs.vectors) {
    CHECK(join_cardinality(e.in_labels[0], e.in_labels[1], d) == 8);
  }
}

TEST_CASE("viable p=1 is the all-ones vector") {
  einsum_expr_t e = matmul_expr();
  auto vs = viable(e, 1, {8,8,8,8});
  CHECK(vs.vectors == vector<shape_t>{ {1,1,1,1} });
}

TEST_CASE("viable requires a power of two") {
  CHECK_THROWS_AS(viable(matmul_expr(), 6, {8,8,8,8}), plan_error_t);
}

TEST_CASE("viable matches the brute-force enumeration") {
  shape_t big = {64,64,64,64};
  einsum_expr_t mm = matmul_expr();
  einsum_expr_t ew = einsum_expr_t::binary(
    {"i","j"}, {"i","j"}, {"i","j"}, join_op_t::add, std::nullopt);
  einsum_expr_t un = einsum_expr_t::unary(
    {"i"}, {"i","j"}, unary_op_t::identity(), agg_op_t::sum);

  for(int64_t p: {1, 2, 4, 8, 16}) {
    auto a = viable(mm, p, big).vectors;
    CHECK(a == viable_brute(mm, p, big));

    auto b = viable(ew, p, big).vectors;
    CHECK(b == viable_brute(ew, p, big));

    auto c = viable(un, p, {64,64}).vectors;
    CHECK(c == viable_brute(un, p, {64,64}));
  }

  // small bounds shrink the set
  auto small = viable(mm, 8, {2,2,2,2}).vectors;
  CHECK(small == viable_brute(mm, 8, {2,2,2,2}));
  CHECK(small.size() == 1);  // only [2,2,2,2]
}

TEST_CASE("the stars-and-bars count is met when bounds are divisible") {
  // synthetic expressions with D distinct labels, generous bounds
  for(int dcount = 2; dcount <= 5; ++dcount) {
    labels_t lx, lz;
    for(int i = 0; i != dcount; ++i) {
      lx.push_back("l" + std::to_string(i));
    }
    lz = lx;
    einsum_expr_t e = einsum_expr_t::binary(
      lz, lx, lx, join_op_t::add, std::nullopt);
    shape_t b_xy(2 * dcount, 1024);
    for(int64_t p: {2, 4, 8, 16}) {
      int n_balls = 0;
      while((int64_t(1) << n_balls) < p) { n_balls++; }
      CHECK(viable(e, p, b_xy).vectors.size()
            == count_partitionings(n_balls, dcount));
    }
  }
}

TEST_CASE("output_partition") {
  einsum_expr_t e = matmul_expr();
  CHECK(output_partition({2,2,2,4}, e.out_labels, e.xy_labels()) == shape_t{2,4});
  CHECK(output_partition({1,1,1,1}, e.out_labels, e.xy_labels()) == shape_t{1,1});

  // attention-style projection with repeated labels across operands
  labels_t lxy = {"h","s","s2","s2","h","d"};
  labels_t lz = {"s","h","d"};
  shape_t d = {2,4,1,1,2,1};
  CHECK(output_partition(d, lz, lxy) == project(d, lz, lxy));
  CHECK(output_partition(d, lz, lxy) == shape_t{4,2,1});
}

TEST_CASE("fallback_p") {
  einsum_expr_t e = matmul_expr();
  CHECK(fallback_p(e, 64, {2,2,2,2}) == 8);
  CHECK(fallback_p(e, 64, {1024,1024,1024,1024}) == 64);
  CHECK(fallback_p(e, 1, {8,8,8,8}) == 1);
}
