#include <doctest.h>

#include "eindecomp/cost.h"

namespace {

einsum_expr_t matmul_expr() {
  return einsum_expr_t::binary(
    {"i","k"}, {"i","j"}, {"j","k"}, join_op_t::mul, agg_op_t::sum);
}

} // namespace

TEST_CASE("cost_join") {
  einsum_expr_t e = matmul_expr();
  labels_t lx = e.in_labels[0], ly = e.in_labels[1];

  // 8x8, d=[4,1,1,4]: 16 kernel calls each receiving 16+16 floats
  CHECK(cost_join({4,1,1,4}, lx, ly, {8,8,8,8}) == 512);

  // 8000x8000, d=[4,4,4,4]: 64 calls x 8M
  CHECK(cost_join({4,4,4,4}, lx, ly, {8000,8000,8000,8000}) == 512000000);

  // all ones: the two whole tensors
  CHECK(cost_join({1,1,1,1}, lx, ly, {8,8,8,8}) == 128);
}

TEST_CASE("cost_agg") {
  einsum_expr_t e = matmul_expr();
  labels_t lagg = {"j"}, lz = e.out_labels, lxy = e.xy_labels();

  // no aggregation when the joined dimension is unpartitioned
  CHECK(cost_agg({4,1,1,4}, lagg, lz, lxy, {8,8,8,8}) == 0);

  // 16/2 * (2-1) * 8 = 64
  CHECK(cost_agg({2,2,2,4}, lagg, lz, lxy, {8,8,8,8}) == 64);

  // completes the 704M total
  CHECK(cost_agg({4,4,4,4}, lagg, lz, lxy, {8000,8000,8000,8000}) == 192000000);
}

TEST_CASE("cost_repart") {
  // producer output [2,4] feeding a consumer that wants [4,1]
  CHECK(cost_repart({4,1}, {2,4}, {8,8}) == 320);

  // identical partitions move nothing
  CHECK(cost_repart({4,2}, {4,2}, {8,8}) == 0);

  // [1,1] -> [2,2] over a 4x4: only the extraction term fires
  CHECK(cost_repart({2,2}, {1,1}, {4,4}) == 64);
}

TEST_CASE("einsum_cost regressions") {
  einsum_expr_t e = matmul_expr();
  shape_t b = {8000,8000,8000,8000};
  CHECK(einsum_cost(e, {4,4,4,4}, b) == 704000000);
  CHECK(einsum_cost(e, {1,64,64,1}, b) == 4160000000);
  CHECK(einsum_cost(e, {1,1,1,1}, {8,8,8,8}) == 128);
}

TEST_CASE("cost_repart is zero exactly on equal partitions") {
  shape_t b = {16,8};
  vector<shape_t> parts;
  for(int64_t a: {1,2,4,8,16}) {
    for(int64_t c: {1,2,4,8}) {
      parts.push_back({a,c});
    }
  }
  for(auto const& dp: parts) {
    for(auto const& dc: parts) {
      cost_t c = cost_repart(dc, dp, b);
      if(dp == dc) {
        CHECK(c == 0);
      } else {
        CHECK(c > 0);
      }
    }
  }
}

TEST_CASE("costs are symmetric in swapping the operands") {
  einsum_expr_t e = matmul_expr();
  einsum_expr_t swapped = einsum_expr_t::binary(
    {"i","k"}, {"j","k"}, {"i","j"}, join_op_t::mul, agg_op_t::sum);

  shape_t b = {8,8,8,8};
  for(shape_t const& d: vector<shape_t>{
        {4,1,1,4}, {2,1,1,8}, {2,4,4,2}, {2,2,2,4}, {1,1,1,1} })
  {
    shape_t d_swapped = { d[2], d[3], d[0], d[1] };
    shape_t b_swapped = { b[2], b[3], b[0], b[1] };
    CHECK(einsum_cost(e, d, b) == einsum_cost(swapped, d_swapped, b_swapped));
  }
}

TEST_CASE("unary cost ships one input per kernel call") {
  einsum_expr_t e = einsum_expr_t::unary(
    {"i"}, {"i","j"}, unary_op_t::identity(), agg_op_t::sum);
  // d=[2,4] over [8,8]: 8 calls of 4x2 chunks
  CHECK(cost_join({2,4}, e.in_labels[0], {}, {8,8}) == 8 * 8);
  // aggregation: 8/4 groups, 3 transfers of 4 floats
  CHECK(cost_agg({2,4}, {"j"}, {"i"}, e.xy_labels(), {8,8}) == 2 * 3 * 4);
}
