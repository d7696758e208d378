#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

using std::map;
using std::optional;
using std::pair;
using std::set;
using std::string;
using std::tuple;
using std::vector;

// Dimension extents, partition counts, chunk keys and costs all live in
// int64: the worked cost numbers reach into the billions.
using shape_t = vector<int64_t>;
using labels_t = vector<string>;

struct parse_error_t : std::runtime_error {
  parse_error_t(string const& msg, int line, int col)
    : std::runtime_error(
        "parse error at line " + std::to_string(line) + ", col " +
        std::to_string(col) + ": " + msg),
      line(line), col(col)
  {}
  int line;
  int col;
};

// A structurally invalid request of the planning layers (bad partition
// vector, partition mismatch, wrong optimizer for the graph shape, ...).
struct plan_error_t : std::runtime_error {
  explicit plan_error_t(string const& msg) : std::runtime_error(msg) {}
};

// A poisoned numeric value (division by zero) hit during evaluation.
struct eval_error_t : std::runtime_error {
  explicit eval_error_t(string const& msg) : std::runtime_error(msg) {}
};

template <typename T>
int64_t product(vector<T> const& xs) {
  int64_t ret = 1;
  for(auto const& x: xs) {
    ret *= int64_t(x);
  }
  return ret;
}

template <typename T>
string write_with_ss(T const& t) {
  std::ostringstream ss;
  ss << t;
  return ss.str();
}

template <typename T>
std::ostream& operator<<(std::ostream& out, vector<T> const& xs) {
  out << "[";
  for(size_t i = 0; i != xs.size(); ++i) {
    if(i > 0) { out << ","; }
    out << xs[i];
  }
  out << "]";
  return out;
}
