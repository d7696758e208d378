#pragma once

#include "setup.h"

// The closed operator sets. Join ops combine two scalars, unary ops map
// one, agg ops reduce and must be associative and commutative.

enum class join_op_t { mul, add, sub, div, sqdiff, absdiff };

enum class agg_op_t { sum, max };

struct unary_op_t {
  enum class kind_t { relu, exp, neg, scale, identity };
  kind_t kind;
  double scale_c = 0.0; // only for kind_t::scale

  static unary_op_t relu()     { return { kind_t::relu }; }
  static unary_op_t exp()      { return { kind_t::exp }; }
  static unary_op_t neg()      { return { kind_t::neg }; }
  static unary_op_t identity() { return { kind_t::identity }; }
  static unary_op_t scale(double c) { return { kind_t::scale, c }; }
};

// Throws eval_error_t on division by zero.
double apply_join(join_op_t op, double x, double y);
double apply_unary(unary_op_t const& op, double x);
double apply_agg(agg_op_t op, double x, double y);

string join_op_name(join_op_t op);
string agg_op_name(agg_op_t op);
string unary_op_name(unary_op_t const& op);

optional<join_op_t> join_op_from_name(string const& name);
optional<agg_op_t> agg_op_from_name(string const& name);
// Accepts "relu", "exp", "neg", "identity", "scale(<float>)".
optional<unary_op_t> unary_op_from_name(string const& name);

bool operator==(unary_op_t const& lhs, unary_op_t const& rhs);
