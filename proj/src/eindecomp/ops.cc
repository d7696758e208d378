#include "ops.h"

#include <cmath>

double apply_join(join_op_t op, double x, double y) {
  switch(op) {
    case join_op_t::mul:     return x * y;
    case join_op_t::add:     return x + y;
    case join_op_t::sub:     return x - y;
    case join_op_t::div:
      if(y == 0.0) {
        throw eval_error_t("division by zero");
      }
      return x / y;
    case join_op_t::sqdiff:  return (x - y) * (x - y);
    case join_op_t::absdiff: return std::abs(x - y);
  }
  throw std::runtime_error("apply_join: unreachable");
}

double apply_unary(unary_op_t const& op, double x) {
  switch(op.kind) {
    case unary_op_t::kind_t::relu:     return x > 0.0 ? x : 0.0;
    case unary_op_t::kind_t::exp:      return std::exp(x);
    case unary_op_t::kind_t::neg:      return -x;
    case unary_op_t::kind_t::scale:    return op.scale_c * x;
    case unary_op_t::kind_t::identity: return x;
  }
  throw std::runtime_error("apply_unary: unreachable");
}

double apply_agg(agg_op_t op, double x, double y) {
  switch(op) {
    case agg_op_t::sum: return x + y;
    case agg_op_t::max: return std::max(x, y);
  }
  throw std::runtime_error("apply_agg: unreachable");
}

string join_op_name(join_op_t op) {
  switch(op) {
    case join_op_t::mul:     return "mul";
    case join_op_t::add:     return "add";
    case join_op_t::sub:     return "sub";
    case join_op_t::div:     return "div";
    case join_op_t::sqdiff:  return "sqdiff";
    case join_op_t::absdiff: return "absdiff";
  }
  throw std::runtime_error("join_op_name: unreachable");
}

string agg_op_name(agg_op_t op) {
  return op == agg_op_t::sum ? "sum" : "max";
}

string unary_op_name(unary_op_t const& op) {
  switch(op.kind) {
    case unary_op_t::kind_t::relu:     return "relu";
    case unary_op_t::kind_t::exp:      return "exp";
    case unary_op_t::kind_t::neg:      return "neg";
    case unary_op_t::kind_t::identity: return "identity";
    case unary_op_t::kind_t::scale: {
      std::ostringstream ss;
      ss << "scale(" << op.scale_c << ")";
      return ss.str();
    }
  }
  throw std::runtime_error("unary_op_name: unreachable");
}

optional<join_op_t> join_op_from_name(string const& name) {
  if(name == "mul")     { return join_op_t::mul; }
  if(name == "add")     { return join_op_t::add; }
  if(name == "sub")     { return join_op_t::sub; }
  if(name == "div")     { return join_op_t::div; }
  if(name == "sqdiff")  { return join_op_t::sqdiff; }
  if(name == "absdiff") { return join_op_t::absdiff; }
  return std::nullopt;
}

optional<agg_op_t> agg_op_from_name(string const& name) {
  if(name == "sum") { return agg_op_t::sum; }
  if(name == "max") { return agg_op_t::max; }
  return std::nullopt;
}

optional<unary_op_t> unary_op_from_name(string const& name) {
  if(name == "relu")     { return unary_op_t::relu(); }
  if(name == "exp")      { return unary_op_t::exp(); }
  if(name == "neg")      { return unary_op_t::neg(); }
  if(name == "identity") { return unary_op_t::identity(); }
  if(name.rfind("scale(", 0) == 0 && name.back() == ')') {
    string inner = name.substr(6, name.size() - 7);
    try {
      size_t used = 0;
      double c = std::stod(inner, &used);
      if(used == inner.size()) {
        return unary_op_t::scale(c);
      }
    } catch(std::exception const&) {}
  }
  return std::nullopt;
}

bool operator==(unary_op_t const& lhs, unary_op_t const& rhs) {
  if(lhs.kind != rhs.kind) {
    return false;
  }
  if(lhs.kind == unary_op_t::kind_t::scale) {
    return lhs.scale_c == rhs.scale_c;
  }
  return true;
}
