#include "parse.h"

#include <cctype>
#include <fstream>

namespace {

struct cursor_t {
  string const& text;
  int line;
  size_t pos;   // within the current line
  string buf;   // current line content

  [[noreturn]] void fail(string const& msg) const {
    throw parse_error_t(msg, line, int(pos) + 1);
  }

  void skip_ws() {
    while(pos < buf.size() && (buf[pos] == ' ' || buf[pos] == '\t')) {
      pos++;
    }
  }

  bool done() {
    skip_ws();
    return pos >= buf.size() || buf[pos] == '#';
  }

  char peek() {
    skip_ws();
    if(pos >= buf.size()) {
      fail("unexpected end of line");
    }
    return buf[pos];
  }

  void expect(char c) {
    if(peek() != c) {
      fail(string("expected '") + c + "'");
    }
    pos++;
  }

  bool accept(char c) {
    if(!done() && peek() == c) {
      pos++;
      return true;
    }
    return false;
  }

  string ident() {
    skip_ws();
    size_t start = pos;
    while(pos < buf.size() &&
          (std::isalnum(static_cast<unsigned char>(buf[pos])) ||
           buf[pos] == '_' || buf[pos] == '.'))
    {
      pos++;
    }
    if(pos == start) {
      fail("expected a name");
    }
    return buf.substr(start, pos - start);
  }

  int64_t integer() {
    skip_ws();
    size_t start = pos;
    while(pos < buf.size() && std::isdigit(static_cast<unsigned char>(buf[pos]))) {
      pos++;
    }
    if(pos == start) {
      fail("expected an integer");
    }
    return std::stoll(buf.substr(start, pos - start));
  }

  double number() {
    skip_ws();
    size_t start = pos;
    while(pos < buf.size() &&
          (std::isdigit(static_cast<unsigned char>(buf[pos])) ||
           buf[pos] == '.' || buf[pos] == '-' || buf[pos] == '+' ||
           buf[pos] == 'e' || buf[pos] == 'E'))
    {
      pos++;
    }
    if(pos == start) {
      fail("expected a number");
    }
    return std::stod(buf.substr(start, pos - start));
  }

  // [a,b,c] or []
  labels_t label_list() {
    expect('[');
    labels_t ret;
    if(!accept(']')) {
      ret.push_back(ident());
      while(accept(',')) {
        ret.push_back(ident());
      }
      expect(']');
    }
    return ret;
  }

  shape_t int_list() {
    expect('[');
    shape_t ret;
    if(!accept(']')) {
      ret.push_back(integer());
      while(accept(',')) {
        ret.push_back(integer());
      }
      expect(']');
    }
    return ret;
  }
};

struct ref_t {
  string name;
  labels_t labels;
};

ref_t tensor_ref(cursor_t& cur) {
  string name = cur.ident();
  labels_t ls = cur.label_list();
  return ref_t { name, ls };
}

} // namespace

eingraph_t parse_eingraph(string const& text) {
  graph_builder_t builder;
  vector<string> output_names;
  vector<int> output_lines;

  std::istringstream stream(text);
  string raw;
  int line_no = 0;
  while(std::getline(stream, raw)) {
    line_no++;
    cursor_t cur { text, line_no, 0, raw };
    if(cur.done()) {
      continue;
    }

    size_t word_at = cur.pos;
    string word = cur.ident();

    try {
      if(word == "input") {
        string name = cur.ident();
        cur.expect(':');
        shape_t bound = cur.int_list();
        for(int64_t b: bound) {
          if(b < 1) {
            cur.fail("bound entries must be positive");
          }
        }
        builder.add_input(name, bound);
      } else if(word == "output") {
        output_names.push_back(cur.ident());
        output_lines.push_back(line_no);
      } else {
        // an einsum definition; 'word' is the output tensor name
        string name = word;
        labels_t out_labels = cur.label_list();
        cur.expect('=');

        optional<agg_op_t> agg;
        labels_t agg_labels;
        {
          size_t save = cur.pos;
          string tok = cur.ident();
          auto maybe = agg_op_from_name(tok);
          if(maybe && !cur.done() && cur.peek() == '[') {
            agg = *maybe;
            agg_labels = cur.label_list();
          } else {
            cur.pos = save;
          }
        }

        size_t op_at = cur.pos;
        string op_name = cur.ident();

        einsum_expr_t expr;
        vector<string> input_names;
        if(op_name == "map") {
          string uname = cur.ident();
          if(uname == "scale") {
            cur.expect('(');
            double c = cur.number();
            cur.expect(')');
            uname = "scale(" + write_with_ss(c) + ")";
          }
          auto uop = unary_op_from_name(uname);
          if(!uop) {
            cur.pos = op_at;
            cur.fail("unknown unary op '" + uname + "'");
          }
          cur.expect('(');
          ref_t a = tensor_ref(cur);
          cur.expect(')');
          expr = einsum_expr_t::unary(out_labels, a.labels, *uop, agg);
          input_names = { a.name };
        } else {
          auto jop = join_op_from_name(op_name);
          if(!jop) {
            cur.pos = op_at;
            cur.fail("unknown join op '" + op_name + "'");
          }
          cur.expect('(');
          ref_t a = tensor_ref(cur);
          cur.expect(',');
          ref_t b = tensor_ref(cur);
          cur.expect(')');
          expr = einsum_expr_t::binary(out_labels, a.labels, b.labels, *jop, agg);
          input_names = { a.name, b.name };
        }

        // the declared agg labels must be exactly the derived ones
        {
          labels_t derived = expr.agg_labels();
          labels_t sorted_decl = agg_labels;
          labels_t sorted_deriv = derived;
          std::sort(sorted_decl.begin(), sorted_decl.end());
          std::sort(sorted_deriv.begin(), sorted_deriv.end());
          if(agg.has_value() && sorted_decl != sorted_deriv) {
            cur.pos = word_at;
            cur.fail(
              "aggregated labels " + write_with_ss(agg_labels) +
              " do not match labels absent from the output " + write_with_ss(derived));
          }
        }

        vector<int> inputs;
        for(auto const& inn: input_names) {
          int vid = builder.graph.find(inn);
          if(vid == -1) {
            cur.pos = word_at;
            cur.fail("undeclared input tensor '" + inn + "'");
          }
          inputs.push_back(vid);
        }

        builder.add_einsum(name, expr, inputs);
      }

      if(!cur.done()) {
        cur.fail("trailing characters");
      }
    } catch(plan_error_t const& e) {
      throw parse_error_t(e.what(), line_no, int(word_at) + 1);
    }
  }

  vector<int> output_ids;
  for(size_t i = 0; i != output_names.size(); ++i) {
    int vid = builder.graph.find(output_names[i]);
    if(vid == -1) {
      throw parse_error_t(
        "unknown output tensor '" + output_names[i] + "'", output_lines[i], 1);
    }
    output_ids.push_back(vid);
  }
  if(output_ids.empty()) {
    throw parse_error_t("graph declares no outputs", line_no, 1);
  }

  try {
    return builder.finish(output_ids);
  } catch(plan_error_t const& e) {
    throw parse_error_t(e.what(), line_no, 1);
  }
}

eingraph_t parse_eingraph_file(string const& path) {
  std::ifstream file(path);
  if(!file) {
    throw std::runtime_error("cannot open graph file: " + path);
  }
  std::ostringstream ss;
  ss << file.rdbuf();
  return parse_eingraph(ss.str());
}
