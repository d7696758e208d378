#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "eindecomp/json_io.h"
#include "eindecomp/parse.h"

namespace {

void write_artifact(ordered_json const& j, string const& out_path) {
  if(out_path.empty()) {
    std::cout << j.dump(2) << "\n";
  } else {
    std::ofstream file(out_path);
    if(!file) {
      throw std::runtime_error("cannot open output file: " + out_path);
    }
    file << j.dump(2) << "\n";
  }
}

// "Z=4,4,4,4" -> (Z, [4,4,4,4])
pair<string, shape_t> parse_assignment(string const& s) {
  auto eq = s.find('=');
  if(eq == string::npos) {
    throw plan_error_t("bad -d assignment (want NAME=n1,n2,...): " + s);
  }
  string name = s.substr(0, eq);
  shape_t d;
  std::istringstream ss(s.substr(eq + 1));
  string tok;
  while(std::getline(ss, tok, ',')) {
    d.push_back(std::stoll(tok));
  }
  return { name, d };
}

struct cost_row_t {
  string name;
  cost_t join = 0;
  cost_t agg = 0;
};

int cmd_cost(string const& graph_path, vector<string> const& assignments, string const& out_path) {
  eingraph_t graph = parse_eingraph_file(graph_path);

  map<int, shape_t> d;
  for(auto const& a: assignments) {
    auto [name, vec] = parse_assignment(a);
    int vid = graph.find(name);
    if(vid == -1) {
      throw plan_error_t("no vertex named '" + name + "'");
    }
    d[vid] = vec;
  }

  ordered_json j;
  j["schema"] = "costreport/1";
  ordered_json rows = ordered_json::array();
  cost_t total = 0;

  for(size_t vid = 0; vid != graph.vertices.size(); ++vid) {
    if(graph.is_input(int(vid))) {
      continue;
    }
    auto const& v = graph.vertices[vid];
    auto iter = d.find(int(vid));
    if(iter == d.end()) {
      throw plan_error_t("no -d assignment for vertex '" + v.name + "'");
    }
    auto const& e = *v.expr;
    shape_t b_xy = graph.bxy(int(vid));
    labels_t lxy = e.xy_labels();
    if(iter->second.size() != lxy.size()) {
      throw plan_error_t(
        "assignment for '" + v.name + "' must have one entry per joint label (" +
        std::to_string(lxy.size()) + ")");
    }
    check_divides(iter->second, b_xy);
    // rejects co-partitioning violations
    join_cardinality(e.in_labels[0], e.is_binary() ? e.in_labels[1] : labels_t{}, iter->second);

    labels_t ly = e.is_binary() ? e.in_labels[1] : labels_t {};
    cost_t cj = cost_join(iter->second, e.in_labels[0], ly, b_xy);
    cost_t ca = cost_agg(iter->second, e.agg_labels(), e.out_labels, lxy, b_xy);
    total += cj + ca;

    ordered_json row;
    row["vertex"] = v.name;
    row["d"] = iter->second;
    row["cost_join"] = cj;
    row["cost_agg"] = ca;
    rows.push_back(std::move(row));
    std::cerr << v.name << ": d=" << write_with_ss(iter->second)
              << " join=" << cj << " agg=" << ca << "\n";
  }

  // repartitions between assigned vertices
  ordered_json reparts = ordered_json::array();
  for(size_t vid = 0; vid != graph.vertices.size(); ++vid) {
    if(graph.is_input(int(vid))) {
      continue;
    }
    auto const& v = graph.vertices[vid];
    auto const& e = *v.expr;
    for(size_t s = 0; s != v.inputs.size(); ++s) {
      int src = v.inputs[s];
      if(graph.is_input(src)) {
        continue;
      }
      auto const& se = *graph.vertices[src].expr;
      shape_t have = output_partition(d.at(src), se.out_labels, se.xy_labels());
      shape_t need = project(d.at(int(vid)), e.in_labels[s], e.xy_labels());
      cost_t cr = cost_repart(need, have, graph.vertices[src].bound);
      total += cr;
      if(cr != 0) {
        ordered_json row;
        row["producer"] = graph.vertices[src].name;
        row["consumer"] = v.name;
        row["cost_repart"] = cr;
        reparts.push_back(std::move(row));
        std::cerr << graph.vertices[src].name << " -> " << v.name
                  << ": repart=" << cr << "\n";
      }
    }
  }

  j["vertices"] = std::move(rows);
  j["repartitions"] = std::move(reparts);
  j["total"] = total;
  j["total_bytes"] = total * 8;
  std::cerr << "total: " << total << " floats (" << total * 8 << " bytes)\n";
  write_artifact(j, out_path);
  return 0;
}

int cmd_optimize(string const& graph_path, int64_t p, string const& out_path) {
  eingraph_t graph = parse_eingraph_file(graph_path);
  task_graph_t tg = optimize_dag(graph, p);
  for(size_t vid = 0; vid != graph.vertices.size(); ++vid) {
    auto const& v = graph.vertices[vid];
    if(graph.is_input(int(vid))) {
      std::cerr << v.name << ": stored " << write_with_ss(tg.d[vid]) << "\n";
    } else {
      std::cerr << v.name << ": d=" << write_with_ss(tg.d[vid])
                << " out=" << write_with_ss(tg.out_partition(int(vid))) << "\n";
    }
  }
  std::cerr << "predicted cost: " << tg.objective << " floats\n";
  cost_t cross = 0;
  for(auto const& e: repart_edges(tg)) {
    cross += e.cost;
  }
  if(cross != 0) {
    std::cerr << "repartition edges outside the optimized paths: " << cross << " floats\n";
  }
  write_artifact(taskgraph_to_json(tg), out_path);
  return 0;
}

int cmd_explode(string const& graph_path, int64_t p, string const& out_path) {
  eingraph_t graph = parse_eingraph_file(graph_path);
  exec_graph_t exec = explode(optimize_dag(graph, p));
  std::cerr << "exec graph: " << exec.vertices.size() << " vertices\n";
  write_artifact(execgraph_to_json(exec), out_path);
  return 0;
}

int cmd_place(
  string const& graph_path, int64_t p, int64_t n_machines, double alpha,
  string const& out_path)
{
  eingraph_t graph = parse_eingraph_file(graph_path);
  exec_graph_t exec = explode(optimize_dag(graph, p));
  placement_t placement = place_all(exec, n_machines, alpha);
  std::cerr << "mini-max site cost: " << placement_cost(placement, exec) << "\n";
  write_artifact(execgraph_to_json(exec, &placement), out_path);
  return 0;
}

int cmd_run(
  string const& graph_path, int64_t p, int64_t n_machines, double alpha,
  uint64_t seed, bool check, string const& precision, bool threaded, bool corrupt,
  string const& out_path)
{
  eingraph_t graph = parse_eingraph_file(graph_path);

  run_options_t options;
  options.p = p;
  options.n_machines = n_machines;
  options.alpha = alpha;
  options.check = check;
  options.exec.mode = threaded ? sched_mode_t::threaded : sched_mode_t::round_robin;
  options.exec.f32 = precision == "f32";
  options.exec.corrupt = corrupt;
  if(options.exec.f32) {
    options.tolerance = 1e-4;
  }

  map<int, tensor_t> inputs = generate_inputs(graph, seed);
  pipeline_t pipe;
  run_report_t report = run_end_to_end(graph, inputs, options, &pipe);

  // predicted vs measured, per einsum
  for(size_t vid = 0; vid != graph.vertices.size(); ++vid) {
    if(graph.is_input(int(vid))) {
      continue;
    }
    auto const& e = *graph.vertices[vid].expr;
    shape_t b_xy = graph.bxy(int(vid));
    labels_t ly = e.is_binary() ? e.in_labels[1] : labels_t {};
    cost_t cj = cost_join(pipe.tg.d[vid], e.in_labels[0], ly, b_xy);
    cost_t ca = cost_agg(
      pipe.tg.d[vid], e.agg_labels(), e.out_labels, e.xy_labels(), b_xy);
    int64_t mj = 0, ma = 0;
    if(auto it = report.audit.join_in.find(int(vid)); it != report.audit.join_in.end()) {
      mj = it->second;
    }
    if(auto it = report.audit.agg_in.find(int(vid)); it != report.audit.agg_in.end()) {
      ma = it->second;
    }
    std::cerr << graph.vertices[vid].name
              << ": predicted join+agg <= " << (cj + ca)
              << ", measured " << (mj + ma) << "\n";
  }
  auto violations = audit_violations(report, pipe.exec);
  for(auto const& v: violations) {
    std::cerr << "BOUND VIOLATION: " << v << "\n";
  }
  std::cerr << "transferred " << report.total_transferred << " floats ("
            << report.total_transferred * 8 << " bytes) over "
            << n_machines << " machines\n";

  write_artifact(report_to_json(report, alpha), out_path);

  if(check) {
    if(!report.verified) {
      std::cerr << "verification FAILED: max relative error "
                << report.max_rel_error << "\n";
      return 3;
    }
    std::cerr << "verified against the dense reference (max rel err "
              << report.max_rel_error << ")\n";
  }
  return 0;
}

int cmd_enumerate(
  string const& graph_path, int64_t p, vector<int64_t> const& count_args,
  string const& out_path)
{
  if(!count_args.empty()) {
    if(count_args.size() != 2) {
      throw plan_error_t("--count takes N D");
    }
    uint64_t c = count_partitionings(count_args[0], count_args[1]);
    std::cout << c << "\n";
    return 0;
  }

  eingraph_t graph = parse_eingraph_file(graph_path);
  ordered_json j;
  j["schema"] = "viable/1";
  ordered_json rows = ordered_json::array();
  for(size_t vid = 0; vid != graph.vertices.size(); ++vid) {
    if(graph.is_input(int(vid))) {
      continue;
    }
    auto const& v = graph.vertices[vid];
    auto const& e = *v.expr;
    shape_t b_xy = graph.bxy(int(vid));
    int64_t pv = fallback_p(e, p, b_xy);
    auto vs = viable(e, pv, b_xy);
    ordered_json row;
    row["vertex"] = v.name;
    row["p"] = pv;
    row["count"] = vs.vectors.size();
    ordered_json vecs = ordered_json::array();
    for(auto const& d: vs.vectors) {
      vecs.push_back(d);
    }
    row["vectors"] = std::move(vecs);
    rows.push_back(std::move(row));
    std::cerr << v.name << ": " << vs.vectors.size()
              << " viable vectors at p=" << pv << "\n";
  }
  j["vertices"] = std::move(rows);
  write_artifact(j, out_path);
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app { "tensor-relational decomposition of einsum graphs" };
  app.require_subcommand(1);

  string graph_path, out_path, precision = "f64";
  int64_t p = 4, n_machines = 2;
  double alpha = 0.01;
  uint64_t seed = 1;
  bool check = false, threaded = false, corrupt = false;
  vector<string> assignments;
  vector<int64_t> count_args;

  auto add_common = [&](CLI::App* cmd, bool needs_graph = true) {
    auto* opt = cmd->add_option("--graph", graph_path, "graph text file");
    if(needs_graph) {
      opt->required();
    }
    cmd->add_option("--out", out_path, "write the JSON artifact here (default stdout)");
  };

  auto* c_cost = app.add_subcommand("cost", "cost a manual partition-vector assignment");
  add_common(c_cost);
  c_cost->add_option("-d,--d", assignments, "per-vertex vector, NAME=n1,n2,...")->required();

  auto* c_opt = app.add_subcommand("optimize", "choose partition vectors for the graph");
  add_common(c_opt);
  c_opt->add_option("--procs", p, "kernel calls per einsum (power of two)");

  auto* c_explode = app.add_subcommand("explode", "emit the fine-grained dataflow graph");
  add_common(c_explode);
  c_explode->add_option("--procs", p, "kernel calls per einsum (power of two)");

  auto* c_place = app.add_subcommand("place", "assign dataflow vertices to machines");
  add_common(c_place);
  c_place->add_option("--procs", p, "kernel calls per einsum (power of two)");
  c_place->add_option("--machines", n_machines, "machine count");
  c_place->add_option("--alpha", alpha, "scalar-op discount in the site cost");

  auto* c_run = app.add_subcommand("run", "optimize, place and execute with random inputs");
  add_common(c_run);
  c_run->add_option("--procs", p, "kernel calls per einsum (power of two)");
  c_run->add_option("--machines", n_machines, "machine count");
  c_run->add_option("--alpha", alpha, "scalar-op discount in the site cost");
  c_run->add_option("--seed", seed, "input generator seed");
  c_run->add_option("--precision", precision, "f32 or f64 kernels")
       ->check(CLI::IsMember({"f32", "f64"}));
  c_run->add_flag("--check", check, "verify against the dense reference");
  c_run->add_flag("--threaded", threaded, "concurrent machine loops");
  c_run->add_flag("--corrupt-kernel", corrupt, "test hook: damage one kernel output")
       ->group("");  // hidden

  auto* c_enum = app.add_subcommand("enumerate", "list viable partition vectors");
  add_common(c_enum, false);
  c_enum->add_option("--procs", p, "kernel calls per einsum (power of two)");
  c_enum->add_option("--count", count_args, "just evaluate the partitioning count for N D")
        ->expected(2);

  try {
    app.parse(argc, argv);
  } catch(CLI::ParseError const& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if(c_cost->parsed()) {
      return cmd_cost(graph_path, assignments, out_path);
    }
    if(c_opt->parsed()) {
      return cmd_optimize(graph_path, p, out_path);
    }
    if(c_explode->parsed()) {
      return cmd_explode(graph_path, p, out_path);
    }
    if(c_place->parsed()) {
      return cmd_place(graph_path, p, n_machines, alpha, out_path);
    }
    if(c_run->parsed()) {
      return cmd_run(
        graph_path, p, n_machines, alpha, seed, check, precision,
        threaded, corrupt, out_path);
    }
    if(c_enum->parsed()) {
      if(count_args.empty() && graph_path.empty()) {
        std::cerr << "enumerate needs --graph or --count\n";
        return 1;
      }
      return cmd_enumerate(graph_path, p, count_args, out_path);
    }
  } catch(parse_error_t const& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch(plan_error_t const& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch(std::exception const& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
