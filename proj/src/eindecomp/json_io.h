#pragma once

#include <json.hpp>

#include "runtime.h"

// JSON artifacts for the CLI. Schemas are versioned with a "schema"
// field and keys keep insertion order for diff-ability.
using ordered_json = nlohmann::ordered_json;

ordered_json einsum_to_json(einsum_expr_t const& e);
einsum_expr_t einsum_from_json(ordered_json const& j);

ordered_json taskgraph_to_json(task_graph_t const& tg);
task_graph_t taskgraph_from_json(ordered_json const& j);

// When a placement is given, each vertex carries its machine.
ordered_json execgraph_to_json(exec_graph_t const& exec, placement_t const* placement = nullptr);

ordered_json report_to_json(run_report_t const& report, double alpha);
